//! Writes a few model files for the `qsg` command line into a directory.
//!
//!     cargo run --example model_files -- /tmp/models
//!     cargo run --bin qsg -- check /tmp/models/flat_hermitian.json --predicates kahler

use std::path::PathBuf;

use qsg::cli::{GenEntry, ModelFile};
use qsg::fields::{ChartDomain, PolyExpr, SmoothTensorField, Tensor, Valence};
use qsg::generate::models::ModelKind;
use qsg::generate::Constraint;
use qsg::structures::{standard_j, standard_norden, MetricFlavor};

fn main() -> qsg::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "models".into()));
    std::fs::create_dir_all(&dir).map_err(|e| qsg::GeomError::Io(e.to_string()))?;
    let dim = 4;
    let domain = ChartDomain::cube(dim, 0.5)?;
    let flat = ModelFile::new(domain.clone())
        .with_metric(
            MetricFlavor::Hermitian,
            SmoothTensorField::constant(&Tensor::delta(dim, Valence::BILINEAR)),
        )
        .with_j(SmoothTensorField::constant(&standard_j(dim)))
        .with_gamma(SmoothTensorField::zeros(dim, Valence::VECTOR_2FORM));

    let tilted = flat.clone().with_gamma(SmoothTensorField::from_fn(dim, Valence::VECTOR_2FORM, |ix| {
        let c = if ix == [0, 0, 1] { 1.0 } else { 0.0 };
        PolyExpr::constant(c, dim)
    }));

    let x0 = PolyExpr::coordinate(0, dim);
    let curved = flat.clone().with_metric(
        MetricFlavor::Hermitian,
        SmoothTensorField::from_fn(dim, Valence::BILINEAR, |ix| {
            if ix[0] == ix[1] {
                PolyExpr::constant(2.0, dim).add(&x0.mul(&x0))
            } else {
                PolyExpr::zero(dim)
            }
        }),
    );

    let norden = ModelFile::new(domain.clone())
        .with_metric(MetricFlavor::Norden, SmoothTensorField::constant(&standard_norden(dim)))
        .with_j(SmoothTensorField::constant(&standard_j(dim)))
        .with_gamma(SmoothTensorField::zeros(dim, Valence::VECTOR_2FORM));

    let random = ModelFile::new(domain.clone()).with_genspec(GenEntry::new(ModelKind::RandomHermitian, 1));
    let mut closed = GenEntry::new(ModelKind::RandomNorden, 2);
    closed.constraints = vec![Constraint::DClosedJ];
    let recipe = ModelFile::new(domain).with_genspec(closed);

    for (name, f) in [
        ("flat_hermitian", &flat),
        ("tilted_hermitian", &tilted),
        ("curved_hermitian", &curved),
        ("flat_norden", &norden),
        ("random_hermitian", &random),
        ("closed_norden", &recipe),
    ] {
        let path = dir.join(format!("{name}.json"));
        f.write(&path)?;
        println!("{}  {}", f.hash(), path.display());
    }
    Ok(())
}
