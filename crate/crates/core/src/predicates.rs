//! Named structural conditions, each evaluated as the largest absolute
//! component of its defining tensor over a sample of points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calculus::{covariant_derivative, exterior_d2, levi_civita, torsion};
use crate::connections::KleinFlavor;
use crate::error::{GeomError, Result};
use crate::fields::{sample_points, Tensor, Valence};
use crate::model::{ChartModel, PointFrame};
use crate::residual::Residual;
use crate::structures::{self, MetricFlavor};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    AlmostComplex,
    Hermitian,
    Norden,
    QuasiStatistical,
    Statistical,
    #[serde(rename = "codazzi_J")]
    CodazziJ,
    TorsionCompatible,
    Integrable,
    #[serde(rename = "d_closed_J")]
    DClosedJ,
    Kahler,
    AntiKahler,
    QuasiKahlerNorden,
    ComplexConnection,
}

impl Predicate {
    pub const ALL: [Predicate; 13] = [
        Predicate::AlmostComplex,
        Predicate::Hermitian,
        Predicate::Norden,
        Predicate::QuasiStatistical,
        Predicate::Statistical,
        Predicate::CodazziJ,
        Predicate::TorsionCompatible,
        Predicate::Integrable,
        Predicate::DClosedJ,
        Predicate::Kahler,
        Predicate::AntiKahler,
        Predicate::QuasiKahlerNorden,
        Predicate::ComplexConnection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::AlmostComplex => "almost_complex",
            Predicate::Hermitian => "hermitian",
            Predicate::Norden => "norden",
            Predicate::QuasiStatistical => "quasi_statistical",
            Predicate::Statistical => "statistical",
            Predicate::CodazziJ => "codazzi_J",
            Predicate::TorsionCompatible => "torsion_compatible",
            Predicate::Integrable => "integrable",
            Predicate::DClosedJ => "d_closed_J",
            Predicate::Kahler => "kahler",
            Predicate::AntiKahler => "anti_kahler",
            Predicate::QuasiKahlerNorden => "quasi_kahler_norden",
            Predicate::ComplexConnection => "complex_connection",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        Predicate::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                GeomError::Unsupported(format!(
                    "unknown predicate `{s}`; expected one of {}",
                    Predicate::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub worst_indices: Vec<usize>,
    pub pass: bool,
    pub tolerance: f64,
    pub samples: usize,
    /// Residuals of the parts a compound predicate is made of.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
    /// Residuals reported alongside but not gating the verdict.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub context: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tolerance: DEFAULT_TOL,
            samples: crate::fields::sample::DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

fn require_flavor(frame: &PointFrame, want: MetricFlavor, p: Predicate) -> Result<()> {
    if frame.flavor == want {
        Ok(())
    } else {
        Err(GeomError::precondition(format!(
            "predicate {p} needs a {want:?} metric, the model has {:?}",
            frame.flavor
        )))
    }
}

fn connection_values(model: &ChartModel, x: &[f64]) -> Result<Tensor> {
    model.connection()?.christoffel(x)
}

/// `Σ_cyc h((∇_aΛ)b, c)` for the Levi-Civita connection of `h`.
pub fn quasi_kahler_norden_sum(frame: &PointFrame) -> Result<Tensor> {
    let h = frame.b()?;
    let j = frame.j()?;
    let lc = levi_civita(h, &frame.x)?;
    let nj = covariant_derivative(&lc, j)?;
    let hv = h.value();
    let d = hv.dim();
    let term = |a: usize, b: usize, c: usize| -> f64 { (0..d).map(|m| nj.at3(m, a, b) * hv.at2(m, c)).sum() };
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        term(a, b, c) + term(b, c, a) + term(c, a, b)
    }))
}

/// Named tensors whose vanishing at `frame` is the predicate.
fn defining_tensors(p: Predicate, model: &ChartModel, frame: &PointFrame) -> Result<Vec<(&'static str, Tensor)>> {
    let x = &frame.x;
    Ok(match p {
        Predicate::AlmostComplex => {
            let jv = frame.j()?.value();
            let sq = crate::calculus::matmul(&jv, &jv, Valence::ENDO).add(&Tensor::identity(jv.dim()));
            vec![("square", sq)]
        }
        Predicate::Hermitian | Predicate::Norden => {
            let (want, klein) = if p == Predicate::Hermitian {
                (MetricFlavor::Hermitian, KleinFlavor::Hermitian)
            } else {
                (MetricFlavor::Norden, KleinFlavor::Norden)
            };
            require_flavor(frame, want, p)?;
            let b = frame.b()?.value();
            let jv = frame.j()?.value();
            let purity = if klein == KleinFlavor::Hermitian {
                crate::calculus::matmul(
                    &crate::calculus::matmul(&jv.permute(&[1, 0]), &b, Valence::BILINEAR),
                    &jv,
                    Valence::BILINEAR,
                )
                .sub(&b)
            } else {
                crate::calculus::matmul(&jv.permute(&[1, 0]), &b, Valence::BILINEAR)
                    .sub(&crate::calculus::matmul(&b, &jv, Valence::BILINEAR))
            };
            vec![("purity", purity), ("symmetry", b.sub(&b.permute(&[1, 0])))]
        }
        Predicate::QuasiStatistical => {
            let g = connection_values(model, x)?;
            vec![("d_nabla_metric", structures::d_nabla_metric(&g, frame.b()?)?)]
        }
        Predicate::Statistical => {
            let g = connection_values(model, x)?;
            let nb = covariant_derivative(&g, frame.b()?)?;
            vec![("torsion", torsion(&g)), ("codazzi", nb.sub(&nb.permute(&[1, 0, 2])))]
        }
        Predicate::CodazziJ => {
            let g = connection_values(model, x)?;
            vec![("codazzi_J", structures::codazzi_defect_j(&g, frame.j()?)?)]
        }
        Predicate::TorsionCompatible => {
            let g = connection_values(model, x)?;
            vec![(
                "torsion_compat",
                structures::torsion_compat_defect(&torsion(&g), &frame.j()?.value()),
            )]
        }
        Predicate::Integrable => vec![("nijenhuis", structures::nijenhuis(frame.j()?))],
        Predicate::DClosedJ => {
            let g = connection_values(model, x)?;
            vec![("d_nabla_J", structures::d_nabla_j(&g, frame.j()?)?)]
        }
        Predicate::Kahler => {
            require_flavor(frame, MetricFlavor::Hermitian, p)?;
            vec![
                ("nijenhuis", structures::nijenhuis(frame.j()?)),
                ("d_omega", exterior_d2(frame.form()?)?),
            ]
        }
        Predicate::AntiKahler => {
            require_flavor(frame, MetricFlavor::Norden, p)?;
            vec![("tachibana", structures::tachibana(frame.j()?, frame.b()?))]
        }
        Predicate::QuasiKahlerNorden => {
            require_flavor(frame, MetricFlavor::Norden, p)?;
            vec![("cyclic_sum", quasi_kahler_norden_sum(frame)?)]
        }
        Predicate::ComplexConnection => {
            let g = connection_values(model, x)?;
            vec![("nabla_J", covariant_derivative(&g, frame.j()?)?)]
        }
    })
}

/// Evaluates `p` on `model` over `opts.samples` points.
pub fn check(model: &ChartModel, p: Predicate, opts: &CheckOptions) -> Result<CheckReport> {
    if opts.samples == 0 {
        return Err(GeomError::precondition("at least one sample point is required"));
    }
    if !(opts.tolerance >= 0.0) {
        return Err(GeomError::precondition("tolerance must be non-negative"));
    }
    let points = sample_points(&model.domain, opts.samples, opts.seed);
    let mut total = Residual::new();
    let mut parts: BTreeMap<String, Residual> = BTreeMap::new();
    let mut context: BTreeMap<String, f64> = BTreeMap::new();
    for x in &points {
        let frame = model.frame(x)?;
        for (name, t) in defining_tensors(p, model, &frame)? {
            total.zero(&t, x);
            parts.entry(name.to_string()).or_default().zero(&t, x);
        }
        if p == Predicate::QuasiKahlerNorden {
            let n = structures::nijenhuis(frame.j()?).max_abs();
            let e = context.entry("integrable".into()).or_insert(0.0);
            *e = e.max(n);
        }
    }
    let max_residual = total.absolute();
    let components = if parts.len() > 1 {
        parts.into_iter().map(|(k, r)| (k, r.absolute())).collect()
    } else {
        BTreeMap::new()
    };
    Ok(CheckReport {
        name: p.name().to_string(),
        max_residual,
        worst_point: total.worst_point,
        worst_indices: total.worst_indices,
        pass: max_residual <= opts.tolerance,
        tolerance: opts.tolerance,
        samples: points.len(),
        components,
        context,
    })
}

/// Runs several predicates, in the given order.
pub fn check_all(model: &ChartModel, ps: &[Predicate], opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    ps.iter().map(|&p| check(model, p, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::PolyConnection;
    use crate::fields::{PolyExpr, SmoothTensorField};
    use crate::generate::models::{flat_hermitian, flat_norden, hermitian_model, norden_model};
    use crate::generate::GenSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    #[test]
    fn flat_models_pass_everything_applicable() {
        let h = flat_hermitian(4);
        for p in [
            Predicate::AlmostComplex,
            Predicate::Hermitian,
            Predicate::QuasiStatistical,
            Predicate::Statistical,
            Predicate::Kahler,
            Predicate::Integrable,
            Predicate::ComplexConnection,
        ] {
            let r = check(&h, p, &opts()).unwrap();
            assert_eq!(r.max_residual, 0.0, "{p}");
            assert!(r.pass);
        }
        let n = flat_norden(4);
        for p in [Predicate::Norden, Predicate::AntiKahler, Predicate::QuasiKahlerNorden] {
            assert_eq!(check(&n, p, &opts()).unwrap().max_residual, 0.0, "{p}");
        }
    }

    #[test]
    fn single_torsion_symbol() {
        let mut comps = vec![PolyExpr::zero(2); 8];
        comps[1] = PolyExpr::constant(1.0, 2);
        let gamma = SmoothTensorField::new(2, Valence::VECTOR_2FORM, comps).unwrap();
        let m = flat_hermitian(2).with_connection(Arc::new(PolyConnection::new(gamma).unwrap()));
        // (∇_1 g)(2,1) = -1 cancels g(T(1,2),1) = 1
        let r = check(&m, Predicate::QuasiStatistical, &opts()).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let r = check(&m, Predicate::Statistical, &opts()).unwrap();
        assert!(!r.pass, "{r:?}");
        assert!((r.max_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flavor_mismatch_is_an_error() {
        let h = flat_hermitian(2);
        assert!(matches!(
            check(&h, Predicate::AntiKahler, &opts()),
            Err(GeomError::Precondition(_))
        ));
        let n = flat_norden(2);
        assert!(check(&n, Predicate::Kahler, &opts()).is_err());
    }

    #[test]
    fn two_dimensional_charts_are_integrable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = hermitian_model(&GenSpec::new(0, 2), &mut rng).unwrap();
            assert!(check(&m, Predicate::Integrable, &opts()).unwrap().pass);
        }
    }

    #[test]
    fn kahler_components_are_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = hermitian_model(&GenSpec::new(0, 4), &mut rng).unwrap();
        let r = check(&m, Predicate::Kahler, &opts()).unwrap();
        assert_eq!(r.components.len(), 2);
        let worst = r.components.values().cloned().fold(0.0, f64::max);
        assert_eq!(worst, r.max_residual);
        assert!(!r.pass);
    }

    #[test]
    fn quasi_kahler_norden_reports_integrability() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = norden_model(&GenSpec::new(0, 4), &mut rng).unwrap();
        let r = check(&m, Predicate::QuasiKahlerNorden, &opts()).unwrap();
        assert!(r.context.contains_key("integrable"));
    }

    #[test]
    fn missing_connection_is_named() {
        let m = ChartModel::new(crate::fields::ChartDomain::cube(2, 0.5).unwrap());
        assert!(check(&m, Predicate::Integrable, &opts()).is_err());
        let m = flat_hermitian(2);
        let m = ChartModel { connection: None, ..m };
        match check(&m, Predicate::ComplexConnection, &opts()) {
            Err(GeomError::MissingField(f)) => assert!(f.contains("connection") || f.contains("Gamma")),
            other => panic!("{other:?}"),
        }
    }
}
