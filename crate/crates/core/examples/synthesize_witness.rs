//! Fits a connection meeting a constraint set on a random model and
//! prints the per-constraint held-out residuals.
//!
//! `cargo run --release --example synthesize_witness -- [constraints] [kind] [dim] [degree] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsg::generate::models::{build_model, ModelKind};
use qsg::generate::{parse_constraints, synthesize_connection, GenSpec, SynthesisOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let constraints = args.first().map(String::as_str).unwrap_or("quasi_statistical_g");
    let kind: ModelKind = serde_json::from_value(serde_json::Value::String(
        args.get(1).cloned().unwrap_or_else(|| "random_hermitian".into()),
    ))?;
    let dim = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let degree = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0);

    let set = parse_constraints(constraints)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = build_model(kind, &GenSpec::new(seed, dim), &mut rng)?;
    let opts = SynthesisOptions::default().with_degree(degree).with_seed(seed);
    let r = synthesize_connection(&model, &set, &opts)?;

    println!("{kind:?} dim {dim}, degree {degree}, seed {seed}");
    println!("source {:?}, residual {:.3e}, quality {:?}", r.source, r.residual, r.quality());
    println!("polynomial {:?} ansatz, residual {:.3e}", r.polynomial.ansatz, r.polynomial_residual);
    for c in &r.constraint_residuals {
        println!("  {:<24} {:.3e}", c.constraint.to_string(), c.residual);
    }
    Ok(())
}
