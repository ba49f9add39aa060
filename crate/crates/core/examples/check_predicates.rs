//! Evaluates every predicate on one model of each kind, with a random
//! polynomial connection, and prints the residual grid.
//!
//! `cargo run --release --example check_predicates -- [dim] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsg::generate::models::{build_model, random_connection, ModelKind};
use qsg::generate::GenSpec;
use qsg::predicates::{check, CheckOptions, Predicate};

const KINDS: [ModelKind; 7] = [
    ModelKind::FlatHermitian,
    ModelKind::FlatNorden,
    ModelKind::RandomHermitian,
    ModelKind::RandomNorden,
    ModelKind::KahlerPullback,
    ModelKind::AntiKahlerPullback,
    ModelKind::KahlerPotential,
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dim = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let opts = CheckOptions::default();

    print!("{:<22}", "predicate");
    for k in KINDS {
        print!("{:>22}", format!("{k:?}"));
    }
    println!();
    let mut models = vec![];
    for k in KINDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = build_model(k, &GenSpec::new(seed, dim), &mut rng)?;
        let conn = random_connection(&mut rng, dim, 1, 0.5).arc();
        models.push(m.with_connection(conn));
    }
    for p in Predicate::ALL {
        print!("{:<22}", p.name());
        for m in &models {
            let cell = match check(m, p, &opts) {
                Ok(r) => format!("{:.2e} {}", r.max_residual, if r.pass { "ok" } else { "no" }),
                Err(_) => "n/a".into(),
            };
            print!("{cell:>22}");
        }
        println!();
    }
    Ok(())
}
