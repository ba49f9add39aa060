//! Composes the four connection involutions pairwise at a point and prints
//! which single operation each composition matches.
//!
//! `cargo run --release --example klein_table -- [hermitian|norden] [dim] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsg::fields::{sample_points, Tensor};
use qsg::generate::models::{hermitian_model, norden_model, random_connection};
use qsg::generate::GenSpec;
use qsg::propositions::kernels::At;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let norden = args.first().is_some_and(|s| s == "norden");
    let dim = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = GenSpec::new(seed, dim);
    let model = if norden {
        norden_model(&spec, &mut rng)?
    } else {
        hermitian_model(&spec, &mut rng)?
    };
    let conn = random_connection(&mut rng, dim, 2, 1.0).arc();
    let x = sample_points(&model.domain, 1, seed).remove(0);
    let at = At::new(&model, &x)?;
    let gamma = conn.christoffel(&x)?;

    let names = if norden { ["id", "♯", "‡", "Λ"] } else { ["id", "*", "†", "Λ"] };
    let apply = |op: usize, g: &Tensor| -> qsg::error::Result<Tensor> {
        match op {
            0 => Ok(g.clone()),
            1 => at.star(g),
            2 => at.dag(g),
            _ => at.lam(g),
        }
    };
    let images: Vec<Tensor> = (0..4).map(|op| apply(op, &gamma)).collect::<Result<_, _>>()?;

    println!("{} model, dim {dim}, point {x:?}", if norden { "Norden" } else { "Hermitian" });
    print!("{:>4}", "∘");
    for n in names {
        print!("{n:>6}");
    }
    println!();
    let mut worst = 0.0_f64;
    for a in 0..4 {
        print!("{:>4}", names[a]);
        for b in 0..4 {
            let composed = apply(a, &images[b])?;
            let (best, gap) = (0..4)
                .map(|c| (c, composed.sub(&images[c]).max_abs()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("four operations");
            worst = worst.max(gap);
            print!("{:>6}", names[best]);
        }
        println!();
    }
    println!("largest table residual {worst:.2e}");
    Ok(())
}
