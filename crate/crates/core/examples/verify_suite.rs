//! Runs the proposition suite and prints one line per entry.
//!
//! `cargo run --release --example verify_suite -- [trials] [dims] [filter...]`

use qsg::propositions::{run_suite, SuiteOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = args.first().and_then(|s| s.parse().ok()).unwrap_or(5);
    let dims: Vec<usize> = args
        .get(1)
        .map(|s| s.split(',').filter_map(|d| d.parse().ok()).collect())
        .unwrap_or_else(|| vec![2, 4]);
    let mut opts = SuiteOptions::new(0, trials, &dims);
    opts.only = args.iter().skip(2).cloned().collect();
    let report = run_suite(&opts)?;
    for e in &report.entries {
        println!(
            "{:<24} {:<20} residual {:>10.3e}  hypothesis {:>10}  {:?}",
            e.id,
            format!("{:?}", e.status),
            e.max_residual,
            e.max_hypothesis_residual.map(|h| format!("{h:.2e}")).unwrap_or_else(|| "-".into()),
            e.dims.iter().flat_map(|d| d.notes.iter().map(move |n| format!("[{}] {n}", d.dim))).collect::<Vec<_>>()
        );
    }
    println!("overall: {}", if report.passed { "pass" } else { "fail" });
    Ok(())
}
