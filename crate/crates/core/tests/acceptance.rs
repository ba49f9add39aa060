//! The acceptance run: dimensions 2 and 4, 30 trials, seed 0. Prints one
//! line per criterion; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsg::calculus::{covariant_derivative, levi_civita, torsion};
use qsg::cli::{run, RunReport};
use qsg::fields::smooth::random_poly;
use qsg::connections;
use qsg::fields::sample_points;
use qsg::generate::models::{default_domain, flat_hermitian, hermitian_model, norden_model, pullback_kahler_model};
use qsg::generate::{constraint_residuals, Constraint, GenSpec};
use qsg::predicates::{check, CheckOptions, Predicate};
use qsg::propositions::{Status, SuiteEntry, SuiteReport};

const TRIALS: &str = "30";
const ARGS: [&str; 8] = ["qsg", "verify", "--dims", "2,4", "--trials", TRIALS, "--seed", "0"];

struct Ledger {
    lines: Vec<String>,
    failed: Vec<usize>,
}

impl Ledger {
    fn record(&mut self, n: usize, ok: bool, what: &str, detail: String) {
        let line = format!("criterion {n:>2}: {} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        if !ok {
            self.failed.push(n);
        }
    }
}

fn entries<'a>(r: &'a SuiteReport, prefix: &str) -> Vec<&'a SuiteEntry> {
    let v: Vec<&SuiteEntry> = r
        .entries
        .iter()
        .filter(|e| e.id == prefix || e.id.starts_with(&format!("{prefix}(")))
        .collect();
    assert!(!v.is_empty(), "no entries for {prefix}");
    v
}

fn entry<'a>(r: &'a SuiteReport, id: &str) -> &'a SuiteEntry {
    r.entry(id).unwrap_or_else(|| panic!("missing entry {id}"))
}

fn worst(es: &[&SuiteEntry]) -> f64 {
    es.iter().map(|e| e.max_residual).fold(0.0, f64::max)
}

fn all_pass(es: &[&SuiteEntry], tol: f64) -> bool {
    es.iter().all(|e| e.status == Status::Pass && e.max_residual <= tol)
}

fn timed_verify() -> (String, Duration) {
    let start = Instant::now();
    let out = run(ARGS);
    let elapsed = start.elapsed();
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (out.stdout, elapsed)
}

fn klein_runtime() -> Duration {
    let start = Instant::now();
    let out = run(["qsg", "verify", "--dims", "2,4", "--trials", TRIALS, "--only", "teo1"]);
    assert_eq!(out.code(), 0, "{}", out.stdout);
    start.elapsed()
}

fn finite_difference_gap() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    let h = 1e-5;
    for dim in [2usize, 4] {
        for trial in 0..30u64 {
            let f = random_poly(&mut rng, dim, 4, 1.0);
            for x in sample_points(&default_domain(dim), 10, trial) {
                let jet = f.eval_jet(&x).unwrap();
                for k in 0..dim {
                    let (mut up, mut down) = (x.clone(), x.clone());
                    up[k] += h;
                    down[k] -= h;
                    let fd = (f.eval(&up) - f.eval(&down)) / (2.0 * h);
                    worst = worst.max((fd - jet.partials[k]).abs() / jet.partials[k].abs().max(1.0));
                }
            }
        }
    }
    worst
}

fn levi_civita_defect() -> f64 {
    let mut worst = 0.0_f64;
    for dim in [2usize, 4] {
        for trial in 0..30u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let spec = GenSpec::new(trial, dim);
            let m = if trial % 2 == 0 {
                hermitian_model(&spec, &mut rng).unwrap()
            } else {
                norden_model(&spec, &mut rng).unwrap()
            };
            let b = m.metric_field().unwrap();
            for x in sample_points(&m.domain, 5, trial) {
                let bj = b.jet(&x).unwrap();
                let lc = levi_civita(&bj, &x).unwrap();
                worst = worst
                    .max(torsion(&lc).max_abs())
                    .max(covariant_derivative(&lc, &bj).unwrap().max_abs());
            }
        }
    }
    worst
}

/// Levi-Civita witnesses on Kähler models for the joint hypotheses:
/// worst hypothesis residual, worst Kähler residual, and how many were usable.
fn joint_witnesses() -> (f64, f64, usize) {
    let set = [Constraint::QuasiStatisticalG, Constraint::DClosedJ, Constraint::JInvariantTorsion]
        .into_iter()
        .collect();
    let opts = CheckOptions {
        tolerance: 1e-6,
        ..CheckOptions::default()
    };
    let (mut hyp, mut concl, mut usable) = (0.0_f64, 0.0_f64, 0);
    for dim in [2usize, 4] {
        for trial in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let m = pullback_kahler_model(&GenSpec::new(trial, dim), &mut rng).unwrap();
            let lc = connections::levi_civita(m.metric_field().unwrap());
            let witness = m.clone().with_connection(lc.clone());
            let pts = sample_points(&m.domain, 10, trial);
            let h = constraint_residuals(&witness, lc.as_ref(), &set, &pts)
                .unwrap()
                .iter()
                .map(|r| r.residual)
                .fold(0.0, f64::max);
            hyp = hyp.max(h);
            if h <= 1e-7 {
                usable += 1;
                concl = concl.max(check(&witness, Predicate::Kahler, &opts).unwrap().max_residual);
            }
        }
    }
    (hyp, concl, usable)
}

#[test]
fn acceptance() {
    let mut ledger = Ledger {
        lines: vec![],
        failed: vec![],
    };

    let (first, elapsed) = timed_verify();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let (second, _) = pool.install(timed_verify);
    let report: RunReport = serde_json::from_str(&first).unwrap();
    let suite = report.suite.as_ref().expect("suite report");

    let klein = entries(suite, "teo1").into_iter().chain(entries(suite, "teo1:norden")).collect::<Vec<_>>();
    let klein_time = klein_runtime();
    ledger.record(
        1,
        all_pass(&klein, 1e-8) && klein_time < Duration::from_secs(60),
        "Klein group tables",
        format!("max residual {:.2e} in {:.1} s", worst(&klein), klein_time.as_secs_f64()),
    );

    let gad1 = [entry(suite, "GAD1(i)")];
    ledger.record(
        2,
        all_pass(&gad1, 1e-9),
        "d∇Λ against Λ of the conjugate torsion",
        format!("max residual {:.2e}", worst(&gad1)),
    );

    let mut chain = vec![entry(suite, "pro4(i)")];
    chain.extend(entries(suite, "pro5"));
    ledger.record(
        3,
        all_pass(&chain, 1e-8),
        "form and metric exterior derivative identities",
        format!("max residual {:.2e} over {} entries", worst(&chain), chain.len()),
    );

    let lem2 = [entry(suite, "lem2")];
    ledger.record(
        4,
        all_pass(&lem2, 1e-9),
        "coordinate dω against the connection expansion",
        format!("max residual {:.2e}", worst(&lem2)),
    );

    let teo2 = entry(suite, "teo2");
    let flat = check(&flat_hermitian(4), Predicate::Kahler, &CheckOptions::default()).unwrap();
    let (joint_hyp, joint, usable) = joint_witnesses();
    let teo2_ok = matches!(teo2.status, Status::Pass | Status::Inconclusive)
        && teo2.max_residual <= 1e-6
        && flat.max_residual == 0.0
        && usable == 10
        && joint <= 1e-6;
    ledger.record(
        5,
        teo2_ok,
        "joint hypotheses imply Kähler",
        format!(
            "{:?} with {} witnesses, max residual {:.2e}; flat {:.1e}; {usable} Levi-Civita witnesses, hypotheses {:.2e}, conclusion {:.2e}",
            teo2.status, teo2.witnesses_found, teo2.max_residual, flat.max_residual, joint_hyp, joint
        ),
    );

    let teo5 = entry(suite, "teo5");
    ledger.record(
        6,
        teo5.status == Status::Pass && teo5.witnesses_found > 0 && teo5.max_residual <= 1e-6,
        "Tachibana tensor against torsion and B terms",
        format!(
            "{} witnesses, max residual {:.2e}, hypothesis {:.2e}",
            teo5.witnesses_found,
            teo5.max_residual,
            teo5.max_hypothesis_residual.unwrap_or(f64::NAN)
        ),
    );

    let last = entry(suite, "theolast");
    ledger.record(
        7,
        last.status == Status::Pass,
        "cyclic Tachibana sum and quasi-Kähler-Norden sum vanish together",
        format!("{:?}, identity residual {:.2e}", last.status, last.max_residual),
    );

    let negatives = [
        entry(suite, "cor4(i):negative"),
        entry(suite, "cor7(ii):negative"),
        entry(suite, "pro2:negative"),
    ];
    ledger.record(
        8,
        negatives.iter().all(|e| e.status == Status::Pass),
        "violated hypotheses break the conclusions",
        negatives
            .iter()
            .map(|e| format!("{} weakest {:.2e}", e.id, e.max_residual))
            .collect::<Vec<_>>()
            .join(", "),
    );

    ledger.record(
        9,
        first == second,
        "byte-identical reports across runs and thread counts",
        format!("{} bytes, run passed: {}", first.len(), suite.passed),
    );

    let fd = finite_difference_gap();
    let lc = levi_civita_defect();
    ledger.record(
        10,
        fd <= 1e-6 && lc <= 1e-9 && elapsed <= Duration::from_secs(600),
        "kernel oracles and suite wall time",
        format!(
            "finite differences {fd:.2e}, Levi-Civita {lc:.2e}, full suite {:.1} s",
            elapsed.as_secs_f64()
        ),
    );

    let failing: Vec<String> = suite.failures().iter().map(|e| e.id.clone()).collect();
    println!("suite: {} entries, failures: {:?}", suite.entries.len(), failing);
    let summary = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance.txt");
    let _ = std::fs::write(&summary, ledger.lines.join("\n") + "\n");
    assert!(ledger.failed.is_empty(), "failed criteria: {:?}", ledger.failed);
    assert!(suite.passed, "suite failures: {failing:?}");
    assert_eq!(report.exit_code, 0);
}
