use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use qsg::cli::{run, ExitStatus, GenEntry, Invocation, ModelFile};
use qsg::fields::{ChartDomain, PolyExpr, SmoothTensorField, Tensor, Valence};
use qsg::generate::models::ModelKind;
use qsg::structures::{standard_j, MetricFlavor};

fn flat(dim: usize) -> ModelFile {
    ModelFile::new(ChartDomain::cube(dim, 0.5).unwrap())
        .with_metric(
            MetricFlavor::Hermitian,
            SmoothTensorField::constant(&Tensor::delta(dim, Valence::BILINEAR)),
        )
        .with_j(SmoothTensorField::constant(&standard_j(dim)))
        .with_gamma(SmoothTensorField::zeros(dim, Valence::VECTOR_2FORM))
}

/// The flat model with the single Christoffel symbol of `∂₁∂₂` along `∂₁` set to one.
fn tilted(dim: usize) -> ModelFile {
    flat(dim).with_gamma(SmoothTensorField::from_fn(dim, Valence::VECTOR_2FORM, |ix| {
        PolyExpr::constant(if ix == [0, 0, 1] { 1.0 } else { 0.0 }, dim)
    }))
}

fn save(dir: &TempDir, name: &str, f: &ModelFile) -> PathBuf {
    let p = dir.path().join(name);
    f.write(&p).unwrap();
    p
}

fn qsg(args: &[&str]) -> Invocation {
    run(std::iter::once("qsg").chain(args.iter().copied()))
}

fn json(out: &Invocation) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn flat_model_is_kahler() {
    let dir = TempDir::new().unwrap();
    let m = save(&dir, "flat.json", &flat(4));
    let out = qsg(&["check", p(&m), "--predicates", "kahler"]);
    assert_eq!(out.status, ExitStatus::Pass);
    let r = json(&out);
    assert_eq!(r["checks"][0]["max_residual"], 0.0);
    assert_eq!(r["model_hash"], flat(4).hash());
}

#[test]
fn single_christoffel_symbol_breaks_statistical_with_unit_residual() {
    let dir = TempDir::new().unwrap();
    let m = save(&dir, "tilted.json", &tilted(4));
    for seed in ["0", "1", "2"] {
        let out = qsg(&["check", p(&m), "--predicates", "statistical", "--samples", "1", "--seed", seed]);
        assert_eq!(out.code(), 1);
        assert_eq!(json(&out)["checks"][0]["max_residual"], 1.0);
    }
    let out = qsg(&["check", p(&m), "--predicates", "quasi_statistical"]);
    assert_eq!(out.code(), 0);
    assert_eq!(json(&out)["checks"][0]["max_residual"], 0.0);
}

#[test]
fn schema_errors_exit_two_with_a_field_path() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version":1,"dimension":2,"domain":{"lower":[-1,-1],"upper":[1,1]},
           "fields":{"g":[[1,0],[0,1]],"J":[[0,[{"exp":[1,0,0],"coef":-1}]],[1,0]]}}"#,
    )
    .unwrap();
    let out = qsg(&["check", p(&bad), "--predicates", "hermitian"]);
    assert_eq!(out.code(), 2);
    assert!(out.stderr.contains("fields.J[0][1][0].exp"), "{}", out.stderr);

    std::fs::write(&bad, "{\"version\": 1,\n \"dimension\": }").unwrap();
    let out = qsg(&["check", p(&bad), "--predicates", "hermitian"]);
    assert_eq!(out.code(), 2);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);

    let out = qsg(&["check", "/nonexistent/model.json", "--predicates", "kahler"]);
    assert_eq!(out.code(), 2);
    let m = save(&dir, "flat.json", &flat(2));
    assert_eq!(qsg(&["check", p(&m), "--predicates", "kaehler"]).code(), 2);
    assert_eq!(qsg(&["check", p(&m), "--predicates", "anti_kahler"]).code(), 2);
    assert_eq!(qsg(&["check", p(&m)]).code(), 2);
}

#[test]
fn degenerate_metric_exits_three_naming_the_point() {
    let dir = TempDir::new().unwrap();
    let x0 = PolyExpr::coordinate(0, 2);
    let f = flat(2).with_metric(
        MetricFlavor::Hermitian,
        SmoothTensorField::from_fn(2, Valence::BILINEAR, |ix| {
            if ix[0] == ix[1] {
                x0.mul(&x0).scale(1e-6)
            } else {
                PolyExpr::zero(2)
            }
        }),
    );
    let m = save(&dir, "degenerate.json", &f);
    let out = qsg(&["check", p(&m), "--predicates", "hermitian"]);
    assert_eq!(out.code(), 3);
    assert!(out.stderr.contains("degenerate metric at ["), "{}", out.stderr);
}

#[test]
fn verify_filter_and_unknown_ids() {
    let out = qsg(&["verify", "--dims", "2", "--trials", "2", "--only", "GAD1"]);
    assert_eq!(out.code(), 0);
    let ids: Vec<String> = json(&out)["suite"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["GAD1(i)", "GAD1(i):negative", "GAD1(ii)", "GAD1(iii)"]);

    let out = qsg(&["verify", "--only", "pro99"]);
    assert_eq!(out.code(), 2);
    assert!(out.stderr.contains("teo2") && out.stderr.contains("GAD17:corollary"));
    assert_eq!(qsg(&["verify", "--dims", "3", "--trials", "1"]).code(), 2);
    assert_eq!(qsg(&["verify", "--trials", "0"]).code(), 2);
}

#[test]
fn verify_smoke_run_is_deterministic() {
    let a = qsg(&["verify", "--dims", "2", "--trials", "5", "--seed", "0"]);
    let b = qsg(&["verify", "--dims", "2", "--trials", "5", "--seed", "0"]);
    assert_eq!(a.code(), 0, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["suite"]["entries"].as_array().unwrap().len(), qsg::propositions::registry().len());
}

#[test]
fn synthesize_writes_zero_connection_on_flat_model() {
    let dir = TempDir::new().unwrap();
    let m = save(&dir, "flat.json", &flat(2));
    let out_path = dir.path().join("out.json");
    let out = qsg(&[
        "synthesize",
        p(&m),
        "--constraints",
        "torsion_free,complex_connection",
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.code(), 0, "{}", out.stdout);
    let written = ModelFile::read(&out_path).unwrap();
    assert!(written.gamma.unwrap().components().iter().all(|c| c.is_zero()));
    assert_eq!(json(&out)["synthesis"]["out_hash"], ModelFile::read(&out_path).unwrap().hash());
}

#[test]
fn synthesize_quasi_statistical_is_feasible() {
    let dir = TempDir::new().unwrap();
    let x0 = PolyExpr::coordinate(0, 4);
    let curved = flat(4).with_metric(
        MetricFlavor::Hermitian,
        SmoothTensorField::from_fn(4, Valence::BILINEAR, |ix| {
            if ix[0] == ix[1] {
                PolyExpr::constant(2.0, 4).add(&x0.mul(&x0))
            } else {
                PolyExpr::zero(4)
            }
        }),
    );
    let generated =
        ModelFile::new(ChartDomain::cube(4, 0.5).unwrap()).with_genspec(GenEntry::new(ModelKind::RandomHermitian, 1));
    for (name, f) in [("curved.json", curved), ("generated.json", generated)] {
        let m = save(&dir, name, &f);
        let out_path = dir.path().join(format!("witness-{name}"));
        let out = qsg(&["synthesize", p(&m), "--constraints", "quasi_statistical_g", "--out", p(&out_path)]);
        assert_eq!(out.code(), 0, "{}", out.stdout);
        let check = qsg(&["check", p(&out_path), "--predicates", "quasi_statistical"]);
        assert_eq!(check.code(), 0, "{}", check.stdout);
    }
}

#[test]
fn synthesize_reports_low_quality_and_missing_witnesses() {
    let dir = TempDir::new().unwrap();
    let spec = |seed| {
        ModelFile::new(ChartDomain::cube(2, 0.5).unwrap()).with_genspec(GenEntry::new(ModelKind::RandomHermitian, seed))
    };
    let m = save(&dir, "m2.json", &spec(3));
    let out = qsg(&["synthesize", p(&m), "--constraints", "codazzi_J", "--degree", "3"]);
    assert_eq!(out.code(), 4, "{}", out.stdout);
    let r = json(&out)["synthesis"]["residual"].as_f64().unwrap();
    assert!(r > 1e-7 && r <= 1e-3);

    let m4 = save(
        &dir,
        "m4.json",
        &ModelFile::new(ChartDomain::cube(4, 0.5).unwrap()).with_genspec(GenEntry::new(ModelKind::RandomHermitian, 1)),
    );
    let out_path = dir.path().join("none.json");
    let out = qsg(&[
        "synthesize",
        p(&m4),
        "--constraints",
        "complex_connection,torsion_free,quasi_statistical_g",
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.code(), 5, "{}", out.stdout);
    assert!(!out_path.exists());
    assert_eq!(qsg(&["synthesize", p(&m4), "--constraints", "bogus"]).code(), 2);
}

#[test]
fn markdown_carries_the_json_numbers() {
    let dir = TempDir::new().unwrap();
    let m = save(&dir, "tilted.json", &tilted(2));
    let args = ["check", p(&m), "--predicates", "statistical,torsion_compatible,integrable"];
    let js = json(&qsg(&args));
    let md = qsg(&[&args[..], &["--format", "md"]].concat()).stdout;
    for c in js["checks"].as_array().unwrap() {
        let num = serde_json::to_string(&c["max_residual"]).unwrap();
        assert!(md.contains(&format!("| {} | {num} |", c["name"].as_str().unwrap())), "{num} missing:\n{md}");
    }
    let v = qsg(&["verify", "--dims", "2", "--trials", "2", "--only", "lem2,pro4"]);
    let vmd = qsg(&["verify", "--dims", "2", "--trials", "2", "--only", "lem2,pro4", "--format", "md"]).stdout;
    for e in json(&v)["suite"]["entries"].as_array().unwrap() {
        let num = serde_json::to_string(&e["max_residual"]).unwrap();
        assert!(vmd.contains(&num), "{num} missing:\n{vmd}");
    }
}

#[test]
fn exit_codes_are_distinct() {
    let all = [
        ExitStatus::Pass,
        ExitStatus::Fail,
        ExitStatus::InputError,
        ExitStatus::Degenerate,
        ExitStatus::LowQuality,
        ExitStatus::NoWitness,
    ];
    let codes: Vec<i32> = all.iter().map(|s| s.code()).collect();
    assert_eq!(codes, [0, 1, 2, 3, 4, 5]);
}

#[test]
fn binary_exit_codes_and_thread_independence() {
    let dir = TempDir::new().unwrap();
    let m = save(&dir, "tilted.json", &tilted(2));
    let bin = env!("CARGO_BIN_EXE_qsg");
    let status = Command::new(bin)
        .args(["check", p(&m), "--predicates", "statistical"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let run = |threads: &str| {
        Command::new(bin)
            .args(["verify", "--dims", "2,4", "--trials", "3", "--only", "pro3,teo5"])
            .env("QSG_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("synthesize"));
}
