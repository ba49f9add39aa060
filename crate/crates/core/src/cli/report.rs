//! Run reports and the exit-code contract.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::generate::constraints::ConstraintReport;
use crate::generate::synthesis::{quality_of, Ansatz, SynthesisResult, WitnessQuality, WitnessSource};
use crate::generate::Constraint;
use crate::predicates::CheckReport;
use crate::propositions::SuiteReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Pass,
    Fail,
    InputError,
    Degenerate,
    LowQuality,
    NoWitness,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Fail => 1,
            ExitStatus::InputError => 2,
            ExitStatus::Degenerate => 3,
            ExitStatus::LowQuality => 4,
            ExitStatus::NoWitness => 5,
        }
    }

    pub fn from_error(e: &GeomError) -> Self {
        match e {
            GeomError::Degenerate { .. } => ExitStatus::Degenerate,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub constraints: Vec<Constraint>,
    pub degree: u32,
    /// What the written model holds: the polynomial fit, or a genspec
    /// that regenerates the closed-form recipe.
    pub written: WitnessSource,
    pub ansatz: Ansatz,
    /// Held-out residual of the written connection; decides the exit status.
    pub residual: f64,
    pub quality: WitnessQuality,
    pub constraint_residuals: Vec<ConstraintReport>,
    /// Best connection found, possibly a closed-form recipe that a model
    /// file cannot hold.
    pub best_source: WitnessSource,
    pub best_residual: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out_hash: Option<String>,
}

impl SynthesisSummary {
    pub fn new(set: &BTreeSet<Constraint>, degree: u32, r: &SynthesisResult) -> Self {
        SynthesisSummary {
            constraints: set.iter().copied().collect(),
            degree,
            written: WitnessSource::Polynomial,
            ansatz: r.polynomial.ansatz,
            residual: r.polynomial_residual,
            quality: quality_of(r.polynomial_residual),
            constraint_residuals: r.polynomial_constraint_residuals.clone(),
            best_source: r.source,
            best_residual: r.residual,
            iterations: r.iterations,
            out: None,
            out_hash: None,
        }
    }

    pub fn record(&mut self, written: WitnessSource, reports: Vec<ConstraintReport>) {
        self.written = written;
        self.residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
        self.quality = quality_of(self.residual);
        self.constraint_residuals = reports;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model_hash: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub synthesis: Option<SynthesisSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub status: ExitStatus,
    pub exit_code: i32,
}

fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("number")
}

fn point(x: &[f64]) -> String {
    format!("({})", x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "))
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        RunReport {
            tool: "qsg".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            model_hash: None,
            checks: vec![],
            suite: None,
            synthesis: None,
            error: None,
            status: ExitStatus::Pass,
            exit_code: 0,
        }
    }

    pub fn finish(&mut self, status: ExitStatus) {
        self.status = status;
        self.exit_code = status.code();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report json");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# qsg {} {}\n", self.command, self.version);
        let _ = writeln!(s, "- seed: {}", self.seed);
        if let Some(h) = &self.model_hash {
            let _ = writeln!(s, "- model hash: `{h}`");
        }
        let _ = writeln!(s, "- status: {} (exit {})", kebab(&self.status), self.exit_code);
        if let Some(e) = &self.error {
            let _ = writeln!(s, "- error: {e}");
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\n## Predicates\n");
            let _ = writeln!(s, "| predicate | residual | tolerance | pass | worst point |");
            let _ = writeln!(s, "|---|---|---|---|---|");
            for c in &self.checks {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    c.name,
                    num(c.max_residual),
                    num(c.tolerance),
                    c.pass,
                    point(&c.worst_point)
                );
            }
            for c in &self.checks {
                for (k, v) in c.components.iter().chain(&c.context) {
                    let _ = writeln!(s, "\n- {} / {k}: {}", c.name, num(*v));
                }
            }
        }
        if let Some(r) = &self.suite {
            let dims: Vec<String> = r.dims.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(s, "\n## Suite\n");
            let _ = writeln!(s, "- trials: {}, dims: {}, passed: {}\n", r.trials, dims.join(","), r.passed);
            let _ = writeln!(
                s,
                "| id | group | form | status | max residual | hypothesis | tolerance | witnesses |"
            );
            let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
            for e in &r.entries {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} | {} |",
                    e.id,
                    kebab(&e.group),
                    kebab(&e.form),
                    kebab(&e.status),
                    num(e.max_residual),
                    e.max_hypothesis_residual.map(num).unwrap_or_else(|| "-".into()),
                    num(e.tolerance),
                    e.witnesses_found
                );
            }
            let notes: Vec<String> = r
                .entries
                .iter()
                .flat_map(|e| e.dims.iter().flat_map(move |d| d.notes.iter().map(move |n| format!("- {} (dim {}): {n}", e.id, d.dim))))
                .collect();
            if !notes.is_empty() {
                let _ = writeln!(s, "\n### Notes\n\n{}", notes.join("\n"));
            }
        }
        if let Some(y) = &self.synthesis {
            let names: Vec<&str> = y.constraints.iter().map(|c| c.name()).collect();
            let _ = writeln!(s, "\n## Synthesis\n");
            let _ = writeln!(s, "- constraints: {}", names.join(","));
            let _ = writeln!(s, "- degree: {}, ansatz: {}, written: {}", y.degree, kebab(&y.ansatz), kebab(&y.written));
            let _ = writeln!(s, "- residual: {} ({})", num(y.residual), kebab(&y.quality));
            let _ = writeln!(s, "- best: {} from {}", num(y.best_residual), kebab(&y.best_source));
            if let Some(o) = &y.out {
                let _ = writeln!(s, "- written: {o}");
            }
            let _ = writeln!(s, "\n| constraint | residual |\n|---|---|");
            for c in &y.constraint_residuals {
                let _ = writeln!(s, "| {} | {} |", c.constraint, num(c.residual));
            }
        }
        s
    }
}
