//! The `qsg` command line: predicate checks on a model file, the
//! proposition suite, and witness synthesis.

pub mod model_file;
pub mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{GeomError, Result};
use crate::fields::sample_points;
use crate::generate::synthesis::{Ansatz, WitnessQuality, WitnessSource, WITNESS_TOL};
use crate::generate::{constraint_residuals, parse_constraints, synthesize_connection, Constraint, SynthesisOptions};
use crate::model::ChartModel;
use crate::predicates::{check_all, CheckOptions, Predicate, DEFAULT_TOL};
use crate::propositions::{run_suite, SuiteOptions};

pub use model_file::{GenEntry, ModelFile};
pub use report::{ExitStatus, RunReport, SynthesisSummary};

/// Metric determinants below this are treated as degenerate.
pub const MIN_DET: f64 = 1e-10;

const RECIPE_CHECK_SALT: u64 = 0x7e51_9e00;

#[derive(Parser, Debug)]
#[command(name = "qsg", version, about = "Checks, verifies and synthesizes torsion-bearing geometric structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate named predicates on a model file.
    Check(CheckArgs),
    /// Run the proposition suite on random models.
    Verify(VerifyArgs),
    /// Fit a connection meeting a constraint set and write it out.
    Synthesize(SynthesizeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub model: PathBuf,
    /// Comma-separated predicate names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub predicates: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::fields::sample::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restrict to these entry ids; part markers may be omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    pub model: PathBuf,
    /// Comma-separated constraint names.
    #[arg(long, required = true)]
    pub constraints: String,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model with the fitted connection.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// What a run printed and how it ended.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

impl Invocation {
    pub fn code(&self) -> i32 {
        self.status.code()
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Invocation {
                    status: ExitStatus::InputError,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Invocation {
                    status: ExitStatus::Pass,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn execute(cmd: &Command) -> Invocation {
    let (seed, format, name) = match cmd {
        Command::Check(a) => (a.seed, a.format, "check"),
        Command::Verify(a) => (a.seed, a.format, "verify"),
        Command::Synthesize(a) => (a.seed, a.format, "synthesize"),
    };
    let mut report = RunReport::new(name, seed);
    let result = match cmd {
        Command::Check(a) => cmd_check(a, &mut report),
        Command::Verify(a) => cmd_verify(a, &mut report),
        Command::Synthesize(a) => cmd_synthesize(a, &mut report),
    };
    let mut stderr = String::new();
    match result {
        Ok(status) => report.finish(status),
        Err(e) => {
            stderr = format!("error: {e}\n");
            report.error = Some(e.to_string());
            report.finish(ExitStatus::from_error(&e));
        }
    }
    let stdout = match format {
        Format::Json => report.to_json(),
        Format::Md => report.to_markdown(),
    };
    Invocation {
        status: report.status,
        stdout,
        stderr,
    }
}

/// Fails with a degeneracy error if the metric determinant nearly
/// vanishes at any of the points.
pub fn require_nondegenerate(model: &ChartModel, points: &[Vec<f64>]) -> Result<()> {
    let Some(m) = &model.metric else {
        return Ok(());
    };
    for x in points {
        let det = m.field.value(x)?.to_matrix().determinant();
        if !(det.abs() >= MIN_DET) {
            return Err(GeomError::Degenerate {
                what: "metric".into(),
                point: x.clone(),
                det,
            });
        }
    }
    Ok(())
}

fn load(path: &std::path::Path, report: &mut RunReport) -> Result<(ModelFile, ChartModel)> {
    let file = ModelFile::read(path)?;
    report.model_hash = Some(file.hash());
    let model = file.to_model()?;
    Ok((file, model))
}

pub fn cmd_check(a: &CheckArgs, report: &mut RunReport) -> Result<ExitStatus> {
    let predicates: Vec<Predicate> = a
        .predicates
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    if predicates.is_empty() {
        return Err(GeomError::precondition("no predicates given"));
    }
    let (_, model) = load(&a.model, report)?;
    let opts = CheckOptions {
        tolerance: a.tol,
        samples: a.samples,
        seed: a.seed,
    };
    require_nondegenerate(&model, &sample_points(&model.domain, a.samples.max(1), a.seed))?;
    report.checks = check_all(&model, &predicates, &opts)?;
    Ok(if report.checks.iter().all(|c| c.pass) {
        ExitStatus::Pass
    } else {
        ExitStatus::Fail
    })
}

pub fn cmd_verify(a: &VerifyArgs, report: &mut RunReport) -> Result<ExitStatus> {
    let only: Vec<&str> = a.only.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    let opts = SuiteOptions::new(a.seed, a.trials, &a.dims).only(&only);
    let suite = run_suite(&opts)?;
    let status = if suite.passed {
        ExitStatus::Pass
    } else {
        ExitStatus::Fail
    };
    report.suite = Some(suite);
    Ok(status)
}

pub fn cmd_synthesize(a: &SynthesizeArgs, report: &mut RunReport) -> Result<ExitStatus> {
    let set: BTreeSet<Constraint> = parse_constraints(&a.constraints)?;
    if set.is_empty() {
        return Err(GeomError::precondition("no constraints given"));
    }
    let (file, model) = load(&a.model, report)?;
    let opts = SynthesisOptions::default().with_degree(a.degree).with_seed(a.seed);
    require_nondegenerate(&model, &sample_points(&model.domain, opts.holdout_points, a.seed))?;
    let result = synthesize_connection(&model, &set, &opts)?;
    let mut summary = SynthesisSummary::new(&set, a.degree, &result);
    let written = if result.source == WitnessSource::Recipe && result.polynomial_residual > WITNESS_TOL {
        let list: Vec<Constraint> = set.iter().copied().collect();
        let out = file.with_recipe(&list, a.seed);
        let check = sample_points(&model.domain, opts.holdout_points, a.seed ^ RECIPE_CHECK_SALT);
        let regenerated = out.to_model()?;
        let reports = constraint_residuals(&regenerated, regenerated.connection()?.as_ref(), &set, &check)?;
        summary.record(WitnessSource::Recipe, reports);
        out
    } else {
        match result.polynomial.ansatz {
            Ansatz::Lowered => file.clone().with_gamma_lowered(result.polynomial.field.clone()),
            _ => file.clone().with_gamma(result.polynomial.field.clone()),
        }
    };
    let quality = summary.quality;
    if let Some(out) = &a.out {
        if quality != WitnessQuality::NoWitness {
            written.write(out)?;
            summary.out = Some(out.display().to_string());
            summary.out_hash = Some(written.hash());
        }
    }
    report.synthesis = Some(summary);
    Ok(match quality {
        WitnessQuality::Usable => ExitStatus::Pass,
        WitnessQuality::LowQuality => ExitStatus::LowQuality,
        WitnessQuality::NoWitness => ExitStatus::NoWitness,
    })
}
