//! The structural results as executable checks: a registry of entries,
//! each run over independent seeded trials in every requested dimension.

pub mod kernels;
pub mod registry;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::{symmetrized, Conn};
use crate::error::{GeomError, Result};
use crate::fields::sample_points;
use crate::generate::models::{
    hermitian_model, kahler_potential_model, norden_model, pullback_anti_kahler_model, pullback_kahler_model,
    random_connection,
};
use crate::generate::rng::{label_salt, trial_rng};
use crate::generate::{project_connection, Constraint, GenSpec, ProjectedConnection};
use crate::model::ChartModel;
use crate::residual::Residual;

pub use registry::registry;

pub const KERNEL_TOL: f64 = 1e-9;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const HYPOTHESIS_TOL: f64 = 1e-7;
pub const CONCLUSION_TOL: f64 = 1e-6;
pub const NEGATIVE_FLOOR: f64 = 1e-3;
pub const NEGATIVE_FRACTION: f64 = 0.9;
pub const SAMPLES: usize = 25;
pub const SUPPORTED_DIMS: [usize; 3] = [2, 4, 6];
const RETRIES: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    /// Results about `Λ` and a connection alone.
    Structure,
    Hermitian,
    Norden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// Both sides evaluated on unrestricted random inputs.
    Identity,
    /// Conjugation composition table.
    Klein,
    /// Conclusion checked on connections meeting the hypotheses.
    Witness,
    /// A violated hypothesis must break the conclusion.
    Negative,
    /// Two quantities must vanish together.
    Together,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    WitnessUnavailable,
    Inconclusive,
    NotApplicable,
}

impl Status {
    /// Whether the status lets a run exit cleanly.
    pub fn acceptable(self) -> bool {
        self != Status::Fail
    }
}

/// Which metric family a trial draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hermitian,
    Norden,
}

/// One trial's state: its dimension, index and private generator.
pub struct Trial {
    pub dim: usize,
    pub index: usize,
    pub rng: ChaCha8Rng,
}

impl Trial {
    pub fn new(seed: u64, dim: usize, index: usize, salt: u64) -> Trial {
        Trial {
            dim,
            index,
            rng: trial_rng(seed, dim, index, salt),
        }
    }

    fn spec(&self) -> GenSpec {
        GenSpec::new(self.index as u64, self.dim)
    }

    pub fn model(&mut self, family: Family) -> Result<ChartModel> {
        let spec = self.spec();
        match family {
            Family::Hermitian => hermitian_model(&spec, &mut self.rng),
            Family::Norden => norden_model(&spec, &mut self.rng),
        }
    }

    /// A Hermitian model with integrable `J` and closed `ω`.
    pub fn kahler(&mut self) -> Result<ChartModel> {
        let spec = self.spec();
        if self.dim == 2 {
            hermitian_model(&spec, &mut self.rng)
        } else if self.index % 2 == 0 {
            pullback_kahler_model(&spec, &mut self.rng)
        } else {
            kahler_potential_model(&spec, &mut self.rng)
        }
    }

    pub fn anti_kahler(&mut self) -> Result<ChartModel> {
        let spec = self.spec();
        pullback_anti_kahler_model(&spec, &mut self.rng)
    }

    pub fn points(&mut self, model: &ChartModel) -> Vec<Vec<f64>> {
        let s: u64 = self.rng.gen();
        sample_points(&model.domain, SAMPLES, s)
    }

    pub fn random_conn(&mut self) -> Conn {
        random_connection(&mut self.rng, self.dim, 2, 1.0).arc()
    }

    pub fn symmetric_conn(&mut self) -> Conn {
        symmetrized(self.random_conn())
    }

    /// The pointwise projection of a fresh random connection onto `set`.
    pub fn project(&mut self, model: &ChartModel, set: &[Constraint]) -> Arc<ProjectedConnection> {
        let reference = self.random_conn();
        project_connection(model, reference, set)
    }
}

/// What one trial produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub conclusion: Residual,
    /// Largest absolute hypothesis residual, for conditional entries.
    pub hypothesis: Option<f64>,
    /// The two magnitudes of a `Together` entry.
    pub pair: Option<(f64, f64)>,
    /// Extra named comparisons reported in the notes.
    pub side: Vec<(String, Residual)>,
}

impl Outcome {
    pub fn identity(conclusion: Residual) -> Self {
        Outcome {
            conclusion,
            ..Outcome::default()
        }
    }

    pub fn witness(conclusion: Residual, hypothesis: f64) -> Self {
        Outcome {
            conclusion,
            hypothesis: Some(hypothesis),
            ..Outcome::default()
        }
    }

    pub fn with_side(mut self, name: &str, r: Residual) -> Self {
        self.side.push((name.to_string(), r));
        self
    }
}

pub type Runner = Arc<dyn Fn(&mut Trial) -> Result<Outcome> + Send + Sync>;

/// A registry entry.
#[derive(Clone)]
pub struct Proposition {
    pub id: String,
    pub group: Group,
    pub form: Form,
    pub direction: String,
    pub tolerance: f64,
    pub min_dim: usize,
    /// Status reported when no trial yields a witness.
    pub without_witness: Status,
    pub run: Runner,
}

impl std::fmt::Debug for Proposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Proposition")
            .field("id", &self.id)
            .field("group", &self.group)
            .field("form", &self.form)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl Proposition {
    pub fn new(
        id: &str,
        group: Group,
        form: Form,
        direction: &str,
        tolerance: f64,
        run: impl Fn(&mut Trial) -> Result<Outcome> + Send + Sync + 'static,
    ) -> Self {
        Proposition {
            id: id.to_string(),
            group,
            form,
            direction: direction.to_string(),
            tolerance,
            min_dim: 2,
            without_witness: Status::WitnessUnavailable,
            run: Arc::new(run),
        }
    }

    pub fn min_dim(mut self, d: usize) -> Self {
        self.min_dim = d;
        self
    }

    pub fn without_witness(mut self, s: Status) -> Self {
        self.without_witness = s;
        self
    }

    /// `--only` matching: the id itself, or the id followed by a
    /// part marker such as `(ii)` or `:negative`.
    pub fn matches(&self, filter: &str) -> bool {
        match self.id.strip_prefix(filter) {
            Some("") => true,
            Some(rest) => filter.ends_with(':') || rest.starts_with('(') || rest.starts_with(':'),
            None => false,
        }
    }
}

/// Result of one entry in one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimResult {
    pub dim: usize,
    pub trials: usize,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_hypothesis_residual: Option<f64>,
    pub witnesses_found: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub group: Group,
    pub form: Form,
    pub direction: String,
    pub tolerance: f64,
    pub trials: usize,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_hypothesis_residual: Option<f64>,
    pub witnesses_found: usize,
    pub status: Status,
    pub dims: Vec<DimResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub entries: Vec<SuiteEntry>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn entry(&self, id: &str) -> Option<&SuiteEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn failures(&self) -> Vec<&SuiteEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail).collect()
    }
}

pub fn tolerances() -> BTreeMap<String, f64> {
    [
        ("kernel", KERNEL_TOL),
        ("identity", IDENTITY_TOL),
        ("hypothesis", HYPOTHESIS_TOL),
        ("conclusion", CONCLUSION_TOL),
        ("negative_floor", NEGATIVE_FLOOR),
        ("negative_fraction", NEGATIVE_FRACTION),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    /// Id filters; empty selects everything.
    pub only: Vec<String>,
}

impl SuiteOptions {
    pub fn new(seed: u64, trials: usize, dims: &[usize]) -> Self {
        SuiteOptions {
            seed,
            trials,
            dims: dims.to_vec(),
            only: vec![],
        }
    }

    pub fn only(mut self, ids: &[&str]) -> Self {
        self.only = ids.iter().map(|s| s.to_string()).collect();
        self
    }
}

/// The registry entries matched by `only`; an unmatched filter is an error
/// that lists the valid ids.
pub fn select(all: Vec<Proposition>, only: &[String]) -> Result<Vec<Proposition>> {
    if only.is_empty() {
        return Ok(all);
    }
    for f in only {
        if !all.iter().any(|p| p.matches(f)) {
            let ids: Vec<&str> = all.iter().map(|p| p.id.as_str()).collect();
            return Err(GeomError::Unsupported(format!(
                "unknown proposition id `{f}`; valid ids: {}",
                ids.join(", ")
            )));
        }
    }
    Ok(all.into_iter().filter(|p| only.iter().any(|f| p.matches(f))).collect())
}

fn run_trial(p: &Proposition, seed: u64, dim: usize, index: usize) -> Result<Outcome> {
    let salt = label_salt(&p.id);
    let mut last = None;
    for attempt in 0..RETRIES {
        let mut trial = Trial::new(seed, dim, index, salt ^ attempt.wrapping_mul(0x9e37_79b9));
        match (p.run)(&mut trial) {
            Ok(o) => return Ok(o),
            Err(e) => last = Some(e),
        }
    }
    Err(GeomError::Generation {
        attempts: RETRIES as usize,
        reason: last.map(|e| e.to_string()).unwrap_or_default(),
    })
}

fn fmt_e(v: f64) -> String {
    format!("{v:.3e}")
}

fn finite(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Folds the trials of one entry in one dimension into a result.
pub fn aggregate(p: &Proposition, dim: usize, outcomes: Vec<Result<Outcome>>) -> DimResult {
    let trials = outcomes.len();
    let mut notes = vec![];
    let mut ok = vec![];
    let mut errors = 0;
    for o in outcomes {
        match o {
            Ok(o) => ok.push(o),
            Err(e) => {
                if errors == 0 {
                    notes.push(format!("trial error: {e}"));
                }
                errors += 1;
            }
        }
    }
    if errors > 0 {
        notes.push(format!("{errors} of {trials} trials failed to run"));
    }
    let hyp_all = ok.iter().filter_map(|o| o.hypothesis).fold(None, |a: Option<f64>, h| {
        Some(a.map_or(h, |a| a.max(h)))
    });
    let usable: Vec<&Outcome> = ok
        .iter()
        .filter(|o| p.form == Form::Negative || o.hypothesis.is_none_or(|h| h <= HYPOTHESIS_TOL))
        .collect();
    let mut conclusion = Residual::new();
    for o in &usable {
        conclusion.merge(&o.conclusion);
    }
    let mut sides: BTreeMap<String, Residual> = BTreeMap::new();
    for o in &usable {
        for (name, r) in &o.side {
            sides.entry(name.clone()).or_default().merge(r);
        }
    }
    for (name, r) in &sides {
        notes.push(format!("{name}: {}", fmt_e(r.normalized())));
    }
    let witnesses_found = if matches!(p.form, Form::Witness | Form::Together) && hyp_all.is_some() {
        usable.len()
    } else {
        0
    };
    let max_hyp = if hyp_all.is_some() {
        if p.form == Form::Negative {
            ok.iter().filter_map(|o| o.hypothesis).reduce(f64::min)
        } else {
            usable.iter().filter_map(|o| o.hypothesis).reduce(f64::max).or(hyp_all)
        }
    } else {
        None
    };
    let (max_residual, mut status) = match p.form {
        Form::Identity | Form::Klein => {
            let r = conclusion.normalized();
            (r, if r <= p.tolerance { Status::Pass } else { Status::Fail })
        }
        Form::Witness => {
            if usable.is_empty() {
                notes.push(format!(
                    "no witness met the hypotheses within {}; smallest hypothesis residual {}",
                    fmt_e(HYPOTHESIS_TOL),
                    fmt_e(ok.iter().filter_map(|o| o.hypothesis).fold(f64::INFINITY, f64::min))
                ));
                (0.0, p.without_witness)
            } else {
                if usable.len() < ok.len() {
                    notes.push(format!("{} of {} trials yielded witnesses", usable.len(), ok.len()));
                }
                let r = conclusion.normalized();
                (r, if r <= p.tolerance { Status::Pass } else { Status::Fail })
            }
        }
        Form::Negative => {
            let mut broken = 0;
            let mut weakest = f64::INFINITY;
            for o in &ok {
                let c = o.conclusion.absolute();
                weakest = weakest.min(c);
                if c >= NEGATIVE_FLOOR && o.hypothesis.is_none_or(|h| h >= NEGATIVE_FLOOR) {
                    broken += 1;
                }
            }
            notes.push(format!(
                "{broken} of {} trials broke the conclusion by at least {}; max_residual is the smallest conclusion residual",
                ok.len(),
                fmt_e(NEGATIVE_FLOOR)
            ));
            let need = (NEGATIVE_FRACTION * trials as f64).ceil() as usize;
            (weakest, if broken >= need { Status::Pass } else { Status::Fail })
        }
        Form::Together => {
            let tol = p.tolerance;
            let mut disagree = 0;
            let mut both_zero = 0;
            for o in &usable {
                if let Some((a, b)) = o.pair {
                    let small = a <= tol && b <= tol;
                    let large = a >= 10.0 * tol && b >= 10.0 * tol;
                    if small {
                        both_zero += 1;
                    }
                    if !small && !large {
                        disagree += 1;
                    }
                }
            }
            notes.push(format!(
                "{} trials: {both_zero} with both sums vanishing, {disagree} disagreeing",
                usable.len()
            ));
            let r = if conclusion.worst_point.is_empty() { 0.0 } else { conclusion.normalized() };
            let pass = disagree == 0 && !usable.is_empty() && r <= tol;
            (r, if pass { Status::Pass } else { Status::Fail })
        }
    };
    if errors > 0 {
        status = Status::Fail;
    }
    DimResult {
        dim,
        trials,
        max_residual: finite(max_residual),
        max_hypothesis_residual: max_hyp.map(finite),
        witnesses_found,
        status,
        notes,
    }
}

fn not_applicable(p: &Proposition, dim: usize) -> DimResult {
    DimResult {
        dim,
        trials: 0,
        max_residual: 0.0,
        max_hypothesis_residual: None,
        witnesses_found: 0,
        status: Status::NotApplicable,
        notes: vec![format!("needs dimension at least {}", p.min_dim)],
    }
}

fn combine(p: &Proposition, dims: Vec<DimResult>) -> SuiteEntry {
    let statuses: Vec<Status> = dims.iter().map(|d| d.status).collect();
    let status = if statuses.contains(&Status::Fail) {
        Status::Fail
    } else if statuses.contains(&Status::Pass) {
        Status::Pass
    } else if statuses.contains(&Status::Inconclusive) {
        Status::Inconclusive
    } else if statuses.contains(&Status::WitnessUnavailable) {
        Status::WitnessUnavailable
    } else {
        Status::NotApplicable
    };
    let max_residual = dims.iter().map(|d| d.max_residual).fold(0.0, f64::max);
    let max_hyp = dims
        .iter()
        .filter_map(|d| d.max_hypothesis_residual)
        .reduce(if p.form == Form::Negative { f64::min } else { f64::max });
    SuiteEntry {
        id: p.id.clone(),
        group: p.group,
        form: p.form,
        direction: p.direction.clone(),
        tolerance: if p.form == Form::Negative { NEGATIVE_FLOOR } else { p.tolerance },
        trials: dims.iter().map(|d| d.trials).sum(),
        max_residual,
        max_hypothesis_residual: max_hyp,
        witnesses_found: dims.iter().map(|d| d.witnesses_found).sum(),
        status,
        dims,
    }
}

/// Runs `f` on a pool capped by `QSG_THREADS` when it is set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("QSG_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

fn validate(opts: &SuiteOptions) -> Result<()> {
    if opts.trials == 0 {
        return Err(GeomError::precondition("trials must be at least 1"));
    }
    if opts.dims.is_empty() {
        return Err(GeomError::precondition("at least one dimension is required"));
    }
    if let Some(d) = opts.dims.iter().find(|d| !SUPPORTED_DIMS.contains(d)) {
        return Err(GeomError::precondition(format!("dimension {d} is not one of 2, 4, 6")));
    }
    Ok(())
}

/// Runs the given entries; trials run in parallel and the report is
/// independent of scheduling.
pub fn run_entries(props: &[Proposition], opts: &SuiteOptions) -> Result<SuiteReport> {
    validate(opts)?;
    let mut dims = opts.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut jobs = vec![];
    for (pi, p) in props.iter().enumerate() {
        for &d in &dims {
            if d >= p.min_dim {
                for t in 0..opts.trials {
                    jobs.push((pi, d, t));
                }
            }
        }
    }
    let outcomes: Vec<Result<Outcome>> = with_pool(|| {
        jobs.par_iter()
            .map(|&(pi, d, t)| run_trial(&props[pi], opts.seed, d, t))
            .collect()
    });
    let mut grouped: BTreeMap<(usize, usize), Vec<Result<Outcome>>> = BTreeMap::new();
    for (&(pi, d, _), o) in jobs.iter().zip(outcomes) {
        grouped.entry((pi, d)).or_default().push(o);
    }
    let mut entries: Vec<SuiteEntry> = props
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let per_dim = dims
                .iter()
                .map(|&d| match grouped.remove(&(pi, d)) {
                    Some(os) => aggregate(p, d, os),
                    None => not_applicable(p, d),
                })
                .collect();
            combine(p, per_dim)
        })
        .collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = entries.iter().all(|e| e.status.acceptable());
    Ok(SuiteReport {
        seed: opts.seed,
        trials: opts.trials,
        dims,
        tolerances: tolerances(),
        entries,
        passed,
    })
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let props = select(registry(), &opts.only)?;
    run_entries(&props, opts)
}

pub fn run_full_suite(seed: u64, trials: usize, dims: &[usize]) -> Result<SuiteReport> {
    run_suite(&SuiteOptions::new(seed, trials, dims))
}

fn run_group(group: Group, seed: u64, trials: usize, dims: &[usize]) -> Result<SuiteReport> {
    let props: Vec<Proposition> = registry().into_iter().filter(|p| p.group == group).collect();
    run_entries(&props, &SuiteOptions::new(seed, trials, dims))
}

/// Entries about `Λ` and a connection.
pub fn verify_structure(seed: u64, trials: usize, dims: &[usize]) -> Result<SuiteReport> {
    run_group(Group::Structure, seed, trials, dims)
}

pub fn verify_hermitian(seed: u64, trials: usize, dims: &[usize]) -> Result<SuiteReport> {
    run_group(Group::Hermitian, seed, trials, dims)
}

pub fn verify_norden(seed: u64, trials: usize, dims: &[usize]) -> Result<SuiteReport> {
    run_group(Group::Norden, seed, trials, dims)
}

#[cfg(test)]
mod tests {
    use super::kernels::At;
    use super::*;
    use crate::calculus::exterior_d2;
    use crate::fields::{Tensor, Valence};
    use crate::generate::models::{flat_hermitian, flat_norden};
    use crate::predicates::quasi_kahler_norden_sum;

    const EXPECTED: &[&str] = &[
        "GAD1(i)",
        "GAD1(i):negative",
        "GAD1(ii)",
        "GAD1(iii)",
        "GAD15",
        "GAD15:corollary",
        "GAD15:identity",
        "GAD16",
        "GAD17",
        "GAD17:corollary",
        "anti-pro3(i)",
        "anti-pro3(ii)",
        "anti-pro3(iii)",
        "anti-pro3(iv)",
        "anti-pro3(v)",
        "anti-pro3(vi)",
        "anti-pro5(i)",
        "anti-pro5(ii)",
        "anti-pro5(iii)",
        "anti-pro5(iv)",
        "average-complex",
        "b-tensor",
        "cor4(i)",
        "cor4(i):negative",
        "cor4(ii)",
        "cor4(iii)",
        "cor7(i)",
        "cor7(ii)",
        "cor7(ii):negative",
        "cor7(iii)",
        "cor7(iv)",
        "cor8",
        "cor8:closed-J",
        "cyclic-sum",
        "cyclic-sum:identity",
        "lem1",
        "lem2",
        "lem3",
        "pro12(i)",
        "pro12(ii)",
        "pro12(iii)",
        "pro12(iv)",
        "pro14",
        "pro14:identity",
        "pro2",
        "pro2:corollary",
        "pro2:displayed-identity",
        "pro2:negative",
        "pro3(i)",
        "pro3(ii)",
        "pro3(iii)",
        "pro3(iv)",
        "pro3(v)",
        "pro3(vi)",
        "pro4(i)",
        "pro4(ii)",
        "pro4(iii)",
        "pro4(iv)",
        "pro5(i)",
        "pro5(ii)",
        "pro5(iii)",
        "pro5(iv)",
        "teo1",
        "teo1:norden",
        "teo2",
        "teo5",
        "teo5:equivalence",
        "theolast",
        "torsion-compatibility",
        "two-of-three(a)",
        "two-of-three(b)",
        "two-of-three(c)",
        "vishnevskii",
    ];

    #[test]
    fn registry_is_complete_and_sorted() {
        let ids: Vec<String> = registry().into_iter().map(|p| p.id).collect();
        assert_eq!(ids, EXPECTED);
    }

    #[test]
    fn only_filter_respects_part_markers() {
        let sel = select(registry(), &["GAD1".to_string()]).unwrap();
        let ids: Vec<&str> = sel.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["GAD1(i)", "GAD1(i):negative", "GAD1(ii)", "GAD1(iii)"]);
        let sel = select(registry(), &["pro3(ii)".to_string()]).unwrap();
        assert_eq!(sel.len(), 1);
        assert!(select(registry(), &["pro99".to_string()]).is_err());
    }

    #[test]
    fn options_are_validated() {
        assert!(run_full_suite(0, 0, &[2]).is_err());
        assert!(run_full_suite(0, 1, &[3]).is_err());
        assert!(run_full_suite(0, 1, &[]).is_err());
    }

    #[test]
    fn smoke_run_reports_every_entry_once() {
        let r = run_full_suite(0, 2, &[2]).unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, EXPECTED);
        assert_eq!(r.entry("pro2:negative").unwrap().status, Status::NotApplicable);
        assert!(r.passed, "{:?}", r.failures());
    }

    #[test]
    fn reports_are_deterministic_across_thread_counts() {
        let opts = SuiteOptions::new(7, 3, &[2, 4]).only(&["GAD1", "pro4", "teo5", "two-of-three"]);
        let a = serde_json::to_string(&run_suite(&opts).unwrap()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| serde_json::to_string(&run_suite(&opts).unwrap()).unwrap());
        assert_eq!(a, b);
    }

    fn fake(hyp: Option<f64>, diff: f64) -> Result<Outcome> {
        let mut r = Residual::new();
        r.scalar(diff, 0.0, &[0.0]);
        Ok(Outcome {
            conclusion: r,
            hypothesis: hyp,
            ..Outcome::default()
        })
    }

    fn prop(form: Form) -> Proposition {
        Proposition::new("x", Group::Structure, form, "", 1e-6, |_t: &mut Trial| Ok(Outcome::default()))
    }

    #[test]
    fn witness_aggregation_ignores_unmet_hypotheses() {
        let p = prop(Form::Witness);
        let d = aggregate(&p, 2, vec![fake(Some(1e-9), 1e-8), fake(Some(1e-2), 5.0)]);
        assert_eq!(d.status, Status::Pass);
        assert_eq!(d.witnesses_found, 1);
        let d = aggregate(&p, 2, vec![fake(Some(1e-2), 0.0)]);
        assert_eq!(d.status, Status::WitnessUnavailable);
        let d = aggregate(&p.clone().without_witness(Status::Inconclusive), 2, vec![fake(Some(1.0), 0.0)]);
        assert_eq!(d.status, Status::Inconclusive);
        let d = aggregate(&p, 2, vec![fake(Some(0.0), 1e-3)]);
        assert_eq!(d.status, Status::Fail);
    }

    #[test]
    fn negative_aggregation_needs_ninety_percent() {
        let p = prop(Form::Negative);
        let mut os: Vec<Result<Outcome>> = (0..9).map(|_| fake(Some(1.0), 1.0)).collect();
        os.push(fake(Some(1.0), 0.0));
        assert_eq!(aggregate(&p, 2, os).status, Status::Pass);
        let mut os: Vec<Result<Outcome>> = (0..8).map(|_| fake(Some(1.0), 1.0)).collect();
        os.push(fake(Some(1.0), 0.0));
        os.push(fake(Some(1e-5), 1.0));
        assert_eq!(aggregate(&p, 2, os).status, Status::Fail);
    }

    #[test]
    fn trial_errors_fail_the_entry() {
        let p = prop(Form::Identity);
        let d = aggregate(&p, 2, vec![Err(GeomError::precondition("boom"))]);
        assert_eq!(d.status, Status::Fail);
        assert!(d.notes[0].contains("boom"));
    }

    #[test]
    fn flat_models_satisfy_everything_exactly() {
        let zero = Tensor::zeros(4, Valence::VECTOR_2FORM);
        let x = [0.1, -0.2, 0.3, 0.05];
        let at = At::new(&flat_hermitian(4), &x).unwrap();
        assert_eq!(at.d_j(&zero).unwrap().max_abs(), 0.0);
        assert_eq!(at.torsion(&at.lam(&zero).unwrap()).max_abs(), 0.0);
        assert_eq!(at.nijenhuis().max_abs(), 0.0);
        assert_eq!(exterior_d2(&at.f).unwrap().max_abs(), 0.0);
        let at = At::new(&flat_norden(4), &x).unwrap();
        assert_eq!(at.tachibana().max_abs(), 0.0);
        assert_eq!(kernels::torsion_plus_b(&at, &zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn anti_kahler_models_make_both_cyclic_sums_vanish() {
        let mut t = Trial::new(0, 4, 0, 11);
        let m = t.anti_kahler().unwrap();
        for x in t.points(&m).iter().take(5) {
            let at = At::new(&m, x).unwrap();
            assert!(kernels::cyclic(&at.tachibana()).max_abs() < 1e-9);
            assert!(quasi_kahler_norden_sum(&at.frame).unwrap().max_abs() < 1e-9);
        }
    }
}
