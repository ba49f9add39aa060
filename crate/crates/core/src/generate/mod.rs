//! Random structures satisfying prescribed hypotheses, closed-form
//! connection recipes, pointwise projection witnesses and polynomial
//! least-squares synthesis.

pub mod constraints;
pub mod models;
pub mod projection;
pub mod recipes;
pub mod rng;
pub mod synthesis;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub use constraints::{constraint_residual, constraint_residuals, ConstraintReport};
pub use models::{
    flat_hermitian, flat_norden, gen_almost_complex, gen_hermitian_metric, gen_norden_metric, hermitian_model,
    kahler_potential_model, norden_model, pullback_anti_kahler_model, pullback_kahler_model, random_connection,
    ModelKind,
};
pub use projection::{project_connection, ProjectedConnection};
pub use recipes::{gen_connection, teo5_witness};
pub use rng::{trial_rng, trial_seed};
pub use synthesis::{synthesize_connection, Ansatz, SynthesisOptions, SynthesisResult};

/// Conditions that are affine in the Christoffel symbols once the model's
/// metric and almost complex structure are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    TorsionFree,
    JInvariantTorsion,
    #[serde(rename = "d_closed_J")]
    DClosedJ,
    QuasiStatisticalG,
    QuasiStatisticalH,
    #[serde(rename = "codazzi_J")]
    CodazziJ,
    ComplexConnection,
    VishnevskiiZero,
    /// `(∇*, Λ)` Codazzi-coupled, `∇*` the metric conjugate.
    #[serde(rename = "codazzi_J_conjugate")]
    CodazziJConjugate,
    /// `∇*ω = 0` (`∇♯ℏ = 0` for Norden models).
    ConjugateParallelForm,
    /// `h(T(Λ1, 3), 2) + h((∇_2Λ)3, 1) = 0`.
    AntiKahlerCancellation,
}

impl Constraint {
    pub const ALL: [Constraint; 11] = [
        Constraint::TorsionFree,
        Constraint::JInvariantTorsion,
        Constraint::DClosedJ,
        Constraint::QuasiStatisticalG,
        Constraint::QuasiStatisticalH,
        Constraint::CodazziJ,
        Constraint::ComplexConnection,
        Constraint::VishnevskiiZero,
        Constraint::CodazziJConjugate,
        Constraint::ConjugateParallelForm,
        Constraint::AntiKahlerCancellation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::TorsionFree => "torsion_free",
            Constraint::JInvariantTorsion => "j_invariant_torsion",
            Constraint::DClosedJ => "d_closed_J",
            Constraint::QuasiStatisticalG => "quasi_statistical_g",
            Constraint::QuasiStatisticalH => "quasi_statistical_h",
            Constraint::CodazziJ => "codazzi_J",
            Constraint::ComplexConnection => "complex_connection",
            Constraint::VishnevskiiZero => "vishnevskii_zero",
            Constraint::CodazziJConjugate => "codazzi_J_conjugate",
            Constraint::ConjugateParallelForm => "conjugate_parallel_form",
            Constraint::AntiKahlerCancellation => "anti_kahler_cancellation",
        }
    }

    pub fn needs_j(self) -> bool {
        !matches!(
            self,
            Constraint::TorsionFree | Constraint::QuasiStatisticalG | Constraint::QuasiStatisticalH
        )
    }

    pub fn needs_metric(self) -> bool {
        matches!(
            self,
            Constraint::QuasiStatisticalG
                | Constraint::QuasiStatisticalH
                | Constraint::CodazziJConjugate
                | Constraint::ConjugateParallelForm
                | Constraint::AntiKahlerCancellation
        )
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraint {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        Constraint::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                GeomError::Unsupported(format!(
                    "unknown constraint `{s}`; expected one of {}",
                    Constraint::ALL.map(|c| c.name()).join(", ")
                ))
            })
    }
}

pub fn parse_constraints(list: &str) -> Result<BTreeSet<Constraint>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Constraint::from_str)
        .collect()
}

pub fn constraint_list(set: &BTreeSet<Constraint>) -> String {
    set.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
}

/// Parameters of a randomized construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub dimension: usize,
    pub degree: u32,
    pub coef_bound: f64,
    #[serde(default)]
    pub constraints: BTreeSet<Constraint>,
}

impl GenSpec {
    pub fn new(seed: u64, dimension: usize) -> Self {
        GenSpec {
            seed,
            dimension,
            degree: 2,
            coef_bound: 0.5,
            constraints: BTreeSet::new(),
        }
    }

    pub fn with_constraints(mut self, cs: &[Constraint]) -> Self {
        self.constraints = cs.iter().copied().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 || self.dimension % 2 != 0 {
            return Err(GeomError::shape(format!(
                "dimension must be even and at least 2, got {}",
                self.dimension
            )));
        }
        if !(self.coef_bound > 0.0 && self.coef_bound.is_finite()) {
            return Err(GeomError::precondition("coef_bound must be positive"));
        }
        Ok(())
    }
}
