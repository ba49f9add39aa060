//! Polynomial least-squares witnesses.
//!
//! The unknowns are the coefficients of `Γ^k_{ij}` (raw ansatz) or of
//! `C_{ijl}` with `Γ^k_{ij} = b^{kl} C_{ijl}` (lowered ansatz), over all
//! monomials up to a degree. Every constraint is affine in the Christoffel
//! values at a point, so each fitting point contributes a block of linear
//! rows.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::constraints::{constraint_residuals, stacked_residual, ConstraintReport};
use super::recipes::gen_connection;
use super::rng::trial_rng;
use super::{Constraint, GenSpec};
use crate::calculus::invert_bilinear;
use crate::connections::{Conn, FnConnection, PolyConnection};
use crate::error::{GeomError, Result};
use crate::fields::{monomials_up_to, sample_points, Field, PolyExpr, SmoothTensorField, Tensor, TensorField, Valence};
use crate::model::ChartModel;

/// Residual below which a witness is usable.
pub const WITNESS_TOL: f64 = 1e-7;
/// Residual above which no witness was found.
pub const NO_WITNESS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    /// Polynomial Christoffel symbols.
    Raw,
    /// Polynomial lowered symbols `C_{ijl} = b_{kl} Γ^k_{ij}`.
    Lowered,
    /// Raw first, lowered as well when a metric is present and raw misses
    /// the witness tolerance.
    Auto,
}

#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    pub degree: u32,
    pub seed: u64,
    pub ansatz: Ansatz,
    /// Fitting points; chosen from the system size when `None`.
    pub fit_points: Option<usize>,
    pub holdout_points: usize,
    pub regularization: f64,
    pub refinement_steps: usize,
    /// Compare against the closed-form recipe and keep the better one.
    pub use_recipe: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            degree: 2,
            seed: 0,
            ansatz: Ansatz::Auto,
            fit_points: None,
            holdout_points: 25,
            regularization: 1e-10,
            refinement_steps: 2,
            use_recipe: true,
        }
    }
}

impl SynthesisOptions {
    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
    pub fn with_ansatz(mut self, ansatz: Ansatz) -> Self {
        self.ansatz = ansatz;
        self
    }
}

/// The fitted polynomial data. `field` has valence (1,2) for the raw ansatz
/// and (0,3) for the lowered one.
#[derive(Debug, Clone)]
pub struct PolynomialGamma {
    pub ansatz: Ansatz,
    pub field: SmoothTensorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Polynomial,
    Recipe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessQuality {
    Usable,
    LowQuality,
    NoWitness,
}

#[derive(Clone)]
pub struct SynthesisResult {
    pub connection: Conn,
    pub source: WitnessSource,
    /// Best polynomial fit, kept even when the recipe wins.
    pub polynomial: PolynomialGamma,
    pub polynomial_residual: f64,
    pub polynomial_constraint_residuals: Vec<ConstraintReport>,
    /// Max over `constraint_residuals`, measured on held-out points.
    pub residual: f64,
    pub constraint_residuals: Vec<ConstraintReport>,
    pub iterations: usize,
}

impl SynthesisResult {
    pub fn quality(&self) -> WitnessQuality {
        quality_of(self.residual)
    }
}

impl std::fmt::Debug for SynthesisResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SynthesisResult")
            .field("source", &self.source)
            .field("ansatz", &self.polynomial.ansatz)
            .field("residual", &self.residual)
            .field("constraint_residuals", &self.constraint_residuals)
            .field("iterations", &self.iterations)
            .finish()
    }
}

pub fn quality_of(residual: f64) -> WitnessQuality {
    if residual <= WITNESS_TOL {
        WitnessQuality::Usable
    } else if residual <= NO_WITNESS_TOL {
        WitnessQuality::LowQuality
    } else {
        WitnessQuality::NoWitness
    }
}

/// `Γ^k_{ij} = b^{kl} C_{ijl}` evaluated lazily.
pub fn raise_lowered(b: Field, lowered: Arc<SmoothTensorField>) -> Conn {
    let d = lowered.dim();
    FnConnection::arc(d, move |x| {
        let inv = invert_bilinear(&b.value(x)?, x)?;
        let c = lowered.value(x)?;
        Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
            (0..d).map(|l| inv[(ix[0], l)] * c.at3(ix[1], ix[2], l)).sum()
        }))
    })
}

impl PolynomialGamma {
    pub fn connection(&self, model: &ChartModel) -> Result<Conn> {
        match self.ansatz {
            Ansatz::Lowered => Ok(raise_lowered(model.metric_field()?, Arc::new(self.field.clone()))),
            _ => Ok(PolyConnection::new(self.field.clone())?.arc()),
        }
    }
}

fn monomial_values(monos: &[Vec<u32>], x: &[f64]) -> Vec<f64> {
    monos
        .iter()
        .map(|e| e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product())
        .collect()
}

/// Rows `A` and right-hand side `b` at one point, in terms of the pointwise
/// unknowns (Γ or C values).
fn point_system(
    set: &BTreeSet<Constraint>,
    model: &ChartModel,
    x: &[f64],
    ansatz: Ansatz,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d = model.dim();
    let n = d * d * d;
    let frame = model.frame(x)?;
    let zero = Tensor::zeros(d, Valence::VECTOR_2FORM);
    let r0 = stacked_residual(set, &zero, &frame)?;
    let m = r0.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for c in 0..n {
        let mut probe = zero.clone();
        probe.data_mut()[c] = 1.0;
        let rc = stacked_residual(set, &probe, &frame)?;
        for row in 0..m {
            a[(row, c)] = rc[row] - r0[row];
        }
    }
    if ansatz == Ansatz::Lowered {
        let inv = invert_bilinear(&frame.b()?.value(), x)?;
        let mut lowered = DMatrix::<f64>::zeros(m, n);
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let col = (i * d + j) * d + l;
                    for k in 0..d {
                        let w = inv[(k, l)];
                        if w != 0.0 {
                            let src = (k * d + i) * d + j;
                            for row in 0..m {
                                lowered[(row, col)] += w * a[(row, src)];
                            }
                        }
                    }
                }
            }
        }
        a = lowered;
    }
    Ok((a, -DVector::from_vec(r0)))
}

struct Fit {
    poly: PolynomialGamma,
    conn: Conn,
    reports: Vec<ConstraintReport>,
    residual: f64,
    iterations: usize,
}

fn fit(
    model: &ChartModel,
    set: &BTreeSet<Constraint>,
    opts: &SynthesisOptions,
    ansatz: Ansatz,
    holdout: &[Vec<f64>],
) -> Result<Fit> {
    let d = model.dim();
    let n = d * d * d;
    let monos = monomials_up_to(d, opts.degree);
    let nm = monos.len();
    let unknowns = n * nm;

    let probe_rows = point_system(set, model, &holdout[0], ansatz)?.0.nrows().max(1);
    let n_fit = opts
        .fit_points
        .unwrap_or_else(|| (2 * unknowns).div_ceil(probe_rows) + 4);
    let points = sample_points(&model.domain, n_fit, opts.seed ^ 0x5eed_f17);

    let mut blocks = Vec::with_capacity(points.len());
    for x in &points {
        let (a, b) = point_system(set, model, x, ansatz)?;
        let mv = monomial_values(&monos, x);
        let mut big = DMatrix::<f64>::zeros(a.nrows(), unknowns);
        for c in 0..n {
            for (mu, &v) in mv.iter().enumerate() {
                big.column_mut(c * nm + mu).axpy(v, &a.column(c), 0.0);
            }
        }
        blocks.push((big, b));
    }
    let rows: usize = blocks.iter().map(|(a, _)| a.nrows()).sum();
    let mut a = DMatrix::<f64>::zeros(rows, unknowns);
    let mut b = DVector::<f64>::zeros(rows);
    let mut r = 0;
    for (ab, bb) in &blocks {
        a.rows_mut(r, ab.nrows()).copy_from(ab);
        b.rows_mut(r, bb.nrows()).copy_from(bb);
        r += ab.nrows();
    }

    let mut normal = a.tr_mul(&a);
    let scale = normal.diagonal().max().max(1.0);
    for i in 0..unknowns {
        normal[(i, i)] += opts.regularization * scale;
    }
    let chol = normal
        .cholesky()
        .ok_or_else(|| GeomError::Evaluation("normal equations are not positive definite".into()))?;
    let mut coef = chol.solve(&a.tr_mul(&b));
    let mut iterations = 1;
    for _ in 0..opts.refinement_steps {
        let resid = &b - &a * &coef;
        coef += chol.solve(&a.tr_mul(&resid));
        iterations += 1;
    }

    let comps: Vec<PolyExpr> = (0..n)
        .map(|c| {
            PolyExpr::from_pairs(
                d,
                monos
                    .iter()
                    .enumerate()
                    .map(|(mu, e)| (e.clone(), coef[c * nm + mu]))
                    .collect(),
            )
        })
        .collect();
    let valence = if ansatz == Ansatz::Lowered {
        Valence::TRILINEAR
    } else {
        Valence::VECTOR_2FORM
    };
    let poly = PolynomialGamma {
        ansatz,
        field: SmoothTensorField::new(d, valence, comps)?,
    };
    let conn = poly.connection(model)?;
    let reports = constraint_residuals(model, conn.as_ref(), set, holdout)?;
    let residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(Fit {
        poly,
        conn,
        reports,
        residual,
        iterations,
    })
}

/// Least-squares polynomial witness for `set` on `model`. The residual is
/// the largest absolute constraint violation on held-out points disjoint
/// from the fitting set. When a closed-form recipe exists and does at least
/// as well, its connection is returned instead.
pub fn synthesize_connection(
    model: &ChartModel,
    set: &BTreeSet<Constraint>,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    if opts.holdout_points == 0 {
        return Err(GeomError::precondition("at least one held-out point is required"));
    }
    let holdout = sample_points(&model.domain, opts.holdout_points, opts.seed ^ 0x401d_0u64);
    let has_metric = model.metric.is_some();
    let mut best = match opts.ansatz {
        Ansatz::Lowered => fit(model, set, opts, Ansatz::Lowered, &holdout)?,
        _ => fit(model, set, opts, Ansatz::Raw, &holdout)?,
    };
    if opts.ansatz == Ansatz::Auto && has_metric && best.residual > WITNESS_TOL {
        let lowered = fit(model, set, opts, Ansatz::Lowered, &holdout)?;
        if lowered.residual < best.residual {
            best = lowered;
        }
    }

    let mut result = SynthesisResult {
        connection: best.conn.clone(),
        source: WitnessSource::Polynomial,
        polynomial: best.poly,
        polynomial_residual: best.residual,
        polynomial_constraint_residuals: best.reports.clone(),
        residual: best.residual,
        constraint_residuals: best.reports,
        iterations: best.iterations,
    };

    if opts.use_recipe {
        let mut spec = GenSpec::new(opts.seed, model.dim());
        spec.degree = opts.degree.max(1);
        spec.constraints = set.clone();
        let mut rng = trial_rng(opts.seed, model.dim(), 0, super::rng::label_salt("recipe"));
        if let Ok(recipe) = gen_connection(&spec, &mut rng, model) {
            if let Ok(reports) = constraint_residuals(model, recipe.as_ref(), set, &holdout) {
                let res = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
                if res <= result.residual {
                    result.connection = recipe;
                    result.source = WitnessSource::Recipe;
                    result.residual = res;
                    result.constraint_residuals = reports;
                }
            }
        }
    }
    Ok(result)
}
