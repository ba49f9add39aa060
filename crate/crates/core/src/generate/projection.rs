//! Pointwise witnesses: at each point the constraints are affine in the
//! Christoffel values, so the nearest feasible connection to a reference
//! is one minimum-norm least-squares solve.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use super::constraints::stacked_residual;
use super::Constraint;
use crate::connections::{Conn, Connection};
use crate::error::Result;
use crate::fields::{Tensor, Valence};
use crate::model::{ChartModel, PointFrame};

/// Projects `reference` onto the affine set cut out by `set` at one point.
/// Returns the projected values and the remaining max constraint residual.
pub fn project_at(set: &BTreeSet<Constraint>, reference: &Tensor, frame: &PointFrame) -> Result<(Tensor, f64)> {
    let d = reference.dim();
    let n = d * d * d;
    let r0 = stacked_residual(set, reference, frame)?;
    let m = r0.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for c in 0..n {
        let mut probe = reference.clone();
        probe.data_mut()[c] += 1.0;
        let rc = stacked_residual(set, &probe, frame)?;
        for row in 0..m {
            a[(row, c)] = rc[row] - r0[row];
        }
    }
    let solver = MinNorm::new(&a);
    let mut out = reference.clone();
    let mut r = DVector::from_vec(r0);
    for _ in 0..3 {
        let delta = solver.solve(&(-&r));
        for (v, dv) in out.data_mut().iter_mut().zip(delta.iter()) {
            *v += dv;
        }
        r = DVector::from_vec(stacked_residual(set, &out, frame)?);
        if r.amax() <= 1e-14 {
            break;
        }
    }
    Ok((out, r.amax()))
}

/// Minimum-norm least-squares solves `A δ ≈ b` through the eigensystem
/// of `A Aᵀ`, dropping directions below a relative cutoff.
struct MinNorm {
    a: DMatrix<f64>,
    vecs: DMatrix<f64>,
    inv: DVector<f64>,
}

impl MinNorm {
    fn new(a: &DMatrix<f64>) -> Self {
        let gram = a * a.transpose();
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.amax().max(1e-300);
        let inv = eig.eigenvalues.map(|l| if l > 1e-22 * top { 1.0 / l } else { 0.0 });
        MinNorm {
            a: a.clone(),
            vecs: eig.eigenvectors,
            inv,
        }
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self.vecs.transpose() * b;
        let y = y.component_mul(&self.inv);
        self.a.transpose() * (&self.vecs * y)
    }
}

/// A connection whose value at every point is the projection of a
/// reference connection onto the constraint set. Values are memoized.
pub struct ProjectedConnection {
    model: ChartModel,
    reference: Conn,
    set: BTreeSet<Constraint>,
    memo: Mutex<HashMap<Vec<u64>, (Tensor, f64)>>,
}

impl ProjectedConnection {
    pub fn new(model: ChartModel, reference: Conn, set: BTreeSet<Constraint>) -> Self {
        ProjectedConnection {
            model,
            reference,
            set,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Projected values and the residual left at `x`.
    pub fn project(&self, x: &[f64]) -> Result<(Tensor, f64)> {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let frame = self.model.frame(x)?;
        let out = project_at(&self.set, &self.reference.christoffel(x)?, &frame)?;
        self.memo.lock().expect("memo lock").insert(key, out.clone());
        Ok(out)
    }

    /// Worst leftover residual over the points.
    pub fn max_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut m = 0.0_f64;
        for x in points {
            m = m.max(self.project(x)?.1);
        }
        Ok(m)
    }
}

impl Connection for ProjectedConnection {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn christoffel(&self, x: &[f64]) -> Result<Tensor> {
        Ok(self.project(x)?.0)
    }
}

/// Convenience wrapper returning the projected connection as a `Conn`.
pub fn project_connection(model: &ChartModel, reference: Conn, set: &[Constraint]) -> Arc<ProjectedConnection> {
    Arc::new(ProjectedConnection::new(
        model.clone(),
        reference,
        set.iter().copied().collect(),
    ))
}

/// A zero (1,2) tensor of the model's dimension.
pub fn zero_gamma(dim: usize) -> Tensor {
    Tensor::zeros(dim, Valence::VECTOR_2FORM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample_points;
    use crate::generate::models::{default_domain, hermitian_model, norden_model, pullback_kahler_model};
    use crate::generate::{constraint_residuals, GenSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_satisfies_feasible_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spec = GenSpec::new(0, 4);
        let m = hermitian_model(&spec, &mut rng).unwrap();
        let pts = sample_points(&default_domain(4), 6, 1);
        for set in [
            vec![Constraint::QuasiStatisticalG],
            vec![Constraint::DClosedJ],
            vec![Constraint::ComplexConnection],
        ] {
            let p = project_connection(&m, m.connection().unwrap(), &set);
            let reps = constraint_residuals(&m, p.as_ref(), &set.iter().copied().collect(), &pts).unwrap();
            for r in reps {
                assert!(r.residual < 1e-9, "{set:?}: {r:?}");
            }
        }
    }

    #[test]
    fn joint_hypotheses_on_kahler_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = pullback_kahler_model(&GenSpec::new(0, 4), &mut rng).unwrap();
        let pts = sample_points(&default_domain(4), 4, 1);
        let set = [Constraint::QuasiStatisticalG, Constraint::DClosedJ];
        let p = project_connection(&m, m.connection().unwrap(), &set);
        assert!(p.max_residual(&pts).unwrap() < 1e-9);
    }

    #[test]
    fn projection_on_norden_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = norden_model(&GenSpec::new(0, 4), &mut rng).unwrap();
        let pts = sample_points(&default_domain(4), 4, 1);
        let set = [Constraint::QuasiStatisticalH, Constraint::DClosedJ];
        let p = project_connection(&m, m.connection().unwrap(), &set);
        assert!(p.max_residual(&pts).unwrap() < 1e-9);
    }
}
