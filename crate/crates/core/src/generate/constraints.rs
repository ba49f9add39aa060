//! Pointwise evaluation of the affine constraint vocabulary.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::calculus::{covariant_derivative, torsion};
use crate::connections::{conjugate_bilinear_at, Connection};
use crate::error::{GeomError, Result};
use crate::fields::{Tensor, Valence};
use crate::model::{ChartModel, PointFrame};
use crate::structures::{self, MetricFlavor};

/// `(∇_{ΛX}Λ)Y − Λ(∇_XΛ)Y` on the coordinate frame. It vanishes whenever the
/// Vishnevskii operator does.
pub fn vishnevskii_defect(gamma: &Tensor, j: &crate::fields::TensorJet) -> Result<Tensor> {
    let d = gamma.dim();
    let nj = covariant_derivative(gamma, j)?;
    let jv = j.value();
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (a, i, k) = (ix[0], ix[1], ix[2]);
        (0..d)
            .map(|m| jv.at2(m, i) * nj.at3(a, m, k) - jv.at2(a, m) * nj.at3(m, i, k))
            .sum()
    }))
}

/// `h(T(Λa, c), b) + h((∇_bΛ)c, a)` as a (0,3) array indexed `[a][b][c]`.
pub fn anti_kahler_cancellation(gamma: &Tensor, frame: &PointFrame) -> Result<Tensor> {
    let j = frame.j()?;
    let h = frame.b()?.value();
    let d = gamma.dim();
    let jv = j.value();
    let t = torsion(gamma);
    let nj = covariant_derivative(gamma, j)?;
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            let tjac: f64 = (0..d).map(|n| t.at3(m, n, c) * jv.at2(n, a)).sum();
            s += tjac * h.at2(m, b) + nj.at3(m, b, c) * h.at2(m, a);
        }
        s
    }))
}

fn check_flavor(frame: &PointFrame, want: MetricFlavor, c: Constraint) -> Result<()> {
    let ok = match want {
        MetricFlavor::Norden => frame.flavor == MetricFlavor::Norden,
        _ => frame.flavor != MetricFlavor::Norden,
    };
    if ok {
        Ok(())
    } else {
        Err(GeomError::precondition(format!(
            "constraint {c} does not apply to a {:?} metric",
            frame.flavor
        )))
    }
}

/// The tensor whose vanishing expresses `c` for Christoffel values `gamma`.
pub fn constraint_residual(c: Constraint, gamma: &Tensor, frame: &PointFrame) -> Result<Tensor> {
    match c {
        Constraint::TorsionFree => Ok(torsion(gamma)),
        Constraint::JInvariantTorsion => Ok(structures::torsion_compat_defect(&torsion(gamma), &frame.j()?.value())),
        Constraint::DClosedJ => structures::d_nabla_j(gamma, frame.j()?),
        Constraint::QuasiStatisticalG => {
            check_flavor(frame, MetricFlavor::Hermitian, c)?;
            structures::d_nabla_metric(gamma, frame.b()?)
        }
        Constraint::QuasiStatisticalH => {
            check_flavor(frame, MetricFlavor::Norden, c)?;
            structures::d_nabla_metric(gamma, frame.b()?)
        }
        Constraint::CodazziJ => structures::codazzi_defect_j(gamma, frame.j()?),
        Constraint::ComplexConnection => covariant_derivative(gamma, frame.j()?),
        Constraint::VishnevskiiZero => vishnevskii_defect(gamma, frame.j()?),
        Constraint::CodazziJConjugate => {
            let star = conjugate_bilinear_at(gamma, frame.b()?, &frame.x)?;
            structures::codazzi_defect_j(&star, frame.j()?)
        }
        Constraint::ConjugateParallelForm => {
            let star = conjugate_bilinear_at(gamma, frame.b()?, &frame.x)?;
            covariant_derivative(&star, frame.form()?)
        }
        Constraint::AntiKahlerCancellation => {
            check_flavor(frame, MetricFlavor::Norden, c)?;
            anti_kahler_cancellation(gamma, frame)
        }
    }
}

/// Concatenated residual components of every constraint in `set`.
pub fn stacked_residual(set: &BTreeSet<Constraint>, gamma: &Tensor, frame: &PointFrame) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for &c in set {
        out.extend_from_slice(constraint_residual(c, gamma, frame)?.data());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub constraint: Constraint,
    pub residual: f64,
}

/// Maximum absolute residual of each constraint over the points.
pub fn constraint_residuals(
    model: &ChartModel,
    conn: &dyn Connection,
    set: &BTreeSet<Constraint>,
    points: &[Vec<f64>],
) -> Result<Vec<ConstraintReport>> {
    let mut worst = vec![0.0_f64; set.len()];
    for x in points {
        let frame = model.frame(x)?;
        let gamma = conn.christoffel(x)?;
        for (w, &c) in worst.iter_mut().zip(set) {
            let r = constraint_residual(c, &gamma, &frame)?.max_abs();
            *w = w.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }
    Ok(set
        .iter()
        .zip(worst)
        .map(|(&constraint, residual)| ConstraintReport { constraint, residual })
        .collect())
}
