//! Closed-form connections satisfying selected constraints exactly.

use std::sync::Arc;

use rand::Rng;

use super::{constraint_list, Constraint, GenSpec};
use crate::calculus::{invert_bilinear, symmetric_part, torsion};
use crate::connections::{conjugate_by_bilinear, conjugate_by_j, levi_civita, Conn, FnConnection, PolyConnection};
use crate::error::{GeomError, Result};
use crate::fields::{SmoothTensorField, Tensor, TensorField, Valence};
use crate::model::ChartModel;
use crate::structures::{self, MetricFlavor};

fn torsion_free<R: Rng>(spec: &GenSpec, rng: &mut R) -> Conn {
    let raw = super::models::random_connection(rng, spec.dimension, spec.degree, 1.0);
    let d = spec.dimension;
    let sym = SmoothTensorField::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        raw.gamma
            .component(&[ix[0], ix[1], ix[2]])
            .add(raw.gamma.component(&[ix[0], ix[2], ix[1]]))
            .scale(0.5)
    });
    PolyConnection { gamma: sym }.arc()
}

/// `Γ = sym(Γ₀) + ½ P(T^{Γ₀})` with the projector
/// `P(T)(X, Y) = ½(T(X, Y) + T(ΛX, ΛY))`, so the torsion is `P(T^{Γ₀})`.
pub fn j_invariant_torsion(raw: Conn, j: crate::fields::Field) -> Conn {
    let d = raw.dim();
    FnConnection::arc(d, move |x| {
        let g0 = raw.christoffel(x)?;
        let p = structures::project_torsion(&torsion(&g0), &j.value(x)?);
        Ok(symmetric_part(&g0).add(&p.scale(0.5)))
    })
}

/// Returns a connection satisfying every constraint in `spec.constraints`
/// exactly, for the combinations that have a closed form. Anything else is
/// redirected to `synthesize_connection`.
pub fn gen_connection<R: Rng>(spec: &GenSpec, rng: &mut R, model: &ChartModel) -> Result<Conn> {
    spec.validate()?;
    use Constraint::*;
    let set: Vec<Constraint> = spec.constraints.iter().copied().collect();
    let flavor = model.flavor();
    match set.as_slice() {
        [] => Ok(super::models::random_connection(rng, spec.dimension, spec.degree, 1.0).arc()),
        [TorsionFree] | [TorsionFree, JInvariantTorsion] => Ok(torsion_free(spec, rng)),
        [JInvariantTorsion] => {
            let raw = super::models::random_connection(rng, spec.dimension, spec.degree, 1.0).arc();
            Ok(j_invariant_torsion(raw, model.j_field()?))
        }
        [DClosedJ] => Ok(conjugate_by_j(torsion_free(spec, rng), model.j_field()?)),
        [QuasiStatisticalG] if flavor != MetricFlavor::Norden => {
            Ok(conjugate_by_bilinear(torsion_free(spec, rng), model.metric_field()?))
        }
        [QuasiStatisticalH] if flavor == MetricFlavor::Norden => {
            Ok(conjugate_by_bilinear(torsion_free(spec, rng), model.metric_field()?))
        }
        [ComplexConnection] => {
            let raw = super::models::random_connection(rng, spec.dimension, spec.degree, 1.0).arc();
            Ok(crate::connections::average_connection(raw, model.j_field()?))
        }
        _ => Err(GeomError::Redirect(constraint_list(&spec.constraints))),
    }
}

/// A totally symmetric random (0,3) polynomial field.
fn symmetric_cubic<R: Rng>(rng: &mut R, dim: usize, degree: u32, bound: f64) -> SmoothTensorField {
    let raw = SmoothTensorField::random(rng, dim, Valence::TRILINEAR, degree, bound);
    SmoothTensorField::from_fn(dim, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let perms = [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
        let mut acc = raw.component(&perms[0]).clone();
        for p in &perms[1..] {
            acc = acc.add(raw.component(p));
        }
        acc.scale(1.0 / 6.0)
    })
}

/// A Norden-model connection with `d∇Λ = 0` and `d∇h = 0`:
/// `∇ = D^Λ` for `D = ∇^ℏ + K`, `K^m_{ij} = ℏ^{mk} C_{ijk}`, `C` totally
/// symmetric.
pub fn teo5_witness<R: Rng>(model: &ChartModel, rng: &mut R, degree: u32, bound: f64) -> Result<Conn> {
    if model.flavor() != MetricFlavor::Norden {
        return Err(GeomError::precondition("the anti-Kähler witness needs a Norden model"));
    }
    let d = model.dim();
    let twin = model.form_field()?;
    let c = Arc::new(symmetric_cubic(rng, d, degree, bound));
    let lc = levi_civita(twin.clone());
    let lc2 = lc.clone();
    let shifted = FnConnection::arc(d, move |x| {
        let tw = twin.value(x)?;
        let inv = invert_bilinear(&tw, x)?;
        let cv = c.value(x)?;
        let k = Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
            let (m, i, j) = (ix[0], ix[1], ix[2]);
            (0..d).map(|l| inv[(m, l)] * cv.at3(i, j, l)).sum()
        });
        Ok(lc2.christoffel(x)?.add(&k))
    });
    let _ = lc;
    Ok(conjugate_by_j(shifted, model.j_field()?))
}
