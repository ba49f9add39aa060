//! Random almost complex structures, Hermitian and Norden metrics, and the
//! model families built from them.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GenSpec;
use crate::connections::PolyConnection;
use crate::error::{GeomError, Result};
use crate::fields::{
    matrix_field, sample_points, ChartDomain, Field, MatJet, PolyExpr, SmoothTensorField, Tensor, TensorField, Valence,
};
use crate::model::ChartModel;
use crate::structures::{standard_j, standard_norden, AlmostComplexStructure, Metric, MetricFlavor};

const RETRIES: usize = 10;
const MIN_METRIC_DET: f64 = 1e-3;
/// Operator-norm bound on the perturbation of the identity frame.
const PERTURBATION: f64 = 0.2;

/// Which random family a model was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FlatHermitian,
    FlatNorden,
    RandomHermitian,
    RandomNorden,
    KahlerPullback,
    AntiKahlerPullback,
    KahlerPotential,
}

pub fn default_domain(dim: usize) -> ChartDomain {
    ChartDomain::cube(dim, 0.5).expect("even dimension")
}

/// Upper bound of `sup |p|` over the box.
fn sup_bound(p: &PolyExpr, domain: &ChartDomain) -> f64 {
    let h: Vec<f64> = domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(a, b)| a.abs().max(b.abs()))
        .collect();
    p.terms()
        .iter()
        .map(|(e, c)| c.abs() * e.iter().zip(&h).map(|(&k, hv)| hv.powi(k as i32)).product::<f64>())
        .sum()
}

/// Rescales a rank-2 field so that its operator norm stays below `limit` on
/// the whole box (via the Frobenius norm of entrywise sup bounds).
fn cap_norm(e: SmoothTensorField, domain: &ChartDomain, limit: f64) -> SmoothTensorField {
    let frob = e
        .components()
        .iter()
        .map(|c| sup_bound(c, domain).powi(2))
        .sum::<f64>()
        .sqrt();
    if frob > limit {
        e.scale(limit / frob)
    } else {
        e
    }
}

fn identity_plus(e: &SmoothTensorField) -> SmoothTensorField {
    let d = e.dim();
    e.add(&SmoothTensorField::constant(&Tensor::identity(d))).expect("same shape")
}

/// `J = P J₀ P⁻¹` with `P = I + perturbation`. A zero perturbation gives
/// `J₀` exactly.
pub fn j_from_perturbation(perturbation: &SmoothTensorField) -> AlmostComplexStructure {
    let d = perturbation.dim();
    let p = identity_plus(perturbation);
    let j0 = MatJet::constant(standard_j(d).to_matrix(), d);
    let field = matrix_field(d, Valence::ENDO, move |x| {
        let pj = p.jet(x)?.to_mat_jet();
        let pinv = pj.inverse(x, 1e-12)?;
        Ok(pj.mul(&j0).mul(&pinv))
    });
    AlmostComplexStructure { field }
}

pub fn gen_almost_complex<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<AlmostComplexStructure> {
    spec.validate()?;
    let d = spec.dimension;
    let domain = default_domain(d);
    let pts = sample_points(&domain, 25, rng.gen());
    for _ in 0..RETRIES {
        let e = SmoothTensorField::random(rng, d, Valence::ENDO, spec.degree, spec.coef_bound);
        let e = cap_norm(e, &domain, PERTURBATION);
        let j = j_from_perturbation(&e);
        if j.square_residual(&pts).map(|r| r <= 1e-10).unwrap_or(false) {
            return Ok(j);
        }
    }
    Err(GeomError::Generation {
        attempts: RETRIES,
        reason: "perturbed frame became singular".into(),
    })
}

fn matrix_of(t: &Tensor) -> DMatrix<f64> {
    t.to_matrix()
}

/// `g = A + Λᵀ A Λ + c(I + ΛᵀΛ)`.
pub fn hermitian_from_parts(a: SmoothTensorField, c: f64, j: &AlmostComplexStructure) -> Field {
    let d = a.dim();
    let jf = j.field.clone();
    let id = MatJet::identity(d, d);
    matrix_field(d, Valence::BILINEAR, move |x| {
        let jm = jf.jet(x)?.to_mat_jet();
        let am = a.jet(x)?.to_mat_jet();
        let jt = jm.transpose();
        let twisted = jt.mul(&am).mul(&jm);
        let base = id.add(&jt.mul(&jm)).scale(c);
        Ok(am.add(&twisted).add(&base))
    })
}

/// `h = S − Λᵀ S Λ + c(h₀ − Λᵀ h₀ Λ)` with `h₀` the neutral diagonal form.
pub fn norden_from_parts(s: SmoothTensorField, c: f64, j: &AlmostComplexStructure) -> Field {
    let d = s.dim();
    let jf = j.field.clone();
    let h0 = MatJet::constant(matrix_of(&standard_norden(d)), d);
    matrix_field(d, Valence::BILINEAR, move |x| {
        let jm = jf.jet(x)?.to_mat_jet();
        let sm = s.jet(x)?.to_mat_jet();
        let jt = jm.transpose();
        let part = |m: &MatJet| m.sub(&jt.mul(m).mul(&jm));
        Ok(part(&sm).add(&part(&h0).scale(c)))
    })
}

fn min_abs_det(field: &dyn TensorField, pts: &[Vec<f64>]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for x in pts {
        m = m.min(field.value(x)?.to_matrix().determinant().abs());
    }
    Ok(m)
}

fn min_eigenvalue(field: &dyn TensorField, pts: &[Vec<f64>]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for x in pts {
        m = m.min(field.value(x)?.to_matrix().symmetric_eigenvalues().min());
    }
    Ok(m)
}

fn is_neutral(field: &dyn TensorField, pts: &[Vec<f64>]) -> Result<bool> {
    for x in pts.iter().take(5) {
        let m = field.value(x)?.to_matrix();
        let eig = m.symmetric_eigenvalues();
        let pos = eig.iter().filter(|v| **v > 0.0).count();
        if 2 * pos != m.nrows() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn gen_hermitian_metric<R: Rng>(spec: &GenSpec, rng: &mut R, j: &AlmostComplexStructure) -> Result<Metric> {
    let d = spec.dimension;
    let domain = default_domain(d);
    let pts = sample_points(&domain, 25, rng.gen());
    let a = SmoothTensorField::random(rng, d, Valence::BILINEAR, spec.degree, spec.coef_bound).symmetrize()?;
    let mut c = 1.0;
    for _ in 0..RETRIES {
        let g = hermitian_from_parts(a.clone(), c, j);
        if min_abs_det(g.as_ref(), &pts)? >= MIN_METRIC_DET {
            return Metric::new(MetricFlavor::Hermitian, g);
        }
        c *= 2.0;
    }
    Err(GeomError::Generation {
        attempts: RETRIES,
        reason: "Hermitian metric stayed degenerate".into(),
    })
}

pub fn gen_norden_metric<R: Rng>(spec: &GenSpec, rng: &mut R, j: &AlmostComplexStructure) -> Result<Metric> {
    let d = spec.dimension;
    let domain = default_domain(d);
    let pts = sample_points(&domain, 25, rng.gen());
    let s = SmoothTensorField::random(rng, d, Valence::BILINEAR, spec.degree, spec.coef_bound).symmetrize()?;
    let mut c = 1.0;
    for _ in 0..RETRIES {
        let h = norden_from_parts(s.clone(), c, j);
        if min_abs_det(h.as_ref(), &pts)? >= MIN_METRIC_DET && is_neutral(h.as_ref(), &pts)? {
            return Metric::new(MetricFlavor::Norden, h);
        }
        c *= 2.0;
    }
    Err(GeomError::Generation {
        attempts: RETRIES,
        reason: "Norden metric stayed degenerate or non-neutral".into(),
    })
}

/// Christoffel symbols with independent random polynomial components.
pub fn random_connection<R: Rng>(rng: &mut R, dim: usize, degree: u32, bound: f64) -> PolyConnection {
    PolyConnection {
        gamma: SmoothTensorField::random(rng, dim, Valence::VECTOR_2FORM, degree, bound),
    }
}

pub fn flat_hermitian(dim: usize) -> ChartModel {
    let id: Field = Arc::new(SmoothTensorField::constant(&Tensor::delta(dim, Valence::BILINEAR)));
    ChartModel::new(default_domain(dim))
        .with_metric(Metric::new(MetricFlavor::Hermitian, id).expect("bilinear"))
        .with_j(AlmostComplexStructure::constant(&standard_j(dim)))
        .with_connection(PolyConnection::flat(dim).arc())
}

pub fn flat_norden(dim: usize) -> ChartModel {
    let h0: Field = Arc::new(SmoothTensorField::constant(&standard_norden(dim)));
    ChartModel::new(default_domain(dim))
        .with_metric(Metric::new(MetricFlavor::Norden, h0).expect("bilinear"))
        .with_j(AlmostComplexStructure::constant(&standard_j(dim)))
        .with_connection(PolyConnection::flat(dim).arc())
}

/// Random `J`, Hermitian `g` and random polynomial connection.
pub fn hermitian_model<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    let j = gen_almost_complex(spec, rng)?;
    let g = gen_hermitian_metric(spec, rng, &j)?;
    let conn = random_connection(rng, spec.dimension, spec.degree, 1.0);
    Ok(ChartModel::new(default_domain(spec.dimension))
        .with_j(j)
        .with_metric(g)
        .with_connection(conn.arc()))
}

/// Random `J`, Norden `h` and random polynomial connection.
pub fn norden_model<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    let j = gen_almost_complex(spec, rng)?;
    let h = gen_norden_metric(spec, rng, &j)?;
    let conn = random_connection(rng, spec.dimension, spec.degree, 1.0);
    Ok(ChartModel::new(default_domain(spec.dimension))
        .with_j(j)
        .with_metric(h)
        .with_connection(conn.arc()))
}

/// Jacobian field of `φ(x) = x + E(x)` for a random polynomial map `E`
/// whose Jacobian stays within the perturbation bound.
fn random_diffeo_jacobian<R: Rng>(spec: &GenSpec, rng: &mut R) -> SmoothTensorField {
    let d = spec.dimension;
    let domain = default_domain(d);
    let deg = spec.degree.max(1) + 1;
    let e = SmoothTensorField::random(rng, d, Valence::VECTOR, deg, spec.coef_bound);
    let jac = SmoothTensorField::from_fn(d, Valence::ENDO, |ix| e.component(&[ix[0]]).derivative(ix[1]));
    identity_plus(&cap_norm(jac, &domain, PERTURBATION))
}

/// The pullback of `(J₀, δ)` by a random polynomial diffeomorphism: an
/// integrable `J` with a Kähler metric.
pub fn pullback_kahler_model<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    spec.validate()?;
    let d = spec.dimension;
    let dphi = random_diffeo_jacobian(spec, rng);
    let (j, dp) = pullback_j(&dphi);
    let g = matrix_field(d, Valence::BILINEAR, move |x| {
        let m = dp.jet(x)?.to_mat_jet();
        Ok(m.transpose().mul(&m))
    });
    let conn = random_connection(rng, d, spec.degree, 1.0);
    Ok(ChartModel::new(default_domain(d))
        .with_j(j)
        .with_metric(Metric::new(MetricFlavor::Hermitian, g)?)
        .with_connection(conn.arc()))
}

/// The pullback of `(J₀, h₀)`: an anti-Kähler model.
pub fn pullback_anti_kahler_model<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    spec.validate()?;
    let d = spec.dimension;
    let dphi = random_diffeo_jacobian(spec, rng);
    let (j, dp) = pullback_j(&dphi);
    let h0 = MatJet::constant(standard_norden(d).to_matrix(), d);
    let h = matrix_field(d, Valence::BILINEAR, move |x| {
        let m = dp.jet(x)?.to_mat_jet();
        Ok(m.transpose().mul(&h0).mul(&m))
    });
    let conn = random_connection(rng, d, spec.degree, 1.0);
    Ok(ChartModel::new(default_domain(d))
        .with_j(j)
        .with_metric(Metric::new(MetricFlavor::Norden, h)?)
        .with_connection(conn.arc()))
}

fn pullback_j(dphi: &SmoothTensorField) -> (AlmostComplexStructure, Arc<SmoothTensorField>) {
    let d = dphi.dim();
    let dp = Arc::new(dphi.clone());
    let dp2 = dp.clone();
    let j0 = MatJet::constant(standard_j(d).to_matrix(), d);
    let field = matrix_field(d, Valence::ENDO, move |x| {
        let m = dp2.jet(x)?.to_mat_jet();
        let inv = m.inverse(x, 1e-12)?;
        Ok(inv.mul(&j0).mul(&m))
    });
    (AlmostComplexStructure { field }, dp)
}

/// Constant `J₀` with the polynomial Kähler metric
/// `g = cI + H + J₀ᵀ H J₀`, `H` the Hessian of a random polynomial.
pub fn kahler_potential_model<R: Rng>(spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    spec.validate()?;
    let d = spec.dimension;
    let domain = default_domain(d);
    let pts = sample_points(&domain, 25, rng.gen());
    let j0 = standard_j(d);
    let j0f = SmoothTensorField::constant(&j0);
    let f = crate::fields::smooth::random_poly(rng, d, spec.degree + 2, spec.coef_bound * 0.5);
    let mut weight = 1.0;
    for _ in 0..RETRIES {
        let f = f.scale(weight);
        weight *= 0.5;
        let hess = SmoothTensorField::from_fn(d, Valence::BILINEAR, |ix| f.derivative(ix[0]).derivative(ix[1]));
        let twisted = j0f.transpose()?.matmul(&hess, Valence::BILINEAR)?.matmul(&j0f, Valence::BILINEAR)?;
        let g = hess
            .add(&twisted)?
            .add(&SmoothTensorField::constant(&Tensor::delta(d, Valence::BILINEAR)))?;
        if min_eigenvalue(&g, &pts)? >= 0.1 {
            let conn = random_connection(rng, d, spec.degree, 1.0);
            return Ok(ChartModel::new(domain)
                .with_j(AlmostComplexStructure::constant(&j0))
                .with_metric(Metric::new(MetricFlavor::Hermitian, Arc::new(g))?)
                .with_connection(conn.arc()));
        }
    }
    Err(GeomError::Generation {
        attempts: RETRIES,
        reason: "Kähler potential metric degenerate".into(),
    })
}

/// Builds one model of the requested family.
pub fn build_model<R: Rng>(kind: ModelKind, spec: &GenSpec, rng: &mut R) -> Result<ChartModel> {
    match kind {
        ModelKind::FlatHermitian => Ok(flat_hermitian(spec.dimension)),
        ModelKind::FlatNorden => Ok(flat_norden(spec.dimension)),
        ModelKind::RandomHermitian => hermitian_model(spec, rng),
        ModelKind::RandomNorden => norden_model(spec, rng),
        ModelKind::KahlerPullback => pullback_kahler_model(spec, rng),
        ModelKind::AntiKahlerPullback => pullback_anti_kahler_model(spec, rng),
        ModelKind::KahlerPotential => kahler_potential_model(spec, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::exterior_d2;
    use crate::connections::KleinFlavor;
    use crate::structures::{form_jet, nijenhuis, purity_defect, square_defect, tachibana};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(d: usize) -> Vec<Vec<f64>> {
        sample_points(&default_domain(d), 25, 17)
    }

    #[test]
    fn zero_perturbation_gives_standard_structure() {
        let j = j_from_perturbation(&SmoothTensorField::zeros(4, Valence::ENDO));
        assert_eq!(j.field.value(&[0.1, 0.2, 0.3, 0.4]).unwrap(), standard_j(4));
    }

    #[test]
    fn zero_a_gives_twice_identity() {
        let j = AlmostComplexStructure::constant(&standard_j(2));
        let g = hermitian_from_parts(SmoothTensorField::zeros(2, Valence::BILINEAR), 1.0, &j);
        assert_eq!(g.value(&[0.0, 0.1]).unwrap(), Tensor::delta(2, Valence::BILINEAR).scale(2.0));
    }

    #[test]
    fn unit_s_exercises_base_form() {
        // S = δ with orthogonal J₀ cancels; only the base form survives
        let j = AlmostComplexStructure::constant(&standard_j(2));
        let h = norden_from_parts(SmoothTensorField::constant(&Tensor::delta(2, Valence::BILINEAR)), 1.0, &j);
        assert_eq!(h.value(&[0.0, 0.0]).unwrap(), standard_norden(2).scale(2.0));
    }

    #[test]
    fn random_structures_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2, 4] {
            let spec = GenSpec::new(0, d);
            for _ in 0..10 {
                let j = gen_almost_complex(&spec, &mut rng).unwrap();
                let g = gen_hermitian_metric(&spec, &mut rng, &j).unwrap();
                let h = gen_norden_metric(&spec, &mut rng, &j).unwrap();
                for x in pts(d) {
                    let jv = j.field.value(&x).unwrap();
                    assert!(square_defect(&jv) <= 1e-10);
                    let gv = g.field.value(&x).unwrap();
                    let hv = h.field.value(&x).unwrap();
                    assert!(purity_defect(&gv, &jv, KleinFlavor::Hermitian) <= 1e-10);
                    assert!(purity_defect(&hv, &jv, KleinFlavor::Norden) <= 1e-10);
                    let twin = form_jet(&j.field.jet(&x).unwrap(), &h.field.jet(&x).unwrap()).value();
                    assert!((twin.to_matrix() - twin.to_matrix().transpose()).amax() < 1e-12);
                    if d == 2 {
                        assert!(nijenhuis(&j.field.jet(&x).unwrap()).max_abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn pullback_models_are_kahler_and_anti_kahler() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = GenSpec::new(0, 4);
        let m = pullback_kahler_model(&spec, &mut rng).unwrap();
        let a = pullback_anti_kahler_model(&spec, &mut rng).unwrap();
        for x in pts(4) {
            let f = m.frame(&x).unwrap();
            assert!(nijenhuis(f.j.as_ref().unwrap()).max_abs() < 1e-10);
            assert!(exterior_d2(f.form.as_ref().unwrap()).unwrap().max_abs() < 1e-10);
            let fa = a.frame(&x).unwrap();
            assert!(tachibana(fa.j.as_ref().unwrap(), fa.b.as_ref().unwrap()).max_abs() < 1e-10);
        }
    }

    #[test]
    fn potential_models_have_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 4] {
            let m = kahler_potential_model(&GenSpec::new(0, d), &mut rng).unwrap();
            for x in pts(d) {
                let f = m.frame(&x).unwrap();
                let w = f.form.as_ref().unwrap();
                assert!(w.value().max_abs() > 0.1);
                assert!(exterior_d2(w).unwrap().max_abs() < 1e-12);
            }
        }
    }
}
