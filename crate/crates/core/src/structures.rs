//! Almost complex structures, Hermitian and Norden metrics, and the
//! structure operators built from them.
//!
//! Operators come in two forms: component formulas assembled on the
//! coordinate frame, and evaluators on supplied vector fields that go
//! through Lie brackets. The second form is what the tensoriality tests
//! and the non-tensorial Vishnevskii operator use.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{self, bilinear_on_jets, bracket, covariant_along, directional};
use crate::connections::KleinFlavor;
use crate::error::{GeomError, Result};
use crate::fields::{Field, FnField, Jet1, Tensor, TensorJet, Valence};

/// The constant structure with `Λ∂_{2k} = ∂_{2k+1}` and `Λ∂_{2k+1} = −∂_{2k}`.
pub fn standard_j(dim: usize) -> Tensor {
    Tensor::from_fn(dim, Valence::ENDO, |ix| {
        let (a, b) = (ix[0], ix[1]);
        if a % 2 == 1 && b == a - 1 {
            1.0
        } else if a % 2 == 0 && b == a + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// The fundamental form of the identity metric with the standard structure.
pub fn standard_form(dim: usize) -> Tensor {
    form_value(&standard_j(dim), &Tensor::delta(dim, Valence::BILINEAR))
}

/// The neutral Norden form `diag(1, −1, 1, −1, ...)`.
pub fn standard_norden(dim: usize) -> Tensor {
    Tensor::from_fn(dim, Valence::BILINEAR, |ix| {
        if ix[0] != ix[1] {
            0.0
        } else if ix[0] % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlavor {
    Hermitian,
    Norden,
    Plain,
}

impl MetricFlavor {
    pub fn klein(self) -> Option<KleinFlavor> {
        match self {
            MetricFlavor::Hermitian => Some(KleinFlavor::Hermitian),
            MetricFlavor::Norden => Some(KleinFlavor::Norden),
            MetricFlavor::Plain => None,
        }
    }
}

/// A (1,1) field meant to square to `−id`.
#[derive(Clone)]
pub struct AlmostComplexStructure {
    pub field: Field,
}

impl AlmostComplexStructure {
    pub fn new(field: Field) -> Result<Self> {
        if field.valence() != Valence::ENDO {
            return Err(GeomError::shape(format!(
                "an almost complex structure has valence (1,1), got {}",
                field.valence()
            )));
        }
        Ok(AlmostComplexStructure { field })
    }

    pub fn constant(j: &Tensor) -> Self {
        AlmostComplexStructure {
            field: Arc::new(crate::fields::SmoothTensorField::constant(j)),
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// `max |Λ² + id|` over the points.
    pub fn square_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut m = 0.0_f64;
        for x in points {
            m = m.max(square_defect(&self.field.value(x)?));
        }
        Ok(m)
    }
}

pub fn square_defect(j: &Tensor) -> f64 {
    let m = j.to_matrix();
    let d = m.nrows();
    (&m * &m + nalgebra::DMatrix::identity(d, d)).amax()
}

/// A symmetric (0,2) field tagged with its compatibility flavor.
#[derive(Clone)]
pub struct Metric {
    pub flavor: MetricFlavor,
    pub field: Field,
}

impl Metric {
    pub fn new(flavor: MetricFlavor, field: Field) -> Result<Self> {
        if field.valence() != Valence::BILINEAR {
            return Err(GeomError::shape(format!("a metric has valence (0,2), got {}", field.valence())));
        }
        Ok(Metric { flavor, field })
    }
}

/// `g(ΛX, ΛY) − g(X, Y)` for Hermitian, `h(ΛX, Y) − h(X, ΛY)` for Norden.
pub fn purity_defect(b: &Tensor, j: &Tensor, flavor: KleinFlavor) -> f64 {
    let bm = b.to_matrix();
    let jm = j.to_matrix();
    match flavor {
        KleinFlavor::Hermitian => (jm.transpose() * &bm * &jm - &bm).amax(),
        KleinFlavor::Norden => (jm.transpose() * &bm - &bm * &jm).amax(),
    }
}

fn form_value(j: &Tensor, b: &Tensor) -> Tensor {
    Tensor::from_matrix(Valence::BILINEAR, &(j.to_matrix().transpose() * b.to_matrix()))
}

/// Jet of `b(Λ·, ·)`: the fundamental form `ω` for a Hermitian `g`, the
/// twin metric `ℏ` for a Norden `h`.
pub fn form_jet(j: &TensorJet, b: &TensorJet) -> TensorJet {
    j.to_mat_jet()
        .transpose()
        .mul(&b.to_mat_jet())
        .to_tensor_jet(Valence::BILINEAR)
}

fn twisted_form(j: Field, b: Field, flavor: KleinFlavor) -> Field {
    let d = b.dim();
    FnField::arc(d, Valence::BILINEAR, move |x| {
        let jj = j.jet(x)?;
        let bj = b.jet(x)?;
        let defect = purity_defect(&bj.value(), &jj.value(), flavor);
        if defect > 1e-8 * (1.0 + bj.value().max_abs()) {
            return Err(GeomError::precondition(format!(
                "metric is not {} at {x:?} (defect {defect:e})",
                match flavor {
                    KleinFlavor::Hermitian => "Hermitian",
                    KleinFlavor::Norden => "Norden",
                }
            )));
        }
        Ok(form_jet(&jj, &bj))
    })
}

/// `ω(X, Y) = g(ΛX, Y)`; evaluation fails with a precondition error where
/// `g` is not Hermitian.
pub fn fundamental_two_form(g: Field, j: Field) -> Field {
    twisted_form(j, g, KleinFlavor::Hermitian)
}

/// `ℏ(X, Y) = h(ΛX, Y)`; evaluation fails where `h` is not Norden.
pub fn twin_metric(h: Field, j: Field) -> Field {
    twisted_form(j, h, KleinFlavor::Norden)
}

/// `N^a_{ij} = Λ^a_b ∂_iΛ^b_j − Λ^a_b ∂_jΛ^b_i − Λ^m_i ∂_mΛ^a_j + Λ^m_j ∂_mΛ^a_i`.
pub fn nijenhuis(j: &TensorJet) -> Tensor {
    let d = j.dim();
    let jv = j.value();
    let dj = |a: usize, b: usize, k: usize| j.d(a * d + b, k);
    Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (a, i, jj) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += jv.at2(a, m) * (dj(m, jj, i) - dj(m, i, jj));
            s += -jv.at2(m, i) * dj(a, jj, m) + jv.at2(m, jj) * dj(a, i, m);
        }
        s
    })
}

/// `N(X, Y) = −Λ²[X,Y] + Λ[X,ΛY] + Λ[ΛX,Y] − [ΛX,ΛY]` on vector field jets.
pub fn nijenhuis_on_fields(j: &TensorJet, x: &TensorJet, y: &TensorJet) -> Vec<f64> {
    let jx = TensorJet::endo_apply(j, x);
    let jy = TensorJet::endo_apply(j, y);
    let jm = j.value().to_matrix();
    let apply = |v: Vec<f64>| -> Vec<f64> { (&jm * nalgebra::DVector::from_vec(v)).iter().copied().collect() };
    let xy = bracket(x, y);
    let t1: Vec<f64> = apply(apply(xy)).iter().map(|v| -v).collect();
    let t2 = apply(bracket(x, &jy));
    let t3 = apply(bracket(&jx, y));
    let t4 = bracket(&jx, &jy);
    (0..j.dim()).map(|a| t1[a] + t2[a] + t3[a] - t4[a]).collect()
}

/// `(∇_1Λ)2 − (∇_2Λ)1 + Λ T(1,2)` as a (1,2) tensor.
pub fn d_nabla_j(gamma: &Tensor, j: &TensorJet) -> Result<Tensor> {
    let d = j.dim();
    let nj = calculus::covariant_derivative(gamma, j)?;
    let t = calculus::torsion(gamma);
    let jv = j.value();
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (a, i, k) = (ix[0], ix[1], ix[2]);
        let mut s = nj.at3(a, i, k) - nj.at3(a, k, i);
        for m in 0..d {
            s += jv.at2(a, m) * t.at3(m, i, k);
        }
        s
    }))
}

/// `(∇_1 b)(2,3) − (∇_2 b)(1,3) + b(T(1,2), 3)`.
pub fn d_nabla_metric(gamma: &Tensor, b: &TensorJet) -> Result<Tensor> {
    let d = b.dim();
    let nb = calculus::covariant_derivative(gamma, b)?;
    let t = calculus::torsion(gamma);
    let bv = b.value();
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (i, jj, k) = (ix[0], ix[1], ix[2]);
        let mut s = nb.at3(i, jj, k) - nb.at3(jj, i, k);
        for m in 0..d {
            s += t.at3(m, i, jj) * bv.at2(m, k);
        }
        s
    }))
}

/// Codazzi defect of `(∇, Λ)`: `(∇_1Λ)2 − (∇_2Λ)1`.
pub fn codazzi_defect_j(gamma: &Tensor, j: &TensorJet) -> Result<Tensor> {
    let nj = calculus::covariant_derivative(gamma, j)?;
    Ok(nj.sub(&nj.permute(&[0, 2, 1])))
}

/// Component form of the Tachibana operator:
/// `Φ_{abc} = Λ^m_a ∂_m h_{bc} − ∂_a(Λ^m_b h_{mc}) + ∂_bΛ^m_a h_{mc} + h_{bm} ∂_cΛ^m_a`.
pub fn tachibana(j: &TensorJet, h: &TensorJet) -> Tensor {
    let d = j.dim();
    let jv = j.value();
    let hv = h.value();
    let dj = |m: usize, a: usize, k: usize| j.d(m * d + a, k);
    let dh = |b: usize, c: usize, k: usize| h.d(b * d + c, k);
    Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += jv.at2(m, a) * dh(b, c, m);
            s -= dj(m, b, a) * hv.at2(m, c) + jv.at2(m, b) * dh(m, c, a);
            s += dj(m, a, b) * hv.at2(m, c);
            s += hv.at2(b, m) * dj(m, a, c);
        }
        s
    })
}

/// `(L_X Λ)Y = [X, ΛY] − Λ[X, Y]`.
pub fn lie_derivative_j(j: &TensorJet, x: &TensorJet, y: &TensorJet) -> Vec<f64> {
    let jy = TensorJet::endo_apply(j, y);
    let a = bracket(x, &jy);
    let b = bracket(x, y);
    let jv = j.value();
    let d = j.dim();
    (0..d)
        .map(|i| a[i] - (0..d).map(|m| jv.at2(i, m) * b[m]).sum::<f64>())
        .collect()
}

/// `Φ(X,Y,Z) = ΛX h(Y,Z) − X h(ΛY,Z) + h((L_YΛ)X, Z) + h(Y, (L_ZΛ)X)` on
/// supplied vector fields.
pub fn tachibana_on_fields(j: &TensorJet, h: &TensorJet, x: &TensorJet, y: &TensorJet, z: &TensorJet) -> f64 {
    let jx = TensorJet::endo_apply(j, x);
    let jy = TensorJet::endo_apply(j, y);
    let hyz: Jet1 = bilinear_on_jets(h, y, z);
    let hjyz: Jet1 = bilinear_on_jets(h, &jy, z);
    let hv = h.value();
    let d = j.dim();
    let ly = lie_derivative_j(j, y, x);
    let lz = lie_derivative_j(j, z, x);
    let hval = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += u[a] * hv.at2(a, b) * v[b];
            }
        }
        s
    };
    directional(jx.values(), &hyz) - directional(x.values(), &hjyz) + hval(&ly, z.values()) + hval(y.values(), &lz)
}

/// The Vishnevskii operator `Ψ_{ΛX}Y = ∇_{ΛX}Y − Λ(∇_X Y)` on supplied
/// fields. It is not function-linear in `Y`.
pub fn vishnevskii_on_fields(gamma: &Tensor, j: &Tensor, x: &[f64], y: &TensorJet) -> Vec<f64> {
    let d = gamma.dim();
    let jx: Vec<f64> = (0..d).map(|a| (0..d).map(|m| j.at2(a, m) * x[m]).sum()).collect();
    let a = covariant_along(gamma, &jx, y);
    let b = covariant_along(gamma, x, y);
    (0..d)
        .map(|i| a[i] - (0..d).map(|m| j.at2(i, m) * b[m]).sum::<f64>())
        .collect()
}

/// `Ψ` on coordinate frame pairs: `Ψ^a_{ij} = Γ^a_{mj}Λ^m_i − Λ^a_m Γ^m_{ij}`.
pub fn vishnevskii_frame(gamma: &Tensor, j: &Tensor) -> Tensor {
    let d = gamma.dim();
    Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (a, i, k) = (ix[0], ix[1], ix[2]);
        (0..d)
            .map(|m| gamma.at3(a, m, k) * j.at2(m, i) - j.at2(a, m) * gamma.at3(m, i, k))
            .sum()
    })
}

/// Torsion-compatibility defect `T(ΛX, Y) + T(X, ΛY)`.
pub fn torsion_compat_defect(t: &Tensor, j: &Tensor) -> Tensor {
    t.feed_endo(1, j).add(&t.feed_endo(2, j))
}

/// J-invariance defect `T(ΛX, ΛY) − T(X, Y)`.
pub fn torsion_invariance_defect(t: &Tensor, j: &Tensor) -> Tensor {
    t.feed_endo(1, j).feed_endo(2, j).sub(t)
}

/// The projector `T ↦ ½(T(X,Y) + T(ΛX,ΛY))`.
pub fn project_torsion(t: &Tensor, j: &Tensor) -> Tensor {
    t.add(&t.feed_endo(1, j).feed_endo(2, j)).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{PolyExpr, SmoothTensorField, TensorField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec_field(rng: &mut ChaCha8Rng, d: usize) -> SmoothTensorField {
        SmoothTensorField::random(rng, d, Valence::VECTOR, 2, 1.0)
    }

    fn curved_j(d: usize, x: &[f64]) -> TensorJet {
        curved_j_with_inverse(d, x).0
    }

    /// J = P J0 P^-1 jet for a quadratic P, with the jet of P^-1.
    fn curved_j_with_inverse(d: usize, x: &[f64]) -> (TensorJet, crate::fields::MatJet) {
        let p = SmoothTensorField::from_fn(d, Valence::ENDO, |ix| {
            let c = if ix[0] == ix[1] { 1.0 } else { 0.0 };
            PolyExpr::constant(c, d)
                .add(&PolyExpr::coordinate((ix[0] + 2 * ix[1]) % d, d).scale(0.1))
                .add(&PolyExpr::monomial(
                    (0..d).map(|k| if k == ix[1] { 2 } else { 0 }).collect(),
                    0.05,
                ))
        });
        let pj = p.jet(x).unwrap().to_mat_jet();
        let pinv = pj.inverse(x, 1e-9).unwrap();
        let j = pj
            .mul(&crate::fields::MatJet::constant(standard_j(d).to_matrix(), d))
            .mul(&pinv)
            .to_tensor_jet(Valence::ENDO);
        (j, pinv)
    }

    #[test]
    fn standard_structures() {
        let j = standard_j(2);
        assert_eq!(j.to_matrix(), nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let w = standard_form(2);
        assert_eq!(w.at2(0, 1), 1.0);
        assert_eq!(w.at2(1, 0), -1.0);
        assert_eq!(square_defect(&standard_j(6)), 0.0);
        let h = standard_norden(2);
        let twin = form_value(&j, &h);
        assert_eq!(twin.at2(0, 1), twin.at2(1, 0));
        assert_eq!(purity_defect(&h, &j, KleinFlavor::Norden), 0.0);
    }

    #[test]
    fn nijenhuis_component_form_matches_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 4;
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let j = curved_j(d, &x);
            let n = nijenhuis(&j);
            let xf = random_vec_field(&mut rng, d);
            let yf = random_vec_field(&mut rng, d);
            let xj = xf.jet(&x).unwrap();
            let yj = yf.jet(&x).unwrap();
            let direct = nijenhuis_on_fields(&j, &xj, &yj);
            for a in 0..d {
                let mut s = 0.0;
                for i in 0..d {
                    for k in 0..d {
                        s += n.at3(a, i, k) * xj.values()[i] * yj.values()[k];
                    }
                }
                assert!((s - direct[a]).abs() < 1e-10 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn nijenhuis_vanishes_in_two_dimensions() {
        let x = [0.2, -0.3];
        assert!(nijenhuis(&curved_j(2, &x)).max_abs() < 1e-12);
        assert!(nijenhuis(&curved_j(4, &[0.2, -0.3, 0.1, 0.4])).max_abs() > 1e-3);
    }

    #[test]
    fn tachibana_component_form_matches_fields() {
        // tensoriality in the last slot needs a Norden h, built as
        // P^-T (S - J0^T S J0 + h0) P^-1 for J = P J0 P^-1
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 4;
        let sf = SmoothTensorField::random(&mut rng, d, Valence::BILINEAR, 2, 0.3)
            .symmetrize()
            .unwrap();
        let j0 = crate::fields::MatJet::constant(standard_j(d).to_matrix(), d);
        let h0 = crate::fields::MatJet::constant(standard_norden(d).to_matrix(), d);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let (j, pinv) = curved_j_with_inverse(d, &x);
            let s = sf.jet(&x).unwrap().to_mat_jet();
            let core = s.sub(&j0.transpose().mul(&s).mul(&j0)).add(&h0);
            let h = pinv.transpose().mul(&core).mul(&pinv).to_tensor_jet(Valence::BILINEAR);
            assert!(purity_defect(&h.value(), &j.value(), KleinFlavor::Norden) < 1e-12);
            let phi = tachibana(&j, &h);
            let fs: Vec<TensorJet> = (0..3).map(|_| random_vec_field(&mut rng, d).jet(&x).unwrap()).collect();
            let direct = tachibana_on_fields(&j, &h, &fs[0], &fs[1], &fs[2]);
            let mut acc = 0.0;
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        acc += phi.at3(a, b, c) * fs[0].values()[a] * fs[1].values()[b] * fs[2].values()[c];
                    }
                }
            }
            assert!((acc - direct).abs() < 1e-10 * (1.0 + acc.abs()), "{acc} vs {direct}");
        }
    }

    #[test]
    fn constant_data_gives_zero_operators() {
        let j = TensorJet::constant(&standard_j(4));
        let h = TensorJet::constant(&standard_norden(4));
        let flat = Tensor::zeros(4, Valence::VECTOR_2FORM);
        assert_eq!(nijenhuis(&j).max_abs(), 0.0);
        assert_eq!(tachibana(&j, &h).max_abs(), 0.0);
        assert_eq!(d_nabla_j(&flat, &j).unwrap().max_abs(), 0.0);
        assert_eq!(d_nabla_metric(&flat, &h).unwrap().max_abs(), 0.0);
        assert_eq!(vishnevskii_frame(&flat, &standard_j(4)).max_abs(), 0.0);
    }

    #[test]
    fn fundamental_form_rejects_non_hermitian_metric() {
        let d = 2;
        let g: Field = Arc::new(SmoothTensorField::constant(&Tensor::from_fn(d, Valence::BILINEAR, |ix| {
            [[1.0, 0.0], [0.0, 2.0]][ix[0]][ix[1]]
        })));
        let j: Field = Arc::new(SmoothTensorField::constant(&standard_j(d)));
        let w = fundamental_two_form(g, j);
        assert!(matches!(w.jet(&[0.0, 0.0]), Err(GeomError::Precondition(_))));
    }

    #[test]
    fn projector_is_idempotent_and_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = [0.1, 0.2, -0.1, 0.3];
        let j = curved_j(4, &x).value();
        let raw = Tensor::from_fn(4, Valence::VECTOR_2FORM, |_| rng.gen_range(-1.0..1.0));
        let t = calculus::torsion(&raw);
        let p = project_torsion(&t, &j);
        assert!(project_torsion(&p, &j).sub(&p).max_abs() < 1e-12);
        assert!(torsion_compat_defect(&p, &j).max_abs() < 1e-12);
        assert!(torsion_invariance_defect(&p, &j).max_abs() < 1e-12);
        assert!(torsion_compat_defect(&t, &j).max_abs() > 1e-3);
    }
}
