//! Pointwise differential-geometric kernel: torsion, covariant derivatives,
//! the Levi-Civita connection, the exterior derivative of a 2-form and
//! brackets of vector fields.
//!
//! Christoffel symbols are stored as a (1,2) tensor `Γ[k][i][j]` with
//! `∇_{∂i} ∂j = Γ^k_{ij} ∂k`. Covariant derivatives place the derivative
//! index first among the lower indices: `(∇t)[up..][k][low..] = (∇_k t)`.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::fields::{Jet1, MatJet, Tensor, TensorJet, Valence};

/// Smallest `|det|` accepted when a bilinear form is inverted.
pub const MIN_DET: f64 = 1e-6;

pub fn torsion(gamma: &Tensor) -> Tensor {
    let d = gamma.dim();
    Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        gamma.at3(ix[0], ix[1], ix[2]) - gamma.at3(ix[0], ix[2], ix[1])
    })
}

/// The part of `Γ` symmetric in its lower indices.
pub fn symmetric_part(gamma: &Tensor) -> Tensor {
    let d = gamma.dim();
    Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        0.5 * (gamma.at3(ix[0], ix[1], ix[2]) + gamma.at3(ix[0], ix[2], ix[1]))
    })
}

/// `∇t` at a point from the Christoffel values and the jet of `t`.
/// Supports at most one upper and at most three lower indices.
pub fn covariant_derivative(gamma: &Tensor, t: &TensorJet) -> Result<Tensor> {
    let v = t.valence();
    if v.upper > 1 || v.lower > 3 {
        return Err(GeomError::Unsupported(format!("covariant derivative of valence {v}")));
    }
    let d = t.dim();
    let p = v.upper;
    let out_v = Valence::new(p, v.lower + 1);
    let rank = v.rank();
    let tv = t.value();
    let mut src = vec![0usize; rank];
    let out = Tensor::from_fn(d, out_v, |ix| {
        // ix = [upper.., k, lower..]
        let k = ix[p];
        for s in 0..p {
            src[s] = ix[s];
        }
        for s in 0..v.lower {
            src[p + s] = ix[p + 1 + s];
        }
        let c = src.iter().fold(0, |acc, &i| acc * d + i);
        let mut val = t.d(c, k);
        if p == 1 {
            let a = src[0];
            for m in 0..d {
                src[0] = m;
                val += gamma.at3(a, k, m) * tv.get(&src);
            }
            src[0] = a;
        }
        for s in p..rank {
            let b = src[s];
            for m in 0..d {
                src[s] = m;
                val -= gamma.at3(m, k, b) * tv.get(&src);
            }
            src[s] = b;
        }
        val
    });
    Ok(out)
}

/// Inverse of a bilinear form's matrix at a point.
pub fn invert_bilinear(b: &Tensor, point: &[f64]) -> Result<DMatrix<f64>> {
    let m = b.to_matrix();
    let det = m.determinant();
    if !(det.abs() >= MIN_DET) {
        return Err(GeomError::Degenerate {
            what: "bilinear form".into(),
            point: point.to_vec(),
            det,
        });
    }
    m.try_inverse().ok_or_else(|| GeomError::Degenerate {
        what: "bilinear form".into(),
        point: point.to_vec(),
        det,
    })
}

/// Christoffel symbols of the Levi-Civita connection of a symmetric form.
pub fn levi_civita(b: &TensorJet, point: &[f64]) -> Result<Tensor> {
    let d = b.dim();
    let bv = b.value();
    if sym_defect(&bv) > 1e-12 * (1.0 + bv.max_abs()) {
        return Err(GeomError::precondition("levi_civita needs a symmetric form"));
    }
    let inv = invert_bilinear(&bv, point)?;
    // first-kind symbols Γ_{ijl} = ½(∂_i b_{jl} + ∂_j b_{il} − ∂_l b_{ij})
    let db = |i: usize, j: usize, k: usize| b.d(i * d + j, k);
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for l in 0..d {
            s += inv[(k, l)] * 0.5 * (db(j, l, i) + db(i, l, j) - db(i, j, l));
        }
        s
    }))
}

pub(crate) fn sym_defect(b: &Tensor) -> f64 {
    let d = b.dim();
    let mut m = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            m = m.max((b.at2(i, j) - b.at2(j, i)).abs());
        }
    }
    m
}

pub(crate) fn antisym_defect(b: &Tensor) -> f64 {
    let d = b.dim();
    let mut m = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            m = m.max((b.at2(i, j) + b.at2(j, i)).abs());
        }
    }
    m
}

/// `(dω)_{kij} = ∂_k ω_{ij} − ∂_i ω_{kj} + ∂_j ω_{ki}` for an antisymmetric
/// 2-form.
pub fn exterior_d2(omega: &TensorJet) -> Result<Tensor> {
    let d = omega.dim();
    let w = omega.value();
    if antisym_defect(&w) > 1e-12 * (1.0 + w.max_abs()) {
        return Err(GeomError::precondition("exterior_d2 needs an antisymmetric 2-form"));
    }
    let dw = |i: usize, j: usize, k: usize| omega.d(i * d + j, k);
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        dw(i, j, k) - dw(k, j, i) + dw(k, i, j)
    }))
}

/// The connection expansion of `dω`:
/// `(∇_3ω)(1,2) + (∇_1ω)(2,3) + (∇_2ω)(3,1) + ω(T(1,2),3) + ω(T(2,3),1) + ω(T(3,1),2)`.
pub fn exterior_d2_via_connection(gamma: &Tensor, omega: &TensorJet) -> Result<Tensor> {
    let d = omega.dim();
    let nw = covariant_derivative(gamma, omega)?;
    let t = torsion(gamma);
    let w = omega.value();
    let tw = |a: usize, b: usize, c: usize| (0..d).map(|m| t.at3(m, a, b) * w.at2(m, c)).sum::<f64>();
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        nw.at3(c, a, b) + nw.at3(a, b, c) + nw.at3(b, c, a) + tw(a, b, c) + tw(b, c, a) + tw(c, a, b)
    }))
}

/// Value of `[X, Y]` from the jets of two vector fields.
pub fn bracket(x: &TensorJet, y: &TensorJet) -> Vec<f64> {
    let d = x.dim();
    let xv = x.values();
    let yv = y.values();
    (0..d)
        .map(|i| (0..d).map(|j| xv[j] * y.d(i, j) - yv[j] * x.d(i, j)).sum())
        .collect()
}

/// `∇_X Y` at a point.
pub fn covariant_along(gamma: &Tensor, x: &[f64], y: &TensorJet) -> Vec<f64> {
    let d = y.dim();
    let yv = y.values();
    (0..d)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..d {
                s += x[i] * y.d(k, i);
                for j in 0..d {
                    s += x[i] * gamma.at3(k, i, j) * yv[j];
                }
            }
            s
        })
        .collect()
}

/// Directional derivative `X f`.
pub fn directional(x: &[f64], f: &Jet1) -> f64 {
    x.iter().zip(&f.partials).map(|(a, b)| a * b).sum()
}

/// Jet of the scalar `b(X, Y)`.
pub fn bilinear_on_jets(b: &TensorJet, x: &TensorJet, y: &TensorJet) -> Jet1 {
    let d = b.dim();
    let mut out = Jet1::constant(0.0, d);
    for i in 0..d {
        let xi = x.component(&[i]);
        for j in 0..d {
            let yj = y.component(&[j]);
            let bij = b.component(&[i, j]);
            out = &out + &(&(&bij * &xi) * &yj);
        }
    }
    out
}

/// Matrix of a rank-2 tensor as a `MatJet`, transposed when `transpose`.
pub fn mat(t: &TensorJet, transpose: bool) -> MatJet {
    let m = t.to_mat_jet();
    if transpose {
        m.transpose()
    } else {
        m
    }
}

/// Contracts `T^m_{ab} b_{mc}`: a (1,2) tensor lowered into the first slot
/// of a bilinear form, producing `b(T(a,b), c)`.
pub fn lower_first(t: &Tensor, b: &Tensor) -> Tensor {
    t.lower_into_last(b)
}

/// `Λ ∘ T` for a (1,2) tensor `T`.
pub fn endo_compose(j: &Tensor, t: &Tensor) -> Tensor {
    t.apply_endo(j)
}

/// Matrix product of rank-2 tensors as matrices.
pub fn matmul(a: &Tensor, b: &Tensor, valence: Valence) -> Tensor {
    Tensor::from_matrix(valence, &(a.to_matrix() * b.to_matrix()))
}
