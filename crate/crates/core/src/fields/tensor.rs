//! Dense component arrays at a single point, with and without first
//! derivatives.
//!
//! Components are stored row-major with all upper indices first, then all
//! lower indices. A `TensorJet` additionally stores `grad[c * dim + k]`, the
//! partial of component `c` along coordinate `k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::jet::Jet1;
use crate::error::{GeomError, Result};

/// Tensor type `(p, q)`: `p` contravariant and `q` covariant indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valence {
    pub upper: usize,
    pub lower: usize,
}

impl Valence {
    pub const fn new(upper: usize, lower: usize) -> Self {
        Valence { upper, lower }
    }
    pub const SCALAR: Valence = Valence::new(0, 0);
    pub const VECTOR: Valence = Valence::new(1, 0);
    pub const ENDO: Valence = Valence::new(1, 1);
    pub const BILINEAR: Valence = Valence::new(0, 2);
    pub const VECTOR_2FORM: Valence = Valence::new(1, 2);
    pub const TRILINEAR: Valence = Valence::new(0, 3);

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }
}

impl std::fmt::Display for Valence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.upper, self.lower)
    }
}

fn flat_index(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

fn unflatten(dim: usize, rank: usize, mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in (0..rank).rev() {
        out[slot] = flat % dim;
        flat /= dim;
    }
    out
}

/// Component values of a tensor at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    valence: Valence,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, valence: Valence) -> Self {
        Tensor {
            dim,
            valence,
            data: vec![0.0; dim.pow(valence.rank() as u32)],
        }
    }

    pub fn from_vec(dim: usize, valence: Valence, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim.pow(valence.rank() as u32) {
            return Err(GeomError::shape(format!(
                "{} components for valence {valence} in dimension {dim}",
                data.len()
            )));
        }
        Ok(Tensor { dim, valence, data })
    }

    pub fn from_fn(dim: usize, valence: Valence, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let rank = valence.rank();
        let n = dim.pow(rank as u32);
        let data = (0..n).map(|c| f(&unflatten(dim, rank, c))).collect();
        Tensor { dim, valence, data }
    }

    /// The matrix of a (1,1) or (0,2) tensor, row = first index.
    pub fn from_matrix(valence: Valence, m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        Tensor::from_fn(d, valence, |ix| m[(ix[0], ix[1])])
    }

    pub fn identity(dim: usize) -> Self {
        Tensor::delta(dim, Valence::ENDO)
    }

    /// Kronecker delta with the given rank-2 valence.
    pub fn delta(dim: usize, valence: Valence) -> Self {
        Tensor::from_fn(dim, valence, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn valence(&self) -> Valence {
        self.valence
    }
    pub fn rank(&self) -> usize {
        self.valence.rank()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[flat_index(self.dim, idx)]
    }
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = flat_index(self.dim, idx);
        self.data[f] = v;
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }
    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }
    #[inline]
    pub fn at4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }
    #[inline]
    pub fn add3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim;
        self.data[(i * d + j) * d + k] += v;
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2, "to_matrix needs a rank-2 tensor");
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.at2(i, j))
    }

    fn check_same(&self, other: &Tensor) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.valence, other.valence, "valence mismatch");
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        self.check_same(other);
        Tensor {
            dim: self.dim,
            valence: self.valence,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.check_same(other);
        Tensor {
            dim: self.dim,
            valence: self.valence,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            valence: self.valence,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute component and its index tuple.
    pub fn argmax_abs(&self) -> (f64, Vec<usize>) {
        let mut best = (0.0, 0);
        for (c, v) in self.data.iter().enumerate() {
            if v.abs() > best.0 || v.is_nan() {
                best = (v.abs(), c);
                if v.is_nan() {
                    best.0 = f64::INFINITY;
                    break;
                }
            }
        }
        (best.0, unflatten(self.dim, self.rank(), best.1))
    }

    /// Reorders the slots: `out[ix] = self[ix permuted]`, with
    /// `perm[s]` naming which output slot feeds input slot `s`.
    /// `t.permute(&[1, 0, 2])` swaps the first two slots.
    pub fn permute(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.rank());
        Tensor::from_fn(self.dim, self.valence, |ix| {
            let src: Vec<usize> = perm.iter().map(|&p| ix[p]).collect();
            self.get(&src)
        })
    }

    /// Feeds `Λ·` into lower slot `slot` (counted among all slots):
    /// `out(.., X, ..) = self(.., ΛX, ..)`.
    pub fn feed_endo(&self, slot: usize, j: &Tensor) -> Tensor {
        assert!(slot >= self.valence.upper && slot < self.rank());
        let d = self.dim;
        Tensor::from_fn(d, self.valence, |ix| {
            let mut src = ix.to_vec();
            let mut s = 0.0;
            for m in 0..d {
                src[slot] = m;
                s += self.get(&src) * j.at2(m, ix[slot]);
            }
            s
        })
    }

    /// Applies an endomorphism to the single upper index: `(ΛT)^a = Λ^a_m T^m`.
    pub fn apply_endo(&self, j: &Tensor) -> Tensor {
        assert_eq!(self.valence.upper, 1, "apply_endo needs exactly one upper index");
        let d = self.dim;
        Tensor::from_fn(d, self.valence, |ix| {
            let mut src = ix.to_vec();
            let mut s = 0.0;
            for m in 0..d {
                src[0] = m;
                s += j.at2(ix[0], m) * self.get(&src);
            }
            s
        })
    }

    /// Lowers the upper index of a (1,q) tensor into a new LAST covariant
    /// slot using `b`: `out(X.., Z) = b(T(X..), Z)`.
    pub fn lower_into_last(&self, b: &Tensor) -> Tensor {
        assert_eq!(self.valence.upper, 1);
        let d = self.dim;
        let q = self.valence.lower;
        Tensor::from_fn(d, Valence::new(0, q + 1), |ix| {
            let mut src = Vec::with_capacity(q + 1);
            src.push(0);
            src.extend_from_slice(&ix[..q]);
            let z = ix[q];
            let mut s = 0.0;
            for m in 0..d {
                src[0] = m;
                s += self.get(&src) * b.at2(m, z);
            }
            s
        })
    }

    /// Like `lower_into_last` but the image enters the FIRST slot of `b`
    /// while the extra argument is placed last: `out(X.., Z) = b(Z, T(X..))`.
    pub fn lower_into_last_second_slot(&self, b: &Tensor) -> Tensor {
        assert_eq!(self.valence.upper, 1);
        let d = self.dim;
        let q = self.valence.lower;
        Tensor::from_fn(d, Valence::new(0, q + 1), |ix| {
            let mut src = Vec::with_capacity(q + 1);
            src.push(0);
            src.extend_from_slice(&ix[..q]);
            let z = ix[q];
            let mut s = 0.0;
            for m in 0..d {
                src[0] = m;
                s += self.get(&src) * b.at2(z, m);
            }
            s
        })
    }
}

/// Component values and first partials at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorJet {
    dim: usize,
    valence: Valence,
    value: Vec<f64>,
    grad: Vec<f64>,
}

impl TensorJet {
    pub fn new(dim: usize, valence: Valence, value: Vec<f64>, grad: Vec<f64>) -> Result<Self> {
        let n = dim.pow(valence.rank() as u32);
        if value.len() != n || grad.len() != n * dim {
            return Err(GeomError::shape(format!(
                "jet of valence {valence} in dimension {dim} needs {n} values and {} partials",
                n * dim
            )));
        }
        Ok(TensorJet {
            dim,
            valence,
            value,
            grad,
        })
    }

    pub fn constant(t: &Tensor) -> Self {
        let n = t.data().len();
        TensorJet {
            dim: t.dim(),
            valence: t.valence(),
            value: t.data().to_vec(),
            grad: vec![0.0; n * t.dim()],
        }
    }

    pub fn from_jets(dim: usize, valence: Valence, jets: &[Jet1]) -> Result<Self> {
        let value = jets.iter().map(|j| j.value).collect();
        let grad = jets.iter().flat_map(|j| j.partials.iter().copied()).collect();
        TensorJet::new(dim, valence, value, grad)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn valence(&self) -> Valence {
        self.valence
    }
    pub fn values(&self) -> &[f64] {
        &self.value
    }
    pub fn grads(&self) -> &[f64] {
        &self.grad
    }

    pub fn value(&self) -> Tensor {
        Tensor {
            dim: self.dim,
            valence: self.valence,
            data: self.value.clone(),
        }
    }

    /// The partial derivative of every component along coordinate `k`.
    pub fn partial(&self, k: usize) -> Tensor {
        let d = self.dim;
        Tensor {
            dim: d,
            valence: self.valence,
            data: (0..self.value.len()).map(|c| self.grad[c * d + k]).collect(),
        }
    }

    /// `∂_k` of the component with flat index `c`.
    #[inline]
    pub fn d(&self, c: usize, k: usize) -> f64 {
        self.grad[c * self.dim + k]
    }

    pub fn component(&self, idx: &[usize]) -> Jet1 {
        let c = flat_index(self.dim, idx);
        Jet1 {
            value: self.value[c],
            partials: self.grad[c * self.dim..(c + 1) * self.dim].to_vec(),
        }
    }

    pub fn jets(&self) -> Vec<Jet1> {
        (0..self.value.len())
            .map(|c| Jet1 {
                value: self.value[c],
                partials: self.grad[c * self.dim..(c + 1) * self.dim].to_vec(),
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().chain(&self.grad).all(|v| v.is_finite())
    }

    pub fn to_mat_jet(&self) -> MatJet {
        assert_eq!(self.valence.rank(), 2, "matrix jets need rank-2 tensors");
        let d = self.dim;
        MatJet {
            value: DMatrix::from_fn(d, d, |i, j| self.value[i * d + j]),
            partials: (0..d)
                .map(|k| DMatrix::from_fn(d, d, |i, j| self.grad[(i * d + j) * d + k]))
                .collect(),
        }
    }

    pub fn add(&self, other: &TensorJet) -> TensorJet {
        assert_eq!(self.valence, other.valence);
        TensorJet {
            dim: self.dim,
            valence: self.valence,
            value: self.value.iter().zip(&other.value).map(|(a, b)| a + b).collect(),
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TensorJet {
        TensorJet {
            dim: self.dim,
            valence: self.valence,
            value: self.value.iter().map(|a| a * s).collect(),
            grad: self.grad.iter().map(|a| a * s).collect(),
        }
    }

    /// Scalar-field multiple `f·t` with the product rule.
    pub fn times_scalar(&self, f: &Jet1) -> TensorJet {
        let d = self.dim;
        let mut grad = vec![0.0; self.grad.len()];
        for c in 0..self.value.len() {
            for k in 0..d {
                grad[c * d + k] = f.value * self.grad[c * d + k] + f.partials[k] * self.value[c];
            }
        }
        TensorJet {
            dim: d,
            valence: self.valence,
            value: self.value.iter().map(|v| v * f.value).collect(),
            grad,
        }
    }

    /// Applies an endomorphism jet to a vector jet: `(ΛX)` with exact
    /// first partials.
    pub fn endo_apply(j: &TensorJet, x: &TensorJet) -> TensorJet {
        assert_eq!(j.valence, Valence::ENDO);
        assert_eq!(x.valence, Valence::VECTOR);
        let d = j.dim;
        let mut value = vec![0.0; d];
        let mut grad = vec![0.0; d * d];
        for a in 0..d {
            for m in 0..d {
                let jam = j.value[a * d + m];
                value[a] += jam * x.value[m];
                for k in 0..d {
                    grad[a * d + k] += j.grad[(a * d + m) * d + k] * x.value[m] + jam * x.grad[m * d + k];
                }
            }
        }
        TensorJet {
            dim: d,
            valence: Valence::VECTOR,
            value,
            grad,
        }
    }
}

/// A square matrix with its partial derivatives along each coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MatJet {
    pub value: DMatrix<f64>,
    pub partials: Vec<DMatrix<f64>>,
}

impl MatJet {
    pub fn constant(m: DMatrix<f64>, dim: usize) -> Self {
        let n = m.nrows();
        MatJet {
            value: m,
            partials: vec![DMatrix::zeros(n, n); dim],
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        MatJet::constant(DMatrix::identity(n, n), dim)
    }

    pub fn dim(&self) -> usize {
        self.partials.len()
    }

    pub fn mul(&self, other: &MatJet) -> MatJet {
        MatJet {
            value: &self.value * &other.value,
            partials: self
                .partials
                .iter()
                .zip(&other.partials)
                .map(|(da, db)| da * &other.value + &self.value * db)
                .collect(),
        }
    }

    pub fn add(&self, other: &MatJet) -> MatJet {
        MatJet {
            value: &self.value + &other.value,
            partials: self.partials.iter().zip(&other.partials).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &MatJet) -> MatJet {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> MatJet {
        MatJet {
            value: &self.value * s,
            partials: self.partials.iter().map(|a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> MatJet {
        MatJet {
            value: self.value.transpose(),
            partials: self.partials.iter().map(|a| a.transpose()).collect(),
        }
    }

    /// Inverse with `∂(M⁻¹) = −M⁻¹ (∂M) M⁻¹`.
    pub fn inverse(&self, point: &[f64], min_det: f64) -> Result<MatJet> {
        let det = self.value.determinant();
        if !(det.abs() >= min_det) {
            return Err(GeomError::Degenerate {
                what: "matrix".into(),
                point: point.to_vec(),
                det,
            });
        }
        let inv = self.value.clone().try_inverse().ok_or_else(|| GeomError::Degenerate {
            what: "matrix".into(),
            point: point.to_vec(),
            det,
        })?;
        let partials = self.partials.iter().map(|dm| -(&inv * dm * &inv)).collect();
        Ok(MatJet { value: inv, partials })
    }

    pub fn to_tensor_jet(&self, valence: Valence) -> TensorJet {
        let d = self.value.nrows();
        let dim = self.dim();
        let mut value = vec![0.0; d * d];
        let mut grad = vec![0.0; d * d * dim];
        for i in 0..d {
            for j in 0..d {
                value[i * d + j] = self.value[(i, j)];
                for k in 0..dim {
                    grad[(i * d + j) * dim + k] = self.partials[k][(i, j)];
                }
            }
        }
        TensorJet {
            dim,
            valence,
            value,
            grad,
        }
    }
}
