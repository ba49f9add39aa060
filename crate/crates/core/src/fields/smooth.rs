//! Tensor fields whose components are polynomials.

use rand::Rng;

use super::poly::{monomials_up_to, PolyExpr};
use super::tensor::{Tensor, TensorJet, Valence};
use super::{ChartDomain, TensorField};
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTensorField {
    dim: usize,
    valence: Valence,
    components: Vec<PolyExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithOp {
    Add,
    Sub,
    Scale(f64),
}

impl SmoothTensorField {
    pub fn new(dim: usize, valence: Valence, components: Vec<PolyExpr>) -> Result<Self> {
        let n = dim.pow(valence.rank() as u32);
        if components.len() != n {
            return Err(GeomError::shape(format!(
                "valence {valence} in dimension {dim} needs {n} components, got {}",
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(GeomError::shape(format!(
                "component polynomial in {} variables, chart has {dim}",
                c.dim()
            )));
        }
        Ok(SmoothTensorField {
            dim,
            valence,
            components,
        })
    }

    pub fn zeros(dim: usize, valence: Valence) -> Self {
        let n = dim.pow(valence.rank() as u32);
        SmoothTensorField {
            dim,
            valence,
            components: vec![PolyExpr::zero(dim); n],
        }
    }

    pub fn constant(t: &Tensor) -> Self {
        let d = t.dim();
        SmoothTensorField {
            dim: d,
            valence: t.valence(),
            components: t.data().iter().map(|&c| PolyExpr::constant(c, d)).collect(),
        }
    }

    pub fn from_fn(dim: usize, valence: Valence, f: impl FnMut(&[usize]) -> PolyExpr) -> Self {
        let rank = valence.rank();
        let mut f = f;
        let n = dim.pow(rank as u32);
        let components = (0..n)
            .map(|c| {
                let mut idx = vec![0; rank];
                let mut r = c;
                for s in (0..rank).rev() {
                    idx[s] = r % dim;
                    r /= dim;
                }
                f(&idx)
            })
            .collect();
        SmoothTensorField {
            dim,
            valence,
            components,
        }
    }

    /// Every component an independent random polynomial of degree at most
    /// `degree` with coefficients uniform in `[-bound, bound]`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, valence: Valence, degree: u32, bound: f64) -> Self {
        let monos = monomials_up_to(dim, degree);
        SmoothTensorField::from_fn(dim, valence, |_| random_poly_with(rng, dim, &monos, bound))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn valence(&self) -> Valence {
        self.valence
    }
    pub fn components(&self) -> &[PolyExpr] {
        &self.components
    }

    pub fn component(&self, idx: &[usize]) -> &PolyExpr {
        let c = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.components[c]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    /// Value and exact first partials of every component, after checking
    /// that `x` lies in the chart box.
    pub fn eval_jet(&self, domain: &ChartDomain, x: &[f64]) -> Result<TensorJet> {
        domain.check(x)?;
        self.jet_at(x)
    }

    fn jet_at(&self, x: &[f64]) -> Result<TensorJet> {
        let jets = self
            .components
            .iter()
            .map(|c| c.eval_jet(x))
            .collect::<Result<Vec<_>>>()?;
        TensorJet::from_jets(self.dim, self.valence, &jets)
    }

    fn check_same(&self, other: &SmoothTensorField) -> Result<()> {
        if self.dim != other.dim || self.valence != other.valence {
            return Err(GeomError::shape(format!(
                "cannot combine valence {} in dimension {} with valence {} in dimension {}",
                self.valence, self.dim, other.valence, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SmoothTensorField) -> Result<SmoothTensorField> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a.add(b)))
    }

    pub fn sub(&self, other: &SmoothTensorField) -> Result<SmoothTensorField> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a.sub(b)))
    }

    pub fn scale(&self, s: f64) -> SmoothTensorField {
        self.map(|c| c.scale(s))
    }

    /// Multiplication by a scalar polynomial.
    pub fn times(&self, f: &PolyExpr) -> SmoothTensorField {
        self.map(|c| c.mul(f))
    }

    pub fn map(&self, f: impl Fn(&PolyExpr) -> PolyExpr) -> SmoothTensorField {
        SmoothTensorField {
            dim: self.dim,
            valence: self.valence,
            components: self.components.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &SmoothTensorField, f: impl Fn(&PolyExpr, &PolyExpr) -> PolyExpr) -> SmoothTensorField {
        SmoothTensorField {
            dim: self.dim,
            valence: self.valence,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Polynomial matrix product of two rank-2 fields, contracting the
    /// second index of `self` with the first of `other`.
    pub fn matmul(&self, other: &SmoothTensorField, valence: Valence) -> Result<SmoothTensorField> {
        if self.valence.rank() != 2 || other.valence.rank() != 2 || self.dim != other.dim {
            return Err(GeomError::shape("matmul needs two rank-2 fields of equal dimension"));
        }
        let d = self.dim;
        Ok(SmoothTensorField::from_fn(d, valence, |ix| {
            let mut acc = PolyExpr::zero(d);
            for m in 0..d {
                acc = acc.add(&self.component(&[ix[0], m]).mul(other.component(&[m, ix[1]])));
            }
            acc
        }))
    }

    pub fn transpose(&self) -> Result<SmoothTensorField> {
        if self.valence.rank() != 2 {
            return Err(GeomError::shape("transpose needs a rank-2 field"));
        }
        Ok(SmoothTensorField::from_fn(self.dim, self.valence, |ix| {
            self.component(&[ix[1], ix[0]]).clone()
        }))
    }

    /// Symmetric part of a rank-2 field.
    pub fn symmetrize(&self) -> Result<SmoothTensorField> {
        Ok(self.add(&self.transpose()?)?.scale(0.5))
    }

    /// The Lie bracket `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i` of two vector
    /// fields, exactly.
    pub fn lie_bracket(&self, other: &SmoothTensorField) -> Result<SmoothTensorField> {
        if self.valence != Valence::VECTOR || other.valence != Valence::VECTOR {
            return Err(GeomError::shape("lie_bracket needs two vector fields"));
        }
        self.check_same(other)?;
        let d = self.dim;
        Ok(SmoothTensorField::from_fn(d, Valence::VECTOR, |ix| {
            let i = ix[0];
            let mut acc = PolyExpr::zero(d);
            for j in 0..d {
                acc = acc.add(&self.components[j].mul(&other.components[i].derivative(j)));
                acc = acc.sub(&other.components[j].mul(&self.components[i].derivative(j)));
            }
            acc
        }))
    }
}

/// Componentwise polynomial arithmetic. `b` is ignored for `Scale`.
pub fn field_arith(a: &SmoothTensorField, b: &SmoothTensorField, op: ArithOp) -> Result<SmoothTensorField> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Scale(s) => Ok(a.scale(s)),
    }
}

impl TensorField for SmoothTensorField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn valence(&self) -> Valence {
        self.valence
    }
    fn jet(&self, x: &[f64]) -> Result<TensorJet> {
        self.jet_at(x)
    }
}

pub(crate) fn random_poly_with<R: Rng>(rng: &mut R, dim: usize, monos: &[Vec<u32>], bound: f64) -> PolyExpr {
    PolyExpr::from_pairs(
        dim,
        monos.iter().map(|e| (e.clone(), rng.gen_range(-bound..=bound))).collect(),
    )
}

/// A random polynomial of degree at most `degree`.
pub fn random_poly<R: Rng>(rng: &mut R, dim: usize, degree: u32, bound: f64) -> PolyExpr {
    random_poly_with(rng, dim, &monomials_up_to(dim, degree), bound)
}
