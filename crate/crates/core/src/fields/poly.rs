//! Multivariate polynomials with exact jet evaluation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::jet::Jet1;
use crate::error::{GeomError, Result};

/// Largest total degree accepted when polynomials are built from external
/// input.
pub const MAX_DEGREE: u32 = 24;

/// One monomial `coef * x^exp` in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<u32>,
    pub coef: f64,
}

/// A polynomial in `dim` chart coordinates, kept normalized: exponent
/// vectors are sorted, unique, and carry nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExpr {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl PolyExpr {
    pub fn zero(dim: usize) -> Self {
        PolyExpr { dim, terms: vec![] }
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        PolyExpr::from_pairs(dim, vec![(vec![0; dim], c)])
    }

    /// The coordinate function `x_index`.
    pub fn coordinate(index: usize, dim: usize) -> Self {
        let mut e = vec![0; dim];
        e[index] = 1;
        PolyExpr::from_pairs(dim, vec![(e, 1.0)])
    }

    pub fn monomial(exp: Vec<u32>, coef: f64) -> Self {
        let dim = exp.len();
        PolyExpr::from_pairs(dim, vec![(exp, coef)])
    }

    /// Builds a normalized polynomial, merging duplicate exponents.
    /// Panics if an exponent vector has the wrong length.
    pub fn from_pairs(dim: usize, pairs: Vec<(Vec<u32>, f64)>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in pairs {
            assert_eq!(e.len(), dim, "exponent vector length must equal dimension");
            *acc.entry(e).or_insert(0.0) += c;
        }
        PolyExpr {
            dim,
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    /// Validating constructor used for external input.
    pub fn from_terms(dim: usize, terms: &[Term]) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.exp.len() != dim {
                return Err(GeomError::schema(
                    format!("terms[{i}].exp"),
                    format!("length {} but dimension is {dim}", t.exp.len()),
                ));
            }
            if !t.coef.is_finite() {
                return Err(GeomError::schema(format!("terms[{i}].coef"), "non-finite coefficient"));
            }
            let deg: u32 = t.exp.iter().sum();
            if deg > MAX_DEGREE {
                return Err(GeomError::schema(
                    format!("terms[{i}].exp"),
                    format!("degree {deg} exceeds maximum {MAX_DEGREE}"),
                ));
            }
        }
        Ok(PolyExpr::from_pairs(
            dim,
            terms.iter().map(|t| (t.exp.clone(), t.coef)).collect(),
        ))
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(e, c)| Term {
                exp: e.clone(),
                coef: *c,
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Value and all first partials at `x`.
    pub fn eval_jet(&self, x: &[f64]) -> Result<Jet1> {
        let d = self.dim;
        if x.len() != d {
            return Err(GeomError::shape(format!(
                "point has {} coordinates, polynomial expects {d}",
                x.len()
            )));
        }
        let mut jet = Jet1::constant(0.0, d);
        let mut pw = vec![1.0; d];
        for (e, c) in &self.terms {
            if !c.is_finite() {
                return Err(GeomError::Evaluation("non-finite coefficient".into()));
            }
            for i in 0..d {
                pw[i] = x[i].powi(e[i] as i32);
            }
            jet.value += c * pw.iter().product::<f64>();
            for k in 0..d {
                if e[k] == 0 {
                    continue;
                }
                let mut m = c * e[k] as f64 * x[k].powi(e[k] as i32 - 1);
                for i in 0..d {
                    if i != k {
                        m *= pw[i];
                    }
                }
                jet.partials[k] += m;
            }
        }
        if !jet.is_finite() {
            return Err(GeomError::Evaluation(format!("non-finite value at {x:?}")));
        }
        Ok(jet)
    }

    pub fn derivative(&self, k: usize) -> PolyExpr {
        let pairs = self
            .terms
            .iter()
            .filter(|(e, _)| e[k] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[k] -= 1;
                (e2, c * e[k] as f64)
            })
            .collect();
        PolyExpr::from_pairs(self.dim, pairs)
    }

    pub fn add(&self, other: &PolyExpr) -> PolyExpr {
        assert_eq!(self.dim, other.dim);
        let mut pairs = self.terms.clone();
        pairs.extend(other.terms.iter().cloned());
        PolyExpr::from_pairs(self.dim, pairs)
    }

    pub fn sub(&self, other: &PolyExpr) -> PolyExpr {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> PolyExpr {
        PolyExpr::from_pairs(
            self.dim,
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        )
    }

    pub fn mul(&self, other: &PolyExpr) -> PolyExpr {
        assert_eq!(self.dim, other.dim);
        let mut pairs = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                pairs.push((e, ca * cb));
            }
        }
        PolyExpr::from_pairs(self.dim, pairs)
    }
}

/// All exponent vectors in `dim` variables with total degree at most
/// `degree`, in a fixed order.
pub fn monomials_up_to(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = vec![];
    rec(dim, degree, &mut vec![], &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}
