//! Point-evaluable tensor fields on a single coordinate chart.
//!
//! Every field hands back component values together with exact first
//! partials. Polynomial fields (`SmoothTensorField`) are the primary
//! representation; rational objects such as inverses and conjugate
//! connections are evaluation-backed through [`FnField`].

pub mod jet;
pub mod poly;
pub mod sample;
pub mod smooth;
pub mod tensor;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub use jet::Jet1;
pub use poly::{monomials_up_to, PolyExpr, Term};
pub use sample::sample_points;
pub use smooth::{field_arith, ArithOp, SmoothTensorField};
pub use tensor::{MatJet, Tensor, TensorJet, Valence};

/// An axis-aligned box in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = lower.len();
        if d != upper.len() {
            return Err(GeomError::shape("lower and upper corners differ in length"));
        }
        if d < 2 || d % 2 != 0 {
            return Err(GeomError::shape(format!("chart dimension must be even and at least 2, got {d}")));
        }
        for i in 0..d {
            if !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return Err(GeomError::shape(format!(
                    "axis {i} interval [{}, {}] is empty",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(ChartDomain { lower, upper })
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        ChartDomain::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GeomError::Domain { point: x.to_vec() })
        }
    }
}

/// Anything that yields component values and first partials at a point.
pub trait TensorField: Send + Sync {
    fn dim(&self) -> usize;
    fn valence(&self) -> Valence;
    fn jet(&self, x: &[f64]) -> Result<TensorJet>;

    fn value(&self, x: &[f64]) -> Result<Tensor> {
        Ok(self.jet(x)?.value())
    }
}

pub type Field = Arc<dyn TensorField>;

type JetFn = dyn Fn(&[f64]) -> Result<TensorJet> + Send + Sync;

/// A field defined by a closure producing jets.
pub struct FnField {
    dim: usize,
    valence: Valence,
    f: Box<JetFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        valence: Valence,
        f: impl Fn(&[f64]) -> Result<TensorJet> + Send + Sync + 'static,
    ) -> Self {
        FnField {
            dim,
            valence,
            f: Box::new(f),
        }
    }

    pub fn arc(
        dim: usize,
        valence: Valence,
        f: impl Fn(&[f64]) -> Result<TensorJet> + Send + Sync + 'static,
    ) -> Field {
        Arc::new(FnField::new(dim, valence, f))
    }
}

impl TensorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn valence(&self) -> Valence {
        self.valence
    }
    fn jet(&self, x: &[f64]) -> Result<TensorJet> {
        let j = (self.f)(x)?;
        if !j.is_finite() {
            return Err(GeomError::Evaluation(format!("non-finite field value at {x:?}")));
        }
        Ok(j)
    }
}

/// Matrix jet of a rank-2 field.
pub fn mat_jet(field: &dyn TensorField, x: &[f64]) -> Result<MatJet> {
    if field.valence().rank() != 2 {
        return Err(GeomError::shape(format!("expected a rank-2 field, got {}", field.valence())));
    }
    Ok(field.jet(x)?.to_mat_jet())
}

/// Rank-2 field built from a matrix-jet closure.
pub fn matrix_field(
    dim: usize,
    valence: Valence,
    f: impl Fn(&[f64]) -> Result<MatJet> + Send + Sync + 'static,
) -> Field {
    FnField::arc(dim, valence, move |x| Ok(f(x)?.to_tensor_jet(valence)))
}
