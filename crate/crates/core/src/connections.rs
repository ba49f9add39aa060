//! Linear connections and their conjugation transforms.
//!
//! A connection only has to produce its Christoffel values at a point.
//! Conjugates of polynomial data are rational, so every transform here is
//! evaluation-backed and composes lazily.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{self, invert_bilinear};
use crate::error::{GeomError, Result};
use crate::fields::{Field, SmoothTensorField, Tensor, TensorField, TensorJet, Valence};
use crate::residual::Residual;

pub trait Connection: Send + Sync {
    fn dim(&self) -> usize;
    fn christoffel(&self, x: &[f64]) -> Result<Tensor>;
}

pub type Conn = Arc<dyn Connection>;

type GammaFn = dyn Fn(&[f64]) -> Result<Tensor> + Send + Sync;

/// A connection given by a closure.
pub struct FnConnection {
    dim: usize,
    f: Box<GammaFn>,
}

impl FnConnection {
    pub fn arc(dim: usize, f: impl Fn(&[f64]) -> Result<Tensor> + Send + Sync + 'static) -> Conn {
        Arc::new(FnConnection { dim, f: Box::new(f) })
    }
}

impl Connection for FnConnection {
    fn dim(&self) -> usize {
        self.dim
    }
    fn christoffel(&self, x: &[f64]) -> Result<Tensor> {
        let g = (self.f)(x)?;
        if g.data().iter().any(|v| !v.is_finite()) {
            return Err(GeomError::Evaluation(format!("non-finite Christoffel symbol at {x:?}")));
        }
        Ok(g)
    }
}

/// Polynomial Christoffel symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyConnection {
    pub gamma: SmoothTensorField,
}

impl PolyConnection {
    pub fn new(gamma: SmoothTensorField) -> Result<Self> {
        if gamma.valence() != Valence::VECTOR_2FORM {
            return Err(GeomError::shape(format!(
                "Christoffel symbols need valence (1,2), got {}",
                gamma.valence()
            )));
        }
        Ok(PolyConnection { gamma })
    }

    pub fn flat(dim: usize) -> Self {
        PolyConnection {
            gamma: SmoothTensorField::zeros(dim, Valence::VECTOR_2FORM),
        }
    }

    pub fn arc(self) -> Conn {
        Arc::new(self)
    }
}

impl Connection for PolyConnection {
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn christoffel(&self, x: &[f64]) -> Result<Tensor> {
        self.gamma.value(x)
    }
}

/// Christoffel values stored at a fixed set of points. Evaluation
/// anywhere else is an error.
pub struct TabulatedConnection {
    dim: usize,
    table: Vec<(Vec<f64>, Tensor)>,
}

impl TabulatedConnection {
    pub fn new(dim: usize, table: Vec<(Vec<f64>, Tensor)>) -> Self {
        TabulatedConnection { dim, table }
    }
    pub fn arc(self) -> Conn {
        Arc::new(self)
    }
}

impl Connection for TabulatedConnection {
    fn dim(&self) -> usize {
        self.dim
    }
    fn christoffel(&self, x: &[f64]) -> Result<Tensor> {
        self.table
            .iter()
            .find(|(p, _)| p.as_slice() == x)
            .map(|(_, g)| g.clone())
            .ok_or_else(|| GeomError::Evaluation(format!("tabulated connection has no value at {x:?}")))
    }
}

/// Which transform produced a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationKind {
    Metric,
    JConjugate,
    Average,
}

/// `Γ'^m_{kj} = (b⁻¹)^{mi}(∂_k b_{ij} − Γ^n_{ki} b_{nj})`: the conjugate
/// through the second slot of `b`.
pub fn conjugate_bilinear_at(gamma: &Tensor, b: &TensorJet, x: &[f64]) -> Result<Tensor> {
    let d = gamma.dim();
    let bv = b.value();
    let inv = invert_bilinear(&bv, x)?;
    let mut rhs = Tensor::zeros(d, Valence::TRILINEAR); // [i][k][j]
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                let mut s = b.d(i * d + j, k);
                for n in 0..d {
                    s -= gamma.at3(n, k, i) * bv.at2(n, j);
                }
                rhs.set(&[i, k, j], s);
            }
        }
    }
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (m, k, j) = (ix[0], ix[1], ix[2]);
        (0..d).map(|i| inv[(m, i)] * rhs.at3(i, k, j)).sum()
    }))
}

/// The same construction through the first slot:
/// `∂_k b_{ij} = b(Γ'_k ∂i, ∂j) + b(∂i, ∇_k ∂j)`.
pub fn conjugate_bilinear_first_slot_at(gamma: &Tensor, b: &TensorJet, x: &[f64]) -> Result<Tensor> {
    let d = gamma.dim();
    let bv = b.value();
    let inv_t = invert_bilinear(&bv, x)?.transpose();
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (m, k, i) = (ix[0], ix[1], ix[2]);
        // Σ_n Γ'^n_{ki} b_{nj} = ∂_k b_{ij} − Γ^n_{kj} b_{in}
        (0..d)
            .map(|j| {
                let mut s = b.d(i * d + j, k);
                for n in 0..d {
                    s -= gamma.at3(n, k, j) * bv.at2(i, n);
                }
                inv_t[(m, j)] * s
            })
            .sum()
    }))
}

/// `Γ^Λ{}^a_{kj} = (Λ⁻¹)^a_n (∂_k Λ^n_j + Γ^n_{km} Λ^m_j)`.
pub fn conjugate_j_at(gamma: &Tensor, j: &TensorJet, x: &[f64]) -> Result<Tensor> {
    let d = gamma.dim();
    let jv = j.value();
    let m = jv.to_matrix();
    let det = m.determinant();
    let inv = m.try_inverse().ok_or_else(|| GeomError::Degenerate {
        what: "endomorphism".into(),
        point: x.to_vec(),
        det,
    })?;
    let mut inner = Tensor::zeros(d, Valence::VECTOR_2FORM);
    for n in 0..d {
        for k in 0..d {
            for c in 0..d {
                let mut s = j.d(n * d + c, k);
                for mm in 0..d {
                    s += gamma.at3(n, k, mm) * jv.at2(mm, c);
                }
                inner.set(&[n, k, c], s);
            }
        }
    }
    Ok(Tensor::from_fn(d, Valence::VECTOR_2FORM, |ix| {
        let (a, k, c) = (ix[0], ix[1], ix[2]);
        (0..d).map(|n| inv[(a, n)] * inner.at3(n, k, c)).sum()
    }))
}

pub fn average_at(gamma: &Tensor, j: &TensorJet, x: &[f64]) -> Result<Tensor> {
    Ok(conjugate_j_at(gamma, j, x)?.add(gamma).scale(0.5))
}

pub fn levi_civita(b: Field) -> Conn {
    let d = b.dim();
    FnConnection::arc(d, move |x| calculus::levi_civita(&b.jet(x)?, x))
}

pub fn conjugate_by_bilinear(conn: Conn, b: Field) -> Conn {
    let d = conn.dim();
    FnConnection::arc(d, move |x| conjugate_bilinear_at(&conn.christoffel(x)?, &b.jet(x)?, x))
}

pub fn conjugate_by_j(conn: Conn, j: Field) -> Conn {
    let d = conn.dim();
    FnConnection::arc(d, move |x| conjugate_j_at(&conn.christoffel(x)?, &j.jet(x)?, x))
}

pub fn average_connection(conn: Conn, j: Field) -> Conn {
    let d = conn.dim();
    FnConnection::arc(d, move |x| average_at(&conn.christoffel(x)?, &j.jet(x)?, x))
}

/// Dispatches on the transform kind; `metric` uses `form`, the others `j`.
pub fn conjugate(conn: Conn, kind: ConjugationKind, form: Option<Field>, j: Option<Field>) -> Result<Conn> {
    match kind {
        ConjugationKind::Metric => Ok(conjugate_by_bilinear(
            conn,
            form.ok_or_else(|| GeomError::MissingField("b".into()))?,
        )),
        ConjugationKind::JConjugate => Ok(conjugate_by_j(conn, j.ok_or_else(|| GeomError::MissingField("J".into()))?)),
        ConjugationKind::Average => Ok(average_connection(
            conn,
            j.ok_or_else(|| GeomError::MissingField("J".into()))?,
        )),
    }
}

/// The torsion-free part `½(Γ^k_{ij} + Γ^k_{ji})`.
pub fn symmetrized(conn: Conn) -> Conn {
    let d = conn.dim();
    FnConnection::arc(d, move |x| Ok(calculus::symmetric_part(&conn.christoffel(x)?)))
}

/// `Γ + Δ` for a (1,2) difference field `Δ`.
pub fn shifted(conn: Conn, delta: Field) -> Conn {
    let d = conn.dim();
    FnConnection::arc(d, move |x| Ok(conn.christoffel(x)?.add(&delta.value(x)?)))
}

/// The torsion of a connection as a field value at a point.
pub fn torsion_at(conn: &dyn Connection, x: &[f64]) -> Result<Tensor> {
    Ok(calculus::torsion(&conn.christoffel(x)?))
}

/// `∇t` at a point.
pub fn nabla(conn: &dyn Connection, t: &dyn TensorField, x: &[f64]) -> Result<Tensor> {
    calculus::covariant_derivative(&conn.christoffel(x)?, &t.jet(x)?)
}

/// Metric flavor of a Klein table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KleinFlavor {
    Hermitian,
    Norden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KleinIdentity {
    pub name: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KleinReport {
    pub flavor: KleinFlavor,
    pub identities: Vec<KleinIdentity>,
}

impl KleinReport {
    pub fn max_residual(&self) -> f64 {
        self.identities.iter().map(|i| i.max_residual).fold(0.0, f64::max)
    }
}

/// Checks the involution and composition identities of the Klein group
/// generated by the metric, form and `Λ` conjugations at the given points.
///
/// Hermitian: `∇* = (∇†)^Λ = (∇^Λ)†`, `∇† = (∇*)^Λ = (∇^Λ)*`,
/// `∇^Λ = (∇*)† = (∇†)*`, with `*` through `g` and `†` through `ω`.
/// Norden: the same table with `♯` through `h` and `‡` through `ℏ`.
pub fn klein_table(
    conn: &dyn Connection,
    metric: &dyn TensorField,
    j: &dyn TensorField,
    flavor: KleinFlavor,
    points: &[Vec<f64>],
) -> Result<KleinReport> {
    let names = match flavor {
        KleinFlavor::Hermitian => [
            "(∇*)* = ∇",
            "(∇†)† = ∇",
            "(∇^Λ)^Λ = ∇",
            "∇* = (∇†)^Λ",
            "∇* = (∇^Λ)†",
            "∇† = (∇*)^Λ",
            "∇† = (∇^Λ)*",
            "∇^Λ = (∇*)†",
            "∇^Λ = (∇†)*",
        ],
        KleinFlavor::Norden => [
            "(∇♯)♯ = ∇",
            "(∇‡)‡ = ∇",
            "(∇^Λ)^Λ = ∇",
            "∇♯ = (∇‡)^Λ",
            "∇♯ = (∇^Λ)‡",
            "∇‡ = (∇♯)^Λ",
            "∇‡ = (∇^Λ)♯",
            "∇^Λ = (∇♯)‡",
            "∇^Λ = (∇‡)♯",
        ],
    };
    let mut res = vec![Residual::new(); names.len()];
    for x in points {
        let jj = j.jet(x)?;
        let bj = metric.jet(x)?;
        let purity = crate::structures::purity_defect(&bj.value(), &jj.value(), flavor);
        if purity > 1e-8 * (1.0 + bj.value().max_abs()) {
            return Err(GeomError::precondition(format!(
                "metric is not {flavor:?}-compatible with J at {x:?} (defect {purity:e})"
            )));
        }
        let fj = crate::structures::form_jet(&jj, &bj);
        let g0 = conn.christoffel(x)?;
        let star = |g: &Tensor| conjugate_bilinear_at(g, &bj, x);
        let dag = |g: &Tensor| conjugate_bilinear_at(g, &fj, x);
        let lam = |g: &Tensor| conjugate_j_at(g, &jj, x);
        let s = star(&g0)?;
        let t = dag(&g0)?;
        let l = lam(&g0)?;
        let pairs = [
            (g0.clone(), star(&s)?),
            (g0.clone(), dag(&t)?),
            (g0.clone(), lam(&l)?),
            (s.clone(), lam(&t)?),
            (s.clone(), dag(&l)?),
            (t.clone(), lam(&s)?),
            (t.clone(), star(&l)?),
            (l.clone(), dag(&s)?),
            (l.clone(), star(&t)?),
        ];
        for (r, (a, b)) in res.iter_mut().zip(pairs.iter()) {
            r.compare(a, b, x);
        }
    }
    Ok(KleinReport {
        flavor,
        identities: names
            .iter()
            .zip(res)
            .map(|(n, r)| KleinIdentity {
                name: n.to_string(),
                max_residual: r.normalized(),
            })
            .collect(),
    })
}
