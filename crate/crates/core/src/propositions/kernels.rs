//! Point-level building blocks shared by the registry entries.

use crate::calculus::{covariant_derivative, torsion};
use crate::connections::{average_at, conjugate_bilinear_at, conjugate_j_at, Connection};
use crate::error::Result;
use crate::fields::{Tensor, TensorJet, Valence};
use crate::model::{ChartModel, PointFrame};
use crate::residual::Residual;
use crate::structures::{self, MetricFlavor};

/// The structure at one point: `Λ`, the metric `b` and the form
/// `F = b(Λ·, ·)`, with `F(X, Y) = sign · b(X, ΛY)`.
pub struct At {
    pub frame: PointFrame,
    pub j: TensorJet,
    pub b: TensorJet,
    pub f: TensorJet,
    pub jv: Tensor,
    pub bv: Tensor,
    pub fv: Tensor,
    pub sign: f64,
}

impl At {
    pub fn new(model: &ChartModel, x: &[f64]) -> Result<At> {
        let frame = model.frame(x)?;
        let j = frame.j()?.clone();
        let b = frame.b()?.clone();
        let f = frame.form()?.clone();
        let sign = if frame.flavor == MetricFlavor::Norden { 1.0 } else { -1.0 };
        Ok(At {
            jv: j.value(),
            bv: b.value(),
            fv: f.value(),
            frame,
            j,
            b,
            f,
            sign,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.frame.x
    }

    /// Metric conjugate (`*` or `♯`).
    pub fn star(&self, g: &Tensor) -> Result<Tensor> {
        conjugate_bilinear_at(g, &self.b, self.x())
    }

    /// Form conjugate (`†` or `‡`).
    pub fn dag(&self, g: &Tensor) -> Result<Tensor> {
        conjugate_bilinear_at(g, &self.f, self.x())
    }

    pub fn lam(&self, g: &Tensor) -> Result<Tensor> {
        conjugate_j_at(g, &self.j, self.x())
    }

    pub fn avg(&self, g: &Tensor) -> Result<Tensor> {
        average_at(g, &self.j, self.x())
    }

    pub fn torsion(&self, g: &Tensor) -> Tensor {
        torsion(g)
    }

    pub fn d_j(&self, g: &Tensor) -> Result<Tensor> {
        structures::d_nabla_j(g, &self.j)
    }

    pub fn d_b(&self, g: &Tensor) -> Result<Tensor> {
        structures::d_nabla_metric(g, &self.b)
    }

    pub fn d_f(&self, g: &Tensor) -> Result<Tensor> {
        structures::d_nabla_metric(g, &self.f)
    }

    /// `[a][k][i] = ((∇_k Λ)∂_i)^a`.
    pub fn nabla_j(&self, g: &Tensor) -> Result<Tensor> {
        covariant_derivative(g, &self.j)
    }

    /// `[k][i][j] = (∇_k b)(∂_i, ∂_j)`.
    pub fn nabla_b(&self, g: &Tensor) -> Result<Tensor> {
        covariant_derivative(g, &self.b)
    }

    pub fn nabla_f(&self, g: &Tensor) -> Result<Tensor> {
        covariant_derivative(g, &self.f)
    }

    /// `b(T(1,2), 3)`.
    pub fn low_b(&self, t: &Tensor) -> Tensor {
        t.lower_into_last(&self.bv)
    }

    /// `F(T(1,2), 3)`.
    pub fn low_f(&self, t: &Tensor) -> Tensor {
        t.lower_into_last(&self.fv)
    }

    /// Feeds `Λ` into the lower slot `slot` counted among all slots.
    pub fn feed(&self, t: &Tensor, slot: usize) -> Tensor {
        t.feed_endo(slot, &self.jv)
    }

    pub fn apply(&self, t: &Tensor) -> Tensor {
        t.apply_endo(&self.jv)
    }

    pub fn nijenhuis(&self) -> Tensor {
        structures::nijenhuis(&self.j)
    }

    /// `Λ⁻¹(∇_1Λ)2` as a (1,2) tensor.
    pub fn shift(&self, g: &Tensor) -> Result<Tensor> {
        Ok(self.nabla_j(g)?.apply_endo(&self.jv).scale(-1.0))
    }

    /// `b(2, Q(1, 3))` for a (1,2) tensor `Q`.
    pub fn b_second(&self, q: &Tensor) -> Tensor {
        let d = q.dim();
        Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
            (0..d).map(|m| self.bv.at2(ix[1], m) * q.at3(m, ix[0], ix[2])).sum()
        })
    }

    pub fn tachibana(&self) -> Tensor {
        structures::tachibana(&self.j, &self.b)
    }
}

/// `t(1,2,3) + t(2,3,1) + t(3,1,2)`.
pub fn cyclic(t: &Tensor) -> Tensor {
    Tensor::from_fn(t.dim(), Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        t.at3(a, b, c) + t.at3(b, c, a) + t.at3(c, a, b)
    })
}

/// Runs `f` at every point and collects its comparisons.
pub fn over_points(
    model: &ChartModel,
    conn: &dyn Connection,
    points: &[Vec<f64>],
    mut f: impl FnMut(&At, &Tensor, &mut Residual) -> Result<()>,
) -> Result<Residual> {
    let mut r = Residual::new();
    for x in points {
        let at = At::new(model, x)?;
        let g = conn.christoffel(x)?;
        f(&at, &g, &mut r)?;
    }
    Ok(r)
}

/// Largest absolute entry of a tensor computed at each point.
pub fn max_over_points(
    model: &ChartModel,
    conn: &dyn Connection,
    points: &[Vec<f64>],
    mut f: impl FnMut(&At, &Tensor) -> Result<Tensor>,
) -> Result<f64> {
    let mut m = 0.0_f64;
    for x in points {
        let at = At::new(model, x)?;
        let g = conn.christoffel(x)?;
        m = m.max(f(&at, &g)?.max_abs());
    }
    Ok(m)
}

/// The right-hand side of the Tachibana expansion for quasi-statistical
/// pairs.
pub fn tachibana_quasi_statistical(at: &At, g: &Tensor) -> Result<Tensor> {
    let d = g.dim();
    let nb = at.nabla_b(g)?;
    let nj = at.nabla_j(g)?;
    let t = torsion(g);
    let (jv, hv) = (&at.jv, &at.bv);
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += nb.at3(b, m, c) * jv.at2(m, a);
            s -= nb.at3(b, a, m) * jv.at2(m, c);
            s += nj.at3(m, b, a) * hv.at2(m, c);
            s += hv.at2(b, m) * (nj.at3(m, c, a) - nj.at3(m, a, c));
            for n in 0..d {
                s += hv.at2(b, m) * (t.at3(m, n, c) * jv.at2(n, a) - jv.at2(m, n) * t.at3(n, a, c));
            }
        }
        s
    }))
}

/// The Tachibana expansion valid for every connection.
pub fn tachibana_expansion(at: &At, g: &Tensor) -> Result<Tensor> {
    let d = g.dim();
    let nb = at.nabla_b(g)?;
    let nj = at.nabla_j(g)?;
    let t = torsion(g);
    let (jv, hv) = (&at.jv, &at.bv);
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += jv.at2(m, a) * nb.at3(m, b, c);
            s -= nb.at3(a, b, m) * jv.at2(m, c);
            s += nj.at3(m, b, a) * hv.at2(m, c);
            s += hv.at2(b, m) * (nj.at3(m, c, a) - nj.at3(m, a, c));
            for n in 0..d {
                s += t.at3(m, n, b) * jv.at2(n, a) * hv.at2(m, c);
                s -= t.at3(m, a, b) * hv.at2(m, n) * jv.at2(n, c);
                s += hv.at2(b, m) * (t.at3(m, n, c) * jv.at2(n, a) - jv.at2(m, n) * t.at3(n, a, c));
            }
        }
        s
    }))
}

/// `h(T(Λ1, 3), 2) + h((∇_2Λ)3, 1)`.
pub fn torsion_plus_b(at: &At, g: &Tensor) -> Result<Tensor> {
    let d = g.dim();
    let nj = at.nabla_j(g)?;
    let t = torsion(g);
    let (jv, hv) = (&at.jv, &at.bv);
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += nj.at3(m, b, c) * hv.at2(m, a);
            for n in 0..d {
                s += t.at3(m, n, c) * jv.at2(n, a) * hv.at2(m, b);
            }
        }
        s
    }))
}

/// `W(1,2,3) = h(2, T(Λ1, 3)) + h(2, (∇_3Λ)1)`, whose cyclic sum is the
/// combination that the cyclic Tachibana sum reduces to.
pub fn cyclic_phi_terms(at: &At, g: &Tensor) -> Result<Tensor> {
    let d = g.dim();
    let nj = at.nabla_j(g)?;
    let t = torsion(g);
    let (jv, hv) = (&at.jv, &at.bv);
    Ok(Tensor::from_fn(d, Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        let mut s = 0.0;
        for m in 0..d {
            s += hv.at2(b, m) * nj.at3(m, c, a);
            for n in 0..d {
                s += hv.at2(b, m) * t.at3(m, n, c) * jv.at2(n, a);
            }
        }
        s
    }))
}

/// `g(2, T(1,3)) + g(3, T(2,1)) + g(1, T(3,2))`.
pub fn cyclic_torsion_terms(at: &At, g: &Tensor) -> Tensor {
    let tl = at.low_b(&torsion(g));
    Tensor::from_fn(g.dim(), Valence::TRILINEAR, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        tl.at3(a, c, b) + tl.at3(b, a, c) + tl.at3(c, b, a)
    })
}
