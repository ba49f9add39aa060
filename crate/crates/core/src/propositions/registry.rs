//! Every registered result with the form in which it is checked.

use crate::calculus::{exterior_d2, exterior_d2_via_connection};
use crate::connections::{conjugate_by_bilinear, conjugate_by_j, klein_table, levi_civita, Conn, Connection};
use crate::error::Result;
use crate::fields::Tensor;
use crate::generate::{teo5_witness, Constraint};
use crate::model::ChartModel;
use crate::predicates::quasi_kahler_norden_sum;
use crate::residual::Residual;
use crate::structures::{codazzi_defect_j, project_torsion, torsion_compat_defect, torsion_invariance_defect};
use crate::connections::KleinFlavor;

use super::kernels::*;
use super::{
    Family, Form, Group, Outcome, Proposition, Status, Trial, CONCLUSION_TOL, IDENTITY_TOL, KERNEL_TOL,
};

const ROMAN: [&str; 6] = ["i", "ii", "iii", "iv", "v", "vi"];

/// The conjugations generating the Klein group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Id,
    Star,
    Dag,
    Lam,
}

fn apply_op(at: &At, op: Op, g: &Tensor) -> Result<Tensor> {
    match op {
        Op::Id => Ok(g.clone()),
        Op::Star => at.star(g),
        Op::Dag => at.dag(g),
        Op::Lam => at.lam(g),
    }
}

fn conj_conn(model: &ChartModel, op: Op, c: Conn) -> Result<Conn> {
    Ok(match op {
        Op::Id => c,
        Op::Star => conjugate_by_bilinear(c, model.metric_field()?),
        Op::Dag => conjugate_by_bilinear(c, model.form_field()?),
        Op::Lam => conjugate_by_j(c, model.j_field()?),
    })
}

fn family_group(f: Family) -> Group {
    match f {
        Family::Hermitian => Group::Hermitian,
        Family::Norden => Group::Norden,
    }
}

type Check = dyn Fn(&At, &Tensor, &mut Residual) -> Result<()> + Send + Sync;

fn identity(
    id: &str,
    group: Group,
    family: Family,
    direction: &str,
    tol: f64,
    check: impl Fn(&At, &Tensor, &mut Residual) -> Result<()> + Send + Sync + 'static,
) -> Proposition {
    Proposition::new(id, group, Form::Identity, direction, tol, move |t: &mut Trial| {
        let m = t.model(family)?;
        let c = t.random_conn();
        let pts = t.points(&m);
        Ok(Outcome::identity(over_points(&m, c.as_ref(), &pts, |a, g, r| check(a, g, r))?))
    })
}

/// Max of several absolute hypothesis residuals at the points.
fn hypotheses(
    m: &ChartModel,
    c: &dyn Connection,
    pts: &[Vec<f64>],
    f: impl Fn(&At, &Tensor) -> Result<Vec<Tensor>>,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in pts {
        let at = At::new(m, x)?;
        let g = c.christoffel(x)?;
        for t in f(&at, &g)? {
            worst = worst.max(t.max_abs());
        }
    }
    Ok(worst)
}

fn conclude(m: &ChartModel, c: &dyn Connection, pts: &[Vec<f64>], check: &Check) -> Result<Residual> {
    over_points(m, c, pts, |a, g, r| check(a, g, r))
}

fn compat(at: &At, g: &Tensor) -> Tensor {
    torsion_compat_defect(&at.torsion(g), &at.jv)
}

fn structure_entries() -> Vec<Proposition> {
    let h = Family::Hermitian;
    let s = Group::Structure;
    let mut v = vec![
        identity("GAD1(i)", s, h, "d∇Λ = Λ T(∇^Λ) on random pairs", KERNEL_TOL, |a, g, r| {
            r.compare(&a.d_j(g)?, &a.apply(&a.torsion(&a.lam(g)?)), a.x());
            Ok(())
        }),
        identity("GAD1(ii)", s, h, "d(∇^Λ)Λ = Λ T(∇) on random pairs", IDENTITY_TOL, |a, g, r| {
            r.compare(&a.d_j(&a.lam(g)?)?, &a.apply(&a.torsion(g)), a.x());
            Ok(())
        }),
        identity(
            "GAD1(iii)",
            s,
            h,
            "d∇Λ − d(∇^Λ)Λ = (∇_1Λ)2 − (∇_2Λ)1 on random pairs",
            IDENTITY_TOL,
            |a, g, r| {
                let lhs = a.d_j(g)?.sub(&a.d_j(&a.lam(g)?)?);
                r.compare(&lhs, &codazzi_defect_j(g, &a.j)?, a.x());
                Ok(())
            },
        ),
        Proposition::new(
            "GAD1(i):negative",
            s,
            Form::Negative,
            "random ∇ with d∇Λ ≠ 0 gives T(∇^Λ) ≠ 0",
            IDENTITY_TOL,
            move |t: &mut Trial| {
                let m = t.model(h)?;
                let c = t.random_conn();
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| Ok(vec![a.d_j(g)?]))?;
                let r = over_points(&m, c.as_ref(), &pts, |a, g, r| {
                    r.zero(&a.torsion(&a.lam(g)?), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        ),
        Proposition::new(
            "lem1",
            s,
            Form::Witness,
            "∇ = D^Λ with D torsion-free: N = −Λ(T(1,Λ2) + T(Λ1,2))",
            IDENTITY_TOL,
            move |t: &mut Trial| {
                let m = t.model(h)?;
                let c = conjugate_by_j(t.symmetric_conn(), m.j_field()?);
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| Ok(vec![a.d_j(g)?]))?;
                let r = over_points(&m, c.as_ref(), &pts, |a, g, r| {
                    r.compare(&a.nijenhuis(), &a.apply(&compat(a, g)).scale(-1.0), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        ),
        Proposition::new(
            "pro2",
            s,
            Form::Witness,
            "d∇Λ = 0 and torsion-compatible ⟹ N = 0 (projected witnesses on integrable models)",
            CONCLUSION_TOL,
            move |t: &mut Trial| {
                let m = t.kahler()?;
                let c = t.project(&m, &[Constraint::DClosedJ, Constraint::JInvariantTorsion]);
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| Ok(vec![a.d_j(g)?, compat(a, g)]))?;
                let r = over_points(&m, c.as_ref(), &pts, |a, _g, r| {
                    r.zero(&a.nijenhuis(), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        ),
        Proposition::new(
            "pro2:negative",
            s,
            Form::Negative,
            "∇ = D^Λ without torsion projection on generic J: compatibility fails and N ≠ 0",
            IDENTITY_TOL,
            move |t: &mut Trial| {
                let m = t.model(h)?;
                let c = conjugate_by_j(t.symmetric_conn(), m.j_field()?);
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| Ok(vec![compat(a, g)]))?;
                let r = over_points(&m, c.as_ref(), &pts, |a, _g, r| {
                    r.zero(&a.nijenhuis(), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        )
        .min_dim(4),
        Proposition::new(
            "pro2:corollary",
            s,
            Form::Witness,
            "torsion-compatible with T(∇^Λ) = 0 ⟹ N = 0",
            CONCLUSION_TOL,
            move |t: &mut Trial| {
                let m = t.kahler()?;
                let c = t.project(&m, &[Constraint::DClosedJ, Constraint::JInvariantTorsion]);
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| {
                    Ok(vec![a.torsion(&a.lam(g)?), compat(a, g)])
                })?;
                let r = over_points(&m, c.as_ref(), &pts, |a, _g, r| {
                    r.zero(&a.nijenhuis(), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        ),
        identity(
            "pro2:displayed-identity",
            s,
            h,
            "d∇Λ(Λ1,2) + d∇Λ(1,Λ2) = T(Λ1,Λ2) − T(1,2) − N(1,2) on random pairs",
            IDENTITY_TOL,
            |a, g, r| {
                let dj = a.d_j(g)?;
                let t = a.torsion(g);
                let lhs = a.feed(&dj, 1).add(&a.feed(&dj, 2));
                let rhs = a.feed(&a.feed(&t, 1), 2).sub(&t).sub(&a.nijenhuis());
                r.compare(&lhs, &rhs, a.x());
                Ok(())
            },
        ),
        identity(
            "torsion-compatibility",
            s,
            h,
            "T(Λ1,2) + T(1,Λ2) fed Λ equals T(Λ1,Λ2) − T(1,2); the projector is idempotent with compatible image",
            IDENTITY_TOL,
            |a, g, r| {
                let t = a.torsion(g);
                let c = torsion_compat_defect(&t, &a.jv);
                r.compare(&a.feed(&c, 2), &torsion_invariance_defect(&t, &a.jv), a.x());
                let p = project_torsion(&t, &a.jv);
                r.zero(&torsion_compat_defect(&p, &a.jv), a.x());
                r.compare(&project_torsion(&p, &a.jv), &p, a.x());
                Ok(())
            },
        ),
        Proposition::new(
            "vishnevskii",
            s,
            Form::Witness,
            "Ψ-defect zero ⟹ d∇Λ(Λ1,2) + d∇Λ(1,Λ2) = Λ(T(Λ1,2) + T(1,Λ2))",
            CONCLUSION_TOL,
            move |t: &mut Trial| {
                let m = t.model(h)?;
                let c = t.project(&m, &[Constraint::VishnevskiiZero]);
                let pts = t.points(&m);
                let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| {
                    Ok(vec![crate::generate::constraints::vishnevskii_defect(g, &a.j)?])
                })?;
                let r = over_points(&m, c.as_ref(), &pts, |a, g, r| {
                    let dj = a.d_j(g)?;
                    let lhs = a.feed(&dj, 1).add(&a.feed(&dj, 2));
                    r.compare(&lhs, &a.apply(&compat(a, g)), a.x());
                    Ok(())
                })?;
                Ok(Outcome::witness(r, hyp))
            },
        ),
    ];
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

fn klein(id: &str, family: Family) -> Proposition {
    let flavor = match family {
        Family::Hermitian => KleinFlavor::Hermitian,
        Family::Norden => KleinFlavor::Norden,
    };
    Proposition::new(
        id,
        family_group(family),
        Form::Klein,
        "involutions and compositions of the metric, form and Λ conjugations",
        IDENTITY_TOL,
        move |t: &mut Trial| {
            let m = t.model(family)?;
            let c = t.random_conn();
            let pts = t.points(&m);
            let rep = klein_table(
                c.as_ref(),
                m.metric_field()?.as_ref(),
                m.j_field()?.as_ref(),
                flavor,
                &pts,
            )?;
            let mut r = Residual::new();
            r.scalar(rep.max_residual(), 0.0, &pts[0]);
            r.max_lhs = 0.0;
            Ok(Outcome::identity(r))
        },
    )
}

/// The six Codazzi-hypothesis statements. `carrier` names the connection
/// the Codazzi condition is imposed on.
fn codazzi_family(prefix: &str, family: Family) -> Vec<Proposition> {
    use Op::*;
    type Pair = fn(&At, &Tensor) -> Result<(Tensor, Tensor)>;
    let s_form: Pair = |a, g| {
        let x = a.star(g)?;
        Ok((a.d_f(&x)?, a.feed(&a.d_b(&x)?, 2).scale(a.sign)))
    };
    let d_form: Pair = |a, g| {
        let x = a.dag(g)?;
        Ok((a.d_f(&x)?, a.feed(&a.d_b(&x)?, 2).scale(a.sign)))
    };
    let base: Pair = |a, g| Ok((a.d_f(g)?, a.feed(&a.d_b(g)?, 2).scale(a.sign)));
    let lam_form: Pair = |a, g| Ok((a.d_f(&a.lam(g)?)?, a.d_f(g)?));
    let lam_metric: Pair = |a, g| Ok((a.d_b(&a.lam(g)?)?, a.d_b(g)?));
    let table: [(Op, Option<Op>, Pair, &str); 6] = [
        (Id, Some(Star), s_form, "d(∇*)F(1,2,3) = ±d(∇*)b(1,2,Λ3)"),
        (Id, Some(Dag), d_form, "d(∇†)F(1,2,3) = ±d(∇†)b(1,2,Λ3)"),
        (Star, None, base, "d∇F(1,2,3) = ±d∇b(1,2,Λ3)"),
        (Dag, None, base, "d∇F(1,2,3) = ±d∇b(1,2,Λ3)"),
        (Dag, None, lam_form, "d(∇^Λ)F = d∇F"),
        (Star, None, lam_metric, "d(∇^Λ)b = d∇b"),
    ];
    table
        .into_iter()
        .enumerate()
        .map(|(k, (carrier, alt, pair, what))| {
            let hyp_on = match carrier {
                Id => "∇",
                Star => "the metric conjugate",
                _ => "the form conjugate",
            };
            Proposition::new(
                &format!("{prefix}({})", ROMAN[k]),
                family_group(family),
                Form::Witness,
                &format!("(Codazzi on {hyp_on}, Λ): {what}"),
                CONCLUSION_TOL,
                move |t: &mut Trial| {
                    let m = t.model(family)?;
                    let p: Conn = t.project(&m, &[Constraint::CodazziJ]);
                    let pts = t.points(&m);
                    let hyp = hypotheses(&m, p.as_ref(), &pts, |a, g| Ok(vec![codazzi_defect_j(g, &a.j)?]))?;
                    let check = |c: &Conn| {
                        over_points(&m, c.as_ref(), &pts, |a, g, r| {
                            let (l, rr) = pair(a, g)?;
                            r.compare(&l, &rr, a.x());
                            Ok(())
                        })
                    };
                    let r = check(&conj_conn(&m, carrier, p.clone())?)?;
                    let mut out = Outcome::witness(r, hyp);
                    if let Some(alt) = alt {
                        let ra = check(&conj_conn(&m, alt, p.clone())?)?;
                        out = out.with_side("alternate placement (Codazzi on the conjugate)", ra);
                    }
                    Ok(out)
                },
            )
        })
        .collect()
}

/// `dF` of one connection against `db` of another with `Λ` in the last slot.
fn form_metric_family(prefix: &str, family: Family) -> Vec<Proposition> {
    use Op::*;
    let table = [
        (Lam, Id, "d(∇^Λ)F(1,2,3) = ±d∇b(1,2,Λ3)"),
        (Id, Lam, "d∇F(1,2,3) = ±d(∇^Λ)b(1,2,Λ3)"),
        (Dag, Star, "d(∇†)F(1,2,3) = ±d(∇*)b(1,2,Λ3)"),
        (Star, Dag, "d(∇*)F(1,2,3) = ±d(∇†)b(1,2,Λ3)"),
    ];
    table
        .into_iter()
        .enumerate()
        .map(|(k, (fop, bop, what))| {
            identity(
                &format!("{prefix}({})", ROMAN[k]),
                family_group(family),
                family,
                what,
                IDENTITY_TOL,
                move |a, g, r| {
                    let lhs = a.d_f(&apply_op(a, fop, g)?)?;
                    let rhs = a.feed(&a.d_b(&apply_op(a, bop, g)?)?, 2).scale(a.sign);
                    r.compare(&lhs, &rhs, a.x());
                    Ok(())
                },
            )
        })
        .collect()
}

/// `d(op ∇)b = b(T(metric-conjugate of op ∇)(1,2), 3)` on random inputs, plus
/// the forward direction on connections whose torsion side vanishes exactly.
fn torsion_free_family(prefix: &str, family: Family, ops: &[Op]) -> Vec<Proposition> {
    ops.iter()
        .enumerate()
        .map(|(k, &op)| {
            let top = match op {
                Op::Id => Op::Star,
                Op::Star => Op::Id,
                Op::Dag => Op::Lam,
                Op::Lam => Op::Dag,
            };
            let name = |o: Op| match o {
                Op::Id => "∇",
                Op::Star => "∇*",
                Op::Dag => "∇†",
                Op::Lam => "∇^Λ",
            };
            Proposition::new(
                &format!("{prefix}({})", ROMAN[k]),
                family_group(family),
                Form::Identity,
                &format!(
                    "({}, b) quasi-statistical ⟺ T({}) = 0: identity on random inputs and exact torsion-free constructions",
                    name(op),
                    name(top)
                ),
                IDENTITY_TOL,
                move |t: &mut Trial| {
                    let m = t.model(family)?;
                    let c = t.random_conn();
                    let pts = t.points(&m);
                    let mut r = over_points(&m, c.as_ref(), &pts, |a, g, r| {
                        let x = apply_op(a, op, g)?;
                        r.compare(&a.d_b(&x)?, &a.low_b(&a.torsion(&a.star(&x)?)), a.x());
                        Ok(())
                    })?;
                    let e = conj_conn(&m, top, t.symmetric_conn())?;
                    let fwd = over_points(&m, e.as_ref(), &pts, |a, g, r| {
                        r.zero(&a.d_b(&apply_op(a, op, g)?)?, a.x());
                        Ok(())
                    })?;
                    r.merge(&fwd);
                    Ok(Outcome::identity(r).with_side("torsion-free construction", fwd))
                },
            )
        })
        .collect()
}

fn torsion_negative(id: &str, family: Family) -> Proposition {
    Proposition::new(
        id,
        family_group(family),
        Form::Negative,
        "torsionful ∇ gives (∇*, b) not quasi-statistical",
        IDENTITY_TOL,
        move |t: &mut Trial| {
            let m = t.model(family)?;
            let c = t.random_conn();
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, g| Ok(vec![a.torsion(g)]))?;
            let r = over_points(&m, c.as_ref(), &pts, |a, g, r| {
                r.zero(&a.d_b(&a.star(g)?)?, a.x());
                Ok(())
            })?;
            Ok(Outcome::witness(r, hyp))
        },
    )
}

/// The chains `dF(X) ⟺ T(X†) ⟺ d(X*)Λ ⟺ d(X^Λ)b` as three identities.
fn chain_family(prefix: &str, family: Family) -> Vec<Proposition> {
    use Op::*;
    [Id, Star, Dag, Lam]
        .into_iter()
        .enumerate()
        .map(|(k, op)| {
            identity(
                &format!("{prefix}({})", ROMAN[k]),
                family_group(family),
                family,
                "dF(X)(1,2,3) = F(T(X†)(1,2),3) = b(d(X*)Λ(1,2),3); d(X^Λ)b = b(T(X†)(1,2),3)",
                IDENTITY_TOL,
                move |a, g, r| {
                    let x = apply_op(a, op, g)?;
                    let td = a.torsion(&a.dag(&x)?);
                    let ft = a.low_f(&td);
                    r.compare(&a.d_f(&x)?, &ft, a.x());
                    r.compare(&a.low_b(&a.d_j(&a.star(&x)?)?), &ft, a.x());
                    r.compare(&a.d_b(&a.lam(&x)?)?, &a.low_b(&td), a.x());
                    Ok(())
                },
            )
        })
        .collect()
}

/// A witness entry on Kähler-type models.
fn kahler_witness(
    id: &str,
    direction: &str,
    set: &'static [Constraint],
    hyp: fn(&At, &Tensor) -> Result<Vec<Tensor>>,
    check: fn(&At, &Tensor, &mut Residual) -> Result<()>,
) -> Proposition {
    Proposition::new(id, Group::Hermitian, Form::Witness, direction, CONCLUSION_TOL, move |t: &mut Trial| {
        let m = t.kahler()?;
        let c = t.project(&m, set);
        let pts = t.points(&m);
        let h = hypotheses(&m, c.as_ref(), &pts, hyp)?;
        Ok(Outcome::witness(conclude(&m, c.as_ref(), &pts, &check)?, h))
    })
}

fn hermitian_entries() -> Vec<Proposition> {
    use Constraint::*;
    let h = Family::Hermitian;
    let g = Group::Hermitian;
    let mut v = vec![klein("teo1", h)];
    v.push(identity(
        "lem2",
        g,
        h,
        "coordinate dω equals its connection expansion",
        KERNEL_TOL,
        |a, gm, r| {
            r.compare(&exterior_d2(&a.f)?, &exterior_d2_via_connection(gm, &a.f)?, a.x());
            Ok(())
        },
    ));
    v.extend(codazzi_family("pro3", h));
    v.extend(form_metric_family("pro4", h));
    v.extend(torsion_free_family("cor4", h, &[Op::Star, Op::Lam, Op::Dag]));
    v.push(torsion_negative("cor4(i):negative", h));
    v.extend(chain_family("pro5", h));
    v.push(kahler_witness(
        "cyclic-sum",
        "d∇Λ = 0 and d∇g = 0 ⟹ cyclic sum of d(∇^Λ)g equals the torsion terms",
        &[QuasiStatisticalG, DClosedJ],
        |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]),
        |a, gm, r| {
            r.compare(&cyclic(&a.d_b(&a.lam(gm)?)?), &cyclic_torsion_terms(a, gm), a.x());
            Ok(())
        },
    ));
    v.push(identity(
        "cyclic-sum:identity",
        g,
        h,
        "d(∇^Λ)g = d∇g − g(2, Λ⁻¹(∇_1Λ)3) + g(1, Λ⁻¹(∇_2Λ)3)",
        IDENTITY_TOL,
        |a, gm, r| {
            let q = a.b_second(&a.shift(gm)?);
            let rhs = a.d_b(gm)?.sub(&q).add(&q.permute(&[1, 0, 2]));
            r.compare(&a.d_b(&a.lam(gm)?)?, &rhs, a.x());
            Ok(())
        },
    ));
    v.push(kahler_witness(
        "lem3",
        "d∇Λ = 0 and d∇g = 0 ⟹ dω = 0",
        &[QuasiStatisticalG, DClosedJ],
        |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]),
        |a, _gm, r| {
            r.zero(&exterior_d2(&a.f)?, a.x());
            Ok(())
        },
    ));
    v.push(
        kahler_witness(
            "teo2",
            "d∇g = 0, d∇Λ = 0 and torsion-compatible ⟹ Kähler (N = 0, dω = 0)",
            &[QuasiStatisticalG, DClosedJ, JInvariantTorsion],
            |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?, compat(a, gm)]),
            |a, _gm, r| {
                r.zero(&a.nijenhuis(), a.x());
                r.zero(&exterior_d2(&a.f)?, a.x());
                Ok(())
            },
        )
        .without_witness(Status::Inconclusive),
    );
    v.push(kahler_witness(
        "two-of-three(a)",
        "d∇g = 0 and d∇Λ = 0 ⟹ ∇*ω = 0",
        &[QuasiStatisticalG, DClosedJ],
        |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]),
        |a, gm, r| {
            r.zero(&a.nabla_f(&a.star(gm)?)?, a.x());
            Ok(())
        },
    ));
    v.push(kahler_witness(
        "two-of-three(b)",
        "d∇g = 0 and ∇*ω = 0 ⟹ d∇Λ = 0",
        &[QuasiStatisticalG, ConjugateParallelForm],
        |a, gm| Ok(vec![a.d_b(gm)?, a.nabla_f(&a.star(gm)?)?]),
        |a, gm, r| {
            r.zero(&a.d_j(gm)?, a.x());
            Ok(())
        },
    ));
    v.push(kahler_witness(
        "two-of-three(c)",
        "d∇Λ = 0 and ∇*ω = 0 ⟹ d∇g = 0",
        &[DClosedJ, ConjugateParallelForm],
        |a, gm| Ok(vec![a.d_j(gm)?, a.nabla_f(&a.star(gm)?)?]),
        |a, gm, r| {
            r.zero(&a.d_b(gm)?, a.x());
            Ok(())
        },
    ));
    v.push(identity(
        "average-complex",
        g,
        h,
        "the average ½(∇^Λ + ∇) makes Λ parallel",
        IDENTITY_TOL,
        |a, gm, r| {
            r.zero(&a.nabla_j(&a.avg(gm)?)?, a.x());
            Ok(())
        },
    ));
    v.push(Proposition::new(
        "GAD15",
        g,
        Form::Witness,
        "(Codazzi on ∇*, Λ) ⟹ d(∇̃)g = d∇g",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.model(h)?;
            let p: Conn = t.project(&m, &[CodazziJ]);
            let pts = t.points(&m);
            let hyp = hypotheses(&m, p.as_ref(), &pts, |a, gm| Ok(vec![codazzi_defect_j(gm, &a.j)?]))?;
            let c = conj_conn(&m, Op::Star, p)?;
            let r = over_points(&m, c.as_ref(), &pts, |a, gm, r| {
                r.compare(&a.d_b(&a.avg(gm)?)?, &a.d_b(gm)?, a.x());
                Ok(())
            })?;
            Ok(Outcome::witness(r, hyp))
        },
    ));
    v.push(identity(
        "GAD15:identity",
        g,
        h,
        "d(∇̃)g = d∇g − ½g(2, Λ⁻¹(∇_1Λ)3) + ½g(1, Λ⁻¹(∇_2Λ)3)",
        IDENTITY_TOL,
        |a, gm, r| {
            let q = a.b_second(&a.shift(gm)?);
            let rhs = a.d_b(gm)?.sub(&q.scale(0.5)).add(&q.permute(&[1, 0, 2]).scale(0.5));
            r.compare(&a.d_b(&a.avg(gm)?)?, &rhs, a.x());
            Ok(())
        },
    ));
    v.push(Proposition::new(
        "GAD15:corollary",
        g,
        Form::Witness,
        "(Codazzi on ∇*, Λ) with T(∇*) = 0: (∇̃, g) quasi-statistical and T(∇†) = 0",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.kahler()?;
            let p: Conn = t.project(&m, &[CodazziJ, TorsionFree]);
            let pts = t.points(&m);
            let hyp = hypotheses(&m, p.as_ref(), &pts, |a, gm| {
                Ok(vec![codazzi_defect_j(gm, &a.j)?, a.torsion(gm)])
            })?;
            let c = conj_conn(&m, Op::Star, p)?;
            let r = over_points(&m, c.as_ref(), &pts, |a, gm, r| {
                r.zero(&a.d_b(&a.avg(gm)?)?, a.x());
                r.zero(&a.torsion(&a.dag(gm)?), a.x());
                Ok(())
            })?;
            Ok(Outcome::witness(r, hyp))
        },
    ));
    v.push(identity(
        "GAD16",
        g,
        h,
        "d(∇̃)g(1,2,3) = ½g(T(∇*)(1,2) + T(∇†)(1,2), 3)",
        IDENTITY_TOL,
        |a, gm, r| {
            let ts = a.torsion(&a.star(gm)?).add(&a.torsion(&a.dag(gm)?));
            r.compare(&a.d_b(&a.avg(gm)?)?, &a.low_b(&ts).scale(0.5), a.x());
            Ok(())
        },
    ));
    v.push(identity(
        "GAD17",
        g,
        h,
        "g(d(∇*)Λ(1,2) + d(∇†)Λ(1,2), 3) = ω(T(∇†)(1,2) + T(∇*)(1,2), 3)",
        IDENTITY_TOL,
        |a, gm, r| {
            let (s, d) = (a.star(gm)?, a.dag(gm)?);
            let lhs = a.low_b(&a.d_j(&s)?.add(&a.d_j(&d)?));
            let rhs = a.low_f(&a.torsion(&d).add(&a.torsion(&s)));
            r.compare(&lhs, &rhs, a.x());
            Ok(())
        },
    ));
    v.push(identity(
        "GAD17:corollary",
        g,
        h,
        "d(∇̃)g = ½g(−Λ(d(∇*)Λ + d(∇†)Λ)(1,2), 3), so the three vanishing conditions coincide",
        IDENTITY_TOL,
        |a, gm, r| {
            let sum = a.d_j(&a.star(gm)?)?.add(&a.d_j(&a.dag(gm)?)?);
            let rhs = a.low_b(&a.apply(&sum)).scale(-0.5);
            r.compare(&a.d_b(&a.avg(gm)?)?, &rhs, a.x());
            Ok(())
        },
    ));
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

fn phi_minus(at: &At, g: &Tensor, f: fn(&At, &Tensor) -> Result<Tensor>, r: &mut Residual) -> Result<()> {
    r.compare(&at.tachibana(), &f(at, g)?, at.x());
    Ok(())
}

fn cyclic_phi(a: &At, g: &Tensor, r: &mut Residual) -> Result<()> {
    r.compare(&cyclic(&a.tachibana()), &cyclic(&cyclic_phi_terms(a, g)?), a.x());
    Ok(())
}

/// `∇ = D♯` with `D` torsion-free, so `d∇h = 0` exactly.
fn quasi_statistical(t: &mut Trial, m: &ChartModel) -> Result<Conn> {
    conj_conn(m, Op::Star, t.symmetric_conn())
}

/// Alternates the closed-form anti-Kähler-type witness with projections.
fn closed_pair(t: &mut Trial, m: &ChartModel) -> Result<Conn> {
    if t.index % 2 == 0 {
        teo5_witness(m, &mut t.rng, 2, 0.5)
    } else {
        Ok(t.project(m, &[Constraint::QuasiStatisticalH, Constraint::DClosedJ]))
    }
}

fn norden_entries() -> Vec<Proposition> {
    use Constraint::*;
    let n = Family::Norden;
    let g = Group::Norden;
    let mut v = vec![klein("teo1:norden", n)];
    v.extend(codazzi_family("anti-pro3", n));
    v.extend(form_metric_family("pro12", n));
    v.extend(torsion_free_family("cor7", n, &[Op::Id, Op::Star, Op::Lam, Op::Dag]));
    v.push(torsion_negative("cor7(ii):negative", n));
    v.extend(chain_family("anti-pro5", n));
    v.push(Proposition::new(
        "pro14",
        g,
        Form::Witness,
        "d∇h = 0 ⟹ Φ equals its quasi-statistical expansion",
        IDENTITY_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = quasi_statistical(t, &m)?;
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![a.d_b(gm)?]))?;
            let r = over_points(&m, c.as_ref(), &pts, |a, gm, r| phi_minus(a, gm, tachibana_quasi_statistical, r))?;
            Ok(Outcome::witness(r, hyp))
        },
    ));
    v.push(identity(
        "pro14:identity",
        g,
        n,
        "Φ equals its connection expansion for every ∇",
        IDENTITY_TOL,
        |a, gm, r| phi_minus(a, gm, tachibana_expansion, r),
    ));
    v.push(Proposition::new(
        "teo5",
        g,
        Form::Witness,
        "d∇Λ = 0 and d∇h = 0 ⟹ Φ(1,2,3) = h(T(Λ1,3),2) + h((∇_2Λ)3,1)",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = closed_pair(t, &m)?;
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]))?;
            let r = over_points(&m, c.as_ref(), &pts, |a, gm, r| phi_minus(a, gm, torsion_plus_b, r))?;
            Ok(Outcome::witness(r, hyp))
        },
    ));
    v.push(Proposition::new(
        "teo5:equivalence",
        g,
        Form::Together,
        "on witnesses, Φ = 0 exactly when the torsion and ∇Λ terms cancel",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = if t.index % 2 == 0 { t.model(n)? } else { t.anti_kahler()? };
            let c = teo5_witness(&m, &mut t.rng, 2, 0.5)?;
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]))?;
            let phi = max_over_points(&m, c.as_ref(), &pts, |a, _| Ok(a.tachibana()))?;
            let tb = max_over_points(&m, c.as_ref(), &pts, torsion_plus_b)?;
            Ok(Outcome {
                hypothesis: Some(hyp),
                pair: Some((phi, tb)),
                ..Outcome::default()
            })
        },
    ));
    v.push(Proposition::new(
        "b-tensor",
        g,
        Form::Witness,
        "h(T(Λ1,3),2) = −h((∇_2Λ)3,1) ⟹ T(Λ1,2) = −T(1,Λ2)",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = t.project(&m, &[AntiKahlerCancellation]);
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![torsion_plus_b(a, gm)?]))?;
            let r = over_points(&m, c.as_ref(), &pts, |a, gm, r| {
                r.zero(&compat(a, gm), a.x());
                Ok(())
            })?;
            Ok(Outcome::witness(r, hyp))
        },
    ));
    v.push(Proposition::new(
        "cor8",
        g,
        Form::Witness,
        "d∇h = 0 ⟹ cyclic Φ sum = cyclic sum of h(2,T(Λ1,3)) + h(2,(∇_3Λ)1)",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = quasi_statistical(t, &m)?;
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![a.d_b(gm)?]))?;
            Ok(Outcome::witness(over_points(&m, c.as_ref(), &pts, cyclic_phi)?, hyp))
        },
    ));
    v.push(Proposition::new(
        "cor8:closed-J",
        g,
        Form::Witness,
        "d∇h = 0 and d∇Λ = 0 ⟹ cyclic Φ sum = cyclic sum of h(2,T(Λ1,3)) + h(2,(∇_3Λ)1)",
        CONCLUSION_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = closed_pair(t, &m)?;
            let pts = t.points(&m);
            let hyp = hypotheses(&m, c.as_ref(), &pts, |a, gm| Ok(vec![a.d_b(gm)?, a.d_j(gm)?]))?;
            Ok(Outcome::witness(over_points(&m, c.as_ref(), &pts, cyclic_phi)?, hyp))
        },
    ));
    v.push(Proposition::new(
        "theolast",
        g,
        Form::Together,
        "cyclic Φ sum and the quasi-Kähler-Norden sum of ∇^h vanish together",
        IDENTITY_TOL,
        move |t: &mut Trial| {
            let m = t.model(n)?;
            let c = levi_civita(m.metric_field()?);
            let pts = t.points(&m);
            let phi = max_over_points(&m, c.as_ref(), &pts, |a, _| Ok(cyclic(&a.tachibana())))?;
            let qkn = max_over_points(&m, c.as_ref(), &pts, |a, _| quasi_kahler_norden_sum(&a.frame))?;
            let r = over_points(&m, c.as_ref(), &pts, |a, _, r| {
                r.compare(&cyclic(&a.tachibana()), &quasi_kahler_norden_sum(&a.frame)?.scale(THEOLAST_FACTOR), a.x());
                Ok(())
            })?;
            Ok(Outcome {
                conclusion: r,
                pair: Some((phi, qkn)),
                ..Outcome::default()
            })
        },
    ));
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Ratio of the cyclic Tachibana sum to the quasi-Kähler-Norden sum.
const THEOLAST_FACTOR: f64 = 1.0;

/// All entries, sorted by id.
pub fn registry() -> Vec<Proposition> {
    let mut v = structure_entries();
    v.extend(hermitian_entries());
    v.extend(norden_entries());
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}
