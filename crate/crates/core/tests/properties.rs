use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsg::calculus::{
    bilinear_on_jets, covariant_along, covariant_derivative, directional, exterior_d2, exterior_d2_via_connection,
    levi_civita, torsion,
};
use qsg::cli::{GenEntry, ModelFile};
use qsg::connections::Connection;
use qsg::fields::smooth::random_poly;
use qsg::fields::{sample_points, ChartDomain, SmoothTensorField, Tensor, Valence};
use qsg::generate::models::{
    default_domain, gen_almost_complex, gen_hermitian_metric, gen_norden_metric, hermitian_model, norden_model,
    random_connection, ModelKind,
};
use qsg::generate::rng::label_salt;
use qsg::generate::{
    constraint_residuals, gen_connection, synthesize_connection, Constraint, GenSpec, SynthesisOptions,
};
use qsg::model::ChartModel;
use qsg::predicates::{check, CheckOptions, Predicate};
use qsg::propositions::kernels::At;
use qsg::propositions::{registry, Trial};
use qsg::structures::{
    d_nabla_j, d_nabla_metric, project_torsion, purity_defect, torsion_compat_defect, torsion_invariance_defect,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4usize)]
}

fn hermitian(seed: u64, dim: usize) -> ChartModel {
    hermitian_model(&GenSpec::new(seed, dim), &mut rng(seed)).unwrap()
}

fn norden(seed: u64, dim: usize) -> ChartModel {
    norden_model(&GenSpec::new(seed, dim), &mut rng(seed)).unwrap()
}

fn points(dim: usize, seed: u64, n: usize) -> Vec<Vec<f64>> {
    sample_points(&default_domain(dim), n, seed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jet_evaluation_is_linear(seed in any::<u64>(), dim in dims(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let mut r = rng(seed);
        let f = random_poly(&mut r, dim, 3, 1.0);
        let g = random_poly(&mut r, dim, 3, 1.0);
        let combo = f.scale(alpha).add(&g.scale(beta));
        for x in points(dim, seed, 8) {
            let (jc, jf, jg) = (combo.eval_jet(&x).unwrap(), f.eval_jet(&x).unwrap(), g.eval_jet(&x).unwrap());
            prop_assert!(close(jc.value, alpha * jf.value + beta * jg.value, 1e-13));
            for k in 0..dim {
                prop_assert!(close(jc.partials[k], alpha * jf.partials[k] + beta * jg.partials[k], 1e-13));
            }
        }
    }

    #[test]
    fn jets_obey_the_product_rule(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let f = random_poly(&mut r, dim, 2, 1.0);
        let g = random_poly(&mut r, dim, 2, 1.0);
        let fg = f.mul(&g);
        for x in points(dim, seed, 50) {
            let (p, a, b) = (fg.eval_jet(&x).unwrap(), f.eval_jet(&x).unwrap(), g.eval_jet(&x).unwrap());
            prop_assert!(close(p.value, a.value * b.value, 1e-13));
            for k in 0..dim {
                prop_assert!(close(p.partials[k], a.value * b.partials[k] + b.value * a.partials[k], 1e-13));
            }
        }
    }

    #[test]
    fn partials_match_central_differences(seed in any::<u64>(), dim in dims(), degree in 0u32..=4) {
        let f = random_poly(&mut rng(seed), dim, degree, 1.0);
        let h = 1e-5;
        for x in points(dim, seed, 10) {
            let jet = f.eval_jet(&x).unwrap();
            for k in 0..dim {
                let mut up = x.clone();
                let mut down = x.clone();
                up[k] += h;
                down[k] -= h;
                let fd = (f.eval(&up) - f.eval(&down)) / (2.0 * h);
                prop_assert!((fd - jet.partials[k]).abs() <= 1e-6 * jet.partials[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn torsion_is_antisymmetric(seed in any::<u64>(), dim in dims()) {
        let conn = random_connection(&mut rng(seed), dim, 2, 1.0);
        for x in points(dim, seed, 5) {
            let t = torsion(&conn.christoffel(&x).unwrap());
            for k in 0..dim { for i in 0..dim { for j in 0..dim {
                prop_assert_eq!(t.at3(k, i, j), -t.at3(k, j, i));
            }}}
        }
    }

    #[test]
    fn covariant_derivative_obeys_leibniz(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let domain = default_domain(dim);
        let conn = random_connection(&mut r, dim, 2, 1.0);
        let f = random_poly(&mut r, dim, 2, 1.0);
        let t = SmoothTensorField::random(&mut r, dim, Valence::BILINEAR, 2, 1.0);
        let ft = t.times(&f);
        for x in points(dim, seed, 5) {
            let g = conn.christoffel(&x).unwrap();
            let lhs = covariant_derivative(&g, &ft.eval_jet(&domain, &x).unwrap()).unwrap();
            let tj = t.eval_jet(&domain, &x).unwrap();
            let nt = covariant_derivative(&g, &tj).unwrap();
            let fj = f.eval_jet(&x).unwrap();
            let tv = tj.value();
            let rhs = Tensor::from_fn(dim, Valence::TRILINEAR, |ix| {
                fj.value * nt.at3(ix[0], ix[1], ix[2]) + fj.partials[ix[0]] * tv.at2(ix[1], ix[2])
            });
            prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-10 * (1.0 + lhs.max_abs()));
        }
    }

    #[test]
    fn levi_civita_is_torsion_free_and_metric(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let g = m.metric_field().unwrap();
        for x in points(dim, seed, 5) {
            let gj = g.jet(&x).unwrap();
            let lc = levi_civita(&gj, &x).unwrap();
            prop_assert!(torsion(&lc).max_abs() <= 1e-9);
            prop_assert!(covariant_derivative(&lc, &gj).unwrap().max_abs() <= 1e-9);
        }
    }

    #[test]
    fn exterior_derivative_is_alternating_and_connection_free(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let omega = m.form_field().unwrap();
        let conn = random_connection(&mut rng(seed ^ 1), dim, 2, 1.0);
        for x in points(dim, seed, 5) {
            let wj = omega.jet(&x).unwrap();
            let dw = exterior_d2(&wj).unwrap();
            for a in 0..dim { for b in 0..dim { for c in 0..dim {
                let v = dw.at3(a, b, c);
                prop_assert!(close(v, -dw.at3(b, a, c), 1e-12));
                prop_assert!(close(v, -dw.at3(a, c, b), 1e-12));
            }}}
            let via = exterior_d2_via_connection(&conn.christoffel(&x).unwrap(), &wj).unwrap();
            prop_assert!(via.sub(&dw).max_abs() <= 1e-9 * (1.0 + dw.max_abs()));
        }
    }

    #[test]
    fn metric_conjugate_satisfies_its_defining_identity(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let mut r = rng(seed ^ 2);
        let domain = default_domain(dim);
        let fields: Vec<SmoothTensorField> =
            (0..3).map(|_| SmoothTensorField::random(&mut r, dim, Valence::VECTOR, 2, 1.0)).collect();
        for x in points(dim, seed, 4) {
            let at = At::new(&m, &x).unwrap();
            let g = m.connection().unwrap().christoffel(&x).unwrap();
            let star = at.star(&g).unwrap();
            let xv = fields[0].eval_jet(&domain, &x).unwrap().values().to_vec();
            let y = fields[1].eval_jet(&domain, &x).unwrap();
            let z = fields[2].eval_jet(&domain, &x).unwrap();
            let lhs = directional(&xv, &bilinear_on_jets(&at.b, &y, &z));
            let ny = covariant_along(&g, &xv, &y);
            let nz = covariant_along(&star, &xv, &z);
            let b = &at.bv;
            let mut rhs = 0.0;
            for i in 0..dim { for j in 0..dim {
                rhs += b.at2(i, j) * (ny[i] * z.values()[j] + y.values()[i] * nz[j]);
            }}
            prop_assert!(close(lhs, rhs, 1e-9));
        }
    }

    #[test]
    fn conjugation_negates_the_metric_derivative(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        for x in points(dim, seed, 4) {
            let at = At::new(&m, &x).unwrap();
            let g = m.connection().unwrap().christoffel(&x).unwrap();
            let a = at.nabla_b(&at.star(&g).unwrap()).unwrap();
            let b = at.nabla_b(&g).unwrap();
            prop_assert!(a.add(&b).max_abs() <= 1e-9 * (1.0 + b.max_abs()));
        }
    }

    #[test]
    fn conjugations_are_involutions(seed in any::<u64>(), dim in dims(), norden_flavor in any::<bool>()) {
        let m = if norden_flavor { norden(seed, dim) } else { hermitian(seed, dim) };
        for x in points(dim, seed, 4) {
            let at = At::new(&m, &x).unwrap();
            let g = m.connection().unwrap().christoffel(&x).unwrap();
            let scale = 1.0 + g.max_abs();
            prop_assert!(at.star(&at.star(&g).unwrap()).unwrap().sub(&g).max_abs() <= 1e-9 * scale);
            prop_assert!(at.dag(&at.dag(&g).unwrap()).unwrap().sub(&g).max_abs() <= 1e-9 * scale);
            prop_assert!(at.lam(&at.lam(&g).unwrap()).unwrap().sub(&g).max_abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn generated_structures_meet_their_invariants(seed in any::<u64>(), dim in dims()) {
        let spec = GenSpec::new(seed, dim);
        let mut r = rng(seed);
        let j = gen_almost_complex(&spec, &mut r).unwrap();
        let g = gen_hermitian_metric(&spec, &mut r, &j).unwrap();
        let h = gen_norden_metric(&spec, &mut r, &j).unwrap();
        let pts = points(dim, seed, 25);
        prop_assert!(j.square_residual(&pts).unwrap() <= 1e-10);
        for x in &pts {
            let jv = j.field.value(x).unwrap();
            prop_assert!(purity_defect(&g.field.value(x).unwrap(), &jv, qsg::connections::KleinFlavor::Hermitian) <= 1e-10);
            prop_assert!(purity_defect(&h.field.value(x).unwrap(), &jv, qsg::connections::KleinFlavor::Norden) <= 1e-10);
        }
    }

    #[test]
    fn torsion_compatibility_forms_are_equivalent(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let conn = random_connection(&mut rng(seed ^ 3), dim, 2, 1.0);
        for x in points(dim, seed, 4) {
            let jv = m.j_field().unwrap().value(&x).unwrap();
            let t = torsion(&conn.christoffel(&x).unwrap());
            let (a, b) = (torsion_compat_defect(&t, &jv).max_abs(), torsion_invariance_defect(&t, &jv).max_abs());
            prop_assert!((a > 1e-6) == (b > 1e-6), "{a} vs {b}");
            let p = project_torsion(&t, &jv);
            prop_assert!(torsion_compat_defect(&p, &jv).max_abs() <= 1e-9);
            prop_assert!(torsion_invariance_defect(&p, &jv).max_abs() <= 1e-9);
            let pp = project_torsion(&p, &jv);
            prop_assert!(pp.sub(&p).max_abs() <= 1e-12 * (1.0 + p.max_abs()));
        }
    }

    #[test]
    fn exterior_covariant_derivatives_are_antisymmetric(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        for x in points(dim, seed, 4) {
            let frame = m.frame(&x).unwrap();
            let g = m.connection().unwrap().christoffel(&x).unwrap();
            let dj = d_nabla_j(&g, frame.j().unwrap()).unwrap();
            let db = d_nabla_metric(&g, frame.b().unwrap()).unwrap();
            for a in 0..dim { for i in 0..dim { for k in 0..dim {
                prop_assert!(close(dj.at3(a, i, k), -dj.at3(a, k, i), 1e-12));
                prop_assert!(close(db.at3(a, i, k), -db.at3(i, a, k), 1e-12));
            }}}
        }
    }

    #[test]
    fn closed_recipe_has_torsion_free_conjugate(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let spec = GenSpec::new(seed, dim).with_constraints(&[Constraint::DClosedJ]);
        let conn = gen_connection(&spec, &mut rng(seed ^ 4), &m).unwrap();
        for x in points(dim, seed, 6) {
            let at = At::new(&m, &x).unwrap();
            let g = conn.christoffel(&x).unwrap();
            prop_assert!(torsion(&at.lam(&g).unwrap()).max_abs() <= 1e-9);
            prop_assert!(at.d_j(&g).unwrap().max_abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn predicates_are_monotone_and_deterministic(seed in any::<u64>(), dim in dims(), tol in 1e-12..1.0f64, factor in 1.0..100.0f64) {
        let m = hermitian(seed, dim);
        for p in [Predicate::Kahler, Predicate::QuasiStatistical, Predicate::TorsionCompatible, Predicate::DClosedJ] {
            let lo = CheckOptions { tolerance: tol, samples: 6, seed };
            let hi = CheckOptions { tolerance: tol * factor, ..lo.clone() };
            let a = check(&m, p, &lo).unwrap();
            let b = check(&m, p, &hi).unwrap();
            prop_assert!(!a.pass || b.pass);
            prop_assert_eq!(&a, &check(&m, p, &lo).unwrap());
        }
    }

    #[test]
    fn kahler_decomposes_into_its_parts(seed in any::<u64>(), dim in dims()) {
        let m = hermitian(seed, dim);
        let opts = CheckOptions { samples: 6, seed, ..CheckOptions::default() };
        let k = check(&m, Predicate::Kahler, &opts).unwrap();
        let n = check(&m, Predicate::Integrable, &opts).unwrap();
        if k.pass {
            prop_assert!(n.pass);
        }
        prop_assert!(k.max_residual >= n.max_residual);
        if dim == 2 {
            prop_assert!(n.pass, "2D integrability residual {}", n.max_residual);
        }
    }

    #[test]
    fn registry_identities_hold_on_fresh_seeds(seed in any::<u64>(), dim in dims()) {
        for p in registry() {
            if !matches!(p.form, qsg::propositions::Form::Identity | qsg::propositions::Form::Klein) || dim < p.min_dim {
                continue;
            }
            let mut trial = Trial::new(seed, dim, 0, label_salt(&p.id));
            let out = (p.run)(&mut trial).unwrap();
            let r = out.conclusion.normalized();
            prop_assert!(r <= p.tolerance, "{} residual {r:e}", p.id);
        }
    }

    #[test]
    fn model_files_round_trip(seed in any::<u64>(), dim in dims(), with_spec in any::<bool>()) {
        let mut r = rng(seed);
        let mut f = ModelFile::new(ChartDomain::cube(dim, 0.5).unwrap())
            .with_metric(qsg::structures::MetricFlavor::Hermitian, SmoothTensorField::random(&mut r, dim, Valence::BILINEAR, 2, 1.0))
            .with_j(SmoothTensorField::random(&mut r, dim, Valence::ENDO, 1, 1.0))
            .with_gamma(SmoothTensorField::random(&mut r, dim, Valence::VECTOR_2FORM, 3, 1.0));
        if with_spec {
            f = f.with_genspec(GenEntry::new(ModelKind::RandomNorden, seed));
        }
        let back = ModelFile::parse(&f.to_pretty()).unwrap();
        prop_assert_eq!(back.hash(), f.hash());
        prop_assert_eq!(back.canonical(), f.canonical());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn synthesis_is_deterministic_and_no_worse_than_the_recipe(seed in any::<u64>()) {
        let m = hermitian(seed, 2);
        let set: BTreeSet<Constraint> = [Constraint::QuasiStatisticalG].into_iter().collect();
        let opts = SynthesisOptions::default().with_seed(seed);
        let a = synthesize_connection(&m, &set, &opts).unwrap();
        let b = synthesize_connection(&m, &set, &opts).unwrap();
        prop_assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        prop_assert_eq!(&a.constraint_residuals, &b.constraint_residuals);
        let spec = GenSpec::new(seed, 2).with_constraints(&[Constraint::QuasiStatisticalG]);
        let recipe = gen_connection(&spec, &mut rng(seed), &m).unwrap();
        let held = sample_points(&m.domain, 25, seed ^ 0x401d_0u64);
        let rr = constraint_residuals(&m, recipe.as_ref(), &set, &held).unwrap();
        let recipe_res = rr.iter().map(|c| c.residual).fold(0.0, f64::max);
        prop_assert!(a.residual <= recipe_res.max(1e-12), "{} vs {}", a.residual, recipe_res);
    }
}
