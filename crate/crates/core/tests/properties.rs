use bochner_core::oracle::{fd_derivative, Identity};
use bochner_core::richardson::{extrapolate, StepSchedule};
use bochner_core::space::{restrict, simple_embed};
use bochner_core::{
    j_p, j_p_decompose, j_x, psi_numeric, psi_p, psi_x, BallSpec, BochnerSpace, CylinderSpec, DerivativeOptions,
    Element, SetSpec, SpaceRef, SupportSet,
};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), 1.1..5.0]
}

fn space() -> impl Strategy<Value = SpaceRef> {
    (1usize..=5, 1usize..=3, exponent(), exponent()).prop_flat_map(|(n, d, rho, p)| {
        prop::collection::vec(0.1..3.0, n).prop_map(move |w| BochnerSpace::build(w, d, rho, p).unwrap())
    })
}

fn values(s: &SpaceRef) -> impl Strategy<Value = Element> {
    let s = s.clone();
    prop::collection::vec(-3.0..3.0, s.len()).prop_map(move |v| Element::from_flat(&s, v).unwrap())
}

fn support(s: &SpaceRef) -> impl Strategy<Value = SupportSet> {
    let s = s.clone();
    prop::collection::vec(any::<bool>(), s.atoms()).prop_map(move |mut keep| {
        if !keep.iter().any(|k| *k) {
            keep[0] = true;
        }
        let idx: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
        SupportSet::new(&s, &idx).unwrap()
    })
}

/// A space with two elements and a support set.
fn pair() -> impl Strategy<Value = (Element, Element, SupportSet)> {
    space().prop_flat_map(|s| (values(&s), values(&s), support(&s)))
}

fn labels(s: &SpaceRef) -> impl Strategy<Value = Vec<SupportSet>> {
    let s = s.clone();
    prop::collection::vec(0usize..3, s.atoms()).prop_map(move |lab| {
        (0..3)
            .filter_map(|b| {
                let idx: Vec<usize> = (0..lab.len()).filter(|&i| lab[i] == b).collect();
                (!idx.is_empty()).then(|| SupportSet::new(&s, &idx).unwrap())
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn holder((f, g, _a) in pair()) {
        let phi = j_p(&g);
        let lhs = phi.pairing(&f).unwrap().abs();
        let rhs = phi.norm() * f.norm();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn triangle_and_homogeneity((f, g, _a) in pair(), lambda in -4.0..4.0f64) {
        let sum = f.add(&g).unwrap().norm();
        prop_assert!(sum <= f.norm() + g.norm() + 1e-12 * (1.0 + sum));
        let scaled = f.scale(lambda).norm();
        prop_assert!((scaled - lambda.abs() * f.norm()).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn restriction_is_a_linear_idempotent((f, g, a) in pair(), lambda in -4.0..4.0f64) {
        let fa = restrict(&f, &a).unwrap();
        prop_assert_eq!(restrict(&fa, &a).unwrap(), fa.clone());
        let lin = restrict(&f.axpy(lambda, &g).unwrap(), &a).unwrap();
        let parts = fa.axpy(lambda, &restrict(&g, &a).unwrap()).unwrap();
        prop_assert!(lin.max_abs_diff(&parts) <= 1e-12 * (1.0 + lin.max_abs()));
        let rest = f.restrict_complement(&a).unwrap();
        prop_assert_eq!(fa.add(&rest).unwrap(), f);
    }

    #[test]
    fn embedding_is_an_isometry((f, _g, a) in pair()) {
        let x = f.row(0).to_vec();
        let nx = f.space().inner().norm(&x);
        let e = simple_embed(&a, &x).unwrap();
        prop_assert!((e.norm() - nx).abs() <= 1e-12 * (1.0 + nx));
    }

    #[test]
    fn duality_relations((f, _g, _a) in pair()) {
        let j = j_p(&f);
        let n = f.norm();
        prop_assert!((j.pairing(&f).unwrap() - n * n).abs() <= 1e-10 * (1.0 + n * n));
        prop_assert!((j.norm() - n).abs() <= 1e-10 * (1.0 + n));
        let inner = f.space().inner();
        let v = f.row(0);
        let jv = j_x(inner, v);
        let nv = inner.norm(v);
        prop_assert!((inner.dual_norm(&jv) - nv).abs() <= 1e-10 * (1.0 + nv));
    }

    #[test]
    fn duality_preserves_support((f, _g, a) in pair()) {
        let j = j_p(&restrict(&f, &a).unwrap());
        prop_assert_eq!(j.max_abs_outside(&a), 0.0);
    }

    #[test]
    fn decomposition_matches_direct((f, blocks) in space().prop_flat_map(|s| (values(&s), labels(&s)))) {
        let closed = j_p_decompose(&f, &blocks).unwrap();
        let direct = j_p(&f);
        prop_assert!(closed.max_abs_diff(&direct) <= 1e-10 * (1.0 + direct.max_abs()));
    }

    #[test]
    fn psi_diagonal_and_homogeneity((f, g, _a) in pair(), lambda in 0.01..100.0f64) {
        prop_assume!(!g.is_zero());
        let n = f.norm();
        if n > 0.0 {
            prop_assert!((psi_p(&f, &f).unwrap() - n).abs() <= 1e-12 * (1.0 + n));
        }
        let one = psi_p(&f, &g).unwrap();
        let many = psi_p(&f, &g.scale(lambda)).unwrap();
        prop_assert!((many - lambda * one).abs() <= 1e-12 * lambda * (1.0 + one.abs()));
        let inner = f.space().inner();
        if inner.norm(g.row(0)) > 0.0 {
            let x = psi_x(inner, f.row(0), g.row(0)).unwrap();
            prop_assert!(x.abs() <= inner.norm(g.row(0)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn psi_numeric_agrees((f, g, _a) in pair()) {
        prop_assume!(f.norm() > 0.5 && !g.is_zero());
        let schedule = StepSchedule::with_initial(1e-3 * f.norm() / g.norm());
        let est = psi_numeric(&f, &g, &schedule).unwrap();
        let exact = psi_p(&f, &g).unwrap();
        prop_assert!((est.value - exact).abs() <= 1e-5 * g.norm(), "{} vs {}", est.value, exact);
    }

    #[test]
    fn projections_land_in_their_sets((g, c, a) in pair(), radius in 0.1..3.0f64) {
        let center = restrict(&c, &a).unwrap().scale(0.3);
        let ball = BallSpec::new(a.clone(), center, radius).unwrap();
        for set in [SetSpec::Subspace(a.clone()), SetSpec::Ball(ball.clone()), SetSpec::Cylinder(CylinderSpec::new(ball))] {
            let pg = set.project(&g).unwrap();
            prop_assert!(set.contains(&pg, 1e-12).unwrap());
            let twice = set.project(&pg).unwrap();
            prop_assert!(twice.max_abs_diff(&pg) <= 1e-12 * (1.0 + pg.max_abs()));
        }
    }

    #[test]
    fn subspace_projection_is_nonexpansive((f, g, a) in pair()) {
        let set = SetSpec::Subspace(a);
        let d = set.project(&f).unwrap().sub(&set.project(&g).unwrap()).unwrap().norm();
        prop_assert!(d <= f.sub(&g).unwrap().norm() + 1e-12);
    }

    #[test]
    fn cylinder_keeps_complement_rows((g, c, a) in pair(), radius in 0.1..3.0f64) {
        let set = SetSpec::Cylinder(CylinderSpec::new(BallSpec::new(a.clone(), restrict(&c, &a).unwrap(), radius).unwrap()));
        let pg = set.project(&g).unwrap();
        for i in (0..g.space().atoms()).filter(|&i| !a.contains(i)) {
            prop_assert_eq!(pg.row(i), g.row(i));
        }
    }

    #[test]
    fn derivative_is_positively_homogeneous((g, h, a) in pair(), radius in 0.1..3.0f64, lambda in 1e-3..1e3f64) {
        let ball = BallSpec::centered(a.clone(), radius).unwrap();
        let opts = DerivativeOptions::default();
        for set in [SetSpec::Subspace(a.clone()), SetSpec::Ball(ball.clone()), SetSpec::Cylinder(CylinderSpec::new(ball))] {
            let (Some(one), Some(many)) = (
                set.derivative(&g, &h, opts).unwrap().covered(),
                set.derivative(&g, &h.scale(lambda), opts).unwrap().covered(),
            ) else {
                continue;
            };
            let scaled = one.scale(lambda);
            prop_assert!(many.max_abs_diff(&scaled) <= 1e-12 * (1.0 + scaled.max_abs()));
        }
    }

    #[test]
    fn richardson_refinement_is_exact_on_polynomials(c in prop::collection::vec(-3.0..3.0f64, 3)) {
        // Quotients with error c1 t + c2 t^2 are removed by two extrapolation passes.
        let out = extrapolate(&StepSchedule::default(), |t| Ok(vec![c[0] + c[1] * t + c[2] * t * t])).unwrap();
        prop_assert!((out.estimate[0] - c[0]).abs() <= 1e-10 * (1.0 + c[0].abs()));
    }

    #[test]
    fn fd_of_identity_returns_the_direction((g, h, _a) in pair()) {
        prop_assume!(!h.is_zero());
        let est = fd_derivative(&Identity, &g, &h, &StepSchedule::default()).unwrap();
        prop_assert!(est.estimate.max_abs_diff(&h) <= 1e-10 * (1.0 + h.max_abs()));
    }
}
