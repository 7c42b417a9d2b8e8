use difflab::barrier::solve_barrier_ode;
use difflab::geometry::{DomainKind, DomainSpec, Primitive};
use difflab::manifold::{solve_radial_heat_manifold, GeodesicDomain, ManifoldSetup, ManifoldSpec, Model};
use difflab::nonlinearity::Nonlinearity;
use difflab::pde::{solve_dirichlet, DtPolicy, MeshOptions, ProblemSpec, Setup, SolverOptions};
use proptest::prelude::*;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

fn dir2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2).prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-4)
}

fn manifold_point(model: Model) -> impl Strategy<Value = Vec<f64>> {
    let rmax = if model == Model::Sphere { 3.1 } else { 3.0 };
    (0.0..rmax, dir2()).prop_map(move |(r, d)| {
        let m = ManifoldSpec::new(model, 2).unwrap();
        m.point_at(r, &unit(&d)).unwrap()
    })
}

proptest! {
    #[test]
    fn phi_is_monotone_with_declared_slopes(a in 0.0..0.5f64, s in -5.0..5.0f64, ds in 1e-3..2.0f64) {
        let nl = Nonlinearity::sin_perturbed(a, 1.0 - a, 1.0 + a).unwrap();
        let slope = (nl.phi(s + ds) - nl.phi(s)) / ds;
        prop_assert!(slope >= 1.0 - a - 1e-12 && slope <= 1.0 + a + 1e-12);
    }

    #[test]
    fn big_phi_respects_log_bounds(a in 0.0..0.5f64, sigma in -30.0..5.0f64) {
        let nl = Nonlinearity::tanh_blend(a, 1.0, 1.0 + a).unwrap();
        let v = nl.big_phi_of_log(sigma, 1e-12).unwrap();
        let (lo, hi) = if sigma >= 0.0 { (sigma, (1.0 + a) * sigma) } else { ((1.0 + a) * sigma, sigma) };
        prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
    }

    #[test]
    fn big_psi_inverts_big_phi(a in 0.0..0.5f64, y in -20.0..3.0f64) {
        let nl = Nonlinearity::tanh_blend(a, 1.0, 1.0 + a).unwrap();
        let s = nl.big_psi_log(y, 1e-13).unwrap();
        prop_assert!((nl.big_phi_of_log(s, 1e-13).unwrap() - y).abs() <= 1e-9);
    }

    #[test]
    fn sphere_distance_is_a_metric(x in manifold_point(Model::Sphere), y in manifold_point(Model::Sphere), z in manifold_point(Model::Sphere)) {
        let m = ManifoldSpec::new(Model::Sphere, 2).unwrap();
        let (xy, yx) = (m.distance(&x, &y).unwrap(), m.distance(&y, &x).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-12);
        prop_assert!(xy <= m.distance(&x, &z).unwrap() + m.distance(&z, &y).unwrap() + 1e-12);
        prop_assert!(m.distance(&x, &x).unwrap() <= 1e-12);
    }

    #[test]
    fn hyperbolic_distance_is_a_metric(x in manifold_point(Model::Hyperbolic), y in manifold_point(Model::Hyperbolic), z in manifold_point(Model::Hyperbolic)) {
        let m = ManifoldSpec::new(Model::Hyperbolic, 2).unwrap();
        let (xy, yx) = (m.distance(&x, &y).unwrap(), m.distance(&y, &x).unwrap());
        prop_assert!((xy - yx).abs() <= 1e-12 * (1.0 + xy));
        prop_assert!(xy <= m.distance(&x, &z).unwrap() + m.distance(&z, &y).unwrap() + 1e-12 * (1.0 + xy));
    }

    #[test]
    fn exp_map_moves_by_the_vector_length(r in 0.0..3.0f64, d in dir2(), hyperbolic in any::<bool>()) {
        let model = if hyperbolic { Model::Hyperbolic } else { Model::Sphere };
        let m = ManifoldSpec::new(model, 2).unwrap();
        let p = m.point_at(r, &unit(&d)).unwrap();
        prop_assert!((m.distance(&m.pole(), &p).unwrap() - r).abs() <= 1e-12 * (1.0 + r.exp()));
    }

    #[test]
    fn signed_distance_is_one_lipschitz(
        x in prop::array::uniform2(-3.0..3.0f64),
        y in prop::array::uniform2(-3.0..3.0f64),
    ) {
        let spec = DomainSpec::new(DomainKind::Exterior, 2, vec![
            Primitive::Ball { center: [-1.2, 0.0, 0.0], radius: 0.8 },
            Primitive::Ellipsoid { center: [1.2, 0.3, 0.0], semi_axes: [0.6, 0.4, 1.0] },
        ]).unwrap();
        let (p, q) = ([x[0], x[1], 0.0], [y[0], y[1], 0.0]);
        let gap = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        prop_assert!((spec.signed_distance(&p) - spec.signed_distance(&q)).abs() <= gap + 1e-9);
    }

    #[test]
    fn hopf_lax_value_is_quarter_distance_squared(x in prop::array::uniform3(-3.0..3.0f64), t in 1e-3..2.0f64) {
        let spec = DomainSpec::ball_exterior(&[0.0, 0.0, 0.0], 1.0).unwrap();
        let p = [x[0], x[1], x[2]];
        prop_assume!(spec.contains(&p));
        let d = spec.distance_to_complement(&p);
        prop_assert!((spec.hopf_lax_value(&p, t).unwrap() - d * d / (4.0 * t)).abs() <= 1e-12 * (1.0 + d * d / t));
    }

    #[test]
    fn barrier_ordering_holds_for_random_slopes(amp in 0.0..0.5f64, slack in 0.0..0.2f64, sin in any::<bool>()) {
        let (d1, d2) = (1.0 - amp - slack, 1.0 + amp + slack);
        let nl = if sin {
            Nonlinearity::sin_perturbed(amp, d1, d2).unwrap()
        } else {
            Nonlinearity::tanh_blend(amp, 1.0 - slack, d2).unwrap()
        };
        let bs = difflab::barrier::default_barrier(&nl, 1e-9).unwrap();
        prop_assert!(bs.checks.passed(), "{:?}", bs.checks);
        prop_assert!(bs.limits.within_bounds(1e-6));
        prop_assert!(bs.c0() > 0.0);
        let l = bs.half_width;
        prop_assert!(solve_barrier_ode(&nl, 0.25, -0.1, 0.5 * l.min(2.0), 1e-9).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn radial_comparison_principle(a in 0.0..1.0f64, gap in 0.0..1.0f64, t in 1e-3..5e-2f64) {
        let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
        let domain = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
        let opts = SolverOptions::new(MeshOptions::graded(0.04, 4e-3), DtPolicy::standard(t / 10.0));
        let solve = |v: f64| {
            let ps = ProblemSpec::new(domain.clone(), nl.clone(), Setup::DirichletConst { value: v }, vec![t])
                .unwrap()
                .with_truncation(3.0)
                .unwrap();
            solve_dirichlet(&ps, &opts).unwrap()
        };
        let (ua, ub) = (solve(a), solve(a + gap));
        for (x, y) in ua.snapshots[0].field.values.iter().zip(&ub.snapshots[0].field.values) {
            prop_assert!(*x <= *y + 1e-10);
        }
    }

    #[test]
    fn manifold_cauchy_stays_in_unit_interval(inner in 0.3..1.2f64, width in 0.3..1.5f64, t in 1e-3..1e-1f64, sphere in any::<bool>()) {
        let (model, outer) = if sphere { (Model::Sphere, (inner + width).min(3.0)) } else { (Model::Hyperbolic, inner + width) };
        let m = ManifoldSpec::new(model, 2).unwrap();
        let domain = GeodesicDomain::Annulus { inner, outer };
        let opts = SolverOptions::new(MeshOptions::graded(0.04, 4e-3), DtPolicy::standard(t / 10.0));
        let u = solve_radial_heat_manifold(&m, &domain, &ManifoldSetup::Cauchy, &[t], &opts).unwrap();
        for v in &u.snapshots[0].field.values {
            prop_assert!(*v >= -1e-12 && *v <= 1.0 + 1e-12);
        }
    }
}
