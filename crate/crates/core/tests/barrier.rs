use difflab::barrier::{
    choose_shift, default_barrier, lower_bound_c0, solve_barrier_ode, subsolution_field, subsolution_residual, Collar,
};
use difflab::geometry::{distance_field, DomainSpec};
use difflab::nonlinearity::Nonlinearity;
use difflab::pde::{solve_cauchy, DtPolicy, MeshOptions, ProblemSpec, Setup, SolverOptions};
use statrs::function::erf::erf;

fn linear_profile(xi: f64) -> f64 {
    0.25 - 0.5 * erf(xi / 2.0)
}

#[test]
fn linear_barrier_at_scaled_distance_two() {
    let nl = Nonlinearity::identity();
    let bs = default_barrier(&nl, 1e-10).unwrap();
    let delta = bs.delta_shift;
    assert_eq!(delta, choose_shift(&bs));
    let w = bs.subsolution_value(0.2, 0.01);
    assert!((w - linear_profile(2.0 + 2.0 * delta)).abs() < 1e-8, "{w}");
    assert!((bs.c0() - linear_profile(2.0 * delta)).abs() < 1e-8);
}

#[test]
fn perturbed_barrier_is_positive_on_the_boundary() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let bs = default_barrier(&nl, 1e-10).unwrap();
    assert!(bs.checks.passed(), "{:?}", bs.checks);
    assert!(bs.c0() > 0.0);
    assert_eq!(bs.subsolution_value(1e6, 1e-3), bs.limits.plus);
    assert_eq!(bs.subsolution_value(-1e6, 1e-3), bs.limits.minus);
    assert!(bs.limits.plus < 0.0 && bs.limits.minus > 0.0);
    assert!(bs.limits.within_bounds(0.0));
}

#[test]
fn barrier_rejects_bad_initial_data() {
    let nl = Nonlinearity::identity();
    assert!(solve_barrier_ode(&nl, 0.25, 0.1, 12.0, 1e-10).is_err());
    assert!(solve_barrier_ode(&nl, 1.5, -0.2, 12.0, 1e-10).is_err());
    assert!(solve_barrier_ode(&nl, 0.25, -0.2, 12.0, 0.0).is_err());
    assert!(default_barrier(&nl, 1e-10).unwrap().with_shift(0.0).is_err());
}

fn exterior_disk_cauchy(times: Vec<f64>) -> (ProblemSpec, difflab::pde::FieldSeries) {
    let ps = ProblemSpec::new(
        DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap(),
        Nonlinearity::identity(),
        Setup::CauchyIndicator,
        times,
    )
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.02, 2e-3), DtPolicy::standard(1e-4));
    let u = solve_cauchy(&ps, &opts).unwrap();
    (ps, u)
}

#[test]
fn barrier_field_is_negative_deep_inside_and_solution_positive() {
    let (ps, u) = exterior_disk_cauchy(vec![1e-3, 1e-2]);
    let bs = default_barrier(&ps.nonlinearity, 1e-10).unwrap();
    let snap = u.at(1e-3).unwrap();
    let d = distance_field(&ps.domain, &snap.field.grid);
    let w = subsolution_field(&bs, &d, 1e-3).unwrap();
    let deep: Vec<usize> =
        (0..d.values.len()).filter(|&i| d.mask[i].in_domain() && d.values[i] > 0.3 && d.values[i] < 0.6).collect();
    assert!(!deep.is_empty());
    for i in deep {
        assert!(w.values[i] < 0.0 && snap.field.values[i] > 0.0, "node {i}");
    }
    assert!(subsolution_field(&bs, &d, 0.0).is_err());
}

#[test]
fn lower_bound_window_is_clipped_and_noted() {
    let times: Vec<f64> = (0..=20).map(|k| 10f64.powf(-4.0 + 4.0 * k as f64 / 20.0)).collect();
    let (ps, u) = exterior_disk_cauchy(times);
    let bs = default_barrier(&ps.nonlinearity, 1e-10).unwrap();
    let rep = lower_bound_c0(&bs, &ps.domain, &u, 1.0, None, 1e-3).unwrap();
    assert!(rep.clipped);
    assert!(rep.tau_used < 1.0 && rep.tau_used == rep.validity_window);
    assert!(!rep.notes.is_empty());
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.empirical_min >= rep.c0);
    assert!(lower_bound_c0(&bs, &ps.domain, &u, 0.0, None, 1e-3).is_err());
}

#[test]
fn barrier_residual_is_nonnegative_on_the_collar() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let bs = default_barrier(&nl, 1e-10).unwrap();
    let spec = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
    let collar = Collar::around(&spec, Some(0.1)).unwrap();
    let window = collar.validity_window(&bs);
    let rep = subsolution_residual(&bs, &nl, &spec, &collar, &[0.1 * window, 0.5 * window], 16).unwrap();
    assert!(rep.samples > 0);
    assert!(rep.passed(), "{rep:?}");
}
