use difflab::asymptotics::{
    convergence_report, gradient_monitor, pressure_field, varadhan_field, KSpec, PressureSeries,
};
use difflab::geometry::{distance_field, DomainSpec, Grid, NodeKind, RadialGrid, RadialMetric, ScalarField};
use difflab::nonlinearity::Nonlinearity;
use statrs::function::erf::erfc;
use difflab::pde::{
    solve_dirichlet, DtPolicy, FieldSeries, Formulation, MeshOptions, ProblemSpec, SchemeMeta, Setup, Snapshot,
    SolverOptions,
};

fn radial_field(nodes: Vec<f64>, values: Vec<f64>) -> ScalarField {
    let n = nodes.len();
    let grid = Grid::Radial(RadialGrid { dim: 1, center: [0.0; 3], metric: RadialMetric::Euclidean, nodes });
    ScalarField::new(grid, values, vec![NodeKind::Inside; n]).unwrap()
}

/// `log erfc(x)` for large `x` from the asymptotic series
/// `erfc(x) ≈ e^{−x²}/(x√π)·(1 − 1/(2x²) + 3/(4x⁴) − 15/(8x⁶))`.
fn log_erfc_large(x: f64) -> f64 {
    let x2 = x * x;
    let series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
    -x2 - (x * std::f64::consts::PI.sqrt()).ln() + series.ln()
}

#[test]
fn varadhan_value_of_sampled_erfc() {
    let t: f64 = 1e-4;
    let analytic = -4.0 * t * log_erfc_large(1.0 / (2.0 * t.sqrt()));
    assert!((analytic - 1.0018).abs() <= 1e-4, "{analytic}");
    let u = log_erfc_large(1.0 / (2.0 * t.sqrt())).exp();
    let f = radial_field(vec![0.0, 1.0, 2.0], vec![1.0, u, 0.5]);
    let v = varadhan_field(&f, t, &Nonlinearity::identity()).unwrap();
    assert_eq!(v.flagged, vec![1]);

    let t: f64 = 2.5e-3;
    let analytic = -4.0 * t * log_erfc_large(1.0 / (2.0 * t.sqrt()));
    let u = erfc(1.0 / (2.0 * t.sqrt()));
    let f = radial_field(vec![0.0, 1.0, 2.0], vec![1.0, u, 0.5]);
    let v = varadhan_field(&f, t, &Nonlinearity::identity()).unwrap();
    assert!((v.field.values[1] - analytic).abs() <= 1e-6, "{} vs {analytic}", v.field.values[1]);
    assert_eq!(v.field.values[0], 0.0);
    assert!((v.field.values[2] - (-4.0 * t * 0.5f64.ln())).abs() < 1e-15);
}

#[test]
fn varadhan_flags_underflow_and_rejects_negative() {
    let f = radial_field(vec![0.0, 1.0], vec![0.0, 0.3]);
    let v = varadhan_field(&f, 1e-3, &Nonlinearity::identity()).unwrap();
    assert_eq!(v.flagged, vec![0]);
    assert!(v.field.values[0].is_nan());
    let bad = radial_field(vec![0.0, 1.0], vec![-0.1, 0.3]);
    assert!(varadhan_field(&bad, 1e-3, &Nonlinearity::identity()).is_err());
    assert!(varadhan_field(&f, 0.0, &Nonlinearity::identity()).is_err());
}

fn half_line_pressure_run(times: Vec<f64>, truncation: f64, t_first: f64) -> (ProblemSpec, FieldSeries) {
    let ps = ProblemSpec::new(
        DomainSpec::ball_exterior(&[0.0], 1.0).unwrap(),
        Nonlinearity::linear(1.0).unwrap(),
        Setup::DirichletConst { value: 1.0 },
        times,
    )
    .unwrap()
    .with_truncation(truncation)
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.005, 5e-4), DtPolicy::relative(t_first, 2e-3))
        .with_formulation(Formulation::Pressure);
    let u = solve_dirichlet(&ps, &opts).unwrap();
    (ps, u)
}

#[test]
fn half_line_value_at_unit_distance() {
    let (ps, u) = half_line_pressure_run(vec![1e-3, 1e-2], 4.0, 1e-3);
    let t: f64 = 1e-3;
    let analytic = -4.0 * t * log_erfc_large(1.0 / (2.0 * t.sqrt()));
    assert!((analytic - 1.013).abs() <= 5e-3, "{analytic}");
    let rep = convergence_report(&u, &ps.nonlinearity, &distance_field(&ps.domain, u.grid()), &KSpec::new(0.5, Some(2.0)), 0.05)
        .unwrap();
    assert!(rep.sup_errors[0] <= 0.1, "{rep:?}");
    let snap = u.at(t).unwrap();
    let Grid::Radial(g) = &snap.field.grid else { panic!("radial grid expected") };
    let q = snap.pressure.as_ref().unwrap();
    let i = g.nodes.partition_point(|r| *r < 2.0);
    let s = (2.0 - g.nodes[i - 1]) / (g.nodes[i] - g.nodes[i - 1]);
    let val = 4.0 * t * (q[i - 1] + s * (q[i] - q[i - 1]));
    assert!((val - analytic).abs() <= 0.05, "{val} vs {analytic}");
}

#[test]
fn compact_set_without_nodes_is_an_error() {
    let (ps, u) = half_line_pressure_run(vec![1e-3], 4.0, 1e-3);
    let dist = distance_field(&ps.domain, u.grid());
    assert!(convergence_report(&u, &ps.nonlinearity, &dist, &KSpec::new(10.0, Some(11.0)), 0.05).is_err());
}

#[test]
fn rescaled_pressure_approaches_quarter_distance_squared() {
    let eps = [4e-2, 2e-2, 1e-2];
    let mut times: Vec<f64> = eps.to_vec();
    times.sort_by(f64::total_cmp);
    let (ps, u) = half_line_pressure_run(times, 6.0, 1e-2);
    let nl = &ps.nonlinearity;
    let dist = distance_field(&ps.domain, u.grid());
    let k = KSpec::new(0.5, Some(2.0));
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let v = pressure_field(&u, nl, e, 1.0).unwrap();
            (0..v.values.len())
                .filter(|&i| dist.mask[i].in_domain() && k.contains(dist.values[i]))
                .map(|i| (v.values[i] - dist.values[i].powi(2) / 4.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[2] <= 0.05, "{errs:?}");
    assert!(errs[1] - errs[2] <= errs[0] - errs[1], "{errs:?}");
}

fn constant_series(value: f64, times: &[f64]) -> FieldSeries {
    let nodes: Vec<f64> = (0..=100).map(|k| 1.0 + 0.03 * k as f64).collect();
    let n = nodes.len();
    let snapshots = times
        .iter()
        .map(|&t| Snapshot { t, field: radial_field(nodes.clone(), vec![value; n]), pressure: None })
        .collect();
    FieldSeries { snapshots, meta: SchemeMeta::default() }
}

#[test]
fn constant_unit_density_gives_zero_pressure_and_gradients() {
    let eps = [1e-1, 1e-2, 1e-3];
    let refs = [0.5, 1.0];
    let mut times: Vec<f64> = eps.iter().flat_map(|e| refs.iter().map(move |r| e * r)).collect();
    times.sort_by(f64::total_cmp);
    let series = constant_series(1.0, &times);
    let nl = Nonlinearity::identity();
    let v = pressure_field(&series, &nl, 1e-2, 1.0).unwrap();
    assert!(v.values.iter().all(|x| *x == 0.0));
    let ps = PressureSeries::from_series(&series, &nl, &eps, &refs).unwrap();
    let dist = {
        let f = &series.snapshots[0].field;
        let Grid::Radial(g) = &f.grid else { unreachable!() };
        radial_field(g.nodes.clone(), g.nodes.iter().map(|r| r - 1.0).collect())
    };
    let rep = gradient_monitor(&ps, &dist, &KSpec::new(0.5, Some(2.0)), 1.5).unwrap();
    assert!(rep.stats.iter().all(|s| s.grad_sup == 0.0 && s.z_max.is_finite()));
}

#[test]
fn gradient_monitor_needs_three_epsilons() {
    let series = constant_series(0.5, &[0.05, 0.1, 0.5, 1.0]);
    let nl = Nonlinearity::identity();
    assert!(PressureSeries::from_series(&series, &nl, &[1e-2, 1e-1], &[1.0]).is_err());
    let ps = PressureSeries::from_series(&series, &nl, &[1e-1, 5e-2], &[1.0]).unwrap();
    let dist = radial_field(vec![0.0, 1.0], vec![0.0, 1.0]);
    assert!(gradient_monitor(&ps, &dist, &KSpec::new(0.5, None), 1.5).is_err());
}

#[test]
fn envelope_holds_for_perturbed_nonlinearity() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let ps = ProblemSpec::new(
        DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap(),
        nl.clone(),
        Setup::DirichletConst { value: 1.0 },
        vec![1e-3, 1e-2],
    )
    .unwrap()
    .with_truncation(4.0)
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::relative(1e-3, 2e-3))
        .with_formulation(Formulation::Pressure);
    let u = solve_dirichlet(&ps, &opts).unwrap();
    let rep = convergence_report(&u, &nl, &distance_field(&ps.domain, u.grid()), &KSpec::new(0.5, Some(2.0)), 0.02).unwrap();
    assert!((rep.envelope.lower_ratio - 0.6).abs() < 1e-15);
    assert!((rep.envelope.upper_ratio - 5.0 / 3.0).abs() < 1e-15);
    assert!(rep.envelope.pass, "{:?}", rep.envelope);
}
