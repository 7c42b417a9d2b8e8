use difflab::geometry::{DomainKind, DomainSpec, Grid, Primitive};
use difflab::nonlinearity::Nonlinearity;
use difflab::pde::{
    sandwich_check, solve_cauchy, solve_dirichlet, solve_linear_heat, DtPolicy, MeshOptions, ProblemSpec, Setup,
    SolverOptions,
};
use statrs::function::erf::erfc;

fn radial_nodes(g: &Grid) -> &[f64] {
    match g {
        Grid::Radial(r) => &r.nodes,
        _ => panic!("expected a radial grid"),
    }
}

fn half_line(setup: Setup, times: Vec<f64>) -> ProblemSpec {
    let domain = DomainSpec::ball_exterior(&[0.0], 1.0).unwrap();
    ProblemSpec::new(domain, Nonlinearity::linear(1.0).unwrap(), setup, times).unwrap()
}

#[test]
fn half_line_dirichlet_matches_erfc() {
    let ps = half_line(Setup::DirichletConst { value: 1.0 }, vec![1e-3, 1e-2]);
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::relative(1e-3, 5e-3));
    let series = solve_dirichlet(&ps, &opts).unwrap();
    let snap = series.at(1e-2).unwrap();
    let nodes = radial_nodes(&snap.field.grid);
    let err = nodes
        .iter()
        .zip(&snap.field.values)
        .map(|(r, u)| (u - erfc((r - 1.0) / (2.0 * 0.1))).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3, "max error {err}");
    assert!(series.meta.range_excess < 1e-9);
}

#[test]
fn half_line_cauchy_matches_half_erfc() {
    let ps = half_line(Setup::CauchyIndicator, vec![1e-3, 1e-2]);
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::relative(1e-3, 5e-3));
    let series = solve_cauchy(&ps, &opts).unwrap();
    let snap = series.at(1e-2).unwrap();
    let nodes = radial_nodes(&snap.field.grid);
    let err = nodes
        .iter()
        .zip(&snap.field.values)
        .filter(|(r, _)| **r >= 1.0)
        .map(|(r, u)| (u - 0.5 * erfc((r - 1.0) / (2.0 * 0.1))).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3, "max error {err}");
}

#[test]
fn exterior_ball_3d_matches_closed_form() {
    let domain = DomainSpec::ball_exterior(&[0.0, 0.0, 0.0], 1.0).unwrap();
    let ps = ProblemSpec::new(domain, Nonlinearity::linear(1.0).unwrap(), Setup::DirichletConst { value: 1.0 }, vec![
        1e-3, 1e-2,
    ])
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::relative(1e-3, 2e-2));
    let series = solve_dirichlet(&ps, &opts).unwrap();
    let snap = series.at(1e-2).unwrap();
    let nodes = radial_nodes(&snap.field.grid);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (r, u) in nodes.iter().zip(&snap.field.values) {
        let exact = erfc((r - 1.0) / 0.2) / r;
        err = err.max((u - exact).abs());
        scale = scale.max(exact.abs());
    }
    assert!(err / scale <= 0.01, "relative error {}", err / scale);
}

#[test]
fn linear_heat_time_rescaling() {
    let ps = half_line(Setup::DirichletConst { value: 1.0 }, vec![5e-3, 1e-2]);
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::relative(5e-3, 5e-3));
    let w = solve_linear_heat(&ps, 2.0, 3.0, &opts).unwrap();
    let snap = w.at(1e-2).unwrap();
    let nodes = radial_nodes(&snap.field.grid);
    for (r, v) in nodes.iter().zip(&snap.field.values) {
        let exact = 3.0 * erfc((r - 1.0) / (2.0 * (2.0f64 * 1e-2).sqrt()));
        assert!((v - exact).abs() < 3e-3, "r={r}: {v} vs {exact}");
    }
    let zero = solve_linear_heat(&ps, 1.0, 0.0, &opts).unwrap();
    assert!(zero.snapshots.iter().all(|s| s.field.values.iter().all(|v| *v == 0.0)));
}

#[test]
fn sandwich_holds_for_perturbed_nonlinearity_on_exterior_disk() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let domain = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
    let ps = ProblemSpec::new(domain, nl.clone(), Setup::DirichletConst { value: 1.0 }, vec![1e-2, 5e-2]).unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.02, 2e-3), DtPolicy::standard(1e-2));
    let u = solve_dirichlet(&ps, &opts).unwrap();
    let phi1 = nl.phi(1.0);
    let w1 = solve_linear_heat(&ps, nl.delta1(), phi1, &opts).unwrap();
    let w2 = solve_linear_heat(&ps, nl.delta2(), phi1, &opts).unwrap();
    let rep = sandwich_check(&u, &nl, &w1, &w2, 1e-6).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let swapped = sandwich_check(&u, &nl, &w2, &w1, 1e-6).unwrap();
    assert!(swapped.violations > swapped.checked / 2, "{swapped:?}");
}

#[test]
fn lattice_exterior_disk_is_bounded_and_increasing() {
    let spec = DomainSpec::new(DomainKind::Exterior, 2, vec![Primitive::Ellipsoid {
        center: [0.0; 3],
        semi_axes: [1.0, 0.6, 1.0],
    }])
    .unwrap();
    let ps = ProblemSpec::new(spec, Nonlinearity::linear(1.0).unwrap(), Setup::DirichletConst { value: 1.0 }, vec![
        2e-3, 1e-2,
    ])
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::uniform(0.05), DtPolicy::standard(2e-3));
    let series = solve_dirichlet(&ps, &opts).unwrap();
    assert!(series.meta.range_excess < 1e-9, "{:?}", series.meta);
    let (a, b) = (&series.snapshots[0].field.values, &series.snapshots[1].field.values);
    assert!(a.iter().zip(b).all(|(x, y)| *y >= *x - 1e-9));
}

#[test]
fn early_interior_is_nearly_empty_and_complement_nearly_full() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let domain = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::standard(1e-5));
    let dir = ProblemSpec::new(domain.clone(), nl.clone(), Setup::DirichletConst { value: 1.0 }, vec![1e-4]).unwrap();
    let u = solve_dirichlet(&dir, &opts).unwrap();
    let nodes = radial_nodes(u.grid());
    for (r, v) in nodes.iter().zip(&u.snapshots[0].field.values) {
        if *r > 1.2 {
            assert!(v.abs() < 1e-12, "u({r}) = {v}");
        }
    }
    let cau = ProblemSpec::new(domain, nl, Setup::CauchyIndicator, vec![1e-4]).unwrap();
    let u = solve_cauchy(&cau, &opts).unwrap();
    let nodes = radial_nodes(u.grid());
    for (r, v) in nodes.iter().zip(&u.snapshots[0].field.values) {
        if *r < 0.8 {
            assert!((v - 1.0).abs() < 1e-12, "u({r}) = {v}");
        }
    }
}

#[test]
fn linear_sandwich_is_tight() {
    let nl = Nonlinearity::linear(1.0).unwrap();
    let domain = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
    let ps = ProblemSpec::new(domain, nl.clone(), Setup::DirichletConst { value: 1.0 }, vec![1e-2, 5e-2]).unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.02, 2e-3), DtPolicy::standard(1e-2));
    let u = solve_dirichlet(&ps, &opts).unwrap();
    let w = solve_linear_heat(&ps, 1.0, 1.0, &opts).unwrap();
    let rep = sandwich_check(&u, &nl, &w, &w, 1e-8).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.worst_margin.abs() <= 1e-8);
}

#[test]
fn setups_are_checked_against_the_solver() {
    let ps = half_line(Setup::CauchyIndicator, vec![1e-3]);
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::standard(1e-4));
    assert!(solve_dirichlet(&ps, &opts).is_err());
    let ps = half_line(Setup::DirichletConst { value: 1.0 }, vec![1e-3]);
    assert!(solve_cauchy(&ps, &opts).is_err());
    assert!(solve_linear_heat(&ps, 0.0, 1.0, &opts).is_err());
}
