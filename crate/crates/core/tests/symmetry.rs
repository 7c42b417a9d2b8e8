use difflab::geometry::{DomainKind, DomainSpec, Primitive};
use difflab::nonlinearity::Nonlinearity;
use difflab::pde::{
    solve_dirichlet, DtPolicy, FieldSeries, MeshOptions, ProblemSpec, SchemeMeta, Setup, Snapshot, SolverOptions,
};
use difflab::symmetry::{balance_law_check, curvature_constancy, reflection_comparator, stationarity_test, Plane};

fn radial_solve(spec: DomainSpec<f64>, times: Vec<f64>) -> FieldSeries {
    let ps = ProblemSpec::new(spec, Nonlinearity::identity(), Setup::DirichletConst { value: 1.0 }, times).unwrap();
    let opts = SolverOptions::new(MeshOptions::graded(0.02, 2e-3), DtPolicy::standard(1e-3));
    solve_dirichlet(&ps, &opts).unwrap()
}

fn circle(center: [f64; 2], r: f64, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin(), 0.0]
        })
        .collect()
}

#[test]
fn exterior_disk_is_constant_on_circles() {
    let u = radial_solve(DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap(), vec![0.01, 0.1]);
    let st = stationarity_test(&u, &circle([0.0, 0.0], 1.5, 128)).unwrap();
    assert!(st.max_rel_spread <= 1e-3, "{st:?}");
    assert_eq!(st.per_time_std.len(), 2);
    assert!(stationarity_test(&u, &[]).is_err());
    assert!(stationarity_test(&u, &[[0.2, 0.0, 0.0]]).is_err());
}

#[test]
fn constant_field_has_zero_spread() {
    let u = radial_solve(DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap(), vec![0.01]);
    let mut snap: Snapshot = u.snapshots[0].clone();
    snap.field.values.iter_mut().for_each(|v| *v = 0.7);
    let constant = FieldSeries { snapshots: vec![snap], meta: SchemeMeta::default() };
    let st = stationarity_test(&constant, &circle([0.1, -0.1], 1.3, 64)).unwrap();
    assert!(st.max_rel_spread <= 1e-14);
}

#[test]
fn reflection_through_the_center_and_off_center() {
    let spec = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
    let u = radial_solve(spec.clone(), vec![0.01, 0.1]);
    let through = reflection_comparator(&u, &spec, Plane::new([1.0, 0.0, 0.0], 0.0).unwrap(), 2.5, 1e-6).unwrap();
    assert!(through.symmetric, "{through:?}");
    assert!(through.cap_points > 0);
    let off = reflection_comparator(&u, &spec, Plane::new([1.0, 0.0, 0.0], 0.2).unwrap(), 2.5, 1e-6).unwrap();
    assert!(off.strictly_ordered, "{off:?}");
    assert!(off.min_diff > 0.0);
    assert!(Plane::new([0.0; 3], 0.0).is_err());
}

#[test]
fn plane_reflection_is_an_involution() {
    let p = Plane::new([1.0, 2.0, -0.5], 0.3).unwrap();
    let x = [0.4, -1.1, 2.0];
    let y = p.reflect(&p.reflect(&x));
    for a in 0..3 {
        assert!((x[a] - y[a]).abs() < 1e-14);
    }
    assert!((p.height(&p.reflect(&x)) - (0.6 - p.height(&x))).abs() < 1e-14);
}

#[test]
fn two_equal_disks_are_symmetric_about_the_bisector() {
    let spec = DomainSpec::new(DomainKind::Exterior, 2, vec![
        Primitive::Ball { center: [-1.0, 0.0, 0.0], radius: 0.5 },
        Primitive::Ball { center: [1.0, 0.0, 0.0], radius: 0.5 },
    ])
    .unwrap();
    let ps = ProblemSpec::new(spec.clone(), Nonlinearity::identity(), Setup::DirichletConst { value: 1.0 }, vec![
        0.02, 0.05,
    ])
    .unwrap()
    .with_truncation(3.0)
    .unwrap();
    let opts = SolverOptions::new(MeshOptions::uniform(0.05), DtPolicy::standard(0.01));
    let u = solve_dirichlet(&ps, &opts).unwrap();
    let rep = reflection_comparator(&u, &spec, Plane::new([1.0, 0.0, 0.0], 0.0).unwrap(), 2.0, 1e-6).unwrap();
    assert!(rep.symmetric, "max |u - w| = {}", rep.max_abs_diff);
}

#[test]
fn curvature_product_constancy() {
    let disk = DomainSpec::ball_interior(&[0.0, 0.0], 1.0).unwrap();
    let c = curvature_constancy(&disk, 0.25, 128, 1e-9).unwrap();
    assert_eq!(c.rel_deviation, 0.0);
    assert!(c.sphere_consistent);

    let ellipse = DomainSpec::new(DomainKind::Interior, 2, vec![Primitive::Ellipsoid {
        center: [0.0; 3],
        semi_axes: [2.0, 1.0, 1.0],
    }])
    .unwrap();
    let c = curvature_constancy(&ellipse, 0.25, 256, 1e-9).unwrap();
    assert!(c.rel_deviation >= 0.4, "{c:?}");
    assert!(!c.sphere_consistent);

    let ball = DomainSpec::ball_interior(&[0.0, 0.0, 0.0], 1.0).unwrap();
    let c = curvature_constancy(&ball, 0.25, 200, 1e-9).unwrap();
    assert!(c.rel_deviation <= 1e-12, "{c:?}");
}

#[test]
fn balance_law_detects_an_off_center_disk() {
    let nl = Nonlinearity::identity();
    let centered = radial_solve(DomainSpec::ball_interior(&[0.0, 0.0], 1.0).unwrap(), vec![0.05]);
    let rep = balance_law_check(&centered, &nl, [0.0; 3], &[0.0, 0.3, 0.6], 64, 1e-6).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.entries[0].norm, 0.0);

    let shifted = radial_solve(DomainSpec::ball_interior(&[0.3, 0.0], 1.0).unwrap(), vec![0.05]);
    let rep = balance_law_check(&shifted, &nl, [0.0; 3], &[0.0, 0.3, 0.6], 64, 1e-6).unwrap();
    assert!(rep.max_norm >= 1e-3, "{rep:?}");
    assert!(!rep.pass);
    assert_eq!(rep.entries[0].norm, 0.0);

    let nonlinear = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    assert!(balance_law_check(&centered, &nonlinear, [0.0; 3], &[0.3], 64, 1e-6).is_err());
}
