use std::f64::consts::PI;

use difflab::asymptotics::KSpec;
use difflab::geometry::Grid;
use difflab::manifold::{
    euclidean_limit_check, geodesic_circle_stationarity, geodesic_distance, kernel_sandwich_check,
    manifold_varadhan_report, solve_radial_heat_manifold, GeodesicDomain, ManifoldSetup, ManifoldSpec, Model,
};
use difflab::pde::{DtPolicy, Formulation, MeshOptions, SolverOptions};
use difflab::Error;

fn sphere() -> ManifoldSpec {
    ManifoldSpec::new(Model::Sphere, 2).unwrap()
}

fn hyperbolic() -> ManifoldSpec {
    ManifoldSpec::new(Model::Hyperbolic, 2).unwrap()
}

const ANNULUS: GeodesicDomain = GeodesicDomain::Annulus { inner: PI / 3.0, outer: 2.0 * PI / 3.0 };

fn pressure_opts(t_first: f64) -> SolverOptions {
    SolverOptions::new(MeshOptions::graded(0.005, 5e-4), DtPolicy::relative(t_first, 2e-3))
        .with_formulation(Formulation::Pressure)
}

#[test]
fn geodesic_distance_examples() {
    let s = sphere();
    let pole = s.pole();
    assert!((geodesic_distance(&s, &pole, &[1.0, 0.0, 0.0]).unwrap() - PI / 2.0).abs() < 1e-15);
    assert!((geodesic_distance(&s, &pole, &[0.0, 0.0, -1.0]).unwrap() - PI).abs() < 1e-15);
    let a = [0.6, 0.0, 0.8];
    let b = [0.0, 0.6, 0.8];
    assert!((geodesic_distance(&s, &a, &b).unwrap() - 0.64f64.acos()).abs() < 1e-14);
    assert!(geodesic_distance(&s, &pole, &[1.0, 1.0, 0.0]).is_err());

    let h = hyperbolic();
    let x = [1f64.sinh(), 0.0, 1f64.cosh()];
    assert!((geodesic_distance(&h, &h.pole(), &x).unwrap() - 1.0).abs() < 1e-14);
    let y = [0.0, -(2f64.sinh()), 2f64.cosh()];
    let expected = (1f64.cosh() * 2f64.cosh()).acosh();
    assert!((geodesic_distance(&h, &x, &y).unwrap() - expected).abs() < 1e-12);
    assert!(geodesic_distance(&h, &h.pole(), &[0.0, 0.0, -1.0]).is_err());
    assert!(ManifoldSpec::new(Model::Sphere, 1).is_err());
}

#[test]
fn point_at_lands_at_the_requested_radius() {
    for m in [sphere(), hyperbolic()] {
        let p = m.point_at(1.3, &[3.0, 4.0]).unwrap();
        assert!((m.distance(&m.pole(), &p).unwrap() - 1.3).abs() < 1e-13);
    }
    assert!(sphere().point_at(1.0, &[0.0, 0.0]).is_err());
}

#[test]
fn sphere_annulus_solution_is_bounded_and_increasing() {
    let times = [1e-3, 1e-2, 1e-1];
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::standard(1e-3));
    let u = solve_radial_heat_manifold(&sphere(), &ANNULUS, &ManifoldSetup::Dirichlet { value: 1.0 }, &times, &opts)
        .unwrap();
    for s in &u.snapshots {
        for (v, kind) in s.field.values.iter().zip(&s.field.mask) {
            if kind.in_domain() && *v < 1.0 {
                assert!(*v > 0.0 && *v < 1.0);
            }
        }
    }
    for w in u.snapshots.windows(2) {
        for (a, b) in w[0].field.values.iter().zip(&w[1].field.values) {
            assert!(b >= &(a - 1e-12));
        }
    }
    let circle = geodesic_circle_stationarity(&u, &sphere(), 1.2, 64).unwrap();
    assert!(circle.max_rel_spread <= 1e-12);
}

#[test]
fn cauchy_complement_stays_near_one_at_small_times() {
    let times = [1e-4, 1e-3];
    let opts = SolverOptions::new(MeshOptions::graded(0.01, 1e-3), DtPolicy::standard(1e-4));
    let u = solve_radial_heat_manifold(&sphere(), &ANNULUS, &ManifoldSetup::Cauchy, &times, &opts).unwrap();
    let s = &u.snapshots[0];
    let Grid::Radial(g) = &s.field.grid else { panic!("radial grid expected") };
    for (r, v) in g.nodes.iter().zip(&s.field.values) {
        assert!((0.0..=1.0 + 1e-12).contains(v));
        if *r < PI / 3.0 - 0.2 || *r > 2.0 * PI / 3.0 + 0.2 {
            assert!((v - 1.0).abs() < 1e-6, "u({r}) = {v}");
        }
    }
}

#[test]
fn varadhan_limit_on_the_sphere_annulus() {
    let times = [1e-4, 1e-3];
    let u = solve_radial_heat_manifold(
        &sphere(),
        &ANNULUS,
        &ManifoldSetup::Dirichlet { value: 1.0 },
        &times,
        &pressure_opts(1e-4),
    )
    .unwrap();
    let rep = manifold_varadhan_report(&u, &sphere(), &ANNULUS, &KSpec::new(0.1, None)).unwrap();
    assert!(rep.sup_errors[1] <= 0.05, "{:?}", rep.sup_errors);
    assert!(rep.decreasing || rep.sup_errors[0] <= rep.sup_errors[1]);
    let s = u.at(1e-3).unwrap();
    let Grid::Radial(g) = &s.field.grid else { panic!("radial grid expected") };
    let i = g.nodes.partition_point(|r| *r < PI / 2.0);
    let r = g.nodes[i];
    let v = 4.0 * 1e-3 * s.pressure.as_ref().unwrap()[i];
    let d = (PI / 3.0).min(r - PI / 3.0).min(2.0 * PI / 3.0 - r);
    assert!((v - d * d).abs() <= 0.05, "{v} vs {}", d * d);
}

#[test]
fn kernel_sandwich_widths_and_rejections() {
    let times = [1e-4, 1e-3, 1e-2];
    let opts = pressure_opts(1e-4);
    let k = KSpec::new(0.1, None);
    let u = solve_radial_heat_manifold(&sphere(), &ANNULUS, &ManifoldSetup::Cauchy, &times, &opts).unwrap();
    let a = kernel_sandwich_check(&u, &sphere(), &ANNULUS, 0.05, &k, &opts, 1e-6).unwrap();
    let b = kernel_sandwich_check(&u, &sphere(), &ANNULUS, 0.1, &k, &opts, 1e-6).unwrap();
    assert!(a.passed() && b.passed(), "{a:?} {b:?}");
    assert!((b.lower_width / a.lower_width - 2.0).abs() < 1e-12);
    assert!((b.upper_width / a.upper_width - 2.0).abs() < 1e-12);
    assert!((a.lower_width - (2.0 * a.m + 1.0) * 0.05).abs() < 1e-14);
    assert!(matches!(
        kernel_sandwich_check(&u, &sphere(), &ANNULUS, a.reach, &k, &opts, 1e-6),
        Err(Error::Config(_))
    ));
    let dirichlet =
        solve_radial_heat_manifold(&sphere(), &ANNULUS, &ManifoldSetup::Dirichlet { value: 1.0 }, &times, &opts).unwrap();
    assert!(kernel_sandwich_check(&dirichlet, &sphere(), &ANNULUS, 0.1, &k, &opts, 1e-6).is_err());
}

#[test]
fn euclidean_limit_error_scales_quadratically() {
    let h = hyperbolic();
    let domain = GeodesicDomain::Annulus { inner: 1.0, outer: 2.0 };
    let opts = SolverOptions::new(MeshOptions::graded(0.02, 2e-3), DtPolicy::relative(1e-2, 5e-3));
    let setup = ManifoldSetup::Dirichlet { value: 1.0 };
    let times = [0.01, 0.1, 1.0];
    let coarse = euclidean_limit_check(&h, &domain, &setup, &times, 0.1, &opts, 0.02).unwrap();
    let fine = euclidean_limit_check(&h, &domain, &setup, &times, 0.05, &opts, 0.02).unwrap();
    assert!(fine.pass);
    let ratio = coarse.max_rel_error / fine.max_rel_error;
    assert!((ratio - 4.0).abs() <= 0.5, "ratio {ratio}");
    assert!(euclidean_limit_check(&h, &domain, &setup, &times, 0.0, &opts, 0.02).is_err());
}

#[test]
fn domain_validation() {
    assert!(GeodesicDomain::Exterior { radius: 1.0 }.validate(&sphere()).is_err());
    assert!(GeodesicDomain::Exterior { radius: 1.0 }.validate(&hyperbolic()).is_ok());
    assert!(GeodesicDomain::Annulus { inner: 1.0, outer: PI }.validate(&sphere()).is_err());
    assert!(GeodesicDomain::Annulus { inner: 2.0, outer: 1.0 }.validate(&hyperbolic()).is_err());
    assert!((ANNULUS.reach(&sphere()) - PI / 6.0).abs() < 1e-15);
    assert!((GeodesicDomain::Ball { radius: 2.5 }.reach(&sphere()) - (PI - 2.5)).abs() < 1e-15);
}
