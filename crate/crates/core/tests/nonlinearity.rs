use difflab::nonlinearity::{Nonlinearity, TransformTable};

const CI_1: f64 = 0.337_403_922_900_968_1;
const CI_2: f64 = 0.422_980_828_774_865;

/// Composite Simpson for `∫₁ˢ (1 + a·cos ξ)/ξ dξ`.
fn phi_sin_simpson(amp: f64, s: f64) -> f64 {
    let n = 20_000;
    let h = (s - 1.0) / n as f64;
    let f = |x: f64| (1.0 + amp * x.cos()) / x;
    let mut acc = f(1.0) + f(s);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(1.0 + k as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn big_phi_of_sin_perturbed_at_two() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let closed = 2f64.ln() + 0.25 * (CI_2 - CI_1);
    let simpson = phi_sin_simpson(0.25, 2.0);
    assert!((closed - simpson).abs() < 1e-12);
    let v = nl.big_phi(2.0, 1e-13).unwrap();
    assert!((v - closed).abs() <= 1e-10, "{v} vs {closed}");
}

#[test]
fn big_psi_of_sin_perturbed_by_bisection() {
    let nl = Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    let (mut lo, mut hi) = (1e-3, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_sin_simpson(0.25, mid) < -0.8 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let s = nl.big_psi(-0.8, 1e-13).unwrap();
    assert!((s - oracle).abs() <= 1e-9, "{s} vs {oracle}");
    assert!((nl.big_phi(s, 1e-13).unwrap() + 0.8).abs() <= 1e-10);
}

#[test]
fn identity_transforms_are_logarithms() {
    let nl = Nonlinearity::<f64>::identity();
    for s in [1e-30, 0.5, 1.0, 7.0] {
        assert!((nl.big_phi(s, 1e-12).unwrap() - s.ln()).abs() < 1e-15);
    }
    assert!((nl.big_psi(-3.0, 1e-12).unwrap() - (-3f64).exp()).abs() < 1e-16);
    assert!(nl.big_phi(0.0, 1e-12).is_err());
    assert!(nl.big_psi_log(-1e4, 1e-12).unwrap() == -1e4);
}

#[test]
fn admissibility_is_enforced() {
    assert!(Nonlinearity::<f64>::linear(0.0).is_err());
    assert!(Nonlinearity::<f64>::sin_perturbed(0.25, 1.0, 0.5).is_err());
    let declared_too_tight = Nonlinearity::<f64>::sin_perturbed(0.25, 0.9, 1.1).unwrap();
    assert!(!declared_too_tight.validate_bounds((0.0, 10.0), 1000).unwrap().passed());
    let ok = Nonlinearity::<f64>::sin_perturbed(0.25, 0.75, 1.25).unwrap();
    assert!(ok.validate_bounds((0.0, 10.0), 1000).unwrap().passed());
}

#[test]
fn transform_table_agrees_with_quadrature() {
    let nl = Nonlinearity::tanh_blend(0.3, 0.7, 1.3).unwrap();
    let table = TransformTable::for_solver(&nl).unwrap();
    for s in [1e-8, 0.01, 0.3, 1.0, 2.5] {
        let direct = nl.big_phi(s, 1e-13).unwrap();
        assert!((table.big_phi(s) - direct).abs() <= 1e-8, "s = {s}");
    }
    for y in [-12.0, -1.0, 0.0, 0.4] {
        let direct = nl.big_psi(y, 1e-13).unwrap();
        assert!((table.big_psi(y) / direct - 1.0).abs() <= 1e-8, "y = {y}");
    }
}
