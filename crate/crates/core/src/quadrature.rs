//! One-dimensional quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_DEPTH: usize = 60;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance `tol`.
///
/// Works for `a > b` (returns the signed integral). Uses Richardson
/// extrapolation on accepted panels.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let fa = f(lo);
    let fb = f(hi);
    let m = (lo + hi) * T::half();
    let fm = f(m);
    let whole = simpson(lo, hi, fa, fm, fb);
    let mut budget = 2_000_000usize;
    let v = recurse(&f, lo, hi, fa, fm, fb, whole, tol, MAX_DEPTH, &mut budget)?;
    Ok(sign * v)
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
    budget: &mut usize,
) -> Result<T> {
    let m = (a + b) * T::half();
    let lm = (a + m) * T::half();
    let rm = (m + b) * T::half();
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Numeric(format!("non-finite integrand near [{a}, {b}]")));
    }
    // Floating-point floor: once the panel shrinks to rounding level, accept.
    let floor = T::epsilon() * T::lit(64.0) * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol || delta.abs() <= floor || m <= a || m >= b {
        if depth == 0 && delta.abs() > T::lit(15.0) * tol.max(floor) {
            return Err(Error::Numeric(format!(
                "adaptive Simpson hit depth limit on [{a}, {b}] (estimate {delta})"
            )));
        }
        return Ok(left + right + delta / T::lit(15.0));
    }
    if *budget == 0 {
        return Err(Error::Numeric("adaptive Simpson exhausted its evaluation budget".into()));
    }
    *budget -= 1;
    let half_tol = tol * T::half();
    let l = recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1, budget)?;
    let r = recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1, budget)?;
    Ok(l + r)
}

/// Nodes and weights of the 8-point Gauss–Legendre rule on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss–Legendre over `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, panels: usize) -> T {
    let panels = panels.max(1);
    let width = (b - a) / T::from_usize(panels).unwrap();
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + width * T::from_usize(p).unwrap();
        let mid = lo + width * T::half();
        let half = width * T::half();
        for &(x, w) in GL8.iter() {
            acc = acc + T::lit(w) * half * f(mid + half * T::lit(x));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_reversed_limits() {
        let v = adaptive_simpson(|x: f64| 1.0 / x, 2.0, 1.0, 1e-12).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn simpson_f32() {
        let v = adaptive_simpson(|x: f32| x.cos(), 0.0, 1.0, 1e-5).unwrap();
        assert!((v - 1f32.sin()).abs() < 1e-5);
    }

    #[test]
    fn gauss_legendre_gaussian() {
        let v = gauss_legendre(|x: f64| (-x * x).exp(), -8.0, 8.0, 32);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(adaptive_simpson(|x: f64| x, 0.0, 1.0, 0.0).is_err());
    }
}
