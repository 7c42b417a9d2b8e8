//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finds a root of `f` in `[a, b]` by a safeguarded secant/bisection
/// (Illinois variant of regula falsi, falling back to bisection).
///
/// Requires `f(a)` and `f(b)` of opposite sign (or one of them zero).
pub fn bracketed_root<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, xtol: T, max_iter: usize) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Numeric(format!(
            "root not bracketed: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    let mut side = 0i8;
    for it in 0..max_iter {
        let width = (b - a).abs();
        if width <= xtol {
            return Ok((a + b) * T::half());
        }
        // Alternate a bisection step every few iterations to guarantee progress.
        let c = if it % 4 == 3 {
            (a + b) * T::half()
        } else {
            let c = (a * fb - b * fa) / (fb - fa);
            if c.is_finite() && ((c > a && c < b) || (c > b && c < a)) {
                c
            } else {
                (a + b) * T::half()
            }
        };
        let fc = f(c);
        if fc == T::zero() {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa * T::half();
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb = fb * T::half();
            }
            side = 1;
        }
    }
    let width = (b - a).abs();
    if width <= xtol * T::lit(1e3) {
        Ok((a + b) * T::half())
    } else {
        Err(Error::Numeric(format!("root finding did not converge; bracket width {width}")))
    }
}

/// Plain bisection; used where an implementation-independent path is wanted.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, xtol: T) -> Result<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric(format!("bisection not bracketed on [{a}, {b}]")));
    }
    for _ in 0..400 {
        let m = (a + b) * T::half();
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * T::half())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = bracketed_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_agrees() {
        let r = bisect(|x: f64| x.cos() - x, 0.0, 1.0, 1e-15).unwrap();
        let s = bracketed_root(|x: f64| x.cos() - x, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r - s).abs() < 1e-13);
    }

    #[test]
    fn unbracketed_is_error() {
        assert!(bracketed_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 50).is_err());
    }
}
