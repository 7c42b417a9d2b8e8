//! One-dimensional and tensor-product interpolation helpers.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Index `i` with `xs[i] <= x <= xs[i + 1]`, clamped to the valid range.
pub fn locate<T: Real>(xs: &[T], x: T) -> usize {
    let n = xs.len();
    if n < 2 || x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn linear<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    if xs.len() == 1 {
        return ys[0];
    }
    let i = locate(xs, x);
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Four-point Lagrange interpolation on a non-uniform grid, falling back to
/// linear interpolation on grids with fewer than four nodes. No
/// extrapolation: `x` is clamped to the node range.
pub fn lagrange4<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    if n < 4 {
        return linear(xs, ys, x.max(xs[0]).min(xs[n - 1]));
    }
    let x = x.max(xs[0]).min(xs[n - 1]);
    let i = locate(xs, x);
    let start = i.saturating_sub(1).min(n - 4);
    let mut acc = T::zero();
    for a in start..start + 4 {
        let mut w = T::one();
        for b in start..start + 4 {
            if a != b {
                w = w * (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc = acc + w * ys[a];
    }
    acc
}

/// Keys cubic convolution kernel with `a = −1/2`.
pub fn keys_kernel<T: Real>(s: T) -> T {
    let a = T::lit(-0.5);
    let s = s.abs();
    if s <= T::one() {
        (a + T::two()) * s.powi(3) - (a + T::lit(3.0)) * s * s + T::one()
    } else if s < T::two() {
        a * s.powi(3) - T::lit(5.0) * a * s * s + T::lit(8.0) * a * s - T::lit(4.0) * a
    } else {
        T::zero()
    }
}

/// Piecewise cubic Hermite interpolant with slopes limited so that the
/// interpolant is monotone wherever the data are (Fritsch–Carlson).
#[derive(Clone, Debug)]
pub struct MonotoneCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    /// Builds the interpolant from node values and preferred slopes (e.g.
    /// exact derivatives); slopes are limited only where needed.
    pub fn with_slopes(xs: Vec<T>, ys: Vec<T>, mut slopes: Vec<T>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || slopes.len() != n {
            return Err(Error::Shape(format!(
                "monotone cubic needs matching arrays of length >= 2 (got {}, {}, {})",
                n,
                ys.len(),
                slopes.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("interpolation nodes must be strictly increasing".into()));
        }
        for i in 0..n - 1 {
            let secant = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            if secant == T::zero() {
                slopes[i] = T::zero();
                slopes[i + 1] = T::zero();
                continue;
            }
            for k in [i, i + 1] {
                if slopes[k] * secant < T::zero() {
                    slopes[k] = T::zero();
                }
            }
            let alpha = slopes[i] / secant;
            let beta = slopes[i + 1] / secant;
            let r2 = alpha * alpha + beta * beta;
            let limit = T::lit(9.0);
            if r2 > limit {
                let tau = T::lit(3.0) / r2.sqrt();
                slopes[i] = tau * alpha * secant;
                slopes[i + 1] = tau * beta * secant;
            }
        }
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn nodes(&self) -> &[T] {
        &self.xs
    }

    pub fn values(&self) -> &[T] {
        &self.ys
    }

    /// Value at `x`, held constant outside the node range.
    pub fn eval(&self, x: T) -> T {
        let (lo, hi) = self.domain();
        if x <= lo {
            return self.ys[0];
        }
        if x >= hi {
            return self.ys[self.ys.len() - 1];
        }
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = T::two() * s3 - T::lit(3.0) * s2 + T::one();
        let h10 = s3 - T::two() * s2 + s;
        let h01 = -T::two() * s3 + T::lit(3.0) * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative at `x`; zero outside the node range.
    pub fn derivative(&self, x: T) -> T {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return T::zero();
        }
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let d00 = T::lit(6.0) * s2 - T::lit(6.0) * s;
        let d10 = T::lit(3.0) * s2 - T::lit(4.0) * s + T::one();
        let d01 = -T::lit(6.0) * s2 + T::lit(6.0) * s;
        let d11 = T::lit(3.0) * s2 - T::two() * s;
        (d00 * self.ys[i] + d01 * self.ys[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_cubics() {
        let xs: Vec<f64> = vec![0.0, 0.1, 0.35, 0.5, 0.9, 1.3];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for x in [0.05, 0.2, 0.7, 1.2] {
            assert!((lagrange4(&xs, &ys, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn keys_kernel_partition_of_unity() {
        for k in 0..10 {
            let s = k as f64 / 10.0;
            let total: f64 = (-2..=2).map(|j| keys_kernel(s - j as f64)).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_cubic_limits_overshoot() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0];
        let m = MonotoneCubic::with_slopes(xs, ys, vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        let mut prev = m.eval(0.0);
        for k in 1..=300 {
            let v = m.eval(k as f64 / 100.0);
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }
}
