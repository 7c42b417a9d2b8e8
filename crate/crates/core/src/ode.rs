//! Dormand–Prince 5(4) integrator with embedded error control.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; chosen from the tolerances when `None`.
    pub first_step: Option<T>,
    pub max_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-10),
            first_step: None,
            max_step: T::infinity(),
            max_steps: 1_000_000,
        }
    }
}

/// Accepted steps of an integration, including the initial point.
#[derive(Clone, Debug)]
pub struct Trajectory<T, const N: usize> {
    pub t: Vec<T>,
    pub y: Vec<[T; N]>,
    pub dy: Vec<[T; N]>,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (c, k) in terms {
        let c = T::lit(*c) * h;
        for i in 0..N {
            out[i] = out[i] + c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn dormand_prince<T, const N: usize, F>(
    mut f: F,
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let span = t1 - t0;
    let dir = if span >= T::zero() { T::one() } else { -T::one() };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut traj = Trajectory { t: vec![t], y: vec![y], dy: vec![k1], rejected: 0 };
    if span == T::zero() {
        return Ok(traj);
    }
    let mut h = opts.first_step.unwrap_or_else(|| {
        let scale = y.iter().fold(T::zero(), |a, v| a.max(v.abs())) + T::one();
        let slope = k1.iter().fold(T::zero(), |a, v| a.max(v.abs())) + T::epsilon();
        (opts.rtol.max(opts.atol).powf(T::lit(0.2)) * scale / slope * T::lit(0.1)).min(span.abs())
    });
    h = h.min(opts.max_step).abs();
    let h_floor = T::epsilon() * T::lit(16.0) * (t0.abs().max(t1.abs()) + T::one());
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= T::zero() {
            return Ok(traj);
        }
        if h >= remaining {
            h = remaining;
        }
        let hs = h * dir;
        let k2 = f(t + T::lit(C2) * hs, &combo(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + T::lit(C3) * hs, &combo(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + T::lit(C4) * hs, &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + T::lit(C5) * hs,
            &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + hs, &y_new);
        let mut err = T::zero();
        for i in 0..N {
            let e = hs
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numeric(format!("non-finite state while integrating at t = {t}")));
        }
        if err <= T::one() {
            t = if h == remaining { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(k1);
            let grow = if err == T::zero() { T::lit(5.0) } else { (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)) };
            h = (h * grow).min(opts.max_step);
        } else {
            traj.rejected += 1;
            h = h * (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            if h < h_floor {
                return Err(Error::Numeric(format!(
                    "step size underflow at t = {t} (step {h}); the system may be stiff"
                )));
            }
        }
    }
    Err(Error::Numeric(format!("step budget of {} exhausted at t = {t}", opts.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let tr = dormand_prince(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0, &OdeOptions::default()).unwrap();
        let y = tr.y.last().unwrap()[0];
        assert!((y - (-3.0f64).exp()).abs() < 1e-9);
        assert_eq!(*tr.t.last().unwrap(), 3.0);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let tr = dormand_prince(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], -2.0, &OdeOptions::default()).unwrap();
        let y = tr.y.last().unwrap();
        assert!((y[0] - (-2.0f64).sin()).abs() < 1e-9);
        assert!((y[1] - (-2.0f64).cos()).abs() < 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let opts = OdeOptions { rtol: 1e-5f32, atol: 1e-6, ..OdeOptions::default() };
        let tr = dormand_prince(|t: f32, _y: &[f32; 1]| [2.0 * t], 0.0, [0.0], 1.5, &opts).unwrap();
        assert!((tr.y.last().unwrap()[0] - 2.25).abs() < 1e-4);
    }
}
