//! Self-similar barrier profiles built from the ODE pair
//! `h' = H/φ'(h)`, `H' = −ξH/(2φ'(h))`.
//!
//! The shifted profile `f(ξ) = h(ξ + 2δ)` gives the subsolution
//! `w(x, t) = f(d*(x)/√t)` near ∂Ω, whose value on ∂Ω is the lower bound
//! `c₀ = f(0)` for the indicator Cauchy problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, NodeKind, Point, ScalarField};
use crate::interp::MonotoneCubic;
use crate::nonlinearity::Nonlinearity;
use crate::ode::{dormand_prince, OdeOptions};
use crate::pde::FieldSeries;
use crate::scalar::Real;

/// Closed-form starting pair `(h₀, H₀)` that places the limits of `h` in
/// `(0, 1)` and `(−∞, 0)` for every nonlinearity with the given bounds.
pub fn default_initial_data<T: Real>(delta1: T, delta2: T) -> Result<(T, T)> {
    if !(delta1 > T::zero()) || delta1 > delta2 {
        return Err(Error::Domain(format!("need 0 < delta1 <= delta2, got {delta1}, {delta2}")));
    }
    let p1 = delta1.powf(T::lit(1.5));
    let p2 = delta2.powf(T::lit(1.5));
    let h0 = p1 / (T::two() * (p1 + p2));
    let big_h0 = -delta1 * delta2 / (T::PI().sqrt() * (p1 + p2));
    Ok((h0, big_h0))
}

/// Half-width `L = 2√(δ₂ ln(1/tol))`, where the Gaussian envelope of `H`
/// reaches `tol`, rounded up to the next multiple of 1/4.
pub fn default_half_width<T: Real>(delta2: T, tol: T) -> T {
    let l = T::two() * (delta2 * (T::one() / tol).ln()).sqrt();
    let q = T::lit(4.0);
    ((l * q).floor() + T::one()) / q
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn intersects(&self, other: &Interval<T>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Limits of `h` at ±∞: the value at the truncation point, the enclosure
/// after adding the Gaussian tail bound, and the a-priori bounds implied by
/// `δ₁ ≤ φ' ≤ δ₂`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BarrierLimits<T> {
    pub minus: T,
    pub plus: T,
    pub minus_enclosure: Interval<T>,
    pub plus_enclosure: Interval<T>,
    pub minus_bounds: Interval<T>,
    pub plus_bounds: Interval<T>,
}

impl<T: Real> BarrierLimits<T> {
    /// Whether the computed limits respect the a-priori bounds.
    pub fn within_bounds(&self, slack: T) -> bool {
        let widen = |i: &Interval<T>| Interval { lo: i.lo - slack, hi: i.hi + slack };
        widen(&self.plus_bounds).intersects(&self.plus_enclosure)
            && widen(&self.minus_bounds).intersects(&self.minus_enclosure)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierChecks {
    pub h_decreasing: bool,
    pub big_h_negative: bool,
    pub envelope_pass: bool,
    /// Largest relative excursion of `H` outside its Gaussian envelope.
    pub envelope_excess: f64,
    pub limits_within_bounds: bool,
    /// `1 > h(−∞) > h(0) > 0 > h(+∞)`.
    pub ordering: bool,
}

impl BarrierChecks {
    pub fn passed(&self) -> bool {
        self.h_decreasing && self.big_h_negative && self.envelope_pass && self.limits_within_bounds && self.ordering
    }
}

#[derive(Clone, Debug)]
pub struct BarrierSolution<T> {
    pub xi: Vec<T>,
    pub h: Vec<T>,
    pub big_h: Vec<T>,
    pub h0: T,
    pub big_h0: T,
    pub half_width: T,
    pub delta1: T,
    pub delta2: T,
    pub delta_shift: T,
    pub limits: BarrierLimits<T>,
    pub checks: BarrierChecks,
    profile: MonotoneCubic<T>,
}

/// Integrates the barrier system outward from `ξ = 0` to `±half_width`.
pub fn solve_barrier_ode<T: Real>(
    nl: &Nonlinearity<T>,
    h0: T,
    big_h0: T,
    half_width: T,
    tol: T,
) -> Result<BarrierSolution<T>> {
    if !(big_h0 < T::zero()) {
        return Err(Error::Domain(format!("H0 must be negative, got {big_h0}")));
    }
    if !(h0 > T::zero() && h0 < T::one()) {
        return Err(Error::Domain(format!("h0 must lie in (0, 1), got {h0}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let d1 = nl.delta1();
    let d2 = nl.delta2();
    let reach = (-(half_width * half_width) / (T::lit(4.0) * d2)).exp();
    if !(reach < tol) {
        return Err(Error::Config(format!(
            "half-width {half_width} too small: exp(-L^2/(4 delta2)) = {reach} is not below {tol}"
        )));
    }
    let rhs = |xi: T, y: &[T; 2]| {
        let a = nl.dphi(y[0]);
        [y[1] / a, -T::half() * xi * y[1] / a]
    };
    let opts = OdeOptions { rtol: tol, atol: tol * T::lit(1e-2), max_step: half_width / T::lit(64.0), ..OdeOptions::default() };
    let fwd = dormand_prince(rhs, T::zero(), [h0, big_h0], half_width, &opts)?;
    let bwd = dormand_prince(rhs, T::zero(), [h0, big_h0], -half_width, &opts)?;

    let mut xi = Vec::with_capacity(fwd.t.len() + bwd.t.len());
    let mut h = Vec::with_capacity(xi.capacity());
    let mut big_h = Vec::with_capacity(xi.capacity());
    let mut slopes = Vec::with_capacity(xi.capacity());
    for k in (1..bwd.t.len()).rev() {
        xi.push(bwd.t[k]);
        h.push(bwd.y[k][0]);
        big_h.push(bwd.y[k][1]);
        slopes.push(bwd.dy[k][0]);
    }
    for k in 0..fwd.t.len() {
        xi.push(fwd.t[k]);
        h.push(fwd.y[k][0]);
        big_h.push(fwd.y[k][1]);
        slopes.push(fwd.dy[k][0]);
    }

    // Strict decrease is checked on h' = H/φ'(h); the samples are flat in the tails.
    let h_decreasing = h.windows(2).all(|w| w[1] <= w[0]) && slopes.iter().all(|s| *s < T::zero());
    let big_h_negative = big_h.iter().all(|v| *v < T::zero());
    let mut excess = T::zero();
    for (x, v) in xi.iter().zip(&big_h) {
        let q = *x * *x / T::lit(4.0);
        let lo = big_h0.abs() * (-q / d1).exp();
        let hi = big_h0.abs() * (-q / d2).exp();
        let m = v.abs();
        let scale = big_h0.abs();
        excess = excess.max((lo - m) / scale).max((m - hi) / scale);
    }
    let envelope_pass = excess <= tol * T::lit(100.0);
    if !envelope_pass {
        return Err(Error::Numeric(format!(
            "H left its Gaussian envelope by {excess} (relative); integration accuracy insufficient"
        )));
    }

    let a = big_h0.abs();
    let sqrt_pi = T::PI().sqrt();
    let tail = {
        let z = (half_width / (T::two() * d2.sqrt())).to_f64_lossy();
        a / d1 * (T::PI() * d2).sqrt() * T::lit(statrs::function::erf::erfc(z))
    };
    let h_plus = *h.last().expect("non-empty");
    let h_minus = h[0];
    let limits = BarrierLimits {
        minus: h_minus,
        plus: h_plus,
        minus_enclosure: Interval { lo: h_minus, hi: h_minus + tail },
        plus_enclosure: Interval { lo: h_plus - tail, hi: h_plus },
        minus_bounds: Interval { lo: h0 + a * sqrt_pi * d1.sqrt() / d2, hi: h0 + a * sqrt_pi * d2.sqrt() / d1 },
        plus_bounds: Interval { lo: h0 - a * sqrt_pi * d2.sqrt() / d1, hi: h0 - a * sqrt_pi * d1.sqrt() / d2 },
    };
    let limits_within_bounds = limits.within_bounds(tol * T::lit(10.0));
    let ordering = T::one() > limits.minus && limits.minus > h0 && h0 > T::zero() && T::zero() > limits.plus;

    let profile = MonotoneCubic::with_slopes(xi.clone(), h.clone(), slopes)?;
    let checks = BarrierChecks {
        h_decreasing,
        big_h_negative,
        envelope_pass,
        envelope_excess: excess.max(T::zero()).to_f64_lossy(),
        limits_within_bounds,
        ordering,
    };
    let mut sol = BarrierSolution {
        xi,
        h,
        big_h,
        h0,
        big_h0,
        half_width,
        delta1: d1,
        delta2: d2,
        delta_shift: T::zero(),
        limits,
        checks,
        profile,
    };
    sol.delta_shift = choose_shift(&sol);
    Ok(sol)
}

/// Solves the barrier system with the default initial data and half-width.
pub fn default_barrier<T: Real>(nl: &Nonlinearity<T>, tol: T) -> Result<BarrierSolution<T>> {
    let (h0, big_h0) = default_initial_data(nl.delta1(), nl.delta2())?;
    let l = default_half_width(nl.delta2(), tol);
    solve_barrier_ode(nl, h0, big_h0, l, tol)
}

/// Largest `δ = 2^{−k}` (k ≥ 1) with `h(2δ) > h(0)/2`.
pub fn choose_shift<T: Real>(bs: &BarrierSolution<T>) -> T {
    let target = bs.h_at(T::zero()) * T::half();
    let mut delta = T::half();
    for _ in 0..200 {
        if bs.h_at(T::two() * delta) > target {
            return delta;
        }
        delta = delta * T::half();
    }
    delta
}

impl<T: Real> BarrierSolution<T> {
    /// `h(ξ)`, clamped to the computed limits outside `[−L, L]`.
    pub fn h_at(&self, xi: T) -> T {
        if xi > self.half_width {
            self.limits.plus
        } else if xi < -self.half_width {
            self.limits.minus
        } else {
            self.profile.eval(xi)
        }
    }

    pub fn h_prime_at(&self, xi: T) -> T {
        self.profile.derivative(xi)
    }

    /// Shifted profile `f(ξ) = h(ξ + 2δ)`.
    pub fn f(&self, xi: T) -> T {
        self.h_at(xi + T::two() * self.delta_shift)
    }

    pub fn f_prime(&self, xi: T) -> T {
        self.h_prime_at(xi + T::two() * self.delta_shift)
    }

    /// The boundary lower bound `c₀ = f(0)`.
    pub fn c0(&self) -> T {
        self.f(T::zero())
    }

    pub fn with_shift(mut self, delta: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return Err(Error::Domain(format!("shift must be positive, got {delta}")));
        }
        self.delta_shift = delta;
        Ok(self)
    }

    /// Barrier w(x, t) = f(d*/√t) for a single signed distance.
    pub fn subsolution_value(&self, d_star: T, t: T) -> T {
        self.f(d_star / t.sqrt())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierSummary {
    pub h0: f64,
    #[serde(rename = "H0")]
    pub big_h0: f64,
    pub delta: f64,
    pub half_width: f64,
    pub f0: f64,
    pub limits: [f64; 2],
    pub limit_bounds_minus: [f64; 2],
    pub limit_bounds_plus: [f64; 2],
    pub envelope_pass: bool,
    pub checks: BarrierChecks,
}

impl<T: Real> BarrierSolution<T> {
    pub fn summary(&self) -> BarrierSummary {
        let f = |v: T| v.to_f64_lossy();
        BarrierSummary {
            h0: f(self.h0),
            big_h0: f(self.big_h0),
            delta: f(self.delta_shift),
            half_width: f(self.half_width),
            f0: f(self.c0()),
            limits: [f(self.limits.minus), f(self.limits.plus)],
            limit_bounds_minus: [f(self.limits.minus_bounds.lo), f(self.limits.minus_bounds.hi)],
            limit_bounds_plus: [f(self.limits.plus_bounds.lo), f(self.limits.plus_bounds.hi)],
            envelope_pass: self.checks.envelope_pass,
            checks: self.checks.clone(),
        }
    }
}

/// Barrier field `w = f(d*/√t)` on the grid of `d_star`.
pub fn subsolution_field(bs: &BarrierSolution<f64>, d_star: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("barrier time must be positive, got {t}")));
    }
    let values = d_star.values.iter().map(|d| bs.subsolution_value(*d, t)).collect();
    Ok(ScalarField { grid: d_star.grid.clone(), values, mask: d_star.mask.clone() })
}

/// Collar `{|d*| ≤ ρ}` around ∂Ω on which the barrier comparison is made.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Collar {
    pub width: f64,
    /// Largest `|Δd*|` found on the collar.
    pub max_laplacian: f64,
}

impl Collar {
    /// Width `ρ` defaults to a quarter of the smallest primitive radius.
    pub fn around(spec: &DomainSpec<f64>, width: Option<f64>) -> Result<Self> {
        let width = width.unwrap_or(0.25 * spec.min_feature());
        if !(width > 0.0) {
            return Err(Error::Domain(format!("collar width must be positive, got {width}")));
        }
        let step = 1e-3 * width;
        let mut max_laplacian = 0.0f64;
        for (j, p) in spec.boundary_samples(256)? {
            let nu = spec.inward_normal(j, &p);
            for k in 0..=16 {
                let s = width * (k as f64 / 8.0 - 1.0);
                let x = [p[0] + s * nu[0], p[1] + s * nu[1], p[2] + s * nu[2]];
                max_laplacian = max_laplacian.max(spec.laplacian_signed_distance(&x, step).abs());
            }
        }
        Ok(Collar { width, max_laplacian })
    }

    /// Largest τ with `√τ < δ/(δ₂·max|Δd*|)`.
    pub fn validity_window(&self, bs: &BarrierSolution<f64>) -> f64 {
        if self.max_laplacian == 0.0 {
            return f64::INFINITY;
        }
        let r = bs.delta_shift / (bs.delta2 * self.max_laplacian);
        r * r
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub c0: f64,
    pub tau_requested: f64,
    pub validity_window: f64,
    /// `min(tau_requested, validity_window)`.
    pub tau_used: f64,
    pub clipped: bool,
    pub collar: Collar,
    /// Minimum of `u` over boundary nodes and snapshots in `(0, tau_used]`.
    pub empirical_min: f64,
    /// Same minimum over every snapshot in `(0, tau_requested]`.
    pub empirical_min_requested: f64,
    pub boundary_nodes: usize,
    pub snapshots_used: usize,
    pub comparison_checked: usize,
    pub comparison_violations: usize,
    /// Smallest `u − w` on the collar within the window.
    pub worst_margin: f64,
    pub tol: f64,
    pub notes: Vec<String>,
}

impl LowerBoundReport {
    pub fn passed(&self) -> bool {
        self.c0 > 0.0 && self.comparison_violations == 0 && self.empirical_min >= self.c0 - self.tol
    }
}

/// Compares the Cauchy solution `u` with the barrier `w` on the collar for
/// every snapshot up to `tau` (clipped to the validity window), and records
/// the smallest value of `u` on boundary nodes.
pub fn lower_bound_c0(
    bs: &BarrierSolution<f64>,
    spec: &DomainSpec<f64>,
    u: &FieldSeries,
    tau: f64,
    collar_width: Option<f64>,
    tol: f64,
) -> Result<LowerBoundReport> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let collar = Collar::around(spec, collar_width)?;
    let grid = u.grid();
    let cells = collar.width / grid.spacing();
    if cells < 4.0 {
        return Err(Error::Resolution(format!(
            "collar of width {:.3e} spans {cells:.1} grid cells; at least 4 are needed",
            collar.width
        )));
    }
    let window = collar.validity_window(bs);
    let tau_used = tau.min(window);
    let mut notes = Vec::new();
    if tau_used < tau {
        notes.push(format!("tau clipped from {tau} to the validity window {window:.6e}"));
    }
    let n = grid.len();
    let d_star: Vec<f64> = (0..n).map(|i| spec.signed_distance(&grid.point(i))).collect();
    let mut report = LowerBoundReport {
        c0: bs.c0(),
        tau_requested: tau,
        validity_window: window,
        tau_used,
        clipped: tau_used < tau,
        collar,
        empirical_min: f64::INFINITY,
        empirical_min_requested: f64::INFINITY,
        boundary_nodes: 0,
        snapshots_used: 0,
        comparison_checked: 0,
        comparison_violations: 0,
        worst_margin: f64::INFINITY,
        tol,
        notes,
    };
    for s in &u.snapshots {
        if s.t > tau * (1.0 + 1e-12) {
            continue;
        }
        let inside = s.t <= tau_used * (1.0 + 1e-12);
        let mut count = 0;
        for i in 0..n {
            if s.field.mask[i] != NodeKind::Boundary {
                continue;
            }
            count += 1;
            let v = s.field.values[i];
            report.empirical_min_requested = report.empirical_min_requested.min(v);
            if inside {
                report.empirical_min = report.empirical_min.min(v);
            }
        }
        report.boundary_nodes = report.boundary_nodes.max(count);
        if !inside {
            continue;
        }
        report.snapshots_used += 1;
        for i in 0..n {
            if d_star[i].abs() > collar.width {
                continue;
            }
            let margin = s.field.values[i] - bs.subsolution_value(d_star[i], s.t);
            report.comparison_checked += 1;
            report.worst_margin = report.worst_margin.min(margin);
            if margin < -tol {
                report.comparison_violations += 1;
            }
        }
    }
    if report.snapshots_used == 0 {
        report.notes.push("no snapshot falls inside the validity window".into());
    }
    if report.boundary_nodes == 0 {
        return Err(Error::Resolution("no boundary nodes found on the solution grid".into()));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    /// Samples where `w_t − Δφ(w) ≥ 0`.
    pub nonnegative: usize,
    /// Largest value of `(w_t − Δφ(w))·t`.
    pub max_scaled_residual: f64,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.nonnegative == 0
    }
}

/// Evaluates `w_t − Δφ(w)` by central differences at points along the
/// inward normals of ∂Ω, `|d*| ≤ ρ`, for each of `times`. Samples where
/// `|f′(d*/√t)| < 1e−6` are skipped: the residual there is below the
/// differencing noise.
pub fn subsolution_residual(
    bs: &BarrierSolution<f64>,
    nl: &Nonlinearity<f64>,
    spec: &DomainSpec<f64>,
    collar: &Collar,
    times: &[f64],
    samples: usize,
) -> Result<ResidualReport> {
    let mut report = ResidualReport { samples: 0, nonnegative: 0, max_scaled_residual: f64::NEG_INFINITY };
    let boundary = spec.boundary_samples(samples)?;
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("residual times must be positive, got {t}")));
        }
        let ht = 1e-4 * t;
        let hx = 1e-3 * t.sqrt().min(collar.width);
        let w = |x: &Point<f64>, t: f64| bs.subsolution_value(spec.signed_distance(x), t);
        for (j, p) in &boundary {
            let nu = spec.inward_normal(*j, p);
            for k in 0..=8 {
                let s = collar.width * (k as f64 / 4.0 - 1.0);
                let x = [p[0] + s * nu[0], p[1] + s * nu[1], p[2] + s * nu[2]];
                let xi = spec.signed_distance(&x) / t.sqrt();
                if bs.f_prime(xi).abs() < 1e-6 {
                    continue;
                }
                let w_t = (w(&x, t + ht) - w(&x, t - ht)) / (2.0 * ht);
                let centre = nl.phi(w(&x, t));
                let mut lap = 0.0;
                for axis in 0..spec.dim {
                    let (mut a, mut b) = (x, x);
                    a[axis] += hx;
                    b[axis] -= hx;
                    lap += (nl.phi(w(&a, t)) - 2.0 * centre + nl.phi(w(&b, t))) / (hx * hx);
                }
                let r = (w_t - lap) * t;
                report.samples += 1;
                if r >= 0.0 {
                    report.nonnegative += 1;
                }
                report.max_scaled_residual = report.max_scaled_residual.max(r);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_examples() {
        let (h0, hh0) = default_initial_data(1.0f64, 1.0).unwrap();
        assert!((h0 - 0.25).abs() < 1e-15);
        assert!((hh0 + 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        let (h0, hh0) = default_initial_data(3.0f64, 3.0).unwrap();
        assert!((h0 - 0.25).abs() < 1e-15);
        assert!((hh0 + 3f64.sqrt() / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-14);
        assert!(default_initial_data(1.0f64, 0.5).is_err());
    }

    #[test]
    fn short_half_width_rejected() {
        let nl = Nonlinearity::<f64>::identity();
        assert!(matches!(solve_barrier_ode(&nl, 0.25, -0.2, 2.0, 1e-10), Err(Error::Config(_))));
    }
}

#[cfg(test)]
mod linear_case {
    use super::*;
    use statrs::function::erf::erf;

    #[test]
    fn matches_erf_profile_and_shift_sweep() {
        let nl = Nonlinearity::<f64>::identity();
        let (h0, hh0) = default_initial_data(1.0, 1.0).unwrap();
        let bs = solve_barrier_ode(&nl, h0, hh0, 12.0, 1e-10).unwrap();
        assert!(bs.checks.passed(), "{:?}", bs.checks);
        for (x, v) in bs.xi.iter().zip(&bs.h) {
            assert!((v - (0.25 - 0.5 * erf(x / 2.0))).abs() < 1e-8);
        }
        assert!((bs.limits.plus + 0.25).abs() < 1e-8);
        assert!((bs.limits.minus - 0.75).abs() < 1e-8);
        assert_eq!(bs.delta_shift, 0.125);
        assert!((bs.c0() - (0.25 - 0.5 * erf(0.125))).abs() < 1e-8);
    }
}
