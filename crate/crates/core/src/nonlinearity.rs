//! Admissible diffusion nonlinearities `φ` and the logarithmic transforms
//! `Φ(s) = ∫₁ˢ φ′(ξ)/ξ dξ` and `Ψ = Φ⁻¹`.
//!
//! A nonlinearity carries declared bounds `δ₁ ≤ φ′ ≤ δ₂`; they are the
//! contract used everywhere else (brackets for `Ψ`, barrier envelopes,
//! comparison problems) and are checked by sampling with
//! [`Nonlinearity::validate_bounds`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, gauss_legendre};
use crate::roots::bracketed_root;
use crate::scalar::Real;

type Map<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied maps for a nonlinearity outside the built-in families.
#[derive(Clone)]
pub struct CustomMaps<T> {
    pub label: String,
    pub phi: Map<T>,
    pub dphi: Map<T>,
    /// `φ″`; finite differences of `dphi` are used when absent.
    pub d2phi: Option<Map<T>>,
    /// Closed form of `Φ`, used instead of quadrature when present.
    pub big_phi: Option<Map<T>>,
}

#[derive(Clone)]
pub enum Family<T> {
    /// `φ(s) = c·s`.
    Linear { slope: T },
    /// `φ(s) = s + a·sin s`.
    SinPerturbed { amplitude: T },
    /// `φ(s) = s + a·tanh s`.
    TanhBlend { amplitude: T },
    Custom(CustomMaps<T>),
}

impl<T: Real> fmt::Debug for Family<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Linear { slope } => write!(f, "Linear {{ slope: {slope} }}"),
            Family::SinPerturbed { amplitude } => write!(f, "SinPerturbed {{ amplitude: {amplitude} }}"),
            Family::TanhBlend { amplitude } => write!(f, "TanhBlend {{ amplitude: {amplitude} }}"),
            Family::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

/// A nonlinearity `φ` with `φ(0) = 0` and declared bounds `δ₁ ≤ φ′ ≤ δ₂`.
#[derive(Clone)]
pub struct Nonlinearity<T> {
    family: Family<T>,
    delta1: T,
    delta2: T,
}

impl<T: Real> fmt::Debug for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("family", &self.family)
            .field("delta1", &self.delta1)
            .field("delta2", &self.delta2)
            .finish()
    }
}

/// Exponent range (in `log s`) searched when bracketing `Ψ`.
const MAX_LOG_EXPONENT: f64 = 1.0e6;

impl<T: Real> Nonlinearity<T> {
    fn build(family: Family<T>, delta1: T, delta2: T) -> Result<Self> {
        if !(delta1 > T::zero()) || !delta1.is_finite() {
            return Err(Error::Config(format!("delta1 must be positive, got {delta1}")));
        }
        if !(delta1 <= delta2) || !delta2.is_finite() {
            return Err(Error::Config(format!("need delta1 <= delta2, got {delta1} > {delta2}")));
        }
        let nl = Self { family, delta1, delta2 };
        let at_zero = nl.phi(T::zero());
        if at_zero != T::zero() {
            return Err(Error::Config(format!("phi(0) must be exactly 0, got {at_zero}")));
        }
        Ok(nl)
    }

    /// The identity `φ(s) = s` (the classical heat equation).
    pub fn identity() -> Self {
        Self::linear(T::one()).expect("slope 1 is admissible")
    }

    pub fn linear(slope: T) -> Result<Self> {
        Self::build(Family::Linear { slope }, slope, slope)
    }

    /// `φ(s) = s + a sin s` with user-declared bounds.
    pub fn sin_perturbed(amplitude: T, delta1: T, delta2: T) -> Result<Self> {
        Self::build(Family::SinPerturbed { amplitude }, delta1, delta2)
    }

    /// `φ(s) = s + a tanh s` with user-declared bounds.
    pub fn tanh_blend(amplitude: T, delta1: T, delta2: T) -> Result<Self> {
        Self::build(Family::TanhBlend { amplitude }, delta1, delta2)
    }

    pub fn custom(maps: CustomMaps<T>, delta1: T, delta2: T) -> Result<Self> {
        Self::build(Family::Custom(maps), delta1, delta2)
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn delta1(&self) -> T {
        self.delta1
    }

    pub fn delta2(&self) -> T {
        self.delta2
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Linear { .. } => "linear".into(),
            Family::SinPerturbed { .. } => "sin-perturbed".into(),
            Family::TanhBlend { .. } => "tanh-blend".into(),
            Family::Custom(c) => c.label.clone(),
        }
    }

    /// True when `φ` is linear, i.e. the equation is the heat equation.
    pub fn is_linear(&self) -> bool {
        matches!(self.family, Family::Linear { .. })
    }

    pub fn phi(&self, s: T) -> T {
        match &self.family {
            Family::Linear { slope } => *slope * s,
            Family::SinPerturbed { amplitude } => s + *amplitude * s.sin(),
            Family::TanhBlend { amplitude } => s + *amplitude * s.tanh(),
            Family::Custom(c) => (c.phi)(s),
        }
    }

    pub fn dphi(&self, s: T) -> T {
        match &self.family {
            Family::Linear { slope } => *slope,
            Family::SinPerturbed { amplitude } => T::one() + *amplitude * s.cos(),
            Family::TanhBlend { amplitude } => {
                let sech = T::one() / s.cosh();
                T::one() + *amplitude * sech * sech
            }
            Family::Custom(c) => (c.dphi)(s),
        }
    }

    pub fn d2phi(&self, s: T) -> T {
        match &self.family {
            Family::Linear { .. } => T::zero(),
            Family::SinPerturbed { amplitude } => -*amplitude * s.sin(),
            Family::TanhBlend { amplitude } => {
                let sech = T::one() / s.cosh();
                -T::two() * *amplitude * sech * sech * s.tanh()
            }
            Family::Custom(c) => match &c.d2phi {
                Some(f) => f(s),
                None => {
                    let h = T::lit(1e-5) * (T::one() + s.abs());
                    ((c.dphi)(s + h) - (c.dphi)(s - h)) / (T::two() * h)
                }
            },
        }
    }

    /// `Φ(s) = ∫₁ˢ φ′(ξ)/ξ dξ` for `s > 0`, to absolute tolerance `tol`.
    pub fn big_phi(&self, s: T, tol: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(Error::Domain(format!("Phi requires s > 0, got {s}")));
        }
        self.big_phi_of_log(s.ln(), tol)
    }

    /// `Φ(e^σ)`, defined for every real `σ`; the form used when `s` itself
    /// would underflow.
    ///
    /// With `ξ = e^τ` the integral becomes `∫₀^σ φ′(e^τ) dτ`. The constant
    /// part `φ′(0)·σ` is taken analytically and only the decaying remainder
    /// `∫₀^σ (φ′(e^τ) − φ′(0)) dτ` is integrated numerically.
    pub fn big_phi_of_log(&self, sigma: T, tol: T) -> Result<T> {
        if !sigma.is_finite() {
            return Err(Error::Domain(format!("log argument must be finite, got {sigma}")));
        }
        match &self.family {
            Family::Linear { slope } => return Ok(*slope * sigma),
            Family::Custom(CustomMaps { big_phi: Some(f), .. }) if sigma.exp() > T::zero() => {
                return Ok(f(sigma.exp()));
            }
            _ => {}
        }
        let base = self.dphi(T::zero());
        let remainder = |tau: T| self.dphi(tau.exp()) - base;
        // Beyond τ ≈ -40 the remainder is below 1e-17·|φ″|, so the tail is cut.
        let cutoff = T::lit(-40.0);
        let lower = if sigma < cutoff { cutoff } else { sigma };
        let correction = adaptive_simpson(remainder, T::zero(), lower, tol)?;
        Ok(base * sigma + correction)
    }

    /// `Ψ(y) = Φ⁻¹(y)`, the unique `s > 0` with `Φ(s) = y`.
    ///
    /// Fails with a numeric error if the value is not representable.
    pub fn big_psi(&self, y: T, tol: T) -> Result<T> {
        let sigma = self.big_psi_log(y, tol)?;
        let s = sigma.exp();
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::Numeric(format!(
                "Psi({y}) = exp({sigma}) is not representable in this scalar type"
            )));
        }
        Ok(s)
    }

    /// `log Ψ(y)`; never underflows.
    ///
    /// The bracket comes from `δ₁ log s ≤ Φ(s) ≤ δ₂ log s` for `s ≥ 1`
    /// (reversed for `s ≤ 1`), so `log Ψ(y)` lies between `y/δ₁` and `y/δ₂`.
    pub fn big_psi_log(&self, y: T, tol: T) -> Result<T> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("Psi argument must be finite, got {y}")));
        }
        if let Family::Linear { slope } = &self.family {
            return Ok(y / *slope);
        }
        let a = y / self.delta1;
        let b = y / self.delta2;
        let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
        let quad_tol = tol * T::lit(0.1);
        let g = |sigma: T| -> Result<T> { Ok(self.big_phi_of_log(sigma, quad_tol)? - y) };
        // Widen if the declared bounds turned out to be wrong.
        let max_exp = T::lit(MAX_LOG_EXPONENT);
        let mut glo = g(lo)?;
        let mut ghi = g(hi)?;
        let mut widen = T::one();
        while glo > T::zero() || ghi < T::zero() {
            if glo > T::zero() {
                lo = lo - widen;
            }
            if ghi < T::zero() {
                hi = hi + widen;
            }
            widen = widen * T::two();
            if lo < -max_exp || hi > max_exp {
                return Err(Error::Numeric(format!(
                    "failed to bracket Psi({y}) within log-range ±{max_exp}: \
                     Phi(e^{lo}) - y = {glo}, Phi(e^{hi}) - y = {ghi}; check declared delta bounds"
                )));
            }
            glo = g(lo)?;
            ghi = g(hi)?;
        }
        if glo == T::zero() {
            return Ok(lo);
        }
        if ghi == T::zero() {
            return Ok(hi);
        }
        // |Φ′(σ-form)| ≤ δ₂, so a σ-tolerance of tol/δ₂ meets the y-tolerance.
        let xtol = (tol / self.delta2) * T::lit(0.5);
        let mut err = None;
        let root = bracketed_root(
            |s| match g(s) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    T::nan()
                }
            },
            lo,
            hi,
            xtol,
            400,
        );
        if let Some(e) = err {
            return Err(e);
        }
        root
    }

    /// Checks the declared bounds by sampling, returning every violation.
    ///
    /// Chains checked:
    /// * derivative: `δ₁ ≤ φ′(s) ≤ δ₂` on `range`;
    /// * linear growth: `δ₁ s ≤ φ(s) ≤ δ₂ s` on `range ∩ [0, ∞)`;
    /// * logarithm: `−δ₁ log s ≤ −Φ(s) ≤ −δ₂ log s` on `(0, 1]`;
    /// * exponential: `e^{y/δ₁} ≤ Ψ(y) ≤ e^{y/δ₂}` on `y ∈ [−10, 0]`.
    pub fn validate_bounds(&self, range: (T, T), n: usize) -> Result<BoundsReport> {
        if n < 2 {
            return Err(Error::Config(format!("validate_bounds needs n >= 2, got {n}")));
        }
        let (lo, hi) = range;
        if !(lo < hi) {
            return Err(Error::Config(format!("empty sample range [{lo}, {hi}]")));
        }
        let d1 = self.delta1.to_f64_lossy();
        let d2 = self.delta2.to_f64_lossy();
        let mut violations = Vec::new();
        let slack = |v: f64| 1e-9 * (1.0 + v.abs());
        let mut push = |chain: BoundChain, at: f64, lower: f64, value: f64, upper: f64| {
            if value < lower - slack(lower) || value > upper + slack(upper) {
                violations.push(BoundViolation { chain, at, lower, value, upper });
            }
        };
        let step = (hi - lo) / T::from_usize(n - 1).unwrap();
        for k in 0..n {
            let s = lo + step * T::from_usize(k).unwrap();
            let sf = s.to_f64_lossy();
            push(BoundChain::Derivative, sf, d1, self.dphi(s).to_f64_lossy(), d2);
            if s >= T::zero() {
                push(BoundChain::LinearGrowth, sf, d1 * sf, self.phi(s).to_f64_lossy(), d2 * sf);
            }
        }
        let tol = T::lit(1e-12);
        for k in 0..n {
            // log-spaced in (0, 1]: s = 10^{-6 (1 - k/(n-1))}
            let frac = k as f64 / (n - 1) as f64;
            let sf = 10f64.powf(-6.0 * (1.0 - frac));
            let s = T::lit(sf);
            let neg_phi = -self.big_phi(s, tol)?.to_f64_lossy();
            let ls = sf.ln();
            push(BoundChain::Logarithm, sf, -d1 * ls, neg_phi, -d2 * ls);
        }
        for k in 0..n {
            let y = -10.0 + 10.0 * k as f64 / (n - 1) as f64;
            let psi = self.big_psi(T::lit(y), tol)?.to_f64_lossy();
            push(BoundChain::Exponential, y, (y / d1).exp(), psi, (y / d2).exp());
        }
        Ok(BoundsReport { samples: n, violations })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundChain {
    Derivative,
    LinearGrowth,
    Logarithm,
    Exponential,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundViolation {
    pub chain: BoundChain,
    /// Sample location (`s`, or `y` for the exponential chain).
    pub at: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsReport {
    pub samples: usize,
    pub violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Serializable description used by experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    /// `linear`, `sin-perturbed` or `tanh-blend`.
    pub name: String,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    pub delta1: f64,
    pub delta2: f64,
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity<f64>> {
        match self.name.as_str() {
            "linear" => {
                let slope = self.slope.unwrap_or(self.delta1);
                if (slope - self.delta1).abs() > 0.0 || (slope - self.delta2).abs() > 0.0 {
                    return Err(Error::Config(format!(
                        "nonlinearity.delta1/delta2 must equal the slope {slope} for `linear`"
                    )));
                }
                Nonlinearity::linear(slope)
            }
            "sin-perturbed" => Nonlinearity::sin_perturbed(self.amplitude.unwrap_or(0.25), self.delta1, self.delta2),
            "tanh-blend" => Nonlinearity::tanh_blend(self.amplitude.unwrap_or(0.2), self.delta1, self.delta2),
            other => Err(Error::Config(format!(
                "nonlinearity.name: unknown family `{other}` (expected linear, sin-perturbed, tanh-blend)"
            ))),
        }
    }
}

/// Tabulated `G(σ) = Φ(e^σ)` on a uniform grid in `σ = log s`, interpolated
/// by cubic Hermite splines with the exact slopes `G′(σ) = φ′(e^σ)`.
///
/// This is the fast path for solver inner loops; [`Nonlinearity::big_phi`]
/// stays the reference.
#[derive(Clone, Debug)]
pub struct TransformTable {
    sigma_min: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    left_slope: f64,
    nl: Nonlinearity<f64>,
}

impl TransformTable {
    /// Interpolation order of the Hermite scheme.
    pub const INTERPOLATION_ORDER: usize = 3;

    /// Builds a table over `σ ∈ [sigma_min, sigma_max]` (σ = 0 is always a node).
    pub fn new(nl: &Nonlinearity<f64>, sigma_min: f64, sigma_max: f64, step: f64) -> Result<Self> {
        if !(sigma_min < 0.0 && sigma_max > 0.0 && step > 0.0) {
            return Err(Error::Config("transform table needs sigma_min < 0 < sigma_max and step > 0".into()));
        }
        let n_left = (-sigma_min / step).ceil() as usize;
        let n_right = (sigma_max / step).ceil() as usize;
        let sigma_min = -(n_left as f64) * step;
        let n = n_left + n_right + 1;
        let mut values = vec![0.0; n];
        let slopes: Vec<f64> = (0..n).map(|k| nl.dphi((sigma_min + k as f64 * step).exp())).collect();
        let seg = |a: f64, b: f64| gauss_legendre(|tau: f64| nl.dphi(tau.exp()), a, b, 1);
        for k in n_left + 1..n {
            let a = sigma_min + (k - 1) as f64 * step;
            values[k] = values[k - 1] + seg(a, a + step);
        }
        for k in (0..n_left).rev() {
            let b = sigma_min + (k + 1) as f64 * step;
            values[k] = values[k + 1] - seg(b - step, b);
        }
        let table = Self { sigma_min, step, values, slopes, left_slope: nl.dphi(0.0), nl: nl.clone() };
        if table.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Numeric("tabulated Phi is not strictly increasing".into()));
        }
        Ok(table)
    }

    /// Default table for solver use: `σ ∈ [−60, 8]`, step `2⁻⁸`.
    pub fn for_solver(nl: &Nonlinearity<f64>) -> Result<Self> {
        Self::new(nl, -60.0, 8.0, 1.0 / 256.0)
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<f64> {
        &self.nl
    }

    /// Node positions in `s` (ascending, positive).
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| (self.sigma_min + k as f64 * self.step).exp()).collect()
    }

    pub fn big_phi_values(&self) -> &[f64] {
        &self.values
    }

    fn sigma_max(&self) -> f64 {
        self.sigma_min + (self.values.len() - 1) as f64 * self.step
    }

    /// `Φ(e^σ)` and its derivative `φ′(e^σ)`.
    pub fn big_phi_of_log(&self, sigma: f64) -> (f64, f64) {
        if self.nl.is_linear() {
            return (self.left_slope * sigma, self.left_slope);
        }
        if sigma <= self.sigma_min {
            // Remainder beyond the table is O(e^σ_min): negligible.
            return (self.values[0] + self.left_slope * (sigma - self.sigma_min), self.left_slope);
        }
        let top = self.sigma_max();
        if sigma >= top {
            let last = *self.values.last().unwrap();
            let tail = gauss_legendre(|tau: f64| self.nl.dphi(tau.exp()), top, sigma, 4);
            return (last + tail, self.nl.dphi(sigma.exp()));
        }
        let x = (sigma - self.sigma_min) / self.step;
        let k = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.step, self.slopes[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / self.step;
        (value, dv)
    }

    /// `log Ψ(y)` by safeguarded Newton on the table.
    pub fn big_psi_log(&self, y: f64) -> f64 {
        if self.nl.is_linear() {
            return y / self.left_slope;
        }
        let d1 = self.nl.delta1();
        let d2 = self.nl.delta2();
        let (mut lo, mut hi) = {
            let (a, b) = (y / d1, y / d2);
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        };
        let mut s = y / self.left_slope;
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        for _ in 0..100 {
            let (g, dg) = self.big_phi_of_log(s);
            let r = g - y;
            if r == 0.0 {
                return s;
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - r / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                return next;
            }
            s = next;
        }
        s
    }

    /// `Φ(s)`; `s` must be positive.
    pub fn big_phi(&self, s: f64) -> f64 {
        self.big_phi_of_log(s.ln()).0
    }

    pub fn big_psi(&self, y: f64) -> f64 {
        self.big_psi_log(y).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinp() -> Nonlinearity<f64> {
        Nonlinearity::sin_perturbed(0.25, 0.75, 1.25).unwrap()
    }

    #[test]
    fn eval_phi_examples() {
        let id = Nonlinearity::<f64>::identity();
        assert_eq!(id.phi(0.5), 0.5);
        assert_eq!(id.phi(0.0), 0.0);
        assert!((sinp().phi(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn big_phi_identity_is_log() {
        let id = Nonlinearity::<f64>::identity();
        assert!((id.big_phi(std::f64::consts::E, 1e-12).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(sinp().big_phi(1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn big_phi_rejects_nonpositive() {
        assert!(matches!(sinp().big_phi(0.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(sinp().big_phi(-1.0, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn big_psi_identity() {
        let id = Nonlinearity::<f64>::identity();
        assert_eq!(id.big_psi(0.0, 1e-12).unwrap(), 1.0);
        assert!((id.big_psi(-1.0, 1e-12).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn invalid_construction() {
        assert!(Nonlinearity::sin_perturbed(0.25, 0.0, 1.25).is_err());
        assert!(Nonlinearity::sin_perturbed(0.25, 1.3, 1.25).is_err());
        let shifted = CustomMaps {
            label: "shifted".into(),
            phi: Arc::new(|s: f64| s + 1.0),
            dphi: Arc::new(|_| 1.0),
            d2phi: None,
            big_phi: None,
        };
        assert!(matches!(Nonlinearity::custom(shifted, 1.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn psi_bracket_failure_is_numeric_error() {
        // Declared bounds wildly wrong and a y that can't be reached in range.
        let lying = CustomMaps {
            label: "flat".into(),
            phi: Arc::new(|s: f64| 1e-300 * s),
            dphi: Arc::new(|_| 1e-300),
            d2phi: Some(Arc::new(|_| 0.0)),
            big_phi: None,
        };
        let nl = Nonlinearity::custom(lying, 1.0, 1.0).unwrap();
        assert!(matches!(nl.big_psi_log(-5.0, 1e-10), Err(Error::Numeric(_))));
    }

    #[test]
    fn validate_bounds_examples() {
        let id = Nonlinearity::<f64>::identity();
        assert!(id.validate_bounds((0.0, 10.0), 100).unwrap().passed());
        assert!(sinp().validate_bounds((0.0, 10.0), 1000).unwrap().passed());
        let wrong = Nonlinearity::sin_perturbed(0.25, 0.75, 1.0).unwrap();
        let rep = wrong.validate_bounds((0.0, 10.0), 1000).unwrap();
        assert!(!rep.passed());
        let first_derivative = rep.violations.iter().find(|v| v.chain == BoundChain::Derivative).unwrap();
        assert!(first_derivative.at < 0.1, "first violation at {}", first_derivative.at);
        assert!(matches!(id.validate_bounds((0.0, 1.0), 1), Err(Error::Config(_))));
    }

    #[test]
    fn tanh_bounds_hold() {
        let nl = Nonlinearity::tanh_blend(0.2, 1.0, 1.2).unwrap();
        assert!(nl.validate_bounds((-5.0, 5.0), 400).unwrap().passed());
    }

    #[test]
    fn table_matches_reference() {
        let nl = sinp();
        let table = TransformTable::for_solver(&nl).unwrap();
        for &s in &[1e-12, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let reference = nl.big_phi(s, 1e-13).unwrap();
            assert!((table.big_phi(s) - reference).abs() < 1e-10, "s = {s}");
        }
        for &y in &[-700.0, -20.0, -0.8, 0.0, 1.5] {
            let reference = nl.big_psi_log(y, 1e-13).unwrap();
            assert!((table.big_psi_log(y) - reference).abs() < 1e-9, "y = {y}");
        }
        let nodes = table.nodes();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let one = nodes.iter().position(|&s| s == 1.0).unwrap();
        assert_eq!(table.big_phi_values()[one], 0.0);
    }

    #[test]
    fn generic_over_f32() {
        let nl = Nonlinearity::<f32>::sin_perturbed(0.25, 0.75, 1.25).unwrap();
        let v = nl.big_phi(2.0, 1e-5).unwrap();
        let w = sinp().big_phi(2.0, 1e-12).unwrap();
        assert!((v as f64 - w).abs() < 1e-4);
        let s = nl.big_psi(-0.8, 1e-5).unwrap();
        assert!((nl.big_phi(s, 1e-6).unwrap() + 0.8).abs() < 1e-4);
    }

    #[test]
    fn spec_parsing() {
        let spec: NonlinearitySpec =
            serde_json::from_str(r#"{"name":"sin-perturbed","amplitude":0.25,"delta1":0.75,"delta2":1.25}"#).unwrap();
        assert_eq!(spec.build().unwrap().name(), "sin-perturbed");
        let bad: NonlinearitySpec = serde_json::from_str(r#"{"name":"cubic","delta1":1,"delta2":1}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
