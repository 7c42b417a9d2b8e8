use serde::{Deserialize, Serialize};

use super::mesh::MeshOptions;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};
use crate::nonlinearity::Nonlinearity;

/// Boundary value `base + amplitude·cos(mode·θ)` on one boundary component,
/// with θ the polar angle about the component's center (2D lattices only
/// when the amplitude is nonzero).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub mode: u32,
}

impl BoundaryProfile {
    pub fn constant(value: f64) -> Self {
        BoundaryProfile { base: value, amplitude: 0.0, mode: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude == 0.0 || self.mode == 0
    }

    pub fn bounds(&self) -> (f64, f64) {
        if self.mode == 0 {
            let v = self.base + self.amplitude;
            (v, v)
        } else {
            (self.base - self.amplitude.abs(), self.base + self.amplitude.abs())
        }
    }

    pub fn value_at(&self, p: &Point<f64>, center: &Point<f64>) -> f64 {
        if self.mode == 0 {
            return self.base + self.amplitude;
        }
        let th = (p[1] - center[1]).atan2(p[0] - center[0]);
        self.base + self.amplitude * (self.mode as f64 * th).cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Setup {
    /// `u = value` on ∂Ω, `u = 0` initially.
    DirichletConst { value: f64 },
    /// One boundary profile per primitive, each bounded in `[b₁, b₂] ⊂ (0, ∞)`.
    DirichletFn { profiles: Vec<BoundaryProfile> },
    /// Whole-space problem with `u(·, 0)` the indicator of the complement of Ω.
    CauchyIndicator,
}

impl Setup {
    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, Setup::CauchyIndicator)
    }

    /// Profile imposed on boundary component `j`.
    pub fn profile(&self, j: usize) -> Option<BoundaryProfile> {
        match self {
            Setup::DirichletConst { value } => Some(BoundaryProfile::constant(*value)),
            Setup::DirichletFn { profiles } => profiles.get(j).copied(),
            Setup::CauchyIndicator => None,
        }
    }

    /// Largest boundary value (1 for the Cauchy problem).
    pub fn upper_value(&self) -> f64 {
        match self {
            Setup::DirichletConst { value } => *value,
            Setup::DirichletFn { profiles } => profiles.iter().map(|p| p.bounds().1).fold(f64::MIN, f64::max),
            Setup::CauchyIndicator => 1.0,
        }
    }
}

/// Time-step schedule: `dt0` first, then `dt ← min(growth·dt, dt_max)`,
/// optionally also capped at `max(max_rel·t, dt0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtPolicy {
    pub dt0: f64,
    pub growth: f64,
    pub dt_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rel: Option<f64>,
}

impl DtPolicy {
    /// `dt0 = min(1e−4, t_first/20)`, growth 1.2, cap 1e−2.
    pub fn standard(t_first: f64) -> Self {
        DtPolicy { dt0: (1e-4f64).min(t_first / 20.0), growth: 1.2, dt_max: 1e-2, max_rel: None }
    }

    /// Steps never exceeding `rel·t` (after a tiny start-up step): the
    /// log-domain solver path uses `rel = 2e−3`.
    pub fn relative(t_first: f64, rel: f64) -> Self {
        DtPolicy { dt0: (rel * t_first * 1e-2).min(1e-6), growth: 1.2, dt_max: 1e-2, max_rel: Some(rel) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt0 > 0.0 && self.growth >= 1.0 && self.dt_max >= self.dt0) {
            return Err(Error::Config(format!(
                "dt policy needs dt0 > 0, growth >= 1, dt_max >= dt0 (got {:?})",
                self
            )));
        }
        if let Some(r) = self.max_rel {
            if !(r > 0.0) {
                return Err(Error::Config("dt policy max_rel must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn next(&self, prev: Option<f64>, t: f64) -> f64 {
        let mut dt = prev.map(|p| p * self.growth).unwrap_or(self.dt0).min(self.dt_max);
        if let Some(rel) = self.max_rel {
            dt = dt.min((rel * t).max(self.dt0));
        }
        dt
    }
}

/// Unknown used by the implicit stepper.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Solve for `u` directly.
    Density,
    /// Solve for the pressure `q = −Φ(u)`, which stays O(d²/t) where `u`
    /// underflows (radial grids only).
    Pressure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub mesh: MeshOptions,
    pub dt: DtPolicy,
    pub formulation: Formulation,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton")]
    pub max_newton: usize,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
    /// Pressure assigned to `u = 0`; derived from the grid and first
    /// snapshot time when `None`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_cap: Option<f64>,
    /// Solve 2D concentric-ball domains on the lattice instead of a radial grid.
    #[serde(default)]
    pub force_lattice: bool,
}

fn default_newton_tol() -> f64 {
    1e-10
}
fn default_max_newton() -> usize {
    30
}
fn default_max_halvings() -> usize {
    20
}

impl SolverOptions {
    pub fn new(mesh: MeshOptions, dt: DtPolicy) -> Self {
        SolverOptions {
            mesh,
            dt,
            formulation: Formulation::Density,
            newton_tol: default_newton_tol(),
            max_newton: default_max_newton(),
            max_halvings: default_max_halvings(),
            pressure_cap: None,
            force_lattice: false,
        }
    }

    pub fn with_formulation(mut self, f: Formulation) -> Self {
        self.formulation = f;
        self
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub domain: DomainSpec<f64>,
    pub nonlinearity: Nonlinearity<f64>,
    pub setup: Setup,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Far-field cutoff for unbounded domains; derived from the heat-reach
    /// margin when `None`.
    pub truncation_radius: Option<f64>,
}

impl ProblemSpec {
    pub fn new(
        domain: DomainSpec<f64>,
        nonlinearity: Nonlinearity<f64>,
        setup: Setup,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        let t_end = snapshot_times.iter().copied().fold(0.0, f64::max);
        let ps = ProblemSpec { domain, nonlinearity, setup, t_end, snapshot_times, truncation_radius: None };
        ps.validate()?;
        Ok(ps)
    }

    pub fn with_truncation(mut self, radius: f64) -> Result<Self> {
        self.truncation_radius = Some(radius);
        self.validate()?;
        Ok(self)
    }

    /// Obstacle extent plus the heat-reach margin `6√(δ₂ t_end)`.
    pub fn minimal_truncation(&self) -> f64 {
        self.domain.bounding_radius() + 6.0 * (self.nonlinearity.delta2() * self.t_end).sqrt()
    }

    pub fn truncation(&self) -> f64 {
        self.truncation_radius.unwrap_or_else(|| {
            let r = self.minimal_truncation();
            r + 0.25 * (r - self.domain.bounding_radius()).max(1.0)
        })
    }

    pub fn first_time(&self) -> f64 {
        self.snapshot_times.first().copied().unwrap_or(self.t_end)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if self.snapshot_times.is_empty() {
            return Err(Error::Config("at least one snapshot time is required".into()));
        }
        if self.snapshot_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("snapshot_times must be strictly ascending".into()));
        }
        if self.snapshot_times.iter().any(|t| !(*t > 0.0 && *t <= self.t_end)) {
            return Err(Error::Config("snapshot_times must lie in (0, t_end]".into()));
        }
        if let Some(r) = self.truncation_radius {
            let need = self.minimal_truncation();
            if !(r > need) {
                return Err(Error::Config(format!(
                    "truncation_radius {r} must exceed obstacle extent plus 6*sqrt(delta2*t_end) = {need}"
                )));
            }
        }
        match &self.setup {
            Setup::DirichletFn { profiles } => {
                if profiles.len() != self.domain.primitives.len() {
                    return Err(Error::Config(format!(
                        "dirichlet_fn needs one profile per boundary component ({} given, {} components)",
                        profiles.len(),
                        self.domain.primitives.len()
                    )));
                }
                for p in profiles {
                    let (lo, hi) = p.bounds();
                    if !(lo > 0.0 && hi >= lo) {
                        return Err(Error::Config(format!(
                            "boundary data must satisfy 0 < b1 <= f <= b2 (got range [{lo}, {hi}])"
                        )));
                    }
                }
            }
            Setup::DirichletConst { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::Config(format!("boundary value must be finite and >= 0, got {value}")));
                }
            }
            Setup::CauchyIndicator => {}
        }
        Ok(())
    }
}
