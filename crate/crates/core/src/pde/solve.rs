use serde::{Deserialize, Serialize};

use super::cartesian::solve_lattice;
use super::problem::{ProblemSpec, Setup, SolverOptions};
use super::radial::solve_radial_spec;
use super::series::FieldSeries;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::nonlinearity::Nonlinearity;

fn radial_capable(ps: &ProblemSpec) -> bool {
    let constant = match &ps.setup {
        Setup::DirichletFn { profiles } => profiles.iter().all(|p| p.is_constant()),
        _ => true,
    };
    constant && ps.domain.radial_structure().is_some()
}

fn dispatch(ps: &ProblemSpec, opts: &SolverOptions) -> Result<FieldSeries> {
    if radial_capable(ps) && !(opts.force_lattice && ps.domain.dim == 2) {
        solve_radial_spec(ps, opts)
    } else if ps.domain.dim == 2 {
        solve_lattice(ps, opts)
    } else {
        Err(Error::Unsupported(format!(
            "{}D domains are solved on radial grids only (concentric balls with constant boundary data)",
            ps.domain.dim
        )))
    }
}

/// Dirichlet problem `u_t = Δφ(u)` in Ω, `u = f` on ∂Ω, `u(·,0) = 0`.
pub fn solve_dirichlet(ps: &ProblemSpec, opts: &SolverOptions) -> Result<FieldSeries> {
    if !ps.setup.is_dirichlet() {
        return Err(Error::Config("solve_dirichlet needs a dirichlet_const or dirichlet_fn setup".into()));
    }
    dispatch(ps, opts)
}

/// Whole-space problem with `u(·,0)` the indicator of ℝᴺ∖Ω.
pub fn solve_cauchy(ps: &ProblemSpec, opts: &SolverOptions) -> Result<FieldSeries> {
    if ps.setup.is_dirichlet() {
        return Err(Error::Config("solve_cauchy needs the cauchy_indicator setup".into()));
    }
    dispatch(ps, opts)
}

/// Linear heat problem `w_t = δ Δw` in Ω with `w = boundary_value` on ∂Ω
/// and zero initial data. The domain, times and truncation come from `ps`;
/// its nonlinearity and setup are ignored.
pub fn solve_linear_heat(
    ps: &ProblemSpec,
    diffusivity: f64,
    boundary_value: f64,
    opts: &SolverOptions,
) -> Result<FieldSeries> {
    if !(diffusivity > 0.0) {
        return Err(Error::Config(format!("diffusivity must be positive, got {diffusivity}")));
    }
    let mut heat = ProblemSpec {
        domain: ps.domain.clone(),
        nonlinearity: Nonlinearity::linear(diffusivity)?,
        setup: Setup::DirichletConst { value: boundary_value },
        t_end: ps.t_end,
        snapshot_times: ps.snapshot_times.clone(),
        truncation_radius: None,
    };
    // The heat-reach margin scales with this problem's diffusivity.
    heat.truncation_radius = Some(ps.truncation().max(heat.truncation()));
    heat.validate()?;
    solve_dirichlet(&heat, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest of `φ(u) − w₁` and `w₂ − φ(u)` over all checked nodes.
    pub worst_margin: f64,
    /// `(t, point)` where the worst margin occurs.
    pub location: Option<(f64, Point<f64>)>,
    pub tol: f64,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `w₁ ≤ φ(u) ≤ w₂` nodewise (up to `tol`) at every snapshot and
/// in-domain node.
pub fn sandwich_check(
    u: &FieldSeries,
    nl: &Nonlinearity<f64>,
    w1: &FieldSeries,
    w2: &FieldSeries,
    tol: f64,
) -> Result<SandwichReport> {
    let n = u.snapshots.len();
    if w1.snapshots.len() != n || w2.snapshots.len() != n {
        return Err(Error::Shape(format!(
            "snapshot counts differ: u {n}, w1 {}, w2 {}",
            w1.snapshots.len(),
            w2.snapshots.len()
        )));
    }
    let mut report = SandwichReport { checked: 0, violations: 0, worst_margin: f64::INFINITY, location: None, tol };
    for k in 0..n {
        let (s, a, b) = (&u.snapshots[k], &w1.snapshots[k], &w2.snapshots[k]);
        if (s.t - a.t).abs() > 1e-12 * s.t || (s.t - b.t).abs() > 1e-12 * s.t {
            return Err(Error::Shape(format!("snapshot {k} times differ: {} / {} / {}", s.t, a.t, b.t)));
        }
        if s.field.grid != a.field.grid || s.field.grid != b.field.grid {
            return Err(Error::Shape(format!("snapshot {k}: the three series live on different grids")));
        }
        for i in 0..s.field.values.len() {
            if !s.field.mask[i].in_domain() {
                continue;
            }
            let w = nl.phi(s.field.values[i]);
            let margin = (w - a.field.values[i]).min(b.field.values[i] - w);
            report.checked += 1;
            if margin < -tol {
                report.violations += 1;
            }
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.location = Some((s.t, s.field.grid.point(i)));
            }
        }
    }
    Ok(report)
}
