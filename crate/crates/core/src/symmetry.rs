//! Detectors for the observable signatures of symmetry: level surfaces on
//! which `u` is constant in space, mirror comparisons, constancy of the
//! curvature product along ∂Ω and the balance law of linear heat flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::domain::directions;
use crate::geometry::{DomainSpec, Grid, Point, ScalarField};
use crate::nonlinearity::Nonlinearity;
use crate::pde::FieldSeries;

/// Interpolates `field` at `x`, failing if `x` is not in the masked-in
/// region of the grid.
fn sample_in_domain(field: &ScalarField, x: &Point<f64>) -> Result<f64> {
    let inside = match &field.grid {
        Grid::Cartesian(g) => {
            let mut idx = [0usize; 3];
            let mut ok = true;
            for a in 0..g.dim {
                let s = ((x[a] - g.origin[a]) / g.h).round();
                if s < 0.0 || s as usize >= g.shape[a] {
                    ok = false;
                    break;
                }
                idx[a] = s as usize;
            }
            ok && field.mask[g.index(idx[0], idx[1], idx[2])].in_domain()
        }
        Grid::Radial(_) => true,
    };
    match field.sample(x) {
        Some(v) if inside => Ok(v),
        _ => Err(Error::Geometry(format!("point {x:?} lies outside the solution's domain mask"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityScore {
    pub surface_points: Vec<Point<f64>>,
    pub times: Vec<f64>,
    pub per_time_std: Vec<f64>,
    /// `(max − min)/mean` of `u` over the surface, per snapshot.
    pub per_time_rel_spread: Vec<f64>,
    pub max_rel_spread: f64,
}

/// Spread of the interpolated solution over `surface` at every snapshot.
pub fn stationarity_test(series: &FieldSeries, surface: &[Point<f64>]) -> Result<StationarityScore> {
    if surface.is_empty() {
        return Err(Error::Config("surface has no points".into()));
    }
    let mut per_time_std = Vec::new();
    let mut per_time_rel_spread = Vec::new();
    for s in &series.snapshots {
        let vals = surface.iter().map(|p| sample_in_domain(&s.field, p)).collect::<Result<Vec<_>>>()?;
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        per_time_std.push(var.sqrt());
        per_time_rel_spread.push(if hi == lo { 0.0 } else { (hi - lo) / mean.abs() });
    }
    let max_rel_spread = per_time_rel_spread.iter().copied().fold(0.0, f64::max);
    Ok(StationarityScore {
        surface_points: surface.to_vec(),
        times: series.times(),
        per_time_std,
        per_time_rel_spread,
        max_rel_spread,
    })
}

/// Plane `x·ℓ = λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Point<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Point<f64>, offset: f64) -> Result<Self> {
        let n = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        if !(n > 0.0) {
            return Err(Error::Domain("plane normal must be nonzero".into()));
        }
        Ok(Plane { normal: [normal[0] / n, normal[1] / n, normal[2] / n], offset })
    }

    pub fn height(&self, x: &Point<f64>) -> f64 {
        x[0] * self.normal[0] + x[1] * self.normal[1] + x[2] * self.normal[2]
    }

    /// `x^λ = x + 2(λ − x·ℓ)ℓ`.
    pub fn reflect(&self, x: &Point<f64>) -> Point<f64> {
        let s = 2.0 * (self.offset - self.height(x));
        [x[0] + s * self.normal[0], x[1] + s * self.normal[1], x[2] + s * self.normal[2]]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionSnapshot {
    pub t: f64,
    pub min_diff: f64,
    pub max_abs_diff: f64,
    /// Cap points where `u − w ≤ 0`.
    pub nonpositive: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionReport {
    pub plane: Plane,
    pub cap_points: usize,
    pub snapshots: Vec<ReflectionSnapshot>,
    pub max_abs_diff: f64,
    pub min_diff: f64,
    pub tol: f64,
    /// `|u − w| ≤ tol` everywhere.
    pub symmetric: bool,
    /// `u − w > 0` everywhere on the cap.
    pub strictly_ordered: bool,
}

/// Cap points: grid nodes (or, on radial grids, a polar sampling of the
/// plane `x₃ = 0`) in Ω with `x·ℓ < λ`, `|x| ≤ max_radius`, whose mirror
/// image is also in Ω and at distance at least `gap` from ∂Ω.
fn cap_points(grid: &Grid, spec: &DomainSpec<f64>, plane: &Plane, max_radius: f64, gap: f64) -> Vec<Point<f64>> {
    let candidates: Vec<Point<f64>> = match grid {
        Grid::Cartesian(_) => (0..grid.len()).map(|i| grid.point(i)).collect(),
        Grid::Radial(g) => {
            let dirs: Vec<Point<f64>> = directions(g.dim, if g.dim == 1 { 2 } else { 64 });
            g.nodes
                .iter()
                .flat_map(|r| dirs.iter().map(move |d| [g.center[0] + r * d[0], g.center[1] + r * d[1], g.center[2] + r * d[2]]))
                .collect()
        }
    };
    candidates
        .into_iter()
        .filter(|x| {
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            plane.height(x) < plane.offset - 1e-12
                && norm <= max_radius
                && spec.signed_distance(x) > gap
                && spec.signed_distance(&plane.reflect(x)) > gap
        })
        .collect()
}

/// Compares `u` with its mirror image `w(x, t) = u(x^λ, t)` on the cap
/// `{x·ℓ < λ}` of Ω (see [`cap_points`] for the exact point set).
pub fn reflection_comparator(
    series: &FieldSeries,
    spec: &DomainSpec<f64>,
    plane: Plane,
    max_radius: f64,
    tol: f64,
) -> Result<ReflectionReport> {
    let grid = series.grid();
    let gap = 0.5 * grid.spacing();
    let cap = cap_points(grid, spec, &plane, max_radius, gap);
    if cap.is_empty() {
        return Err(Error::Geometry(format!("the cap of {plane:?} within radius {max_radius} is empty")));
    }
    let mut snapshots = Vec::new();
    for s in &series.snapshots {
        let mut snap = ReflectionSnapshot { t: s.t, min_diff: f64::INFINITY, max_abs_diff: 0.0, nonpositive: 0 };
        for x in &cap {
            let u = sample_in_domain(&s.field, x)?;
            let w = sample_in_domain(&s.field, &plane.reflect(x))?;
            let d = u - w;
            snap.min_diff = snap.min_diff.min(d);
            snap.max_abs_diff = snap.max_abs_diff.max(d.abs());
            if d <= 0.0 {
                snap.nonpositive += 1;
            }
        }
        snapshots.push(snap);
    }
    let max_abs_diff = snapshots.iter().map(|s| s.max_abs_diff).fold(0.0, f64::max);
    let min_diff = snapshots.iter().map(|s| s.min_diff).fold(f64::INFINITY, f64::min);
    Ok(ReflectionReport {
        plane,
        cap_points: cap.len(),
        max_abs_diff,
        min_diff,
        tol,
        symmetric: max_abs_diff <= tol,
        strictly_ordered: snapshots.iter().all(|s| s.nonpositive == 0),
        snapshots,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub offset: f64,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    /// `(max − min)/max`.
    pub rel_deviation: f64,
    pub tol: f64,
    pub sphere_consistent: bool,
}

/// Samples `∏(1/R − κ_j)` at `n` boundary points.
pub fn curvature_constancy(spec: &DomainSpec<f64>, r: f64, n: usize, tol: f64) -> Result<CurvatureReport> {
    let samples = spec.boundary_samples(n)?;
    if samples.is_empty() {
        return Err(Error::Config("need at least one boundary sample".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, p) in &samples {
        let v = spec.curvature_product(p, r)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let rel_deviation = if hi == lo { 0.0 } else { (hi - lo) / hi.abs() };
    Ok(CurvatureReport {
        offset: r,
        samples: samples.len(),
        min: lo,
        max: hi,
        rel_deviation,
        tol,
        sphere_consistent: rel_deviation <= tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceEntry {
    pub t: f64,
    pub r: f64,
    pub moment: Point<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceReport {
    pub center: Point<f64>,
    pub quadrature_points: usize,
    pub entries: Vec<BalanceEntry>,
    pub max_norm: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Nodes and weights for `∫_{∂B_r}` in dimension `dim`: the two endpoints
/// in 1D, the trapezoid rule in 2D, an equal-weight Fibonacci lattice in 3D.
fn sphere_rule(dim: usize, n: usize, r: f64) -> Vec<(Point<f64>, f64)> {
    let dirs: Vec<Point<f64>> = directions(dim, n);
    let area = match dim {
        1 => 2.0,
        2 => std::f64::consts::TAU * r,
        _ => 4.0 * std::f64::consts::PI * r * r,
    };
    let w = area / dirs.len() as f64;
    dirs.into_iter().map(|d| (d, w)).collect()
}

/// Vector moment `∫_{∂B_r(x₀)} (x − x₀) u dS` for each radius and snapshot.
/// Only meaningful for linear diffusion.
pub fn balance_law_check(
    series: &FieldSeries,
    nl: &Nonlinearity<f64>,
    center: Point<f64>,
    radii: &[f64],
    n: usize,
    tol: f64,
) -> Result<BalanceReport> {
    if !nl.is_linear() {
        return Err(Error::Unsupported("the balance law holds for linear diffusion only".into()));
    }
    let dim = series.grid().dim();
    let mut entries = Vec::new();
    for s in &series.snapshots {
        for &r in radii {
            let mut m = [0.0; 3];
            if r > 0.0 {
                for (d, w) in sphere_rule(dim, n, r) {
                    let x = [center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]];
                    let u = sample_in_domain(&s.field, &x)?;
                    for a in 0..3 {
                        m[a] += w * r * d[a] * u;
                    }
                }
            }
            let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            entries.push(BalanceEntry { t: s.t, r, moment: m, norm });
        }
    }
    let max_norm = entries.iter().map(|e| e.norm).fold(0.0, f64::max);
    Ok(BalanceReport { center, quadrature_points: n, entries, max_norm, tol, pass: max_norm <= tol })
}
