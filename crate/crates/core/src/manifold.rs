//! Heat flow on the round sphere 𝕊ᴺ and on hyperbolic space ℍᴺ for
//! pole-centered geodesic balls and annuli, reduced to radial
//! Laplace–Beltrami solves.
//!
//! Points live in ℝᴺ⁺¹ with the pole at `(0, …, 0, 1)`: unit vectors for
//! the sphere, the upper sheet of `⟨x, x⟩ = −1` for the hyperboloid, where
//! `⟨x, y⟩ = x₀y₀ + … + x_{N−1}y_{N−1} − x_N y_N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{convergence_report, varadhan_snapshot, KSpec, VaradhanReport};
use crate::error::{Error, Result};
use crate::geometry::{Grid, NodeKind, Point, RadialGrid, RadialMetric, ScalarField};
use crate::nonlinearity::Nonlinearity;
use crate::pde::{solve_radial, DtPolicy, FieldSeries, MeshOptions, RadialEnd, RadialProblem, SolverOptions};
use crate::symmetry::{stationarity_test, StationarityScore};

const ON_MANIFOLD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sphere,
    Hyperbolic,
}

/// A model space of constant curvature `+1` (sphere) or `−1` (hyperbolic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub model: Model,
    pub dim: usize,
}

impl ManifoldSpec {
    pub fn new(model: Model, dim: usize) -> Result<Self> {
        let m = ManifoldSpec { model, dim };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("manifold dimension must be at least 2, got {}", self.dim)));
        }
        Ok(())
    }

    pub fn metric(&self) -> RadialMetric {
        match self.model {
            Model::Sphere => RadialMetric::Sphere,
            Model::Hyperbolic => RadialMetric::Hyperbolic,
        }
    }

    pub fn pole(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim + 1];
        p[self.dim] = 1.0;
        p
    }

    /// Ambient bilinear form: Euclidean for the sphere, Minkowski for ℍᴺ.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let space: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| a * b).sum();
        match self.model {
            Model::Sphere => space + x[n] * y[n],
            Model::Hyperbolic => space - x[n] * y[n],
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim + 1 {
            return Err(Error::Domain(format!("expected {} ambient coordinates, got {}", self.dim + 1, x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {x:?}")));
        }
        let q = self.inner(x, x);
        let scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
        let ok = match self.model {
            Model::Sphere => (q - 1.0).abs() <= ON_MANIFOLD_TOL * scale,
            Model::Hyperbolic => (q + 1.0).abs() <= ON_MANIFOLD_TOL * scale && x[self.dim] > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {x:?} is not on the {:?} model (form = {q})", self.model)))
        }
    }

    /// Geodesic distance; chord formulas keep small and near-antipodal
    /// distances accurate.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(match self.model {
            Model::Sphere => {
                if self.inner(x, y) >= 0.0 {
                    let c = self.inner(&diff, &diff).sqrt();
                    2.0 * (0.5 * c).min(1.0).asin()
                } else {
                    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                    let c = self.inner(&sum, &sum).sqrt();
                    PI - 2.0 * (0.5 * c).min(1.0).asin()
                }
            }
            Model::Hyperbolic => 2.0 * (0.5 * self.inner(&diff, &diff).max(0.0).sqrt()).asinh(),
        })
    }

    /// Exponential map at `base` applied to the tangent vector `v`.
    pub fn exp_map(&self, base: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(base)?;
        if v.len() != base.len() {
            return Err(Error::Domain("tangent vector has the wrong length".into()));
        }
        let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        if self.inner(base, v).abs() > ON_MANIFOLD_TOL * scale * base.iter().map(|a| a.abs()).sum::<f64>().max(1.0) {
            return Err(Error::Domain("vector is not tangent at the base point".into()));
        }
        let len = self.inner(v, v).max(0.0).sqrt();
        if len == 0.0 {
            return Ok(base.to_vec());
        }
        let (c, s) = match self.model {
            Model::Sphere => (len.cos(), len.sin()),
            Model::Hyperbolic => (len.cosh(), len.sinh()),
        };
        Ok(base.iter().zip(v).map(|(b, w)| c * b + s * w / len).collect())
    }

    /// Point at geodesic distance `r` from the pole in the direction of the
    /// unit vector `dir ∈ ℝᴺ`.
    pub fn point_at(&self, r: f64, dir: &[f64]) -> Result<Vec<f64>> {
        if dir.len() != self.dim {
            return Err(Error::Domain("direction has the wrong length".into()));
        }
        let n = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::Domain("direction must be nonzero".into()));
        }
        let mut v: Vec<f64> = dir.iter().map(|a| r * a / n).collect();
        v.push(0.0);
        self.exp_map(&self.pole(), &v)
    }
}

/// `arccos(x·y)` on 𝕊ᴺ, `arcosh(−⟨x, y⟩)` on ℍᴺ.
pub fn geodesic_distance(m: &ManifoldSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    m.distance(x, y)
}

/// Pole-centered domain, described by geodesic radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeodesicDomain {
    Ball { radius: f64 },
    /// Complement of a closed ball (hyperbolic space only).
    Exterior { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl GeodesicDomain {
    pub fn validate(&self, m: &ManifoldSpec) -> Result<()> {
        let ok = match *self {
            GeodesicDomain::Ball { radius } | GeodesicDomain::Exterior { radius } => radius > 0.0 && radius.is_finite(),
            GeodesicDomain::Annulus { inner, outer } => inner > 0.0 && outer > inner && outer.is_finite(),
        };
        if !ok {
            return Err(Error::Config(format!("invalid geodesic domain {self:?}")));
        }
        if m.model == Model::Sphere {
            if matches!(self, GeodesicDomain::Exterior { .. }) {
                return Err(Error::Config("the exterior of a ball on the sphere contains the antipode".into()));
            }
            if self.outer_radius() >= PI {
                return Err(Error::Config(format!("sphere domain {self:?} reaches the antipode")));
            }
        }
        Ok(())
    }

    pub fn boundary_radii(&self) -> Vec<f64> {
        match *self {
            GeodesicDomain::Ball { radius } | GeodesicDomain::Exterior { radius } => vec![radius],
            GeodesicDomain::Annulus { inner, outer } => vec![inner, outer],
        }
    }

    fn outer_radius(&self) -> f64 {
        match *self {
            GeodesicDomain::Ball { radius } | GeodesicDomain::Exterior { radius } => radius,
            GeodesicDomain::Annulus { outer, .. } => outer,
        }
    }

    /// Radial intervals making up Ω, with `far` standing in for the end of
    /// the radial range.
    fn intervals(&self, far: f64) -> Vec<(f64, f64)> {
        match *self {
            GeodesicDomain::Ball { radius } => vec![(0.0, radius)],
            GeodesicDomain::Exterior { radius } => vec![(radius, far)],
            GeodesicDomain::Annulus { inner, outer } => vec![(inner, outer)],
        }
    }

    /// Radial intervals of 𝕄∖Ω.
    fn complement(&self, far: f64) -> Vec<(f64, f64)> {
        match *self {
            GeodesicDomain::Ball { radius } => vec![(radius, far)],
            GeodesicDomain::Exterior { radius } => vec![(0.0, radius)],
            GeodesicDomain::Annulus { inner, outer } => vec![(0.0, inner), (outer, far)],
        }
    }

    /// Signed geodesic distance to ∂Ω (positive in Ω) of a point at radius `r`.
    pub fn signed_distance(&self, r: f64) -> f64 {
        let d = self.boundary_radii().iter().map(|b| (r - b).abs()).fold(f64::INFINITY, f64::min);
        if self.intervals(f64::INFINITY).iter().any(|(a, b)| r > *a && r < *b) {
            d
        } else {
            -d
        }
    }

    /// Width of the two-sided collar around ∂Ω on which the signed distance
    /// is smooth: it stops at the pole, the antipode and the medial circle
    /// of an annulus.
    pub fn reach(&self, m: &ManifoldSpec) -> f64 {
        let antipode = match m.model {
            Model::Sphere => PI - self.outer_radius(),
            Model::Hyperbolic => f64::INFINITY,
        };
        match *self {
            GeodesicDomain::Ball { radius } | GeodesicDomain::Exterior { radius } => radius.min(antipode),
            GeodesicDomain::Annulus { inner, outer } => inner.min(0.5 * (outer - inner)).min(antipode),
        }
    }

    /// Whether `Ω̄` lies in a closed hemisphere around the pole.
    pub fn in_hemisphere(&self, m: &ManifoldSpec) -> bool {
        m.model == Model::Sphere && !matches!(self, GeodesicDomain::Exterior { .. }) && self.outer_radius() <= 0.5 * PI
    }
}

/// Boundary/initial setup: `u = value` on ∂Ω with zero initial data, or the
/// whole-manifold problem with `u(·, 0) = χ_{𝕄∖Ω}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSetup {
    Dirichlet { value: f64 },
    Cauchy,
}

/// End of the radial range on ℍᴺ: the outer radius plus the reach of the
/// outward drift `(N − 1)·t` and ten diffusion lengths.
pub fn hyperbolic_truncation(m: &ManifoldSpec, domain: &GeodesicDomain, t_end: f64) -> f64 {
    domain.outer_radius() + (m.dim as f64 - 1.0) * t_end + 10.0 * t_end.sqrt() + 1.0
}

/// Radial form of a manifold problem. `far` overrides the hyperbolic
/// truncation radius.
pub fn radial_problem(
    m: &ManifoldSpec,
    domain: &GeodesicDomain,
    setup: &ManifoldSetup,
    t_end: f64,
    far: Option<f64>,
) -> Result<RadialProblem> {
    m.validate()?;
    domain.validate(m)?;
    let end = match m.model {
        Model::Sphere => PI,
        Model::Hyperbolic => far.unwrap_or_else(|| hyperbolic_truncation(m, domain, t_end)),
    };
    if !(end > domain.outer_radius()) {
        return Err(Error::Config(format!("truncation radius {end} does not enclose the domain")));
    }
    let far_end = match m.model {
        Model::Sphere => RadialEnd::Pole,
        Model::Hyperbolic => RadialEnd::Dirichlet(0.0),
    };
    let base = RadialProblem {
        metric: m.metric(),
        dim: m.dim,
        center: [0.0; 3],
        lo: 0.0,
        hi: end,
        left: RadialEnd::Pole,
        right: far_end,
        initial: vec![],
        anchors: domain.boundary_radii(),
        boundary_radii: domain.boundary_radii(),
        domain_intervals: domain.intervals(end),
        nodes: None,
    };
    Ok(match *setup {
        ManifoldSetup::Cauchy => {
            let outside = domain.complement(end);
            let right = match (m.model, outside.last()) {
                (Model::Hyperbolic, Some((_, b))) if *b == end => RadialEnd::Dirichlet(1.0),
                _ => far_end,
            };
            RadialProblem { right, initial: outside.into_iter().map(|(a, b)| (a, b, 1.0)).collect(), ..base }
        }
        ManifoldSetup::Dirichlet { value } => {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Config(format!("boundary value must be finite and nonnegative, got {value}")));
            }
            match *domain {
                GeodesicDomain::Ball { radius } => RadialProblem { hi: radius, right: RadialEnd::Dirichlet(value), ..base },
                GeodesicDomain::Exterior { radius } => RadialProblem { lo: radius, left: RadialEnd::Dirichlet(value), ..base },
                GeodesicDomain::Annulus { inner, outer } => RadialProblem {
                    lo: inner,
                    hi: outer,
                    left: RadialEnd::Dirichlet(value),
                    right: RadialEnd::Dirichlet(value),
                    ..base
                },
            }
        }
    })
}

/// Heat flow `u_t = Lu` for a pole-centered geodesic domain.
pub fn solve_radial_heat_manifold(
    m: &ManifoldSpec,
    domain: &GeodesicDomain,
    setup: &ManifoldSetup,
    times: &[f64],
    opts: &SolverOptions,
) -> Result<FieldSeries> {
    let t_end = times.last().copied().ok_or_else(|| Error::Config("no snapshot times".into()))?;
    let problem = radial_problem(m, domain, setup, t_end, None)?;
    solve_radial(&problem, &Nonlinearity::identity(), times, opts)
}

fn manifold_grid<'a>(series: &'a FieldSeries, m: &ManifoldSpec) -> Result<&'a RadialGrid> {
    match series.grid() {
        Grid::Radial(g) if g.metric == m.metric() && g.dim == m.dim => Ok(g),
        _ => Err(Error::Shape(format!("series was not computed on a radial {:?} grid of dimension {}", m.model, m.dim))),
    }
}

/// Signed geodesic distance to ∂Ω at the nodes of a radial manifold grid.
pub fn geodesic_distance_field(domain: &GeodesicDomain, grid: &RadialGrid) -> Result<ScalarField> {
    let values: Vec<f64> = grid.nodes.iter().map(|&r| domain.signed_distance(r)).collect();
    let mask = values
        .iter()
        .map(|&d| {
            if d.abs() <= 1e-12 {
                NodeKind::Boundary
            } else if d > 0.0 {
                NodeKind::Inside
            } else {
                NodeKind::Outside
            }
        })
        .collect();
    ScalarField::new(Grid::Radial(grid.clone()), values, mask)
}

/// Sup error of `−4t log u` against the squared geodesic distance on K.
pub fn manifold_varadhan_report(
    series: &FieldSeries,
    m: &ManifoldSpec,
    domain: &GeodesicDomain,
    k: &KSpec,
) -> Result<VaradhanReport> {
    domain.validate(m)?;
    let grid = manifold_grid(series, m)?;
    let dist = geodesic_distance_field(domain, grid)?;
    convergence_report(series, &Nonlinearity::identity(), &dist, k, 0.0)
}

/// Spread of `u` over `n` points of the geodesic circle at radius `r`; the
/// radial reduction makes every pole-centered circle a level set.
pub fn geodesic_circle_stationarity(series: &FieldSeries, m: &ManifoldSpec, r: f64, n: usize) -> Result<StationarityScore> {
    manifold_grid(series, m)?;
    let points: Vec<Point<f64>> = (0..n.max(1))
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n.max(1) as f64;
            [r * a.cos(), r * a.sin(), 0.0]
        })
        .collect();
    stationarity_test(series, &points)
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSandwichReport {
    pub rho: f64,
    pub reach: f64,
    /// `max_K d`.
    pub m: f64,
    /// Last snapshot time up to which `u^{ρ+} > 1` on ∂Ω.
    pub t_rho: Option<f64>,
    pub times_checked: Vec<f64>,
    pub checked: usize,
    pub violations: usize,
    /// Smallest of `u − u⁻` and `u^{ρ+} − u`.
    pub worst_margin: f64,
    pub tol: f64,
    /// `(2m + 1)ρ` and `(2m + 3)ρ`.
    pub lower_width: f64,
    pub upper_width: f64,
    pub bound_checked: usize,
    pub bound_violations: usize,
    /// Smallest slack in `d² − (2m+1)ρ ≤ −4t log u ≤ d² + (2m+3)ρ`.
    pub bound_worst_margin: f64,
}

impl KernelSandwichReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations == 0
    }

    pub fn bound_passed(&self) -> bool {
        self.bound_checked > 0 && self.bound_violations == 0
    }
}

/// Compares `u` with the two auxiliary whole-manifold flows started from
/// `χ_{𝒩⁻}` (the outer collar `−ρ₀ ≤ d* ≤ 0`) and `2χ_{𝒩_ρ}` (the collar
/// `|d*| ≤ ρ`), solved on the same radial mesh as `u`, then checks the
/// two-sided bound on K that the sandwich implies.
pub fn kernel_sandwich_check(
    series: &FieldSeries,
    m: &ManifoldSpec,
    domain: &GeodesicDomain,
    rho: f64,
    k: &KSpec,
    opts: &SolverOptions,
    tol: f64,
) -> Result<KernelSandwichReport> {
    domain.validate(m)?;
    let reach = domain.reach(m);
    if !(rho > 0.0 && rho < reach) {
        return Err(Error::Config(format!("collar width {rho} must lie in (0, {reach}) for this domain")));
    }
    let grid = manifold_grid(series, m)?;
    let nodes = grid.nodes.clone();
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let needed = match m.model {
        Model::Sphere => hi >= PI - 1e-12,
        Model::Hyperbolic => hi >= domain.outer_radius() + reach,
    };
    if lo != 0.0 || !needed {
        return Err(Error::Config("the kernel sandwich needs a whole-manifold (Cauchy) series".into()));
    }
    let far_end = match m.model {
        Model::Sphere => RadialEnd::Pole,
        Model::Hyperbolic => RadialEnd::Dirichlet(0.0),
    };
    let radii = domain.boundary_radii();
    let inner_collar: Vec<(f64, f64, f64)> = domain
        .complement(hi)
        .into_iter()
        .flat_map(|(a, b)| {
            let mut parts = Vec::new();
            if radii.contains(&a) {
                parts.push((a, (a + reach).min(b), 1.0));
            }
            if radii.contains(&b) {
                parts.push(((b - reach).max(a), b, 1.0));
            }
            parts
        })
        .collect();
    let collar: Vec<(f64, f64, f64)> = radii.iter().map(|b| ((b - rho).max(0.0), (b + rho).min(hi), 2.0)).collect();
    let aux = |initial: Vec<(f64, f64, f64)>| -> Result<FieldSeries> {
        let p = RadialProblem {
            metric: m.metric(),
            dim: m.dim,
            center: grid.center,
            lo,
            hi,
            left: RadialEnd::Pole,
            right: far_end,
            initial,
            anchors: radii.clone(),
            boundary_radii: radii.clone(),
            domain_intervals: domain.intervals(hi),
            nodes: Some(nodes.clone()),
        };
        solve_radial(&p, &Nonlinearity::identity(), &series.times(), opts)
    };
    let lower = aux(inner_collar)?;
    let upper = aux(collar)?;

    let boundary: Vec<usize> = radii
        .iter()
        .map(|b| crate::geometry::field::nearest_radial_node(grid, *b))
        .collect();
    let mut t_rho = None;
    let mut usable = 0;
    for s in &upper.snapshots {
        if boundary.iter().all(|&i| s.field.values[i] > 1.0) {
            t_rho = Some(s.t);
            usable += 1;
        } else {
            break;
        }
    }

    let dist = geodesic_distance_field(domain, grid)?;
    let k_nodes: Vec<usize> =
        (0..nodes.len()).filter(|&i| dist.mask[i].in_domain() && k.contains(dist.values[i])).collect();
    let max_d = k_nodes.iter().map(|&i| dist.values[i]).fold(0.0, f64::max);
    let mut report = KernelSandwichReport {
        rho,
        reach,
        m: max_d,
        t_rho,
        times_checked: vec![],
        checked: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        tol,
        lower_width: (2.0 * max_d + 1.0) * rho,
        upper_width: (2.0 * max_d + 3.0) * rho,
        bound_checked: 0,
        bound_violations: 0,
        bound_worst_margin: f64::INFINITY,
    };
    let nl = Nonlinearity::identity();
    for idx in 0..usable {
        let (s, a, b) = (&series.snapshots[idx], &lower.snapshots[idx], &upper.snapshots[idx]);
        report.times_checked.push(s.t);
        for i in 0..nodes.len() {
            if !dist.mask[i].in_domain() {
                continue;
            }
            let u = s.field.values[i];
            let margin = (u - a.field.values[i]).min(b.field.values[i] - u);
            report.checked += 1;
            report.worst_margin = report.worst_margin.min(margin);
            if margin < -tol {
                report.violations += 1;
            }
        }
        let v = varadhan_snapshot(s, &nl)?;
        for &i in &k_nodes {
            let val = v.field.values[i];
            let d2 = dist.values[i].powi(2);
            let slack = (val - (d2 - report.lower_width)).min(d2 + report.upper_width - val);
            report.bound_checked += 1;
            report.bound_worst_margin = report.bound_worst_margin.min(slack);
            if !(slack >= 0.0) {
                report.bound_violations += 1;
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct EuclideanLimitReport {
    pub scale: f64,
    /// Euclidean times; the manifold run uses `s²·t`.
    pub times: Vec<f64>,
    /// `sup|u_𝕄 − u_ℝ| / sup|u_ℝ|` per snapshot.
    pub rel_errors: Vec<f64>,
    pub max_rel_error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Solves the manifold problem on the domain shrunk by `scale` up to the
/// times `scale²·t`, and the Euclidean radial problem of the same dimension
/// on the unscaled domain up to `t`, on meshes and step sequences that
/// correspond exactly under the scaling.
pub fn euclidean_limit_check(
    m: &ManifoldSpec,
    domain: &GeodesicDomain,
    setup: &ManifoldSetup,
    times: &[f64],
    scale: f64,
    opts: &SolverOptions,
    tol: f64,
) -> Result<EuclideanLimitReport> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Config(format!("scale must lie in (0, 1], got {scale}")));
    }
    let t_end = times.last().copied().ok_or_else(|| Error::Config("no snapshot times".into()))?;
    let scaled = match *domain {
        GeodesicDomain::Ball { radius } => GeodesicDomain::Ball { radius: scale * radius },
        GeodesicDomain::Exterior { radius } => GeodesicDomain::Exterior { radius: scale * radius },
        GeodesicDomain::Annulus { inner, outer } => GeodesicDomain::Annulus { inner: scale * inner, outer: scale * outer },
    };
    let flat_model = ManifoldSpec { model: Model::Hyperbolic, dim: m.dim };
    let mut flat = radial_problem(&flat_model, domain, setup, t_end, None)?;
    flat.metric = RadialMetric::Euclidean;
    let flat_nodes = flat.mesh(&opts.mesh)?;
    if m.model == Model::Sphere && scale * flat.hi >= PI {
        return Err(Error::Config("scaled problem does not fit on the sphere".into()));
    }
    let mut curved = radial_problem(m, &scaled, setup, scale * scale * t_end, None)?;
    curved.hi = scale * flat.hi;
    curved.right = flat.right;
    curved.initial = flat.initial.iter().map(|(a, b, v)| (scale * a, scale * b, *v)).collect();
    curved.nodes = Some(flat_nodes.iter().map(|r| scale * r).collect());
    flat.nodes = Some(flat_nodes);

    let nl = Nonlinearity::identity();
    let u_flat = solve_radial(&flat, &nl, times, opts)?;
    let s2 = scale * scale;
    let mut curved_opts = opts.clone();
    curved_opts.mesh = MeshOptions { h_max: scale * opts.mesh.h_max, h_min: scale * opts.mesh.h_min, ..opts.mesh };
    curved_opts.dt = DtPolicy { dt0: s2 * opts.dt.dt0, dt_max: s2 * opts.dt.dt_max, ..opts.dt };
    let curved_times: Vec<f64> = times.iter().map(|t| s2 * t).collect();
    let u_curved = solve_radial(&curved, &nl, &curved_times, &curved_opts)?;

    let mut rel_errors = Vec::new();
    for (a, b) in u_flat.snapshots.iter().zip(&u_curved.snapshots) {
        let scale_ref = a.field.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let diff = a.field.values.iter().zip(&b.field.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        rel_errors.push(if scale_ref > 0.0 { diff / scale_ref } else { diff });
    }
    let max_rel_error = rel_errors.iter().copied().fold(0.0, f64::max);
    Ok(EuclideanLimitReport { scale, times: times.to_vec(), rel_errors, max_rel_error, tol, pass: max_rel_error <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_distances() {
        let m = ManifoldSpec::new(Model::Sphere, 2).unwrap();
        let north = m.pole();
        assert!((m.distance(&north, &[1.0, 0.0, 0.0]).unwrap() - 0.5 * PI).abs() < 1e-15);
        assert!((m.distance(&north, &[0.0, 0.0, -1.0]).unwrap() - PI).abs() < 1e-15);
        assert!(m.distance(&north, &[0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn hyperbolic_exp_map_distance() {
        let m = ManifoldSpec::new(Model::Hyperbolic, 2).unwrap();
        let p = m.point_at(1.3, &[0.6, 0.8]).unwrap();
        assert!((m.distance(&m.pole(), &p).unwrap() - 1.3).abs() < 1e-13);
        assert!(m.distance(&[0.0, 0.0, -1.0], &p).is_err());
    }

    #[test]
    fn sphere_exterior_rejected() {
        let m = ManifoldSpec::new(Model::Sphere, 2).unwrap();
        assert!(GeodesicDomain::Exterior { radius: 1.0 }.validate(&m).is_err());
        assert!(GeodesicDomain::Ball { radius: PI }.validate(&m).is_err());
        assert!(ManifoldSpec::new(Model::Sphere, 1).is_err());
    }

    #[test]
    fn signed_distance_and_reach_of_annulus() {
        let m = ManifoldSpec::new(Model::Sphere, 2).unwrap();
        let d = GeodesicDomain::Annulus { inner: PI / 3.0, outer: 2.0 * PI / 3.0 };
        assert!((d.signed_distance(0.5 * PI) - PI / 6.0).abs() < 1e-15);
        assert!((d.signed_distance(0.1) + (PI / 3.0 - 0.1)).abs() < 1e-15);
        assert!((d.reach(&m) - PI / 6.0).abs() < 1e-15);
        assert!(!d.in_hemisphere(&m));
    }
}
