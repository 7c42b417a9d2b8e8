//! Radial solves: half-lines, balls, exteriors of balls and annuli in ℝᴺ,
//! and pole-centered geodesic balls/annuli on 𝕊ᴺ and ℍᴺ.

use super::linalg::solve_tridiagonal;
use super::mesh::{graded_nodes, MeshOptions, RadialOperator};
use super::problem::{Formulation, ProblemSpec, SolverOptions};
use super::series::{FieldSeries, SchemeMeta, Snapshot};
use super::stepper::{march, StepOutcome, Stepper};
use crate::error::{Error, Result};
use crate::geometry::primitives::norm;
use crate::geometry::{Grid, NodeKind, Point, RadialGrid, RadialMetric, RadialShape, ScalarField};
use crate::nonlinearity::{Nonlinearity, TransformTable};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialEnd {
    Dirichlet(f64),
    /// Zero flux (pole of the coordinate system or symmetry point).
    Pole,
}

/// A one-dimensional radial problem on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct RadialProblem {
    pub metric: RadialMetric,
    pub dim: usize,
    pub center: Point<f64>,
    pub lo: f64,
    pub hi: f64,
    pub left: RadialEnd,
    pub right: RadialEnd,
    /// Initial data: `value` on each `[a, b]`, zero elsewhere.
    pub initial: Vec<(f64, f64, f64)>,
    /// Radii where the mesh is finest (boundaries, data jumps).
    pub anchors: Vec<f64>,
    /// Radii of ∂Ω.
    pub boundary_radii: Vec<f64>,
    /// Radial intervals making up Ω.
    pub domain_intervals: Vec<(f64, f64)>,
    /// Explicit mesh; replaces the graded construction when set.
    pub nodes: Option<Vec<f64>>,
}

impl RadialProblem {
    /// Reduces a concentric-ball problem in ℝᴺ to its radial form.
    pub fn from_spec(ps: &ProblemSpec) -> Result<Self> {
        let rs = ps
            .domain
            .radial_structure()
            .ok_or_else(|| Error::Unsupported("domain is not a concentric ball configuration".into()))?;
        let dim = ps.domain.dim;
        let trunc = ps.truncation() - norm(&rs.center);
        let constant = |j: usize| -> Result<f64> {
            let p = ps.setup.profile(j).expect("dirichlet setup");
            if !p.is_constant() {
                return Err(Error::Unsupported("angular boundary data on a radial grid".into()));
            }
            Ok(p.bounds().0)
        };
        let base = RadialProblem {
            metric: RadialMetric::Euclidean,
            dim,
            center: rs.center,
            lo: 0.0,
            hi: trunc,
            left: RadialEnd::Pole,
            right: RadialEnd::Dirichlet(0.0),
            initial: vec![],
            anchors: vec![],
            boundary_radii: vec![],
            domain_intervals: vec![],
            nodes: None,
        };
        let cauchy = !ps.setup.is_dirichlet();
        let p = match rs.shape {
            RadialShape::Exterior { radius } => {
                if cauchy {
                    RadialProblem {
                        initial: vec![(0.0, radius, 1.0)],
                        anchors: vec![radius],
                        boundary_radii: vec![radius],
                        domain_intervals: vec![(radius, trunc)],
                        ..base
                    }
                } else {
                    RadialProblem {
                        lo: radius,
                        left: RadialEnd::Dirichlet(constant(0)?),
                        anchors: vec![radius],
                        boundary_radii: vec![radius],
                        domain_intervals: vec![(radius, trunc)],
                        ..base
                    }
                }
            }
            RadialShape::Interior { radius } => {
                if cauchy {
                    RadialProblem {
                        right: RadialEnd::Dirichlet(1.0),
                        initial: vec![(radius, trunc, 1.0)],
                        anchors: vec![radius],
                        boundary_radii: vec![radius],
                        domain_intervals: vec![(0.0, radius)],
                        ..base
                    }
                } else {
                    RadialProblem {
                        hi: radius,
                        right: RadialEnd::Dirichlet(constant(0)?),
                        anchors: vec![radius],
                        boundary_radii: vec![radius],
                        domain_intervals: vec![(0.0, radius)],
                        ..base
                    }
                }
            }
            RadialShape::Annulus { inner, outer } => {
                if cauchy {
                    RadialProblem {
                        right: RadialEnd::Dirichlet(1.0),
                        initial: vec![(0.0, inner, 1.0), (outer, trunc, 1.0)],
                        anchors: vec![inner, outer],
                        boundary_radii: vec![inner, outer],
                        domain_intervals: vec![(inner, outer)],
                        ..base
                    }
                } else {
                    RadialProblem {
                        lo: inner,
                        hi: outer,
                        left: RadialEnd::Dirichlet(constant(1)?),
                        right: RadialEnd::Dirichlet(constant(0)?),
                        anchors: vec![inner, outer],
                        boundary_radii: vec![inner, outer],
                        domain_intervals: vec![(inner, outer)],
                        ..base
                    }
                }
            }
        };
        Ok(p)
    }

    pub fn mesh(&self, opts: &MeshOptions) -> Result<Vec<f64>> {
        if let Some(nodes) = &self.nodes {
            if nodes.len() < 3 || nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes[0] != self.lo {
                return Err(Error::Config("explicit radial mesh must start at lo and increase strictly".into()));
            }
            return Ok(nodes.clone());
        }
        let mut anchors = self.anchors.clone();
        for (a, b, _) in &self.initial {
            anchors.push(*a);
            anchors.push(*b);
        }
        anchors.retain(|r| *r >= self.lo && *r <= self.hi);
        anchors.sort_by(f64::total_cmp);
        anchors.dedup();
        let anchors = if anchors.is_empty() { vec![self.lo] } else { anchors };
        graded_nodes(self.lo, self.hi, &anchors, opts)
    }

    fn mask(&self, nodes: &[f64]) -> Vec<NodeKind> {
        nodes
            .iter()
            .map(|&r| {
                let tol = 1e-12 * (1.0 + r.abs());
                if self.boundary_radii.iter().any(|b| (r - b).abs() <= tol) {
                    NodeKind::Boundary
                } else if self.domain_intervals.iter().any(|(a, b)| r > *a && r < *b)
                    || self.domain_intervals.iter().any(|(a, _)| *a == 0.0 && r == 0.0)
                {
                    NodeKind::Inside
                } else {
                    NodeKind::Outside
                }
            })
            .collect()
    }

    fn initial_values(&self, op: &RadialOperator) -> Vec<f64> {
        let mut u = vec![0.0; op.len()];
        for (a, b, v) in &self.initial {
            for (ui, f) in u.iter_mut().zip(op.cell_fractions(*a, *b)) {
                *ui += v * f;
            }
        }
        if let RadialEnd::Dirichlet(c) = self.left {
            u[0] = c;
        }
        if let RadialEnd::Dirichlet(c) = self.right {
            u[op.len() - 1] = c;
        }
        u
    }

    fn upper_value(&self) -> f64 {
        let mut m: f64 = 1.0;
        for e in [self.left, self.right] {
            if let RadialEnd::Dirichlet(c) = e {
                m = m.max(c);
            }
        }
        for (_, _, v) in &self.initial {
            m = m.max(*v);
        }
        m
    }
}

/// Shared pieces of both radial steppers.
struct RadialCore {
    op: RadialOperator,
    grid: RadialGrid,
    mask: Vec<NodeKind>,
    /// Range of unknown node indices.
    free: std::ops::Range<usize>,
    newton_tol: f64,
    max_newton: usize,
}

impl RadialCore {
    fn snapshot_field(&self, values: Vec<f64>) -> ScalarField {
        ScalarField { grid: Grid::Radial(self.grid.clone()), values, mask: self.mask.clone() }
    }
}

struct DensityStepper<'a> {
    core: RadialCore,
    nl: &'a Nonlinearity<f64>,
}

impl Stepper for DensityStepper<'_> {
    fn step(&mut self, old: &[f64], dt: f64) -> Result<StepOutcome> {
        let c = &self.core;
        let op = &c.op;
        let n = op.len();
        let mut u = old.to_vec();
        let mut w = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let free = c.free.clone();
        let m = free.len();
        let (mut a, mut b, mut cc, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for it in 0..=c.max_newton {
            for i in 0..n {
                w[i] = self.nl.phi(u[i]);
                dw[i] = self.nl.dphi(u[i]);
            }
            let mut res = 0.0f64;
            for (k, i) in free.clone().enumerate() {
                let f = (u[i] - old[i]) / dt - op.apply_at(&w, i);
                rhs[k] = -f;
                res = res.max((f * dt).abs());
            }
            if !res.is_finite() {
                return Err(Error::Numeric("non-finite residual".into()));
            }
            if res <= c.newton_tol {
                return Ok(StepOutcome { state: u, newton: it, residual: res, linear: 0 });
            }
            if it == c.max_newton {
                return Err(Error::Convergence { t: f64::NAN, halvings: 0, residual: res });
            }
            for (k, i) in free.clone().enumerate() {
                let v = op.volumes[i];
                let cl = if i > 0 { op.conductance[i - 1] } else { 0.0 };
                let cr = if i + 1 < n { op.conductance[i] } else { 0.0 };
                b[k] = 1.0 / dt + (cl + cr) / v * dw[i];
                a[k] = if k > 0 { -cl / v * dw[i - 1] } else { 0.0 };
                cc[k] = if k + 1 < m { -cr / v * dw[i + 1] } else { 0.0 };
            }
            let delta = solve_tridiagonal(&a, &b, &cc, &rhs)?;
            for (k, i) in free.clone().enumerate() {
                u[i] += delta[k];
            }
        }
        unreachable!()
    }

    fn snapshot(&self, state: &[f64], t: f64) -> Result<Snapshot> {
        Ok(Snapshot { t, field: self.core.snapshot_field(state.to_vec()), pressure: None })
    }
}

struct PressureStepper<'a> {
    core: RadialCore,
    table: &'a TransformTable,
    nl: &'a Nonlinearity<f64>,
}

impl PressureStepper<'_> {
    /// Diffusivity `a(q) = φ′(Ψ(−q))` and `da/dq`.
    fn diffusivity(&self, q: f64) -> (f64, f64) {
        if self.nl.is_linear() {
            return (self.nl.delta1(), 0.0);
        }
        let sigma = self.table.big_psi_log(-q);
        let u = sigma.exp();
        let a = self.nl.dphi(u);
        (a, -self.nl.d2phi(u) * u / a)
    }
}

impl Stepper for PressureStepper<'_> {
    fn step(&mut self, old: &[f64], dt: f64) -> Result<StepOutcome> {
        let c = &self.core;
        let op = &c.op;
        let x = &op.nodes;
        let n = op.len();
        let free = c.free.clone();
        let m = free.len();
        let mut q = old.to_vec();
        let (mut a, mut b, mut cc, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut coef = vec![(0.0, 0.0); n];
        let residual = |q: &[f64], coef: &mut [(f64, f64)], rhs: Option<&mut [f64]>| -> f64 {
            let mut res = 0.0f64;
            let mut out = rhs;
            for (k, i) in free.clone().enumerate() {
                let (ai, dai) = self.diffusivity(q[i]);
                coef[i] = (ai, dai);
                let pm = if i > 0 { ((q[i] - q[i - 1]) / (x[i] - x[i - 1])).max(0.0) } else { 0.0 };
                let pp = if i + 1 < n { ((q[i + 1] - q[i]) / (x[i + 1] - x[i])).min(0.0) } else { 0.0 };
                let ham = (pm * pm).max(pp * pp);
                let g = (q[i] - old[i]) / dt - ai * op.apply_at(q, i) + ham;
                if let Some(r) = out.as_deref_mut() {
                    r[k] = -g;
                }
                res = res.max((g * dt).abs() / (1.0 + q[i].abs()));
            }
            res
        };
        let mut res = residual(&q, &mut coef, Some(&mut rhs));
        for it in 0..=c.max_newton {
            if !res.is_finite() {
                return Err(Error::Numeric("non-finite pressure residual".into()));
            }
            if res <= c.newton_tol {
                return Ok(StepOutcome { state: q, newton: it, residual: res, linear: 0 });
            }
            if it == c.max_newton {
                break;
            }
            for (k, i) in free.clone().enumerate() {
                let (ai, dai) = coef[i];
                let v = op.volumes[i];
                let cl = if i > 0 { op.conductance[i - 1] } else { 0.0 };
                let cr = if i + 1 < n { op.conductance[i] } else { 0.0 };
                let lq = op.apply_at(&q, i);
                let mut diag = 1.0 / dt - dai * lq + ai * (cl + cr) / v;
                let mut lower = -ai * cl / v;
                let mut upper = -ai * cr / v;
                let pm = if i > 0 { ((q[i] - q[i - 1]) / (x[i] - x[i - 1])).max(0.0) } else { 0.0 };
                let pp = if i + 1 < n { ((q[i + 1] - q[i]) / (x[i + 1] - x[i])).min(0.0) } else { 0.0 };
                if pm * pm >= pp * pp {
                    if pm > 0.0 {
                        let hx = x[i] - x[i - 1];
                        diag += 2.0 * pm / hx;
                        lower -= 2.0 * pm / hx;
                    }
                } else {
                    let hx = x[i + 1] - x[i];
                    diag -= 2.0 * pp / hx;
                    upper += 2.0 * pp / hx;
                }
                b[k] = diag;
                a[k] = if k > 0 { lower } else { 0.0 };
                cc[k] = if k + 1 < m { upper } else { 0.0 };
            }
            let delta = solve_tridiagonal(&a, &b, &cc, &rhs)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let mut trial = q.clone();
                for (k, i) in free.clone().enumerate() {
                    trial[i] += lambda * delta[k];
                }
                let mut trial_rhs = vec![0.0; m];
                let r = residual(&trial, &mut coef, Some(&mut trial_rhs));
                if r.is_finite() && (r < res || r <= c.newton_tol) {
                    q = trial;
                    rhs = trial_rhs;
                    res = r;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Err(Error::Convergence { t: f64::NAN, halvings: 0, residual: res })
    }

    fn snapshot(&self, state: &[f64], t: f64) -> Result<Snapshot> {
        let values = state.iter().map(|q| self.table.big_psi_log(-q).exp()).collect();
        Ok(Snapshot { t, field: self.core.snapshot_field(values), pressure: Some(state.to_vec()) })
    }
}

/// Default pressure assigned to `u = 0`: twice the largest `d²/(4t)` the
/// mesh can hold at the first snapshot, plus a margin.
pub fn default_pressure_cap(span: f64, t_first: f64) -> f64 {
    2.0 * span * span / (4.0 * t_first) + 50.0
}

/// Solves a radial problem through the given snapshot times.
pub fn solve_radial(
    problem: &RadialProblem,
    nl: &Nonlinearity<f64>,
    times: &[f64],
    opts: &SolverOptions,
) -> Result<FieldSeries> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return Err(Error::Config("snapshot times must be positive and strictly ascending".into()));
    }
    let nodes = problem.mesh(&opts.mesh)?;
    let op = RadialOperator::new(problem.metric, problem.dim, nodes.clone())?;
    let n = op.len();
    let start = usize::from(matches!(problem.left, RadialEnd::Dirichlet(_)));
    let end = n - usize::from(matches!(problem.right, RadialEnd::Dirichlet(_)));
    let grid = RadialGrid { dim: problem.dim, center: problem.center, metric: problem.metric, nodes: nodes.clone() };
    let core = RadialCore {
        mask: problem.mask(&nodes),
        op,
        grid,
        free: start..end,
        newton_tol: opts.newton_tol,
        max_newton: opts.max_newton,
    };
    let h_min = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut meta = SchemeMeta { nodes: n, h_min, ..SchemeMeta::default() };
    let layer = 2.0 * (nl.delta2() * times[0]).sqrt();
    if h_min > layer / 4.0 {
        meta.warnings.push(format!(
            "boundary layer 2*sqrt(delta2*t_first) = {layer:.3e} resolved by fewer than 4 cells (h_min = {h_min:.3e})"
        ));
    }
    let u0 = problem.initial_values(&core.op);
    let mut snapshots = match opts.formulation {
        Formulation::Density => {
            meta.scheme = "backward Euler + Newton, finite-volume radial operator, density unknown".into();
            let mut s = DensityStepper { core, nl };
            march(&mut s, u0, times, &opts.dt, opts.max_halvings, &mut meta)?
        }
        Formulation::Pressure => {
            meta.scheme =
                "backward Euler + Newton, finite-volume radial operator, pressure unknown q = -Phi(u), Godunov upwind |grad q|^2"
                    .into();
            let table = TransformTable::for_solver(nl)?;
            let cap = opts.pressure_cap.unwrap_or_else(|| default_pressure_cap(problem.hi - problem.lo, times[0]));
            let q0: Vec<f64> = u0
                .iter()
                .map(|&u| if u <= 0.0 { cap } else { (-table.big_phi(u)).min(cap) })
                .collect();
            let mut s = PressureStepper { core, table: &table, nl };
            march(&mut s, q0, times, &opts.dt, opts.max_halvings, &mut meta)?
        }
    };
    let upper = problem.upper_value();
    let mut excess = 0.0f64;
    for s in &mut snapshots {
        for &u in &s.field.values {
            excess = excess.max(-u).max(u - upper);
        }
    }
    meta.range_excess = excess;
    if excess > 1e-8 {
        meta.warnings.push(format!("solution left [0, {upper}] by {excess:.3e}"));
    }
    Ok(FieldSeries { snapshots, meta })
}

/// Radial solve of a [`ProblemSpec`] on a concentric-ball domain.
pub fn solve_radial_spec(ps: &ProblemSpec, opts: &SolverOptions) -> Result<FieldSeries> {
    let problem = RadialProblem::from_spec(ps)?;
    solve_radial(&problem, &ps.nonlinearity, &ps.snapshot_times, opts)
}
