//! Two-dimensional lattice solves with Shortley–Weller embedded Dirichlet
//! boundaries.

use super::linalg::{bicgstab, Csr};
use super::problem::{Formulation, ProblemSpec, Setup, SolverOptions};
use super::series::{FieldSeries, SchemeMeta, Snapshot};
use super::stepper::{march, StepOutcome, Stepper};
use crate::error::{Error, Result};
use crate::geometry::{classify_nodes, CartesianGrid, DomainKind, Grid, NodeKind, ScalarField};
use crate::nonlinearity::Nonlinearity;
use crate::roots::bracketed_root;

/// Crossings closer than this fraction of a cell snap the node onto ∂Ω.
const SNAP_FRACTION: f64 = 1e-3;
const SUBSAMPLES: usize = 16;

#[derive(Clone, Debug)]
struct Row {
    node: usize,
    /// Sum of stencil weights (multiplies φ(u_i)).
    weight: f64,
    /// `(unknown index, weight)` for unknown neighbors.
    neighbors: Vec<(usize, f64)>,
    /// Sum of weight·φ(value) over known neighbor values.
    known: f64,
}

struct LatticeStepper<'a> {
    nl: &'a Nonlinearity<f64>,
    grid: CartesianGrid,
    mask: Vec<NodeKind>,
    rows: Vec<Row>,
    /// Newton matrix; the sparsity pattern is fixed, values are refilled.
    jac: Csr,
    /// Values of nodes that are not unknowns.
    fixed: Vec<f64>,
    newton_tol: f64,
    max_newton: usize,
}

impl Stepper for LatticeStepper<'_> {
    fn step(&mut self, old: &[f64], dt: f64) -> Result<StepOutcome> {
        let m = self.rows.len();
        let mut u = old.to_vec();
        let mut linear = 0;
        for it in 0..=self.max_newton {
            let w: Vec<f64> = u.iter().map(|v| self.nl.phi(*v)).collect();
            let mut rhs = vec![0.0; m];
            let mut res = 0.0f64;
            for (k, row) in self.rows.iter().enumerate() {
                let mut lap = row.known - row.weight * w[k];
                for (j, c) in &row.neighbors {
                    lap += c * w[*j];
                }
                let f = (u[k] - old[k]) / dt - lap;
                rhs[k] = -f;
                res = res.max((f * dt).abs());
            }
            if !res.is_finite() {
                return Err(Error::Numeric("non-finite residual".into()));
            }
            if res <= self.newton_tol {
                return Ok(StepOutcome { state: u, newton: it, residual: res, linear });
            }
            if it == self.max_newton {
                return Err(Error::Convergence { t: f64::NAN, halvings: 0, residual: res });
            }
            let dw: Vec<f64> = u.iter().map(|v| self.nl.dphi(*v)).collect();
            let mut pos = 0;
            for (k, row) in self.rows.iter().enumerate() {
                self.jac.vals[pos] = 1.0 / dt + row.weight * dw[k];
                pos += 1;
                for (j, c) in &row.neighbors {
                    self.jac.vals[pos] = -c * dw[*j];
                    pos += 1;
                }
            }
            let jac = &self.jac;
            let (delta, its) = bicgstab(jac, &rhs, None, 1e-13, 5000)?;
            linear += its;
            for k in 0..m {
                u[k] += delta[k];
            }
        }
        unreachable!()
    }

    fn snapshot(&self, state: &[f64], t: f64) -> Result<Snapshot> {
        let mut values = self.fixed.clone();
        for (k, row) in self.rows.iter().enumerate() {
            values[row.node] = state[k];
        }
        let field = ScalarField { grid: Grid::Cartesian(self.grid.clone()), values, mask: self.mask.clone() };
        Ok(Snapshot { t, field, pressure: None })
    }
}

/// Lattice covering the region the solve needs: the truncation square for
/// unbounded Ω, the obstacle bounding box (plus margin) otherwise.
fn lattice_for(ps: &ProblemSpec, h: f64) -> Result<CartesianGrid> {
    let spec = &ps.domain;
    let half = match (spec.kind, ps.setup.is_dirichlet()) {
        (DomainKind::Exterior, _) | (_, false) => ps.truncation(),
        _ => spec.bounding_radius() + 4.0 * h,
    };
    let half = (half / h).ceil() * h;
    CartesianGrid::covering(&[[-half, half], [-half, half]], h)
}

/// Fraction of the cell around `x` lying outside Ω, by subsampling.
fn complement_fraction(ps: &ProblemSpec, x: &[f64; 3], h: f64) -> f64 {
    let d = ps.domain.signed_distance(x);
    if d > h {
        return 0.0;
    }
    if d < -h {
        return 1.0;
    }
    let mut count = 0;
    for a in 0..SUBSAMPLES {
        for b in 0..SUBSAMPLES {
            let p = [
                x[0] + h * ((a as f64 + 0.5) / SUBSAMPLES as f64 - 0.5),
                x[1] + h * ((b as f64 + 0.5) / SUBSAMPLES as f64 - 0.5),
                0.0,
            ];
            if ps.domain.signed_distance(&p) <= 0.0 {
                count += 1;
            }
        }
    }
    count as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
}

pub fn solve_lattice(ps: &ProblemSpec, opts: &SolverOptions) -> Result<FieldSeries> {
    if ps.domain.dim != 2 {
        return Err(Error::Unsupported(format!(
            "lattice solves are two-dimensional; {}D domains must be radial",
            ps.domain.dim
        )));
    }
    if opts.formulation == Formulation::Pressure {
        return Err(Error::Unsupported("the pressure formulation is available on radial grids only".into()));
    }
    let h = opts.mesh.h_max;
    let grid = lattice_for(ps, h)?;
    let n = grid.len();
    let spec = &ps.domain;
    let dist: Vec<f64> = (0..n).map(|i| spec.signed_distance(&grid.point(i))).collect();
    let on_edge = |i: usize| {
        let c = grid.coords(i);
        c[0] == 0 || c[1] == 0 || c[0] + 1 == grid.shape[0] || c[1] + 1 == grid.shape[1]
    };
    let mut mask = classify_nodes(spec, &grid);
    let mut fixed = vec![0.0; n];
    let mut unknown = vec![usize::MAX; n];
    let mut order = Vec::new();

    match &ps.setup {
        Setup::CauchyIndicator => {
            for i in 0..n {
                fixed[i] = complement_fraction(ps, &grid.point(i), h);
                if !on_edge(i) {
                    unknown[i] = order.len();
                    order.push(i);
                }
            }
        }
        setup => {
            let boundary_value = |p: &[f64; 3]| -> f64 {
                let j = spec.nearest_component(p);
                let prof = setup.profile(j).expect("dirichlet setup");
                prof.value_at(p, &spec.primitives[j].center())
            };
            for i in 0..n {
                let p = grid.point(i);
                if dist[i] <= 0.0 {
                    fixed[i] = boundary_value(&p);
                    continue;
                }
                if on_edge(i) {
                    fixed[i] = 0.0;
                    continue;
                }
                if dist[i] < SNAP_FRACTION * h {
                    fixed[i] = boundary_value(&p);
                    mask[i] = NodeKind::Boundary;
                    continue;
                }
                unknown[i] = order.len();
                order.push(i);
            }
        }
    }

    let mut rows = Vec::with_capacity(order.len());
    for &i in &order {
        let p = grid.point(i);
        let mut row = Row { node: i, weight: 0.0, neighbors: Vec::with_capacity(4), known: 0.0 };
        for axis in 0..2 {
            // (arm length, neighbor unknown index or known value)
            let mut arms: [(f64, Result<usize, f64>); 2] = [(h, Err(0.0)), (h, Err(0.0))];
            for (slot, step) in [(0usize, -1isize), (1, 1)] {
                let j = grid.neighbor(i, axis, step).expect("interior node has neighbors");
                if unknown[j] != usize::MAX {
                    arms[slot] = (h, Ok(unknown[j]));
                } else if ps.setup.is_dirichlet() && dist[j] <= 0.0 {
                    let dir = step as f64;
                    let dj = dist[j];
                    let along = |s: f64| {
                        if s >= 1.0 {
                            return dj;
                        }
                        let mut x = p;
                        x[axis] += dir * s * h;
                        spec.signed_distance(&x)
                    };
                    let theta = bracketed_root(along, 0.0, 1.0, 1e-14, 200)?.clamp(SNAP_FRACTION, 1.0);
                    let mut xb = p;
                    xb[axis] += dir * theta * h;
                    let j_comp = spec.nearest_component(&xb);
                    let prof = ps.setup.profile(j_comp).expect("dirichlet setup");
                    arms[slot] = (theta * h, Err(prof.value_at(&xb, &spec.primitives[j_comp].center())));
                } else {
                    arms[slot] = (h, Err(fixed[j]));
                }
            }
            let (hm, hp) = (arms[0].0, arms[1].0);
            for (len, target) in arms {
                let c = 2.0 / (len * (hm + hp));
                row.weight += c;
                match target {
                    Ok(k) => row.neighbors.push((k, c)),
                    Err(v) => row.known += c * ps.nonlinearity.phi(v),
                }
            }
        }
        rows.push(row);
    }

    let mut meta = SchemeMeta {
        nodes: rows.len(),
        h_min: h,
        scheme: "backward Euler + Newton, Shortley-Weller 5-point lattice, Jacobi-BiCGSTAB".into(),
        ..SchemeMeta::default()
    };
    let layer = 2.0 * (ps.nonlinearity.delta2() * ps.first_time()).sqrt();
    if h > layer / 4.0 {
        meta.warnings.push(format!(
            "boundary layer 2*sqrt(delta2*t_first) = {layer:.3e} resolved by fewer than 4 cells (h = {h:.3e})"
        ));
    }
    let u0: Vec<f64> = order.iter().map(|&i| fixed[i]).collect();
    let jac = Csr::from_rows(
        rows.iter()
            .enumerate()
            .map(|(k, row)| std::iter::once((k, 0.0)).chain(row.neighbors.iter().map(|(j, _)| (*j, 0.0))).collect())
            .collect(),
    );
    let mut stepper = LatticeStepper {
        nl: &ps.nonlinearity,
        grid,
        mask,
        rows,
        jac,
        fixed,
        newton_tol: opts.newton_tol,
        max_newton: opts.max_newton,
    };
    let snapshots = march(&mut stepper, u0, &ps.snapshot_times, &opts.dt, opts.max_halvings, &mut meta)?;
    let upper = ps.setup.upper_value().max(1.0);
    let mut excess = 0.0f64;
    for s in &snapshots {
        for (v, m) in s.field.values.iter().zip(&s.field.mask) {
            if m.in_domain() {
                excess = excess.max(-v).max(v - upper);
            }
        }
    }
    meta.range_excess = excess;
    if excess > 1e-8 {
        meta.warnings.push(format!("solution left [0, {upper}] by {excess:.3e}"));
    }
    Ok(FieldSeries { snapshots, meta })
}
