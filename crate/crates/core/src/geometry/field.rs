use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use super::primitives::Point;
use crate::error::{Error, Result};
use crate::interp::{keys_kernel, lagrange4, locate};

/// Ambient geometry of a radial lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialMetric {
    Euclidean,
    Sphere,
    Hyperbolic,
}

/// Uniform lattice `origin + h·(i, j, k)`; index runs fastest along x.
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianGrid {
    pub dim: usize,
    pub origin: Point<f64>,
    pub h: f64,
    pub shape: [usize; 3],
}

impl CartesianGrid {
    /// Lattice covering `bbox` (one `[lo, hi]` per axis) with spacing `h`.
    pub fn covering(bbox: &[[f64; 2]], h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        if bbox.is_empty() || bbox.len() > 3 {
            return Err(Error::Config("bounding box must have 1 to 3 axes".into()));
        }
        let mut origin = [0.0; 3];
        let mut shape = [1; 3];
        for (k, [lo, hi]) in bbox.iter().enumerate() {
            if !(hi > lo) {
                return Err(Error::Config(format!("empty bounding box along axis {k}")));
            }
            origin[k] = *lo;
            shape[k] = ((hi - lo) / h).round() as usize + 1;
        }
        Ok(CartesianGrid { dim: bbox.len(), origin, h, shape })
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let j = (idx / self.shape[0]) % self.shape[1];
        let k = idx / (self.shape[0] * self.shape[1]);
        [i, j, k]
    }

    pub fn point(&self, idx: usize) -> Point<f64> {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + self.h * c[a] as f64;
        }
        p
    }

    /// Neighbor of `idx` shifted by `step` (±1) along `axis`, if inside the lattice.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let mut c = self.coords(idx);
        let v = c[axis] as isize + step;
        if v < 0 || v >= self.shape[axis] as isize {
            return None;
        }
        c[axis] = v as usize;
        Some(self.index(c[0], c[1], c[2]))
    }
}

/// Radial lattice: values depend only on the (geodesic) distance from `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    pub dim: usize,
    pub center: Point<f64>,
    pub metric: RadialMetric,
    pub nodes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Cartesian(CartesianGrid),
    Radial(RadialGrid),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Cartesian(g) => g.len(),
            Grid::Radial(g) => g.nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Cartesian(g) => g.dim,
            Grid::Radial(g) => g.dim,
        }
    }

    /// Representative point of node `idx`; radial nodes are placed along the
    /// first axis.
    pub fn point(&self, idx: usize) -> Point<f64> {
        match self {
            Grid::Cartesian(g) => g.point(idx),
            Grid::Radial(g) => {
                let mut p = g.center;
                p[0] += g.nodes[idx];
                p
            }
        }
    }

    /// Characteristic spacing: `h` for lattices, the finest radial step otherwise.
    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Cartesian(g) => g.h,
            Grid::Radial(g) => g.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Inside,
    /// In the closure of Ω with a neighbor outside Ω, or on ∂Ω.
    Boundary,
    Outside,
}

impl NodeKind {
    pub fn in_domain(self) -> bool {
        !matches!(self, NodeKind::Outside)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mask: Vec<NodeKind>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, mask: Vec<NodeKind>) -> Result<Self> {
        if grid.len() == 0 {
            return Err(Error::Shape("empty grid".into()));
        }
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values and {} mask entries for {} nodes",
                values.len(),
                mask.len(),
                grid.len()
            )));
        }
        if grid.spacing() <= 0.0 {
            return Err(Error::Shape("grid spacing must be positive".into()));
        }
        Ok(ScalarField { grid, values, mask })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Interpolated value at `x`: four-point Lagrange in the radius on radial
    /// grids, Keys bicubic on 2D lattices, multilinear otherwise. Returns
    /// `None` outside the grid.
    pub fn sample(&self, x: &Point<f64>) -> Option<f64> {
        match &self.grid {
            Grid::Radial(g) => {
                let r = radial_coordinate(g, x);
                let (lo, hi) = (g.nodes[0], g.nodes[g.nodes.len() - 1]);
                if r < lo - 1e-12 || r > hi + 1e-12 {
                    return None;
                }
                Some(lagrange4(&g.nodes, &self.values, r))
            }
            Grid::Cartesian(g) => {
                if g.dim == 2 {
                    self.sample_bicubic(g, x)
                } else {
                    self.sample_multilinear(g, x)
                }
            }
        }
    }

    fn sample_bicubic(&self, g: &CartesianGrid, x: &Point<f64>) -> Option<f64> {
        let fx = (x[0] - g.origin[0]) / g.h;
        let fy = (x[1] - g.origin[1]) / g.h;
        let (nx, ny) = (g.shape[0] as f64, g.shape[1] as f64);
        if fx < -1e-9 || fy < -1e-9 || fx > nx - 1.0 + 1e-9 || fy > ny - 1.0 + 1e-9 {
            return None;
        }
        let i0 = fx.floor() as isize;
        let j0 = fy.floor() as isize;
        if i0 < 1 || j0 < 1 || i0 + 2 >= g.shape[0] as isize || j0 + 2 >= g.shape[1] as isize {
            return self.sample_multilinear(g, x);
        }
        let mut acc = 0.0;
        for dj in -1..=2 {
            let wy = keys_kernel(fy - (j0 + dj) as f64);
            for di in -1..=2 {
                let wx = keys_kernel(fx - (i0 + di) as f64);
                acc += wx * wy * self.values[g.index((i0 + di) as usize, (j0 + dj) as usize, 0)];
            }
        }
        Some(acc)
    }

    fn sample_multilinear(&self, g: &CartesianGrid, x: &Point<f64>) -> Option<f64> {
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..g.dim {
            let f = (x[a] - g.origin[a]) / g.h;
            let n = g.shape[a];
            if f < -1e-9 || f > (n - 1) as f64 + 1e-9 {
                return None;
            }
            let f = f.clamp(0.0, (n - 1) as f64);
            let i = (f.floor() as usize).min(n.saturating_sub(2));
            base[a] = i;
            frac[a] = if n > 1 { f - i as f64 } else { 0.0 };
        }
        let mut acc = 0.0;
        let corners = 1usize << g.dim;
        for c in 0..corners {
            let mut w = 1.0;
            let mut ijk = [0usize; 3];
            for a in 0..g.dim {
                let bit = (c >> a) & 1;
                ijk[a] = (base[a] + bit).min(g.shape[a] - 1);
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                acc += w * self.values[g.index(ijk[0], ijk[1], ijk[2])];
            }
        }
        Some(acc)
    }

    /// Central-difference gradient at node `idx` using only in-domain
    /// neighbors (one-sided where needed). `None` if no stencil is available.
    pub fn gradient(&self, idx: usize) -> Option<Point<f64>> {
        match &self.grid {
            Grid::Radial(g) => {
                let n = g.nodes.len();
                if n < 2 {
                    return None;
                }
                let (a, b) = if idx == 0 {
                    (0, 1)
                } else if idx == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (idx - 1, idx + 1)
                };
                let d = (self.values[b] - self.values[a]) / (g.nodes[b] - g.nodes[a]);
                Some([d, 0.0, 0.0])
            }
            Grid::Cartesian(g) => {
                let mut out = [0.0; 3];
                for a in 0..g.dim {
                    let ok = |j: Option<usize>| j.filter(|&j| self.mask[j].in_domain());
                    let p = ok(g.neighbor(idx, a, 1));
                    let m = ok(g.neighbor(idx, a, -1));
                    out[a] = match (p, m) {
                        (Some(p), Some(m)) => (self.values[p] - self.values[m]) / (2.0 * g.h),
                        (Some(p), None) => (self.values[p] - self.values[idx]) / g.h,
                        (None, Some(m)) => (self.values[idx] - self.values[m]) / g.h,
                        (None, None) => return None,
                    };
                }
                Some(out)
            }
        }
    }

    /// Coordinate-wise distance metric for points: geodesic radius on radial
    /// grids, Euclidean distance otherwise.
    pub fn node_distance(&self, i: usize, j: usize) -> f64 {
        match &self.grid {
            Grid::Radial(g) => (g.nodes[i] - g.nodes[j]).abs(),
            Grid::Cartesian(_) => {
                let (p, q) = (self.grid.point(i), self.grid.point(j));
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            }
        }
    }

    /// Maximum absolute value over in-domain nodes.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| m.in_domain())
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Radius of point `x` relative to the center of a radial grid.
pub fn radial_coordinate(g: &RadialGrid, x: &Point<f64>) -> f64 {
    let d: f64 = (0..3).map(|a| (x[a] - g.center[a]).powi(2)).sum::<f64>().sqrt();
    d
}

/// Node classification of a lattice against a domain.
pub fn classify_nodes(spec: &DomainSpec<f64>, grid: &CartesianGrid) -> Vec<NodeKind> {
    let inside: Vec<bool> = (0..grid.len()).map(|i| spec.signed_distance(&grid.point(i)) > 0.0).collect();
    (0..grid.len())
        .map(|i| {
            if !inside[i] {
                return NodeKind::Outside;
            }
            for a in 0..grid.dim {
                for s in [-1, 1] {
                    if let Some(j) = grid.neighbor(i, a, s) {
                        if !inside[j] {
                            return NodeKind::Boundary;
                        }
                    }
                }
            }
            NodeKind::Inside
        })
        .collect()
}

/// Field of exact signed distances on a lattice.
pub fn exact_distance_field(spec: &DomainSpec<f64>, grid: &CartesianGrid) -> ScalarField {
    let values = (0..grid.len()).map(|i| spec.signed_distance(&grid.point(i))).collect();
    let mask = classify_nodes(spec, grid);
    ScalarField { grid: Grid::Cartesian(grid.clone()), values, mask }
}

/// Index of the radial node nearest to `r`.
pub fn nearest_radial_node(g: &RadialGrid, r: f64) -> usize {
    let i = locate(&g.nodes, r);
    if i + 1 < g.nodes.len() && (g.nodes[i + 1] - r).abs() < (r - g.nodes[i]).abs() {
        i + 1
    } else {
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_indexing_round_trip() {
        let g = CartesianGrid::covering(&[[-1.0, 1.0], [0.0, 0.5]], 0.25).unwrap();
        assert_eq!(g.shape, [9, 3, 1]);
        for idx in 0..g.len() {
            let c = g.coords(idx);
            assert_eq!(g.index(c[0], c[1], c[2]), idx);
        }
        assert_eq!(g.point(g.index(8, 2, 0)), [1.0, 0.5, 0.0]);
    }

    #[test]
    fn bicubic_reproduces_quadratics() {
        let g = CartesianGrid::covering(&[[0.0, 1.0], [0.0, 1.0]], 0.1).unwrap();
        let f = |p: Point<f64>| 1.0 + p[0] - 2.0 * p[1] + p[0] * p[1] + 0.5 * p[0] * p[0];
        let values = (0..g.len()).map(|i| f(g.point(i))).collect();
        let field = ScalarField::new(Grid::Cartesian(g.clone()), values, vec![NodeKind::Inside; g.len()]).unwrap();
        let x = [0.437, 0.521, 0.0];
        assert!((field.sample(&x).unwrap() - f(x)).abs() < 1e-12);
        assert!(field.sample(&[1.5, 0.5, 0.0]).is_none());
    }
}

/// Signed distance to ∂Ω at every node of `grid` (lattice or radial).
pub fn distance_field(spec: &DomainSpec<f64>, grid: &Grid) -> ScalarField {
    match grid {
        Grid::Cartesian(g) => exact_distance_field(spec, g),
        Grid::Radial(_) => {
            let values: Vec<f64> = (0..grid.len()).map(|i| spec.signed_distance(&grid.point(i))).collect();
            let mask = values
                .iter()
                .map(|d| {
                    if *d > 0.0 {
                        NodeKind::Inside
                    } else if *d == 0.0 {
                        NodeKind::Boundary
                    } else {
                        NodeKind::Outside
                    }
                })
                .collect();
            ScalarField { grid: grid.clone(), values, mask }
        }
    }
}
