//! Graded one-dimensional meshes and the radial finite-volume operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadialMetric;
use crate::quadrature::gauss_legendre;

/// Mesh grading: spacing `h_min` at anchor points, growing by `ratio` per
/// cell away from them, capped at `h_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub h_max: f64,
    pub h_min: f64,
    pub ratio: f64,
}

impl MeshOptions {
    pub fn uniform(h: f64) -> Self {
        MeshOptions { h_max: h, h_min: h, ratio: 1.0 }
    }

    pub fn graded(h_max: f64, h_min: f64) -> Self {
        MeshOptions { h_max, h_min: h_min.min(h_max), ratio: 1.05 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_max >= self.h_min && self.ratio >= 1.0) {
            return Err(Error::Config(format!(
                "mesh needs 0 < h_min <= h_max and ratio >= 1 (got h_min={}, h_max={}, ratio={})",
                self.h_min, self.h_max, self.ratio
            )));
        }
        Ok(())
    }

    fn spacing(&self, x: f64, anchors: &[f64]) -> f64 {
        let dist = anchors.iter().map(|a| (x - a).abs()).fold(f64::INFINITY, f64::min);
        (self.h_min + (self.ratio - 1.0) * dist).min(self.h_max)
    }
}

/// Nodes on `[lo, hi]` containing both endpoints and every anchor inside
/// the interval, with spacing following [`MeshOptions`].
pub fn graded_nodes(lo: f64, hi: f64, anchors: &[f64], opts: &MeshOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    if !(hi > lo) {
        return Err(Error::Config(format!("empty mesh interval [{lo}, {hi}]")));
    }
    let mut breaks: Vec<f64> = vec![lo, hi];
    breaks.extend(anchors.iter().copied().filter(|a| *a > lo && *a < hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let anchors_all: Vec<f64> = if anchors.is_empty() { vec![lo] } else { anchors.to_vec() };
    let mut nodes = vec![lo];
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        let walk = |c: f64, steps: usize| {
            let mut x = p;
            for _ in 0..steps {
                x += c * opts.spacing(x, &anchors_all);
            }
            x
        };
        let mut m = 0usize;
        let mut x = p;
        while x < q {
            x += opts.spacing(x, &anchors_all);
            m += 1;
        }
        let m = m.max(1);
        // Scale the steps so that exactly m of them reach q.
        let (mut a, mut b) = (0.0, 1.0);
        while walk(b, m) < q {
            b *= 2.0;
        }
        for _ in 0..100 {
            let c = 0.5 * (a + b);
            if walk(c, m) < q {
                a = c;
            } else {
                b = c;
            }
        }
        let c = 0.5 * (a + b);
        let mut x = p;
        for _ in 0..m - 1 {
            x += c * opts.spacing(x, &anchors_all);
            nodes.push(x);
        }
        nodes.push(q);
    }
    Ok(nodes)
}

/// Volume weight of the radial measure: `r^{N−1}`, `sin^{N−1} r` or `sinh^{N−1} r`.
pub fn radial_weight(metric: RadialMetric, dim: usize, r: f64) -> f64 {
    let k = dim as i32 - 1;
    match metric {
        RadialMetric::Euclidean => {
            if k == 0 {
                1.0
            } else {
                r.powi(k)
            }
        }
        RadialMetric::Sphere => r.sin().powi(k),
        RadialMetric::Hyperbolic => r.sinh().powi(k),
    }
}

/// `∫_a^b w(r) dr` for the radial weight.
pub fn radial_volume(metric: RadialMetric, dim: usize, a: f64, b: f64) -> f64 {
    match metric {
        RadialMetric::Euclidean => {
            let n = dim as i32;
            (b.powi(n) - a.powi(n)) / n as f64
        }
        _ => gauss_legendre(|r| radial_weight(metric, dim, r), a, b, 2),
    }
}

/// Finite-volume discretization of the radial Laplace–Beltrami operator
/// `(1/w)(w f')'` on a node set: node `i` owns the cell between the
/// midpoints of its neighboring intervals.
#[derive(Clone, Debug)]
pub struct RadialOperator {
    pub metric: RadialMetric,
    pub dim: usize,
    pub nodes: Vec<f64>,
    /// Cell measures `∫ w` over each control volume.
    pub volumes: Vec<f64>,
    /// `w(face)/Δx` for the face between nodes `i` and `i+1`.
    pub conductance: Vec<f64>,
}

impl RadialOperator {
    pub fn new(metric: RadialMetric, dim: usize, nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::Config("radial mesh needs at least 3 nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("radial mesh must be strictly increasing".into()));
        }
        let faces: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let conductance: Vec<f64> = nodes
            .windows(2)
            .zip(&faces)
            .map(|(w, f)| radial_weight(metric, dim, *f) / (w[1] - w[0]))
            .collect();
        let volumes: Vec<f64> = (0..n)
            .map(|i| {
                let a = if i == 0 { nodes[0] } else { faces[i - 1] };
                let b = if i == n - 1 { nodes[n - 1] } else { faces[i] };
                radial_volume(metric, dim, a, b)
            })
            .collect();
        Ok(RadialOperator { metric, dim, nodes, volumes, conductance })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(L f)_i` at node `i` (interior or zero-flux end node).
    pub fn apply_at(&self, f: &[f64], i: usize) -> f64 {
        let n = self.nodes.len();
        let mut flux = 0.0;
        if i + 1 < n {
            flux += self.conductance[i] * (f[i + 1] - f[i]);
        }
        if i > 0 {
            flux -= self.conductance[i - 1] * (f[i] - f[i - 1]);
        }
        flux / self.volumes[i]
    }

    /// Volume fraction of each control volume covered by `[a, b]`.
    pub fn cell_fractions(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let lo = if i == 0 { self.nodes[0] } else { 0.5 * (self.nodes[i - 1] + self.nodes[i]) };
                let hi = if i == n - 1 { self.nodes[n - 1] } else { 0.5 * (self.nodes[i] + self.nodes[i + 1]) };
                let (x, y) = (lo.max(a), hi.min(b));
                if y <= x || self.volumes[i] <= 0.0 {
                    0.0
                } else {
                    (radial_volume(self.metric, self.dim, x, y) / self.volumes[i]).clamp(0.0, 1.0)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_hits_anchors_and_grades() {
        let opts = MeshOptions::graded(0.1, 0.001);
        let nodes = graded_nodes(0.0, 3.0, &[0.0, 1.0], &opts).unwrap();
        assert_eq!(nodes[0], 0.0);
        assert_eq!(*nodes.last().unwrap(), 3.0);
        assert!(nodes.contains(&1.0));
        let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| *s > 0.0 && *s <= 0.1 + 1e-12));
        assert!(steps[0] < 0.0011);
        for w in steps.windows(2) {
            assert!(w[1] / w[0] < 1.06 && w[0] / w[1] < 1.06);
        }
    }

    #[test]
    fn operator_is_exact_on_quadratics_in_3d() {
        // Δ r² = 2N for the Euclidean radial Laplacian.
        let nodes: Vec<f64> = (0..=40).map(|k| 1.0 + k as f64 * 0.05).collect();
        let op = RadialOperator::new(RadialMetric::Euclidean, 3, nodes.clone()).unwrap();
        let f: Vec<f64> = nodes.iter().map(|r| r * r).collect();
        for i in 1..40 {
            assert!((op.apply_at(&f, i) - 6.0).abs() < 1e-3);
        }
    }

    #[test]
    fn cell_fractions_sum_to_interval_volume() {
        let nodes: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let op = RadialOperator::new(RadialMetric::Euclidean, 2, nodes).unwrap();
        let fr = op.cell_fractions(0.0, 1.0);
        let covered: f64 = fr.iter().zip(&op.volumes).map(|(f, v)| f * v).sum();
        assert!((covered - 0.5).abs() < 1e-14);
        assert!((fr[10] - op.cell_fractions(0.0, 1.0)[10]).abs() < 1e-15 && fr[10] > 0.0 && fr[10] < 1.0);
    }
}
