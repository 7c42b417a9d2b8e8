//! First-order fast marching for the signed distance to ∂Ω.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::domain::DomainSpec;
use super::field::{classify_nodes, CartesianGrid, Grid, ScalarField};
use crate::error::{Error, Result};

/// Minimum lattice cells per primitive radius accepted by [`fast_march_distance`].
pub const MIN_CELLS_PER_RADIUS: f64 = 8.0;

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Known,
}

/// Solves `|∇d| = 1`, `d = 0` on ∂Ω with the Rouy–Tourin upwind scheme and
/// returns the result signed positive in Ω.
///
/// Nodes with a face neighbor on the other side of ∂Ω are initialized with
/// the exact distance; the march proceeds outward from that band on both
/// sides simultaneously.
pub fn fast_march_distance(spec: &DomainSpec<f64>, grid: &CartesianGrid) -> Result<ScalarField> {
    if grid.dim != spec.dim {
        return Err(Error::Shape(format!("grid has dimension {} but domain has {}", grid.dim, spec.dim)));
    }
    for (j, p) in spec.primitives.iter().enumerate() {
        let cells = p.min_radius(spec.dim) / grid.h;
        if cells < MIN_CELLS_PER_RADIUS {
            return Err(Error::Resolution(format!(
                "primitive {j} ({}) spans {cells:.2} cells per radius, need at least {MIN_CELLS_PER_RADIUS}",
                p.kind_name()
            )));
        }
    }
    let n = grid.len();
    let exact: Vec<f64> = (0..n).map(|i| spec.signed_distance(&grid.point(i))).collect();
    let sign: Vec<f64> = exact.iter().map(|&d| if d > 0.0 { 1.0 } else { -1.0 }).collect();
    let mut dist = vec![f64::INFINITY; n];
    let mut state = vec![State::Far; n];
    let mut heap = BinaryHeap::new();

    for i in 0..n {
        let on_band = exact[i] == 0.0
            || (0..grid.dim).any(|a| {
                [-1isize, 1]
                    .iter()
                    .any(|&s| grid.neighbor(i, a, s).is_some_and(|j| sign[j] != sign[i]))
            });
        if on_band {
            dist[i] = exact[i].abs();
            state[i] = State::Known;
        }
    }
    for i in 0..n {
        if state[i] == State::Known {
            push_neighbors(grid, i, &mut dist, &mut state, &mut heap);
        }
    }
    while let Some(Reverse(Key(d, i))) = heap.pop() {
        if state[i] == State::Known || d > dist[i] {
            continue;
        }
        state[i] = State::Known;
        push_neighbors(grid, i, &mut dist, &mut state, &mut heap);
    }

    let values = dist.iter().zip(&sign).map(|(d, s)| d * s).collect();
    let mask = classify_nodes(spec, grid);
    ScalarField::new(Grid::Cartesian(grid.clone()), values, mask)
}

fn push_neighbors(
    grid: &CartesianGrid,
    i: usize,
    dist: &mut [f64],
    state: &mut [State],
    heap: &mut BinaryHeap<Reverse<Key>>,
) {
    for a in 0..grid.dim {
        for s in [-1isize, 1] {
            if let Some(j) = grid.neighbor(i, a, s) {
                if state[j] == State::Known {
                    continue;
                }
                let cand = upwind_update(grid, j, dist, state);
                if cand < dist[j] {
                    dist[j] = cand;
                    state[j] = State::Trial;
                    heap.push(Reverse(Key(cand, j)));
                }
            }
        }
    }
}

/// Largest root of `Σ_k (T − a_k)₊² = h²` over the known upwind neighbors.
fn upwind_update(grid: &CartesianGrid, i: usize, dist: &[f64], state: &[State]) -> f64 {
    let mut a = [f64::INFINITY; 3];
    for (ax, slot) in a.iter_mut().enumerate().take(grid.dim) {
        for s in [-1isize, 1] {
            if let Some(j) = grid.neighbor(i, ax, s) {
                if state[j] == State::Known {
                    *slot = slot.min(dist[j]);
                }
            }
        }
    }
    let mut vals: Vec<f64> = a[..grid.dim].iter().copied().filter(|v| v.is_finite()).collect();
    vals.sort_by(f64::total_cmp);
    let h = grid.h;
    let mut t = f64::INFINITY;
    for m in 1..=vals.len() {
        let used = &vals[..m];
        let sum: f64 = used.iter().sum();
        let sum2: f64 = used.iter().map(|v| v * v).sum();
        let mf = m as f64;
        let disc = sum * sum - mf * (sum2 - h * h);
        if disc < 0.0 {
            break;
        }
        let cand = (sum + disc.sqrt()) / mf;
        if m < vals.len() && cand > vals[m] {
            t = cand;
            continue;
        }
        t = cand;
        break;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::DomainSpec;

    #[test]
    fn exterior_disk_distance() {
        let spec = DomainSpec::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
        let grid = CartesianGrid::covering(&[[-2.0, 2.0], [-2.0, 2.0]], 0.01).unwrap();
        let f = fast_march_distance(&spec, &grid).unwrap();
        let v = f.sample(&[1.5, 0.0, 0.0]).unwrap();
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }

    #[test]
    fn under_resolved_primitive_rejected() {
        let spec = DomainSpec::ball_exterior(&[0.0, 0.0], 0.05).unwrap();
        let grid = CartesianGrid::covering(&[[-1.0, 1.0], [-1.0, 1.0]], 0.01).unwrap();
        match fast_march_distance(&spec, &grid) {
            Err(Error::Resolution(msg)) => assert!(msg.contains("primitive 0 (ball)")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
