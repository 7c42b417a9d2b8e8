use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::io::write_field_binary;
use crate::geometry::{Grid, RadialMetric, ScalarField};

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ScalarField,
    /// Pressure `q = −Φ(u)` per node when the solve ran in the pressure
    /// formulation (finite even where `u` underflows).
    pub pressure: Option<Vec<f64>>,
}

impl Snapshot {
    /// `−Φ(u)` at node `i` from the stored pressure, if any.
    pub fn pressure_at(&self, i: usize) -> Option<f64> {
        self.pressure.as_ref().map(|p| p[i])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeMeta {
    pub scheme: String,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_iterations: usize,
    pub max_newton_per_step: usize,
    pub max_residual: f64,
    pub halvings: usize,
    pub linear_iterations: usize,
    pub nodes: usize,
    pub h_min: f64,
    pub warnings: Vec<String>,
    /// Largest excursion of `u` outside `[0, max(1, boundary max)]`.
    pub range_excess: f64,
}

#[derive(Clone, Debug)]
pub struct FieldSeries {
    pub snapshots: Vec<Snapshot>,
    pub meta: SchemeMeta,
}

impl FieldSeries {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.snapshots[0].field.grid
    }

    /// Snapshot whose time matches `t` to relative precision 1e−9.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1e-300))
    }

    /// Pressure field `q = −Φ(u)` at time `t`, interpolated linearly in `t`
    /// between snapshots. Falls back to `−Φ(u)` evaluated by `to_pressure`
    /// for snapshots without stored pressure.
    pub fn pressure_at_time<F>(&self, t: f64, to_pressure: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64,
    {
        let times = self.times();
        let (lo, hi) = (times[0], times[times.len() - 1]);
        if t < lo * (1.0 - 1e-12) || t > hi * (1.0 + 1e-12) {
            return Err(Error::Range { t, lo, hi });
        }
        let q_of = |s: &Snapshot| -> Vec<f64> {
            match &s.pressure {
                Some(p) => p.clone(),
                None => s.field.values.iter().map(|u| to_pressure(*u)).collect(),
            }
        };
        let k = times.iter().position(|&s| s >= t * (1.0 - 1e-12)).unwrap_or(times.len() - 1);
        if (times[k] - t).abs() <= 1e-12 * t || k == 0 {
            return Ok(q_of(&self.snapshots[k]));
        }
        let (a, b) = (&self.snapshots[k - 1], &self.snapshots[k]);
        let w = (t - a.t) / (b.t - a.t);
        let (qa, qb) = (q_of(a), q_of(b));
        Ok(qa.iter().zip(&qb).map(|(x, y)| (1.0 - w) * x + w * y).collect())
    }

    /// Writes one binary field per snapshot plus `manifest.json`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (k, s) in self.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:04}.bin");
            let f = fs::File::create(dir.join(&name))?;
            write_field_binary(&s.field, BufWriter::new(f))?;
            if let Some(p) = &s.pressure {
                let pname = format!("pressure_{k:04}.bin");
                let pf = ScalarField { grid: s.field.grid.clone(), values: p.clone(), mask: s.field.mask.clone() };
                let f = fs::File::create(dir.join(&pname))?;
                write_field_binary(&pf, BufWriter::new(f))?;
                files.push(ManifestEntry { t: s.t, file: name, pressure_file: Some(pname) });
            } else {
                files.push(ManifestEntry { t: s.t, file: name, pressure_file: None });
            }
        }
        let manifest = Manifest {
            times: self.times(),
            grid: GridSummary::of(self.grid()),
            scheme_meta: self.meta.clone(),
            snapshots: files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub t: f64,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_file: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSummary {
    Cartesian { dim: usize, shape: [usize; 3], h: f64, origin: [f64; 3] },
    Radial { dim: usize, metric: RadialMetric, nodes: usize, r_min: f64, r_max: f64, h_min: f64 },
}

impl GridSummary {
    pub fn of(grid: &Grid) -> Self {
        match grid {
            Grid::Cartesian(g) => GridSummary::Cartesian { dim: g.dim, shape: g.shape, h: g.h, origin: g.origin },
            Grid::Radial(g) => GridSummary::Radial {
                dim: g.dim,
                metric: g.metric,
                nodes: g.nodes.len(),
                r_min: g.nodes[0],
                r_max: g.nodes[g.nodes.len() - 1],
                h_min: grid.spacing(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub times: Vec<f64>,
    pub grid: GridSummary,
    pub scheme_meta: SchemeMeta,
    pub snapshots: Vec<ManifestEntry>,
}
