use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use difflab::geometry::io::write_field_csv;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::run::{Check, Outcome, Table};

pub fn write_table(dir: &Path, table: &Table) -> Result<()> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn checks_json(checks: &[Check]) -> Value {
    serde_json::to_value(checks).expect("checks serialize")
}

/// Writes `report.json`, CSV tables, field dumps and the snapshot series.
pub fn write_outcome(dir: &Path, cfg: &ExperimentConfig, out: &Outcome) -> Result<bool> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let pass = out.checks.iter().all(|c| c.pass);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg,
        "results": out.results,
        "checks": checks_json(&out.checks),
        "pass": pass,
    });
    write_json(&dir.join("report.json"), &report)?;
    for t in &out.tables {
        write_table(dir, t)?;
    }
    for (name, field) in &out.fields {
        let path = dir.join(format!("{name}.csv"));
        let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_field_csv(field, std::io::BufWriter::new(f))?;
    }
    if let Some(series) = &out.series {
        series.export(&dir.join("series")).context("exporting snapshot series")?;
    }
    Ok(pass)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
