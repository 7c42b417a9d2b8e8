//! One function per experiment. Each returns the report body, the list of
//! checks that decide the exit status, CSV tables and field dumps.

use anyhow::{anyhow, Context, Result};
use difflab::asymptotics::{convergence_report, gradient_monitor, pressure_field, KSpec, PressureSeries};
use difflab::barrier::{default_barrier, default_half_width, default_initial_data, solve_barrier_ode};
use difflab::geometry::{distance_field, DomainSpec, ScalarField};
use difflab::manifold::{
    euclidean_limit_check, kernel_sandwich_check, manifold_varadhan_report, solve_radial_heat_manifold, ManifoldSpec,
};
use difflab::nonlinearity::Nonlinearity;
use difflab::pde::{solve_cauchy, solve_dirichlet, FieldSeries, ProblemSpec};
use difflab::symmetry::{balance_law_check, curvature_constancy, reflection_comparator, stationarity_test, Plane};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SymmetryMode};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: String,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, measured: impl Into<String>, threshold: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), measured: measured.into(), threshold: threshold.into(), pass }
    }
}

pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, headers: &[&str]) -> Self {
        Table { name: name.into(), headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub series: Option<FieldSeries>,
    pub fields: Vec<(String, ScalarField)>,
}

impl Outcome {
    fn new(results: Value, checks: Vec<Check>) -> Self {
        Outcome { results, checks, tables: Vec::new(), series: None, fields: Vec::new() }
    }
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

fn nonlinearity(cfg: &ExperimentConfig) -> Result<Nonlinearity<f64>> {
    cfg.nonlinearity.as_ref().ok_or_else(|| anyhow!("nonlinearity is required"))?.build().context("nonlinearity")
}

fn domain(cfg: &ExperimentConfig) -> Result<DomainSpec<f64>> {
    cfg.domain.as_ref().ok_or_else(|| anyhow!("domain is required"))?.build().context("domain")
}

fn problem(cfg: &ExperimentConfig) -> Result<ProblemSpec> {
    let setup = cfg.setup.clone().ok_or_else(|| anyhow!("setup is required"))?;
    let mut ps = ProblemSpec::new(domain(cfg)?, nonlinearity(cfg)?, setup, cfg.snapshots()).context("problem")?;
    if let Some(r) = cfg.numerics.truncation_radius {
        ps = ps.with_truncation(r).context("numerics.truncation_radius")?;
    }
    Ok(ps)
}

fn solve(cfg: &ExperimentConfig, ps: &ProblemSpec) -> Result<FieldSeries> {
    let opts = cfg.solver_options()?;
    let series = if ps.setup.is_dirichlet() { solve_dirichlet(ps, &opts) } else { solve_cauchy(ps, &opts) };
    series.context("pde solve")
}

/// Final snapshot as a field dump, for CSV export.
fn final_field(series: &FieldSeries) -> (String, ScalarField) {
    let s = series.snapshots.last().expect("nonempty series");
    (format!("u_t{:.3e}", s.t), s.field.clone())
}

fn range_check(series: &FieldSeries) -> Check {
    let excess = series.meta.range_excess.max(0.0);
    Check::new("solution stays in range", format!("{excess:.3e}"), "<= 1e-8", excess <= 1e-8)
}

pub fn solve_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ps = problem(cfg)?;
    let series = solve(cfg, &ps)?;
    let mut table = Table::new("snapshots", &["t", "min_u", "max_u"]);
    for s in &series.snapshots {
        let (lo, hi) = s
            .field
            .values
            .iter()
            .zip(&s.field.mask)
            .filter(|(_, m)| m.in_domain())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (v, _)| (a.min(*v), b.max(*v)));
        table.push(vec![num(s.t), num(lo), num(hi)]);
    }
    let results = json!({ "times": series.times(), "scheme_meta": series.meta });
    let mut out = Outcome::new(results, vec![range_check(&series)]);
    out.tables.push(table);
    out.fields.push(final_field(&series));
    out.series = Some(series);
    Ok(out)
}

/// `sup_K |v^ε(·, 1) − d²/4|`.
fn pressure_error(series: &FieldSeries, nl: &Nonlinearity<f64>, dist: &ScalarField, k: &KSpec, eps: f64) -> Result<f64> {
    let v = pressure_field(series, nl, eps, 1.0)?;
    Ok((0..v.values.len())
        .filter(|&i| dist.mask[i].in_domain() && k.contains(dist.values[i]))
        .map(|i| (v.values[i] - 0.25 * dist.values[i].powi(2)).abs())
        .fold(0.0, f64::max))
}

pub fn varadhan_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.varadhan;
    let ps = problem(cfg)?;
    let series = solve(cfg, &ps)?;
    let dist = distance_field(&ps.domain, series.grid());
    let k = KSpec::new(p.k_margin.unwrap(), p.k_far);
    let rep = convergence_report(&series, &ps.nonlinearity, &dist, &k, p.envelope_tol.unwrap())
        .context("varadhan convergence report")?;
    let mut table = Table::new("varadhan", &["t", "sup_error", "argmax_x", "argmax_y", "argmax_z", "flagged_in_k"]);
    for (i, t) in rep.times.iter().enumerate() {
        let a = rep.argmax[i];
        table.push(vec![
            num(*t),
            num(rep.sup_errors[i]),
            num(a[0]),
            num(a[1]),
            num(a[2]),
            rep.flagged_in_k[i].to_string(),
        ]);
    }
    let final_error = rep.final_error();
    let limit = p.max_final_error.unwrap();
    let mut checks = vec![
        Check::new("final sup error", format!("{final_error:.4e}"), format!("<= {limit}"), final_error <= limit),
        Check::new(
            "envelope at smallest time",
            format!("margins ({:.4}, {:.4})", rep.envelope.lower_margin, rep.envelope.upper_margin),
            format!(">= -{}", rep.envelope.tol),
            rep.envelope.pass,
        ),
    ];
    if p.require_decreasing.unwrap() {
        checks.push(Check::new(
            "sup error decreases as t decreases",
            format!("{:?}", rep.sup_errors.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>()),
            "strictly decreasing",
            rep.decreasing,
        ));
    }
    let mut pressure_errors = Vec::new();
    let mut tables = vec![table];
    if let Some(eps) = &p.epsilons {
        let mut pt = Table::new("pressure_errors", &["eps", "sup_error"]);
        for &e in eps {
            let err = pressure_error(&series, &ps.nonlinearity, &dist, &k, e)?;
            pt.push(vec![num(e), num(err)]);
            pressure_errors.push(json!({ "eps": e, "sup_error": err }));
        }
        tables.push(pt);
    }
    let results = json!({
        "times": rep.times,
        "sup_errors": rep.sup_errors,
        "rate": rep.rate_constant,
        "envelope_pass": rep.envelope.pass,
        "report": rep,
        "pressure_errors": pressure_errors,
        "scheme_meta": series.meta,
    });
    let mut out = Outcome::new(results, checks);
    out.tables = tables;
    out.fields.push(final_field(&series));
    out.series = Some(series);
    Ok(out)
}

pub fn pressure_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.pressure;
    let ps = problem(cfg)?;
    let series = solve(cfg, &ps)?;
    let eps = p.epsilons.clone().unwrap();
    let refs = p.ref_times.clone().unwrap();
    let pser = PressureSeries::from_series(&series, &ps.nonlinearity, &eps, &refs).context("pressure series")?;
    let k = KSpec::new(p.k_margin.unwrap(), p.k_far);
    let rep = gradient_monitor(&pser, &distance_field(&ps.domain, series.grid()), &k, p.growth_limit.unwrap())
        .context("gradient monitor")?;
    let mut table = Table::new("pressure", &["eps", "v_min", "v_max", "grad_sup", "holder", "m", "lambda", "z_max"]);
    for s in &rep.stats {
        table.push(vec![num(s.eps), num(s.v_min), num(s.v_max), num(s.grad_sup), num(s.holder), num(s.m), num(s.lambda), num(s.z_max)]);
    }
    let g = &rep.growth;
    let checks = vec![
        Check::new("v_min > 0 on K", format!("{}", rep.positive), "true", rep.positive),
        Check::new(
            "growth factors across eps",
            format!("v_min {:.3}, v_max {:.3}, grad {:.3}, holder {:.3}", g.v_min, g.v_max, g.grad_sup, g.holder),
            format!("<= {}", rep.growth_limit),
            g.max() <= rep.growth_limit,
        ),
    ];
    let results = json!({ "report": rep, "scheme_meta": series.meta });
    let mut out = Outcome::new(results, checks);
    out.tables.push(table);
    out.series = Some(series);
    Ok(out)
}

pub fn barrier_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let b = &cfg.barrier;
    let nl = nonlinearity(cfg)?;
    let tol = b.tol.unwrap();
    let (h0, big_h0) = match (b.h0, b.big_h0) {
        (Some(h), Some(hh)) => (h, hh),
        _ => default_initial_data(nl.delta1(), nl.delta2()).context("barrier initial data")?,
    };
    let half_width = b.half_width.unwrap_or_else(|| default_half_width(nl.delta2(), tol));
    let mut bs = if b.h0.is_none() && b.half_width.is_none() {
        default_barrier(&nl, tol)
    } else {
        solve_barrier_ode(&nl, h0, big_h0, half_width, tol)
    }
    .context("barrier ODE")?;
    if let Some(s) = b.shift {
        bs = bs.with_shift(s)?;
    }
    let mut table = Table::new("barrier", &["xi", "h", "H"]);
    for i in 0..bs.xi.len() {
        table.push(vec![num(bs.xi[i]), num(bs.h[i]), num(bs.big_h[i])]);
    }
    let summary = bs.summary();
    let c = &bs.checks;
    let checks = vec![
        Check::new("h decreasing", c.h_decreasing.to_string(), "true", c.h_decreasing),
        Check::new("H negative", c.big_h_negative.to_string(), "true", c.big_h_negative),
        Check::new("Gaussian envelope", format!("excess {:.3e}", c.envelope_excess), "<= 0", c.envelope_pass),
        Check::new("limits within bounds", c.limits_within_bounds.to_string(), "true", c.limits_within_bounds),
        Check::new("limit ordering", c.ordering.to_string(), "true", c.ordering),
    ];
    let results = json!({
        "h0": summary.h0,
        "H0": summary.big_h0,
        "delta": summary.delta,
        "limits": summary.limits,
        "envelope_pass": summary.envelope_pass,
        "summary": summary,
    });
    let mut out = Outcome::new(results, checks);
    out.tables.push(table);
    Ok(out)
}

/// Picks `n` of the points at random, keeping their original order.
fn subsample<T: Clone>(points: &[T], n: usize, seed: u64) -> Vec<T> {
    if n >= points.len() {
        return points.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, points.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i].clone()).collect()
}

fn expectation(found: bool, expect: Option<bool>, what: &str) -> Vec<Check> {
    match expect {
        Some(e) => vec![Check::new(&format!("{what} matches expectation"), found.to_string(), e.to_string(), found == e)],
        None => Vec::new(),
    }
}

pub fn symmetry_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = &cfg.symmetry;
    let spec = domain(cfg)?;
    let mode = s.mode.unwrap();
    let tol = s.tol.unwrap();
    let samples = s.samples.unwrap();
    if mode == SymmetryMode::Curvature {
        let rep = curvature_constancy(&spec, s.offset.unwrap(), samples, tol).context("curvature constancy")?;
        let checks = expectation(rep.sphere_consistent, s.expect, "sphere_consistent");
        let results = json!({ "mode": "curvature", "sphere_consistent": rep.sphere_consistent, "report": rep });
        return Ok(Outcome::new(results, checks));
    }
    let ps = problem(cfg)?;
    let series = solve(cfg, &ps)?;
    let mut checks = vec![range_check(&series)];
    let results = match mode {
        SymmetryMode::Stationary => {
            let dense = spec.parallel_surface(s.offset.unwrap(), 4 * samples).context("parallel surface")?;
            let surface = subsample(&dense, samples, cfg.seed.unwrap());
            let rep = stationarity_test(&series, &surface).context("stationarity test")?;
            let level = rep.max_rel_spread <= tol;
            checks.extend(expectation(level, s.expect, "level_surface"));
            json!({ "mode": "stationary", "level_surface": level, "tol": tol, "report": rep })
        }
        SymmetryMode::Reflect => {
            let plane = Plane::new(s.plane_normal.unwrap(), s.plane_offset.unwrap())?;
            let rep = reflection_comparator(&series, &spec, plane, s.max_radius.unwrap(), tol).context("reflection")?;
            checks.extend(expectation(rep.symmetric, s.expect, "symmetric"));
            json!({ "mode": "reflect", "symmetric": rep.symmetric, "strictly_ordered": rep.strictly_ordered, "report": rep })
        }
        SymmetryMode::Balance => {
            let rep = balance_law_check(&series, &ps.nonlinearity, s.center.unwrap(), s.radii.as_ref().unwrap(), samples, tol)
                .context("balance law")?;
            checks.extend(expectation(rep.pass, s.expect, "balanced"));
            json!({ "mode": "balance", "balanced": rep.pass, "report": rep })
        }
        SymmetryMode::Curvature => unreachable!("handled above"),
    };
    let mut results = results;
    results["scheme_meta"] = serde_json::to_value(&series.meta)?;
    let mut out = Outcome::new(results, checks);
    out.fields.push(final_field(&series));
    out.series = Some(series);
    Ok(out)
}

pub fn manifold_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.manifold;
    let m = ManifoldSpec::new(p.model.unwrap(), p.dim.unwrap())?;
    let domain = p.domain.unwrap();
    let setup = p.setup.unwrap();
    let opts = cfg.solver_options()?;
    let times = cfg.snapshots();
    let k = KSpec::new(p.k_margin.unwrap(), None);
    let series = solve_radial_heat_manifold(&m, &domain, &setup, &times, &opts).context("manifold solve")?;
    let mut checks = Vec::new();
    let mut results = json!({ "model": m.model, "dim": m.dim, "domain": domain, "scheme_meta": series.meta });
    let mut tables = Vec::new();
    if matches!(setup, difflab::manifold::ManifoldSetup::Dirichlet { .. }) {
        let rep = manifold_varadhan_report(&series, &m, &domain, &k).context("manifold varadhan report")?;
        let mut t = Table::new("varadhan", &["t", "sup_error"]);
        for (a, b) in rep.times.iter().zip(&rep.sup_errors) {
            t.push(vec![num(*a), num(*b)]);
        }
        tables.push(t);
        let limit = p.max_final_error.unwrap();
        checks.push(Check::new("final sup error", format!("{:.4e}", rep.final_error()), format!("<= {limit}"), rep.final_error() <= limit));
        checks.push(Check::new("sup error decreases as t decreases", format!("{:?}", rep.sup_errors), "strictly decreasing", rep.decreasing));
        results["varadhan"] = json!({ "times": rep.times, "sup_errors": rep.sup_errors, "rate": rep.rate_constant, "report": rep });
    }
    if let Some(rho) = p.rho {
        let cauchy = match setup {
            difflab::manifold::ManifoldSetup::Cauchy => series.clone(),
            _ => solve_radial_heat_manifold(&m, &domain, &difflab::manifold::ManifoldSetup::Cauchy, &times, &opts)
                .context("manifold Cauchy solve")?,
        };
        let tol = p.sandwich_tol.unwrap();
        let rep = kernel_sandwich_check(&cauchy, &m, &domain, rho, &k, &opts, tol).context("kernel sandwich")?;
        checks.push(Check::new(
            "kernel sandwich",
            format!("{} violations of {}", rep.violations, rep.checked),
            format!("0 at tol {tol}"),
            rep.passed(),
        ));
        results["kernel_sandwich"] = serde_json::to_value(&rep)?;
    }
    if let Some(scale) = p.euclidean_scale {
        let tol = p.euclidean_tol.unwrap();
        let rep = euclidean_limit_check(&m, &domain, &setup, &times, scale, &opts, tol).context("Euclidean limit")?;
        checks.push(Check::new("Euclidean limit", format!("{:.3e}", rep.max_rel_error), format!("<= {tol}"), rep.pass));
        results["euclidean_limit"] = serde_json::to_value(&rep)?;
    }
    let mut out = Outcome::new(results, checks);
    out.tables = tables;
    out.fields.push(final_field(&series));
    out.series = Some(series);
    Ok(out)
}
