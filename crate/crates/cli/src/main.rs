mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use difflab::acceptance::{run_criterion, suite_ids, CriterionRow};
use difflab::manifold::{GeodesicDomain, Model};
use serde_json::json;

use config::{ConfigError, Experiment, ExperimentConfig, SymmetryMode};
use run::Outcome;

#[derive(Parser)]
#[command(name = "difflab", version, about = "Small-time heat-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file (a previous report.json is also accepted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides DIFFLAB_OUT and the config)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct SolverFlags {
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Comma-separated snapshot times
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snapshots: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    truncation_radius: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the heat problem and dump snapshots
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Small-time limit of -4t log u against the squared distance
    Varadhan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, allow_negative_numbers = true)]
        k_margin: Option<f64>,
        /// Comma-separated evaluation times (replaces the snapshots)
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        times: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        epsilons: Option<Vec<f64>>,
    },
    /// Rescaled pressure bounds across epsilon
    Pressure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        epsilons: Option<Vec<f64>>,
    },
    /// Barrier ODE profile
    Barrier {
        #[command(flatten)]
        common: Common,
    },
    /// Symmetry detectors
    Symmetry {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<SymmetryMode>,
    },
    /// Heat flow on the sphere or hyperbolic space
    Manifold {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, value_parser = parse_model)]
        model: Option<Model>,
        #[arg(long)]
        dim: Option<usize>,
        /// Geodesic annulus radii
        #[arg(long, num_args = 2, value_names = ["R0", "R1"], allow_negative_numbers = true)]
        annulus: Option<Vec<f64>>,
    },
    /// Acceptance criteria
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// acceptance or full
        #[arg(long = "suite")]
        suite_flag: Option<String>,
        suite: Option<String>,
    },
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(json!(s)).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<SymmetryMode, String> {
    parse_enum(s)
}

fn parse_model(s: &str) -> Result<Model, String> {
    parse_enum(s)
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => config::load(p)?,
        None => ExperimentConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    Ok(cfg)
}

fn apply_solver(cfg: &mut ExperimentConfig, s: &SolverFlags) {
    let n = &mut cfg.numerics;
    n.h = s.h.or(n.h);
    n.dt0 = s.dt0.or(n.dt0);
    n.t_end = s.t_end.or(n.t_end);
    if s.snapshots.is_some() {
        n.snapshots = s.snapshots.clone();
    }
    n.truncation_radius = s.truncation_radius.or(n.truncation_radius);
}

fn execute(cfg: &ExperimentConfig, kind: Experiment) -> Result<Outcome> {
    match kind {
        Experiment::Solve => run::solve_experiment(cfg),
        Experiment::Varadhan => run::varadhan_experiment(cfg),
        Experiment::Pressure => run::pressure_experiment(cfg),
        Experiment::Barrier => run::barrier_experiment(cfg),
        Experiment::Symmetry => run::symmetry_experiment(cfg),
        Experiment::Manifold => run::manifold_experiment(cfg),
        Experiment::Acceptance => unreachable!("acceptance has its own runner"),
    }
}

fn experiment(cfg: ExperimentConfig, kind: Experiment, out: Option<&PathBuf>) -> Result<bool> {
    let cfg = cfg.resolve(kind)?;
    let dir = cfg.out_dir(out.map(|p| p.as_path()));
    let outcome = execute(&cfg, kind)?;
    let pass = report::write_outcome(&dir, &cfg, &outcome)?;
    for c in &outcome.checks {
        println!("[{}] {}: {} (threshold {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured, c.threshold);
    }
    println!("{kind}: {} ; report in {}", if pass { "pass" } else { "FAIL" }, dir.join("report.json").display());
    Ok(pass)
}

fn run_rows(ids: &[&'static str], threads: usize) -> Vec<CriterionRow> {
    let one = |id: &str| {
        run_criterion(id).unwrap_or_else(|e| CriterionRow {
            id: id.into(),
            name: String::new(),
            measured: format!("error: {e}"),
            threshold: String::new(),
            pass: false,
            seconds: 0.0,
            details: Default::default(),
        })
    };
    if threads <= 1 {
        return ids.iter().map(|id| one(id)).collect();
    }
    let mut rows: Vec<Option<CriterionRow>> = vec![None; ids.len()];
    for chunk in ids.iter().enumerate().collect::<Vec<_>>().chunks(threads) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|(i, id)| (*i, s.spawn(|| one(id)))).collect();
            for (i, h) in handles {
                rows[i] = Some(h.join().expect("criterion thread panicked"));
            }
        });
    }
    rows.into_iter().map(|r| r.expect("every criterion ran")).collect()
}

fn acceptance(mut cfg: ExperimentConfig, suite: Option<String>, out: Option<&PathBuf>) -> Result<bool> {
    if suite.is_some() {
        cfg.acceptance.suite = suite;
    }
    let cfg = cfg.resolve(Experiment::Acceptance)?;
    let suite = config::parse_suite(cfg.acceptance.suite.as_deref().unwrap_or("acceptance"))?;
    let dir = cfg.out_dir(out.map(|p| p.as_path()));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let rows = run_rows(&suite_ids(suite), cfg.threads.unwrap_or(1));
    let mut table = csv::Writer::from_path(dir.join("summary.csv"))?;
    table.write_record(["id", "name", "measured", "threshold", "pass"])?;
    for r in &rows {
        println!("{}", r.line());
        table.write_record([&r.id, &r.name, &r.measured, &r.threshold, &r.pass.to_string()])?;
    }
    table.flush()?;
    let pass = rows.iter().all(|r| r.pass);
    let summary: Vec<_> = rows
        .iter()
        .map(|r| json!({ "id": r.id, "name": r.name, "measured": r.measured, "threshold": r.threshold, "pass": r.pass, "details": r.details }))
        .collect();
    report::write_json(
        &dir.join("summary.json"),
        &json!({ "schema_version": config::SCHEMA_VERSION, "config": cfg, "criteria": summary, "pass": pass }),
    )?;
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{passed} of {} criteria passed", rows.len());
    if !pass {
        let failing: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
        eprintln!("failing criteria: {}", failing.join(", "));
    }
    Ok(pass)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { common, solver } => {
            let mut cfg = load(&common)?;
            apply_solver(&mut cfg, &solver);
            experiment(cfg, Experiment::Solve, common.out.as_ref())
        }
        Command::Varadhan { common, solver, k_margin, times, epsilons } => {
            let mut cfg = load(&common)?;
            apply_solver(&mut cfg, &solver);
            if times.is_some() {
                cfg.numerics.snapshots = times;
            }
            cfg.varadhan.k_margin = k_margin.or(cfg.varadhan.k_margin);
            if epsilons.is_some() {
                cfg.varadhan.epsilons = epsilons;
            }
            experiment(cfg, Experiment::Varadhan, common.out.as_ref())
        }
        Command::Pressure { common, solver, epsilons } => {
            let mut cfg = load(&common)?;
            apply_solver(&mut cfg, &solver);
            if epsilons.is_some() {
                cfg.pressure.epsilons = epsilons;
            }
            experiment(cfg, Experiment::Pressure, common.out.as_ref())
        }
        Command::Barrier { common } => {
            let cfg = load(&common)?;
            experiment(cfg, Experiment::Barrier, common.out.as_ref())
        }
        Command::Symmetry { common, solver, mode } => {
            let mut cfg = load(&common)?;
            apply_solver(&mut cfg, &solver);
            cfg.symmetry.mode = mode.or(cfg.symmetry.mode);
            experiment(cfg, Experiment::Symmetry, common.out.as_ref())
        }
        Command::Manifold { common, solver, model, dim, annulus } => {
            let mut cfg = load(&common)?;
            apply_solver(&mut cfg, &solver);
            cfg.manifold.model = model.or(cfg.manifold.model);
            cfg.manifold.dim = dim.or(cfg.manifold.dim);
            if let Some(a) = annulus {
                cfg.manifold.domain = Some(GeodesicDomain::Annulus { inner: a[0], outer: a[1] });
            }
            experiment(cfg, Experiment::Manifold, common.out.as_ref())
        }
        Command::Acceptance { common, suite_flag, suite } => {
            let cfg = load(&common)?;
            acceptance(cfg, suite_flag.or(suite), common.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<ConfigError>() || matches!(c.downcast_ref::<difflab::Error>(), Some(difflab::Error::Config(_)))) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
