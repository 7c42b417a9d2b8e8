//! Experiment configuration: a JSON document whose sections are optional,
//! filled from per-experiment defaults and then from command-line flags.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use difflab::geometry::{DomainConfig, DomainKind, PrimitiveConfig};
use difflab::manifold::{GeodesicDomain, ManifoldSetup, ManifoldSpec, Model};
use difflab::nonlinearity::NonlinearitySpec;
use difflab::pde::{DtPolicy, Formulation, MeshOptions, Setup, SolverOptions};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "DIFFLAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Solve,
    Varadhan,
    Pressure,
    Barrier,
    Symmetry,
    Manifold,
    Acceptance,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Invalid configuration value, named by its JSON path.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Largest mesh spacing (the lattice spacing on Cartesian grids).
    pub h: Option<f64>,
    /// Spacing at boundaries on graded radial meshes; `h` gives a uniform mesh.
    pub h_min: Option<f64>,
    pub dt0: Option<f64>,
    pub dt_growth: Option<f64>,
    pub dt_max: Option<f64>,
    /// Cap on `dt/t`; selects the relative step policy.
    pub dt_rel: Option<f64>,
    pub formulation: Option<Formulation>,
    pub t_end: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub truncation_radius: Option<f64>,
    pub force_lattice: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaradhanParams {
    pub k_margin: Option<f64>,
    pub k_far: Option<f64>,
    pub envelope_tol: Option<f64>,
    /// Threshold on the sup error at the smallest time.
    pub max_final_error: Option<f64>,
    pub require_decreasing: Option<bool>,
    /// Optional ε values for which `sup_K |v^ε(·,1) − d²/4|` is also reported.
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureParams {
    pub epsilons: Option<Vec<f64>>,
    pub ref_times: Option<Vec<f64>>,
    pub growth_limit: Option<f64>,
    pub k_margin: Option<f64>,
    pub k_far: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    pub h0: Option<f64>,
    #[serde(rename = "H0")]
    pub big_h0: Option<f64>,
    pub half_width: Option<f64>,
    pub tol: Option<f64>,
    pub shift: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryMode {
    Stationary,
    Reflect,
    Curvature,
    Balance,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryParams {
    pub mode: Option<SymmetryMode>,
    /// Parallel-surface offset R (stationary and curvature modes).
    pub offset: Option<f64>,
    pub samples: Option<usize>,
    pub plane_normal: Option<[f64; 3]>,
    pub plane_offset: Option<f64>,
    pub max_radius: Option<f64>,
    pub center: Option<[f64; 3]>,
    pub radii: Option<Vec<f64>>,
    pub tol: Option<f64>,
    /// Expected detector outcome; when set, a mismatch fails the run.
    pub expect: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldParams {
    pub model: Option<Model>,
    pub dim: Option<usize>,
    pub domain: Option<GeodesicDomain>,
    pub setup: Option<ManifoldSetup>,
    pub k_margin: Option<f64>,
    pub max_final_error: Option<f64>,
    /// Collar width for the kernel sandwich; skipped when absent.
    pub rho: Option<f64>,
    pub sandwich_tol: Option<f64>,
    /// Shrink factor for the Euclidean-limit check; skipped when absent.
    pub euclidean_scale: Option<f64>,
    pub euclidean_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceParams {
    pub suite: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearitySpec>,
    #[serde(default)]
    pub setup: Option<Setup>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub varadhan: VaradhanParams,
    #[serde(default)]
    pub pressure: PressureParams,
    #[serde(default)]
    pub barrier: BarrierParams,
    #[serde(default)]
    pub symmetry: SymmetryParams,
    #[serde(default)]
    pub manifold: ManifoldParams,
    #[serde(default)]
    pub acceptance: AcceptanceParams,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

/// Reads a config file. A report written by this tool is also accepted:
/// its embedded `config` is used.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    if let Some(embedded) = value.get("config").filter(|_| value.get("results").is_some()) {
        return serde_json::from_value(embedded.clone())
            .map_err(|e| invalid(format!("{}: embedded config: {e}", path.display())));
    }
    serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

fn half_line() -> DomainConfig {
    DomainConfig {
        kind: DomainKind::Exterior,
        primitives: vec![PrimitiveConfig::Ball { center: vec![0.0], radius: 1.0 }],
        bbox: None,
        h: None,
    }
}

fn unit_disk(kind: DomainKind) -> DomainConfig {
    DomainConfig {
        kind,
        primitives: vec![PrimitiveConfig::Ball { center: vec![0.0, 0.0], radius: 1.0 }],
        bbox: None,
        h: None,
    }
}

fn linear() -> NonlinearitySpec {
    NonlinearitySpec { name: "linear".into(), slope: Some(1.0), amplitude: None, delta1: 1.0, delta2: 1.0 }
}

fn sin_perturbed() -> NonlinearitySpec {
    NonlinearitySpec { name: "sin-perturbed".into(), slope: None, amplitude: Some(0.25), delta1: 0.75, delta2: 1.25 }
}

/// Defaults of each experiment, before the config file and flags apply.
fn defaults(kind: Experiment) -> ExperimentConfig {
    let mut c = ExperimentConfig { experiment: Some(kind), ..Default::default() };
    let n = &mut c.numerics;
    match kind {
        Experiment::Solve => {
            c.domain = Some(unit_disk(DomainKind::Exterior));
            c.nonlinearity = Some(sin_perturbed());
            c.setup = Some(Setup::DirichletConst { value: 1.0 });
            n.h = Some(0.01);
            n.h_min = Some(1e-3);
            n.snapshots = Some(vec![1e-3, 1e-2, 1e-1]);
        }
        Experiment::Varadhan => {
            c.domain = Some(half_line());
            c.nonlinearity = Some(linear());
            c.setup = Some(Setup::DirichletConst { value: 1.0 });
            n.h = Some(0.0025);
            n.h_min = Some(5e-4);
            n.dt_rel = Some(2e-3);
            n.formulation = Some(Formulation::Pressure);
            n.snapshots = Some(vec![1e-4, 1e-3, 1e-2]);
            n.truncation_radius = Some(4.0);
        }
        Experiment::Pressure => {
            c.domain = Some(half_line());
            c.nonlinearity = Some(linear());
            c.setup = Some(Setup::DirichletConst { value: 1.0 });
            n.h = Some(0.005);
            n.h_min = Some(5e-4);
            n.dt_rel = Some(2e-3);
            n.formulation = Some(Formulation::Pressure);
            n.truncation_radius = Some(6.0);
        }
        Experiment::Barrier => {
            c.nonlinearity = Some(sin_perturbed());
        }
        Experiment::Symmetry => {
            c.domain = Some(unit_disk(DomainKind::Interior));
            c.nonlinearity = Some(linear());
            c.setup = Some(Setup::DirichletConst { value: 1.0 });
            n.h = Some(0.02);
            n.snapshots = Some(vec![0.02, 0.05, 0.1]);
            n.force_lattice = Some(true);
        }
        Experiment::Manifold => {
            n.h = Some(0.005);
            n.h_min = Some(5e-4);
            n.dt_rel = Some(2e-3);
            n.formulation = Some(Formulation::Pressure);
            n.snapshots = Some(vec![1e-4, 1e-3, 1e-2]);
        }
        Experiment::Acceptance => {}
    }
    c
}

fn fill<T: Clone>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{path} must be positive, got {v}")))
    }
}

fn positive_list(path: &str, vs: &[f64]) -> Result<()> {
    if vs.is_empty() {
        return Err(invalid(format!("{path} must not be empty")));
    }
    for (i, v) in vs.iter().enumerate() {
        positive(&format!("{path}[{i}]"), *v)?;
    }
    Ok(())
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    v
}

impl ExperimentConfig {
    /// Fills every unset field from the defaults of `kind` and validates
    /// the result. The resolved config is what reports embed.
    pub fn resolve(mut self, kind: Experiment) -> Result<Self> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(invalid(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")));
            }
        }
        if let Some(e) = self.experiment {
            if e != kind {
                return Err(invalid(format!("experiment is {e:?} but the subcommand is {kind}")));
            }
        }
        let base = defaults(kind);
        self.schema_version = Some(SCHEMA_VERSION);
        self.experiment = Some(kind);
        fill(&mut self.seed, 0);
        if self.domain.is_none() {
            self.domain = base.domain;
        }
        if self.nonlinearity.is_none() {
            self.nonlinearity = base.nonlinearity;
        }
        if self.setup.is_none() {
            self.setup = base.setup;
        }
        if self.numerics.h.is_none() {
            self.numerics.h = self.domain.as_ref().and_then(|d| d.h);
        }
        let d = base.numerics;
        let n = &mut self.numerics;
        macro_rules! inherit {
            ($($f:ident),*) => { $( if n.$f.is_none() { n.$f = d.$f.clone(); } )* };
        }
        inherit!(h, h_min, dt_rel, formulation, snapshots, truncation_radius, force_lattice);
        match kind {
            Experiment::Varadhan => self.resolve_varadhan()?,
            Experiment::Pressure => self.resolve_pressure()?,
            Experiment::Barrier => self.resolve_barrier()?,
            Experiment::Symmetry => self.resolve_symmetry()?,
            Experiment::Manifold => self.resolve_manifold()?,
            Experiment::Acceptance => {
                fill(&mut self.acceptance.suite, "acceptance".into());
                if self.acceptance.suite.as_deref() == Some("") {
                    return Err(invalid("acceptance.suite is empty; expected acceptance or full"));
                }
            }
            Experiment::Solve => {}
        }
        let curvature_only = self.symmetry.mode == Some(SymmetryMode::Curvature);
        if !matches!(kind, Experiment::Barrier | Experiment::Acceptance) && !curvature_only {
            self.resolve_numerics(kind)?;
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(invalid("threads must be at least 1"));
            }
        }
        Ok(self)
    }

    fn resolve_numerics(&mut self, kind: Experiment) -> Result<()> {
        let n = &mut self.numerics;
        if let Some(t) = n.t_end {
            positive("numerics.t_end", t)?;
        }
        let mut snaps = match (n.snapshots.take(), n.t_end) {
            (Some(s), _) => s,
            (None, Some(t)) => vec![t],
            (None, None) => vec![0.1],
        };
        positive_list("numerics.snapshots", &snaps)?;
        if let Some(t) = n.t_end {
            if snaps.iter().any(|s| *s > t * (1.0 + 1e-12)) {
                return Err(invalid(format!("numerics.snapshots extend past numerics.t_end = {t}")));
            }
            snaps.push(t);
        }
        if kind == Experiment::Varadhan {
            if let Some(eps) = &self.varadhan.epsilons {
                snaps.extend(eps.iter().copied());
            }
        }
        if kind == Experiment::Pressure {
            let (eps, refs) = (self.pressure.epsilons.clone().unwrap_or_default(), self.pressure.ref_times.clone().unwrap_or_default());
            snaps = eps.iter().flat_map(|e| refs.iter().map(move |r| e * r)).collect();
        }
        let snaps = sorted_unique(snaps);
        let t_first = snaps[0];
        n.t_end = Some(*snaps.last().expect("nonempty"));
        n.snapshots = Some(snaps);
        let h = n.h.ok_or_else(|| invalid("numerics.h is required"))?;
        positive("numerics.h", h)?;
        fill(&mut n.h_min, h);
        let h_min = n.h_min.expect("filled");
        positive("numerics.h_min", h_min)?;
        if h_min > h {
            return Err(invalid(format!("numerics.h_min = {h_min} exceeds numerics.h = {h}")));
        }
        let policy = match n.dt_rel {
            Some(rel) => {
                positive("numerics.dt_rel", rel)?;
                DtPolicy::relative(t_first, rel)
            }
            None => DtPolicy::standard(t_first),
        };
        fill(&mut n.dt0, policy.dt0);
        fill(&mut n.dt_growth, policy.growth);
        fill(&mut n.dt_max, policy.dt_max);
        positive("numerics.dt0", n.dt0.expect("filled"))?;
        positive("numerics.dt_max", n.dt_max.expect("filled"))?;
        if !(n.dt_growth.expect("filled") >= 1.0) {
            return Err(invalid(format!("numerics.dt_growth must be at least 1, got {}", n.dt_growth.unwrap())));
        }
        if n.dt_max < n.dt0 {
            return Err(invalid("numerics.dt_max is smaller than numerics.dt0"));
        }
        fill(&mut n.formulation, Formulation::Density);
        fill(&mut n.force_lattice, false);
        if let Some(r) = n.truncation_radius {
            positive("numerics.truncation_radius", r)?;
        }
        Ok(())
    }

    fn resolve_varadhan(&mut self) -> Result<()> {
        let v = &mut self.varadhan;
        fill(&mut v.k_margin, 0.5);
        if v.k_far.is_none() && self.numerics.truncation_radius.is_some() {
            v.k_far = Some(2.0);
        }
        fill(&mut v.envelope_tol, 0.05);
        fill(&mut v.max_final_error, 0.05);
        fill(&mut v.require_decreasing, true);
        positive("varadhan.k_margin", v.k_margin.unwrap())?;
        positive("varadhan.max_final_error", v.max_final_error.unwrap())?;
        if let Some(f) = v.k_far {
            if !(f > v.k_margin.unwrap()) {
                return Err(invalid("varadhan.k_far must exceed varadhan.k_margin"));
            }
        }
        if let Some(e) = &v.epsilons {
            positive_list("varadhan.epsilons", e)?;
        }
        Ok(())
    }

    fn resolve_pressure(&mut self) -> Result<()> {
        let p = &mut self.pressure;
        fill(&mut p.epsilons, vec![1e-1, 1e-2, 1e-3]);
        fill(&mut p.ref_times, vec![0.5, 0.75, 1.0]);
        fill(&mut p.growth_limit, 1.5);
        fill(&mut p.k_margin, 0.5);
        fill(&mut p.k_far, 2.0);
        let eps = p.epsilons.as_ref().unwrap();
        positive_list("pressure.epsilons", eps)?;
        if eps.len() < 3 {
            return Err(invalid("pressure.epsilons needs at least three values"));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("pressure.epsilons must be strictly decreasing"));
        }
        positive_list("pressure.ref_times", p.ref_times.as_ref().unwrap())?;
        positive("pressure.growth_limit", p.growth_limit.unwrap())?;
        Ok(())
    }

    fn resolve_barrier(&mut self) -> Result<()> {
        let b = &mut self.barrier;
        fill(&mut b.tol, 1e-10);
        positive("barrier.tol", b.tol.unwrap())?;
        if let Some(l) = b.half_width {
            positive("barrier.half_width", l)?;
        }
        if let Some(s) = b.shift {
            positive("barrier.shift", s)?;
        }
        if b.h0.is_some() != b.big_h0.is_some() {
            return Err(invalid("barrier.h0 and barrier.H0 must be given together"));
        }
        Ok(())
    }

    fn resolve_symmetry(&mut self) -> Result<()> {
        let s = &mut self.symmetry;
        fill(&mut s.mode, SymmetryMode::Curvature);
        fill(&mut s.offset, 0.3);
        fill(&mut s.samples, 256);
        let mode = s.mode.unwrap();
        match mode {
            SymmetryMode::Stationary => fill(&mut s.tol, 1e-3),
            SymmetryMode::Reflect => {
                fill(&mut s.plane_normal, [1.0, 0.0, 0.0]);
                fill(&mut s.plane_offset, 0.0);
                fill(&mut s.max_radius, 2.0);
                fill(&mut s.tol, 1e-6);
                positive("symmetry.max_radius", s.max_radius.unwrap())?;
            }
            SymmetryMode::Curvature => fill(&mut s.tol, 1e-9),
            SymmetryMode::Balance => {
                fill(&mut s.center, [0.0; 3]);
                fill(&mut s.radii, vec![0.2, 0.5, 0.7]);
                fill(&mut s.tol, 1e-6);
                for (i, r) in s.radii.as_ref().unwrap().iter().enumerate() {
                    if !(*r >= 0.0) {
                        return Err(invalid(format!("symmetry.radii[{i}] must be nonnegative, got {r}")));
                    }
                }
            }
        }
        positive("symmetry.offset", s.offset.unwrap())?;
        positive("symmetry.tol", s.tol.unwrap())?;
        if s.samples == Some(0) {
            return Err(invalid("symmetry.samples must be at least 1"));
        }
        if mode == SymmetryMode::Curvature {
            self.numerics = Numerics::default();
            self.setup = None;
        }
        Ok(())
    }

    fn resolve_manifold(&mut self) -> Result<()> {
        let m = &mut self.manifold;
        fill(&mut m.model, Model::Sphere);
        fill(&mut m.dim, 2);
        fill(&mut m.domain, GeodesicDomain::Annulus { inner: PI / 3.0, outer: 2.0 * PI / 3.0 });
        fill(&mut m.setup, ManifoldSetup::Dirichlet { value: 1.0 });
        fill(&mut m.k_margin, 0.1);
        fill(&mut m.max_final_error, 0.05);
        if m.rho.is_some() {
            fill(&mut m.sandwich_tol, 1e-6);
        }
        if m.euclidean_scale.is_some() {
            fill(&mut m.euclidean_tol, 0.02);
        }
        let spec = ManifoldSpec::new(m.model.unwrap(), m.dim.unwrap()).map_err(|e| invalid(format!("manifold: {e}")))?;
        m.domain.unwrap().validate(&spec).map_err(|e| invalid(format!("manifold.domain: {e}")))?;
        positive("manifold.k_margin", m.k_margin.unwrap())?;
        if let Some(r) = m.rho {
            positive("manifold.rho", r)?;
        }
        if let Some(s) = m.euclidean_scale {
            positive("manifold.euclidean_scale", s)?;
        }
        self.domain = None;
        self.nonlinearity = None;
        self.setup = None;
        Ok(())
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let n = &self.numerics;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| invalid(format!("numerics.{name} is unresolved")));
        let mesh = MeshOptions::graded(need(n.h, "h")?, need(n.h_min, "h_min")?);
        let mesh = if n.h == n.h_min { MeshOptions::uniform(n.h.unwrap()) } else { mesh };
        let dt = DtPolicy {
            dt0: need(n.dt0, "dt0")?,
            growth: need(n.dt_growth, "dt_growth")?,
            dt_max: need(n.dt_max, "dt_max")?,
            max_rel: n.dt_rel,
        };
        let mut opts = SolverOptions::new(mesh, dt).with_formulation(n.formulation.unwrap_or(Formulation::Density));
        opts.force_lattice = n.force_lattice.unwrap_or(false);
        Ok(opts)
    }

    pub fn snapshots(&self) -> Vec<f64> {
        self.numerics.snapshots.clone().unwrap_or_default()
    }

    /// Output directory: `--out` (applied by the caller), then
    /// [`OUT_ENV`], then the config's `out`, then `difflab-out/<experiment>`.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        if let Some(p) = &self.out {
            return p.clone();
        }
        PathBuf::from("difflab-out").join(self.experiment.map(|e| e.to_string()).unwrap_or_default())
    }
}

/// Parses a suite name; empty or unknown names are usage errors.
pub fn parse_suite(name: &str) -> Result<difflab::acceptance::Suite> {
    match name.parse() {
        Ok(s) => Ok(s),
        Err(e) => bail!(ConfigError(format!("acceptance.suite: {e}"))),
    }
}
