//! Short-time diagnostics: the Varadhan functional `−4tΦ(u)`, the rescaled
//! pressure `v^ε = −εΦ(u(·, εt))` and bounds on it that should hold
//! uniformly in ε.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, ScalarField};
use crate::nonlinearity::{Nonlinearity, TransformTable};
use crate::pde::{FieldSeries, Snapshot};

/// Densities at or below this are treated as underflowed and flagged.
pub const UNDERFLOW: f64 = 1e-300;

/// Compact set `K = {margin ≤ d ≤ far}` of in-domain nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSpec {
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far: Option<f64>,
}

impl KSpec {
    pub fn new(margin: f64, far: Option<f64>) -> Self {
        KSpec { margin, far }
    }

    /// `d ≥ 0.25`, up to half the far-field truncation radius.
    pub fn default_for(truncation_radius: f64) -> Self {
        KSpec { margin: 0.25, far: Some(0.5 * truncation_radius) }
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.margin && self.far.map_or(true, |f| d <= f)
    }

    fn nodes(&self, dist: &ScalarField) -> Vec<usize> {
        (0..dist.values.len()).filter(|&i| dist.mask[i].in_domain() && self.contains(dist.values[i])).collect()
    }
}

/// `−Φ` on densities: exact logarithm for linear `φ`, the tabulated
/// transform otherwise.
struct PressureMap<'a> {
    nl: &'a Nonlinearity<f64>,
    table: Option<TransformTable>,
}

impl<'a> PressureMap<'a> {
    fn new(nl: &'a Nonlinearity<f64>) -> Result<Self> {
        let table = if nl.is_linear() { None } else { Some(TransformTable::for_solver(nl)?) };
        Ok(PressureMap { nl, table })
    }

    /// `−Φ(u)` for `u > 0`.
    fn eval(&self, u: f64) -> f64 {
        match &self.table {
            None => -self.nl.dphi(0.0) * u.ln(),
            Some(t) => -t.big_phi(u),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VaradhanField {
    pub t: f64,
    /// `−4tΦ(u)`; NaN on flagged and masked-out nodes.
    pub field: ScalarField,
    /// In-domain nodes where `u` underflowed.
    pub flagged: Vec<usize>,
}

/// Nodewise `−4tΦ(u)`.
pub fn varadhan_field(u: &ScalarField, t: f64, nl: &Nonlinearity<f64>) -> Result<VaradhanField> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let map = PressureMap::new(nl)?;
    let mut flagged = Vec::new();
    let mut values = vec![f64::NAN; u.values.len()];
    for (i, &v) in u.values.iter().enumerate() {
        if !u.mask[i].in_domain() {
            continue;
        }
        if v < 0.0 || v.is_nan() {
            return Err(Error::Domain(format!("density {v} at node {i} is not positive")));
        }
        if v <= UNDERFLOW {
            flagged.push(i);
            continue;
        }
        values[i] = 4.0 * t * map.eval(v);
    }
    Ok(VaradhanField { t, field: ScalarField { grid: u.grid.clone(), values, mask: u.mask.clone() }, flagged })
}

/// Like [`varadhan_field`], but reads the stored pressure `−Φ(u)` when the
/// snapshot carries one, so nothing underflows.
pub fn varadhan_snapshot(s: &Snapshot, nl: &Nonlinearity<f64>) -> Result<VaradhanField> {
    match &s.pressure {
        None => varadhan_field(&s.field, s.t, nl),
        Some(q) => {
            let values = q
                .iter()
                .zip(&s.field.mask)
                .map(|(q, m)| if m.in_domain() { 4.0 * s.t * q } else { f64::NAN })
                .collect();
            Ok(VaradhanField {
                t: s.t,
                field: ScalarField { grid: s.field.grid.clone(), values, mask: s.field.mask.clone() },
                flagged: Vec::new(),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeCheck {
    pub t: f64,
    pub tol: f64,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    /// Smallest `V − (δ₁/δ₂)d²` over K.
    pub lower_margin: f64,
    /// Smallest `(δ₂/δ₁)d² − V` over K.
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VaradhanReport {
    pub times: Vec<f64>,
    /// `sup_K |−4tΦ(u) − d²|` per time.
    pub sup_errors: Vec<f64>,
    /// Point of K where each sup is attained.
    pub argmax: Vec<Point<f64>>,
    pub k: KSpec,
    pub nodes_in_k: usize,
    /// Underflowed nodes inside K per time (excluded from the sup).
    pub flagged_in_k: Vec<usize>,
    /// Errors strictly decrease as t decreases.
    pub decreasing: bool,
    /// Least-squares `C` in `error ≈ C·t·log(1/t)`.
    pub rate_constant: f64,
    pub envelope: EnvelopeCheck,
}

impl VaradhanReport {
    pub fn final_error(&self) -> f64 {
        let k = (0..self.times.len()).min_by(|&a, &b| self.times[a].total_cmp(&self.times[b])).unwrap_or(0);
        self.sup_errors[k]
    }
}

/// Sup error of `−4tΦ(u)` against `d²` on K for every snapshot, plus the
/// two-sided envelope `(δ₁/δ₂)d² ≤ −4tΦ(u) ≤ (δ₂/δ₁)d²` at the smallest time.
pub fn convergence_report(
    series: &FieldSeries,
    nl: &Nonlinearity<f64>,
    dist: &ScalarField,
    k: &KSpec,
    envelope_tol: f64,
) -> Result<VaradhanReport> {
    if series.snapshots.is_empty() {
        return Err(Error::Config("empty series".into()));
    }
    if *series.grid() != dist.grid {
        return Err(Error::Shape("distance field and series live on different grids".into()));
    }
    let nodes = k.nodes(dist);
    if nodes.is_empty() {
        return Err(Error::Config(format!("compact set K = {k:?} contains no grid nodes")));
    }
    let mut times = Vec::new();
    let mut sup_errors = Vec::new();
    let mut argmax = Vec::new();
    let mut flagged_in_k = Vec::new();
    let mut fields = Vec::new();
    for s in &series.snapshots {
        let v = varadhan_snapshot(s, nl)?;
        let mut worst = (0.0f64, nodes[0]);
        let mut flagged = 0;
        for &i in &nodes {
            let val = v.field.values[i];
            if val.is_nan() {
                flagged += 1;
                continue;
            }
            let e = (val - dist.values[i].powi(2)).abs();
            if e > worst.0 {
                worst = (e, i);
            }
        }
        times.push(s.t);
        sup_errors.push(worst.0);
        argmax.push(dist.grid.point(worst.1));
        flagged_in_k.push(flagged);
        fields.push(v);
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
    let decreasing = order.windows(2).all(|w| sup_errors[w[1]] < sup_errors[w[0]]);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, e) in times.iter().zip(&sup_errors) {
        let g = t * (1.0 / t).ln();
        num += g * e;
        den += g * g;
    }
    let rate_constant = if den > 0.0 { num / den } else { f64::NAN };

    let smallest = *order.last().unwrap();
    let ratio = nl.delta1() / nl.delta2();
    let v = &fields[smallest];
    let (mut lower_margin, mut upper_margin) = (f64::INFINITY, f64::INFINITY);
    for &i in &nodes {
        let val = v.field.values[i];
        if val.is_nan() {
            continue;
        }
        let d2 = dist.values[i].powi(2);
        lower_margin = lower_margin.min(val - ratio * d2);
        upper_margin = upper_margin.min(d2 / ratio - val);
    }
    let envelope = EnvelopeCheck {
        t: times[smallest],
        tol: envelope_tol,
        lower_ratio: ratio,
        upper_ratio: 1.0 / ratio,
        lower_margin,
        upper_margin,
        pass: lower_margin >= -envelope_tol && upper_margin >= -envelope_tol && flagged_in_k[smallest] == 0,
    };
    Ok(VaradhanReport {
        times,
        sup_errors,
        argmax,
        k: *k,
        nodes_in_k: nodes.len(),
        flagged_in_k,
        decreasing,
        rate_constant,
        envelope,
    })
}

/// Rescaled pressure `v^ε(·, t) = −εΦ(u(·, εt))`, interpolating `−Φ(u)`
/// linearly in time between snapshots.
pub fn pressure_field(series: &FieldSeries, nl: &Nonlinearity<f64>, eps: f64, ref_time: f64) -> Result<ScalarField> {
    if !(eps > 0.0 && ref_time > 0.0) {
        return Err(Error::Domain(format!("eps and ref_time must be positive, got {eps}, {ref_time}")));
    }
    let map = PressureMap::new(nl)?;
    let q = series.pressure_at_time(eps * ref_time, |u| if u > 0.0 { map.eval(u) } else { f64::INFINITY })?;
    let snap = &series.snapshots[0].field;
    Ok(ScalarField {
        grid: snap.grid.clone(),
        values: q.iter().map(|q| eps * q).collect(),
        mask: snap.mask.clone(),
    })
}

/// `v^ε` at each reference time, for each ε (ε decreasing).
#[derive(Clone, Debug)]
pub struct PressureSeries {
    pub epsilons: Vec<f64>,
    pub ref_times: Vec<f64>,
    /// `fields[e][r]` is `v^{ε_e}(·, ref_times[r])`.
    pub fields: Vec<Vec<ScalarField>>,
}

impl PressureSeries {
    pub fn from_series(
        series: &FieldSeries,
        nl: &Nonlinearity<f64>,
        epsilons: &[f64],
        ref_times: &[f64],
    ) -> Result<Self> {
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("epsilons must be strictly decreasing".into()));
        }
        if ref_times.is_empty() {
            return Err(Error::Config("at least one reference time is required".into()));
        }
        let fields = epsilons
            .iter()
            .map(|&e| ref_times.iter().map(|&t| pressure_field(series, nl, e, t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(PressureSeries { epsilons: epsilons.to_vec(), ref_times: ref_times.to_vec(), fields })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonStats {
    pub eps: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub grad_sup: f64,
    /// `max |v(x,t) − v(x,s)| / |t − s|^{1/2}` over K and reference-time pairs.
    pub holder: f64,
    /// `M = max ζ|∇v|` on the support of the cutoff.
    pub m: f64,
    /// `λ = (M² + 1)/(2(c₂ + 1))` with `c₂ = max v` on the support.
    pub lambda: f64,
    /// Maximum of `z = ζ²|∇v|² − λv` and where it is attained.
    pub z_max: f64,
    pub z_argmax: (f64, Point<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFactors {
    pub v_min: f64,
    /// Factor by which `v_min` shrinks (reported; positivity is what is
    /// required of the lower bound).
    pub v_min_shrink: f64,
    pub v_max: f64,
    pub grad_sup: f64,
    pub holder: f64,
}

impl GrowthFactors {
    pub fn max(&self) -> f64 {
        self.v_min.max(self.v_max).max(self.grad_sup).max(self.holder)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientReport {
    pub k: KSpec,
    pub stats: Vec<EpsilonStats>,
    /// Largest factor by which each quantity grows as ε decreases,
    /// `max_{i<j} q_j/q_i`.
    pub growth: GrowthFactors,
    pub growth_limit: f64,
    pub positive: bool,
    pub band_pass: bool,
}

fn smootherstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Spatial cutoff: 1 on K, decaying to 0 within `margin/2` outside it.
fn cutoff(k: &KSpec, d: f64) -> f64 {
    let w = 0.5 * k.margin;
    let below = smootherstep((d - (k.margin - w)) / w);
    let above = k.far.map_or(1.0, |f| smootherstep((f + w - d) / w));
    below.min(above)
}

fn worst_ratio(values: &[f64], shrink: bool) -> f64 {
    let mut worst = 1.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let r = if shrink { values[i] / values[j] } else { values[j] / values[i] };
            if r.is_finite() {
                worst = worst.max(r);
            } else {
                worst = f64::INFINITY;
            }
        }
    }
    worst
}

/// Bounds on `v^ε` over K that should not depend on ε: extremes, gradient
/// sup, time-Hölder quotient, and the auxiliary maximum of
/// `z = ζ²|∇v|² − λv`.
pub fn gradient_monitor(
    ps: &PressureSeries,
    dist: &ScalarField,
    k: &KSpec,
    growth_limit: f64,
) -> Result<GradientReport> {
    if ps.epsilons.len() < 3 {
        return Err(Error::Config("the gradient monitor needs at least three epsilons".into()));
    }
    let nodes = k.nodes(dist);
    if nodes.is_empty() {
        return Err(Error::Config(format!("compact set K = {k:?} contains no grid nodes")));
    }
    let support: Vec<(usize, f64)> = (0..dist.values.len())
        .filter(|&i| dist.mask[i].in_domain())
        .map(|i| (i, cutoff(k, dist.values[i])))
        .filter(|(_, z)| *z > 0.0)
        .collect();
    let mut stats = Vec::with_capacity(ps.epsilons.len());
    for (e, fields) in ps.epsilons.iter().zip(&ps.fields) {
        if fields.iter().any(|f| f.grid != dist.grid) {
            return Err(Error::Shape("pressure fields and distance field live on different grids".into()));
        }
        let (mut v_min, mut v_max, mut grad_sup) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for f in fields {
            for &i in &nodes {
                v_min = v_min.min(f.values[i]);
                v_max = v_max.max(f.values[i]);
                if let Some(g) = f.gradient(i) {
                    grad_sup = grad_sup.max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
                }
            }
        }
        let mut holder = 0.0f64;
        for a in 0..fields.len() {
            for b in a + 1..fields.len() {
                let dt = (ps.ref_times[a] - ps.ref_times[b]).abs().sqrt();
                for &i in &nodes {
                    holder = holder.max((fields[a].values[i] - fields[b].values[i]).abs() / dt);
                }
            }
        }
        let grad_norm = |f: &ScalarField, i: usize| {
            f.gradient(i).map_or(0.0, |g| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
        };
        let (mut m, mut c2) = (0.0f64, 0.0f64);
        for f in fields {
            for &(i, z) in &support {
                m = m.max(z * grad_norm(f, i));
                c2 = c2.max(f.values[i]);
            }
        }
        let lambda = (m * m + 1.0) / (2.0 * (c2 + 1.0));
        let mut z_max = f64::NEG_INFINITY;
        let mut z_argmax = (ps.ref_times[0], [0.0; 3]);
        for (r, f) in fields.iter().enumerate() {
            for &(i, z) in &support {
                let g = grad_norm(f, i);
                let val = z * z * g * g - lambda * f.values[i];
                if val > z_max {
                    z_max = val;
                    z_argmax = (ps.ref_times[r], f.grid.point(i));
                }
            }
        }
        stats.push(EpsilonStats { eps: *e, v_min, v_max, grad_sup, holder, m, lambda, z_max, z_argmax });
    }
    let col = |f: fn(&EpsilonStats) -> f64| stats.iter().map(f).collect::<Vec<_>>();
    let growth = GrowthFactors {
        v_min: worst_ratio(&col(|s| s.v_min), false),
        v_min_shrink: worst_ratio(&col(|s| s.v_min), true),
        v_max: worst_ratio(&col(|s| s.v_max), false),
        grad_sup: worst_ratio(&col(|s| s.grad_sup), false),
        holder: worst_ratio(&col(|s| s.holder), false),
    };
    let positive = stats.iter().all(|s| s.v_min > 0.0);
    let band_pass = positive && growth.max() <= growth_limit;
    Ok(GradientReport { k: *k, stats, growth, growth_limit, positive, band_pass })
}
