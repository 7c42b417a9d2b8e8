//! Time marching shared by all implicit steppers.

use super::problem::DtPolicy;
use super::series::{SchemeMeta, Snapshot};
use crate::error::{Error, Result};

pub(crate) struct StepOutcome {
    pub state: Vec<f64>,
    pub newton: usize,
    pub residual: f64,
    pub linear: usize,
}

pub(crate) trait Stepper {
    /// Advances `state` by one backward-Euler step of size `dt`.
    fn step(&mut self, state: &[f64], dt: f64) -> Result<StepOutcome>;
    fn snapshot(&self, state: &[f64], t: f64) -> Result<Snapshot>;
}

/// Runs `stepper` from `t = 0` through every time in `times`, landing on
/// each exactly. A failed step is retried with half the step size, up to
/// `max_halvings` times in a row.
pub(crate) fn march<S: Stepper>(
    stepper: &mut S,
    init: Vec<f64>,
    times: &[f64],
    policy: &DtPolicy,
    max_halvings: usize,
    meta: &mut SchemeMeta,
) -> Result<Vec<Snapshot>> {
    policy.validate()?;
    let mut state = init;
    let mut t = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut out = Vec::with_capacity(times.len());
    meta.dt_min = f64::INFINITY;
    for &target in times {
        while t < target {
            let remaining = target - t;
            let mut dt = policy.next(prev, t);
            let lands = dt >= remaining * (1.0 - 1e-12);
            if lands {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                // Split the rest evenly instead of leaving a sliver.
                dt = 0.5 * remaining;
            }
            let mut halvings = 0;
            let outcome = loop {
                match stepper.step(&state, dt) {
                    Ok(o) => break o,
                    Err(e) => {
                        halvings += 1;
                        meta.halvings += 1;
                        if halvings > max_halvings {
                            let residual = match e {
                                Error::Convergence { residual, .. } => residual,
                                _ => f64::NAN,
                            };
                            return Err(Error::Convergence { t, halvings: halvings - 1, residual });
                        }
                        dt *= 0.5;
                    }
                }
            };
            state = outcome.state;
            t = if halvings == 0 && lands { target } else { t + dt };
            prev = Some(dt);
            meta.steps += 1;
            meta.dt_min = meta.dt_min.min(dt);
            meta.dt_max = meta.dt_max.max(dt);
            meta.newton_iterations += outcome.newton;
            meta.max_newton_per_step = meta.max_newton_per_step.max(outcome.newton);
            meta.max_residual = meta.max_residual.max(outcome.residual);
            meta.linear_iterations += outcome.linear;
        }
        out.push(stepper.snapshot(&state, target)?);
    }
    Ok(out)
}
