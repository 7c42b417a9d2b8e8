use thiserror::Error;

/// Errors raised by the numerical kernels, solvers and detectors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("under-resolved: {0}")]
    Resolution(String),

    #[error("parallel surface at distance {distance} crosses a focal point: {detail}")]
    Caustic { distance: f64, detail: String },

    #[error("degenerate offset: 1/R = {inv_r} does not exceed curvature {kappa}")]
    DegenerateOffset { inv_r: f64, kappa: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("time {t} outside series range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("newton iteration failed at t = {t} after {halvings} step halvings (residual {residual:.3e})")]
    Convergence { t: f64, halvings: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
