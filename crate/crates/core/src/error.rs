use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shooting bracket [{lo}, {hi}] does not straddle the ground state")]
    NoBracket { lo: f64, hi: f64 },
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: String, detail: String },
    #[error("quadrature not converged: estimated error {estimate:e} exceeds {tol:e}")]
    QuadratureUnconverged { estimate: f64, tol: f64 },
    #[error("angular grid too coarse: eigenvalue {index} changed by {change:e} under refinement")]
    GridTooCoarse { index: usize, change: f64 },
    #[error("spurious mode: eigenfunction {index} carries {fraction:.3} of its mass near the outer boundary")]
    SpuriousMode { index: usize, fraction: f64 },
    #[error("degenerate case: opening angle {alpha} is within {tol:e} of a half-space")]
    DegenerateCase { alpha: f64, tol: f64 },
    #[error("opening angle {alpha} at s = {s} is within 0.05 rad of 0, π or 2π")]
    DegenerateAngle { alpha: f64, s: f64 },
    #[error("spike under-resolved: {0}")]
    SpikeTooCoarse(String),
    #[error("metric not positive definite at (rho={rho}, t={t}, s={s})")]
    DegenerateMetric { rho: f64, t: f64, s: f64 },
    #[error("projected Hessian has {found} negative directions, expected {expected}")]
    IndefiniteProjectedHessian { found: usize, expected: usize },
    #[error("iterate collapsed to zero: max value {max:e}")]
    CollapseToZero { max: f64 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn nonconv(what: &str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            what: what.to_string(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
