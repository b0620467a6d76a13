use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("|p| = {momentum} lies outside the tabulated range [0, {limit}]")]
    OutOfRange { momentum: f64, limit: f64 },

    #[error(
        "image sum and Fourier series disagree at x = {point:?}: |{fourier} - {images}| > {tolerance}; raise the truncation"
    )]
    Consistency {
        point: [f64; 3],
        fourier: f64,
        images: f64,
        tolerance: f64,
    },

    #[error("decay bound violated in {space} space at radius {radius}: value {value} exceeds bound {bound}")]
    DecayViolation {
        space: &'static str,
        radius: f64,
        value: f64,
        bound: f64,
    },

    #[error("grid side {side} cannot hold cutoff {cutoff} (needs at least {required})")]
    GridTooSmall {
        side: usize,
        cutoff: usize,
        required: usize,
    },

    #[error("non-finite coefficients produced at t = {t}")]
    Instability { t: f64 },

    #[error("Picard iterate left the contraction ball: norm {norm} > {limit}")]
    ContractionViolation { norm: f64, limit: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("t = {t} is not below the lifespan guard {guard}")]
    BeyondGuard { t: f64, guard: f64 },

    #[error("t = {t} is at or beyond the envelope blow-up time {blow_up}")]
    EnvelopeDomain { t: f64, blow_up: f64 },

    #[error("step failed at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from bad input rather than a failed computation.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidParameter(_)
            | Error::DecayViolation { .. }
            | Error::GridTooSmall { .. }
            | Error::BeyondGuard { .. }
            | Error::EnvelopeDomain { .. }
            | Error::Snapshot(_)
            | Error::Json(_) => true,
            Error::AtTime { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
