use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input")]
    EmptyInput,

    #[error("laser is below threshold (pump factor {0} <= 1)")]
    BelowThreshold(f64),

    #[error("cutoff {cutoff} Hz exceeds Nyquist frequency {nyquist} Hz")]
    AboveNyquist { cutoff: f64, nyquist: f64 },

    #[error("cannot calibrate an all-zero signal")]
    CannotCalibrate,

    #[error("invalid ground reference {0}; must be > 0")]
    InvalidReference(f64),

    #[error("zero variance input")]
    ZeroVariance,

    #[error("lag window [{lo}, {hi}] s lies outside the curve range [0, {max}] s")]
    OutOfRange { lo: f64, hi: f64, max: f64 },

    #[error("insufficient data: need at least {required} samples, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("degenerate spectrum: total power is zero")]
    DegenerateSpectrum,

    #[error("run diverged at step {step}")]
    Diverged { step: u64 },

    #[error("unknown preset '{name}'; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("{metric}: {source}")]
    Metric {
        metric: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_metric(self, metric: &'static str) -> Self {
        Error::Metric {
            metric,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
