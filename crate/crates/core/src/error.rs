use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported sphere dimension n = {0} (only 1, 2, 3 are implemented)")]
    UnsupportedDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid multiplicity pattern: sum of i*w_i is {found}, expected {expected}")]
    InvalidPattern { expected: usize, found: usize },

    #[error("point is not regular: gradient norm {norm:e} below threshold {threshold:e}")]
    NonRegularPoint { norm: f64, threshold: f64 },

    #[error("sample below resolution: {0}")]
    BelowResolution(String),

    #[error("unreliable count: {0}")]
    UnreliableCount(String),

    #[error("unresolved topology: {0}")]
    UnresolvedTopology(String),

    #[error("degenerate stratum: {fraction:.3} of surface samples are umbilical")]
    DegenerateStratum { fraction: f64 },

    #[error("invalid value for --{flag}: {message}")]
    Validation { flag: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl Error {
    /// Short stable name of the variant, used to tally exclusion reasons.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::InvalidPattern { .. } => "invalid-pattern",
            Error::NonRegularPoint { .. } => "non-regular-point",
            Error::BelowResolution(_) => "below-resolution",
            Error::UnreliableCount(_) => "unreliable-count",
            Error::UnresolvedTopology(_) => "unresolved-topology",
            Error::DegenerateStratum { .. } => "degenerate-stratum",
            Error::Validation { .. } => "validation",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
