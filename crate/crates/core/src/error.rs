use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed validation; `path` locates the offending element.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("provenance required: support carries no candidate indices")]
    ProvenanceRequired,

    #[error(
        "measure `{0}` is not LP-type: it has no full violation test, and exact \
         distributions of the planar diameter are #P-hard"
    )]
    NotLpType(String),

    #[error("measure `{measure}` is not supported here: {reason}")]
    UnsupportedMeasure { measure: String, reason: String },

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("arity mismatch: quantization has arity {expected}, query has {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("enumeration needs {required}, cap is {cap}")]
    CapExceeded { required: String, cap: u64 },

    #[error("empty range: w = {w} is below the enclosing radius {radius} of the anchor")]
    EmptyRange { w: f64, radius: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The basis counting did not partition the supports; the input has
    /// co-optimal bases that the tie rule cannot separate.
    #[error("degenerate input: basis probabilities sum to {total}, not 1")]
    Degenerate { total: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// Whether the failure is a user-input problem (as opposed to IO or a
    /// resource limit). The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::CapExceeded { .. } | Error::Degenerate { .. })
    }
}
