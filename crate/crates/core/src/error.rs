use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("search exhausted after {scanned} candidates: {detail}")]
    SearchExhausted { scanned: u64, detail: String },

    #[error("no witness found: {0}")]
    NoWitness(String),

    #[error("{space} does not satisfy condition (i) of Property B: every seminorm vanishes on e_n for large n")]
    PropertyBCondition { space: String },

    #[error("missing prerequisite: {0}")]
    Prerequisite(String),

    #[error("degenerate element: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_input",
            Error::SearchExhausted { .. } => "search_exhausted",
            Error::NoWitness(_) => "no_witness",
            Error::PropertyBCondition { .. } => "property_b_condition_i",
            Error::Prerequisite(_) => "missing_prerequisite",
            Error::Degenerate(_) => "degenerate_element",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
