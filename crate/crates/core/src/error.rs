use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transcript contains no words")]
    EmptyTranscript,

    #[error("corpus contains no transactions")]
    EmptyCorpus,

    #[error("transaction {index} has no control-level label")]
    MissingLabels { index: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("scenario `{id}`: invalid {field}: {reason}")]
    InvariantViolation {
        id: String,
        field: String,
        reason: String,
    },

    #[error("privacy score needs at least one response")]
    EmptyResponses,

    #[error("score {0} is outside the 0-6 rating scale")]
    OutOfRange(f64),

    #[error("train count {requested} exceeds corpus size {available}")]
    BadCount { requested: usize, available: usize },

    #[error("scenario `{0}` has neither a label nor responses")]
    UnlabeledScenario(String),

    #[error("scenario id `{0}` already present in corpus")]
    DuplicateScenarioId(String),

    #[error("no conversation with id `{0}`")]
    UnknownConversation(String),

    #[error("no privacy indication phrase found in conversation `{0}`")]
    NoPrivacyIndication(String),

    #[error("invalid {what}: {reason}")]
    InvalidResource { what: &'static str, reason: String },

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable class name, used for CLI diagnostics and FFI status mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyTranscript => "EmptyTranscript",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::MissingLabels { .. } => "MissingLabels",
            Error::Parse { .. } => "ParseError",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::EmptyResponses => "EmptyResponses",
            Error::OutOfRange(_) => "OutOfRange",
            Error::BadCount { .. } => "BadCount",
            Error::UnlabeledScenario(_) => "UnlabeledScenario",
            Error::DuplicateScenarioId(_) => "DuplicateScenarioId",
            Error::UnknownConversation(_) => "UnknownConversation",
            Error::NoPrivacyIndication(_) => "NoPrivacyIndication",
            Error::InvalidResource { .. } => "InvalidResource",
            Error::InvalidRule(_) => "InvalidRule",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "ParseError",
        }
    }

    pub(crate) fn resource(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidResource {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn invariant(id: &str, field: &str, reason: impl Into<String>) -> Self {
        Error::InvariantViolation {
            id: id.to_string(),
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
