use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("invalid annotation: {0}")]
    Annotation(String),

    #[error("invalid annotator model: {0}")]
    Model(String),

    #[error("degenerate chance agreement (p_e = {0}); kappa is undefined")]
    DegenerateChance(f64),

    #[error("document ids differ between annotators for category {category}: missing {missing:?}")]
    IdMismatch {
        category: String,
        missing: Vec<u64>,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("filter expression error at offset {offset}: {message}")]
    Expr { offset: usize, message: String },

    #[error("unknown preset {name:?}; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("bloom filter format: {0}")]
    BloomFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn record(line: usize, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            message: message.into(),
        }
    }

    /// Line number carried by record-level errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Record { line, .. } => Some(*line),
            _ => None,
        }
    }
}
