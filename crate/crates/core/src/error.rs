use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("degenerate labels: training data contains only class {0}")]
    DegenerateLabels(u8),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance has {got} values, forest expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Malformed forest or bundle document. `path` points at the offending node,
    /// e.g. `trees[3].left.right`.
    #[error("model parse error at {path}: {message}")]
    ModelParse { path: String, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("inconsistent path: feature {feature} has empty range ({lower}, {upper}]")]
    InconsistentPath { feature: usize, lower: f64, upper: f64 },

    #[error("inconsistent path set: feature {feature} has empty intersection ({lower}, {upper}]")]
    InconsistentPathSet { feature: usize, lower: f64, upper: f64 },

    #[error("below quorum: {available} paths available, quorum is {quorum}")]
    BelowQuorum { available: usize, quorum: usize },

    #[error("inconsistent one-hot group {group}: both {first} and {second} asserted")]
    InconsistentOneHot {
        group: String,
        first: String,
        second: String,
    },

    #[error("ordinal range ({lower}, {upper}] on {feature} selects no category")]
    EmptyOrdinalRange {
        feature: String,
        lower: f64,
        upper: f64,
    },

    /// Data-file problem with a 1-based line number when known.
    #[error("{}", match .line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Data { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn data(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Data {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn parse(path: &str, message: impl Into<String>) -> Self {
        Error::ModelParse {
            path: path.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input dataset or instance rather than the model.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyDataset
                | Error::DegenerateLabels(_)
                | Error::DimensionMismatch { .. }
                | Error::Data { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
