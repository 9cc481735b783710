use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("label column `{0}` not present in header")]
    MissingLabelColumn(String),

    #[error("dataset has a single class; at least two are required")]
    SingleClass,

    #[error("class {0} has no rows")]
    EmptyClass(usize),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("bad IDX magic number {found:#010x} in {}, expected {expected:#010x}", path.display())]
    IdxMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("IDX image/label count mismatch: {images} images, {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("truncated IDX file {}: expected {expected} bytes, found {found}", path.display())]
    IdxTruncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("invalid annotator batch: {0}")]
    Batch(String),

    #[error("model used before fit")]
    NotFitted,

    #[error("{0} requires a non-empty annotator list")]
    NoAnnotators(&'static str),

    #[error("test mode {0} is not handled by this selector")]
    UnsupportedMode(String),

    #[error("cannot aggregate results from different configurations")]
    MixedConfigs,

    #[error("nothing to aggregate")]
    EmptyAggregate,

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for data problems, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnsupportedMode(_) | Error::MixedConfigs => 2,
            Error::MissingFile(_)
            | Error::MissingLabelColumn(_)
            | Error::SingleClass
            | Error::EmptyClass(_)
            | Error::Dataset(_)
            | Error::IdxMagic { .. }
            | Error::IdxCountMismatch { .. }
            | Error::IdxTruncated { .. }
            | Error::Batch(_)
            | Error::Csv(_) => 3,
            _ => 1,
        }
    }
}
