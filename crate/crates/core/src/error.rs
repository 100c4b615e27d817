use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{location}: {message}")]
    Format { location: String, message: String },

    #[error("{path}: file is not valid UTF-8")]
    Encoding { path: PathBuf },

    #[error("unknown technique label {0:?}")]
    Label(String),

    #[error("span [{begin}, {end}) is invalid for article {article_id} (length {len})")]
    Span {
        article_id: String,
        begin: usize,
        end: usize,
        len: usize,
    },

    #[error("annotations reference missing articles: {}", .0.join(", "))]
    MissingArticle(Vec<String>),

    #[error("{path}: list has no entries")]
    EmptyList { path: PathBuf },

    #[error("gazetteer phrase {phrase:?} collides with reserved tag {tag}")]
    ReservedPhrase { phrase: String, tag: String },

    #[error("vocabulary is empty: no document produced a token")]
    EmptyVocabulary,

    #[error("training labels contain a single class ({0})")]
    DegenerateLabels(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cannot split {0} fragments into train/dev (need at least 3)")]
    Split(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Usage errors (bad configuration) versus data errors, for process exit codes.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Stage { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

/// Attach a pipeline stage name to an error.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
