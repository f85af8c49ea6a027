use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Every failure the engine can report.
///
/// Variants other than [`Error::Io`] describe bad input (validation
/// failures, including input files that cannot be opened); the CLI maps
/// those to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("reference corpus is empty")]
    EmptyCorpus,
    #[error("no reference captions supplied")]
    NoReferences,
    #[error("similar-image set contributes no reference captions")]
    EmptySimilarSet,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange { name: &'static str, value: f64, expected: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("{}dimension mismatch: expected {expected}, found {found}", at_line(*.line))]
    DimensionMismatch { line: Option<usize>, expected: usize, found: usize },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("image `{0}` has no caption embeddings")]
    NoCaptionEmbeddings(String),
    #[error("pool too small: need at least {needed} images besides the target, found {available}")]
    PoolTooSmall { needed: usize, available: usize },
    #[error("{}parse error: {message}", at_line(*.line))]
    Parse { line: Option<usize>, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("image `{0}` has no captions")]
    EmptyCaptions(String),
    #[error("embedding file has no header record")]
    MissingHeader,
    #[error("line {line}: caption embedding for `{id}` has no image embedding")]
    OrphanCaption { line: usize, id: String },
    #[error("line {line}: zero vector cannot be normalized")]
    ZeroVector { line: usize },
    #[error("no similar set for image `{0}`")]
    MissingSimilarSet(String),
    #[error("system `{system}` has no candidate for image `{image_id}`")]
    MissingCandidate { system: String, image_id: String },
    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),
    #[error("no weights for image `{0}`")]
    MissingWeights(String),
    #[error("cannot read `{}`: {source}", path.display())]
    Unreadable { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl Error {
    pub(crate) fn unreadable(path: &std::path::Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| Error::Unreadable { path: path.to_owned(), source }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// True for errors caused by the caller's input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
