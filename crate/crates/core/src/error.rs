use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("duplicate label id {0:?}")]
    DuplicateLabel(String),

    #[error("malformed vocabulary: {0}")]
    MalformedVocabulary(String),

    #[error("collection is empty")]
    EmptyCollection,

    #[error("unknown term {0:?}")]
    UnknownTerm(String),

    #[error("unknown document {0:?}")]
    UnknownDocument(String),

    #[error("term {term:?} does not occur in document {doc:?}")]
    TermNotInDocument { term: String, doc: String },

    #[error("cosine similarity is undefined for two zero vectors")]
    ZeroVectors,

    #[error("unclassifiable document {0:?}: no indexed terms")]
    Unclassifiable(String),

    #[error("neighbor list is empty")]
    NoNeighbors,

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("feature f{feature} has non-finite value {value}")]
    InvalidFeature { feature: usize, value: f64 },

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("not a {expected} file (found magic {found:?})")]
    BadMagic { expected: &'static str, found: String },

    #[error("{kind} format version {found} is not supported (expected {expected})")]
    VersionMismatch {
        kind: &'static str,
        expected: u32,
        found: u32,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("column lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("nothing to aggregate")]
    EmptyInput,

    #[error("term {0:?} occurs in no document")]
    TermAbsent(String),

    #[error("term {term:?} and concept {concept:?} both have zero occurrences")]
    ZeroOccurrence { term: String, concept: String },

    #[error("concept {0:?} annotates no document")]
    UnknownConcept(String),

    #[error("predictions reference ids missing from the gold file: {0:?}")]
    UnknownIds(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
