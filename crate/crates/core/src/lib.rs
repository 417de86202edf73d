//! Multi-label indexing of short documents (title and abstract) with a
//! controlled vocabulary.
//!
//! Two classifiers are provided:
//!
//! * [`knn`]: retrieve the k most similar annotated documents from a TF.IDF
//!   [`vsm`] index, describe each of their labels with six features, score
//!   the labels with naive Bayes, a decision tree or a random forest, and
//!   keep the top N by threshold, neighbor average size, or score cut-off.
//! * [`esa`]: learn term-concept association vectors (TF.ICF or Jaccard)
//!   and rank concepts by aggregated relevance.
//!
//! [`eval`] holds the example-based metrics and [`experiment`] the synthetic
//! planted-topic benchmark.

pub mod corpus;
pub mod error;
pub mod esa;
pub mod eval;
pub mod experiment;
pub mod knn;
pub mod synth;
pub mod text;
pub mod vsm;

pub use corpus::{load_corpus, load_vocabulary, Document, LabelEntry, LabelId, LabelVocabulary};
pub use error::{Error, Result};
pub use knn::{Algorithm, KnnConfig, RankedLabels, RankerModel, Strategy};
pub use vsm::{build_index, Neighbor, VectorIndex};
