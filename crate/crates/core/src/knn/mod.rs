//! Label ranking from nearest neighbors.
//!
//! A document's k nearest neighbors contribute candidate labels; each
//! candidate is described by six features, scored by a trained model, and
//! a selection strategy decides how many of the ranked labels to keep.

pub mod discretize;
pub mod features;
pub mod learners;
pub mod model;
pub mod select;

use std::collections::BTreeSet;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelId, LabelVocabulary};
use crate::error::{Error, Result};
use crate::vsm::{Neighbor, VectorIndex};

pub use discretize::Discretizer;
pub use features::{
    candidate_features, collect_candidates, lexical_features, neighbor_features, CandidateLabel, DocumentTerms,
    Features,
};
pub use learners::ForestParams;
pub use model::{score_candidates, train, train_with, Algorithm, RankedLabel, RankedLabels, RankerModel};
pub use select::{select_average_size, select_cutoff, select_threshold, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub doc_id: String,
    pub label: LabelId,
    pub features: Features,
    /// Whether the label is among the document's gold labels.
    pub class: bool,
}

/// One instance per (training document, candidate label). Training
/// documents are excluded from their own neighbor lists. Documents with no
/// indexed terms are skipped with a warning.
pub fn assemble_training_set(
    docs: &[Document],
    index: &VectorIndex,
    vocab: &LabelVocabulary,
    k: usize,
) -> Result<Vec<TrainingInstance>> {
    let per_doc: Vec<Result<Vec<TrainingInstance>>> = docs
        .par_iter()
        .map(|doc| {
            let neighbors = match index.top_k_neighbors(doc, k, true) {
                Ok(n) => n,
                Err(Error::Unclassifiable(id)) => {
                    warn!("skipping training document {id:?}: no indexed terms");
                    return Ok(Vec::new());
                }
                Err(e) => return Err(e),
            };
            let terms = DocumentTerms::new(doc);
            Ok(candidate_features(&terms, &neighbors, k, vocab)?
                .into_iter()
                .map(|c| TrainingInstance {
                    doc_id: doc.id.clone(),
                    class: doc.labels.contains(&c.label),
                    label: c.label,
                    features: c.features,
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_doc {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub strategy: Strategy,
    /// Drop the query's own entry from its neighbors when it is indexed.
    pub exclude_self: bool,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: crate::vsm::DEFAULT_K,
            strategy: Strategy::Cutoff {
                alpha: select::DEFAULT_ALPHA,
            },
            exclude_self: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub labels: Vec<LabelId>,
    pub ranked: RankedLabels,
    pub neighbors: Vec<Neighbor>,
}

impl Classification {
    pub fn candidates(&self) -> BTreeSet<LabelId> {
        self.neighbors.iter().flat_map(|n| n.labels.iter().cloned()).collect()
    }
}

/// Neighbors, candidates and their features, without scoring.
pub fn prepare(
    doc: &Document,
    index: &VectorIndex,
    vocab: &LabelVocabulary,
    config: &KnnConfig,
) -> Result<(Vec<Neighbor>, Vec<CandidateLabel>)> {
    let neighbors = index.top_k_neighbors(doc, config.k, config.exclude_self)?;
    let terms = DocumentTerms::new(doc);
    let candidates = candidate_features(&terms, &neighbors, config.k, vocab)?;
    Ok((neighbors, candidates))
}

pub fn classify(
    doc: &Document,
    model: &RankerModel,
    index: &VectorIndex,
    vocab: &LabelVocabulary,
    config: &KnnConfig,
) -> Result<Classification> {
    let (neighbors, mut candidates) = prepare(doc, index, vocab, config)?;
    if candidates.is_empty() {
        warn!("document {:?} has no candidate labels", doc.id);
    }
    let ranked = score_candidates(model, &mut candidates)?;
    let labels = config.strategy.select(&ranked, &neighbors);
    Ok(Classification {
        labels,
        ranked,
        neighbors,
    })
}
