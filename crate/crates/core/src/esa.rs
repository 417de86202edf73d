//! Concept classification from term-concept association vectors.
//!
//! Every label ("concept") is represented by the terms most strongly
//! associated with it in the annotated collection, scored by TF.ICF or by
//! the Jaccard coefficient of document sets. A new document is scored
//! against each reachable concept as the sum, over its terms, of the term's
//! TF.IDF weight times its association score.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{term_vector, Document, LabelId};
use crate::error::{Error, Result};
use crate::knn::model::{RankedLabel, RankedLabels};
use crate::vsm::check_header;

pub const ASSOC_MAGIC: &str = "semdex-esa-assoc";
pub const ASSOC_VERSION: u32 = 1;
pub const DEFAULT_MIN_DOC_FREQ: usize = 5;
pub const DEFAULT_VECTOR_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    TfIcf,
    Jaccard,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::TfIcf => "TF.ICF",
            Measure::Jaccard => "Jaccard",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['.', '-', '_'], "").as_str() {
            "tficf" => Ok(Measure::TfIcf),
            "jaccard" => Ok(Measure::Jaccard),
            _ => Err(Error::InvalidParameter(format!("unknown association measure {s:?}"))),
        }
    }
}

/// Counts needed by both association measures.
#[derive(Debug, Clone)]
pub struct CollectionStats {
    n_docs: usize,
    doc_terms: Vec<BTreeMap<String, u32>>,
    doc_len: Vec<u32>,
    term_df: HashMap<String, usize>,
    concept_docs: BTreeMap<LabelId, Vec<usize>>,
    /// Number of concepts annotating at least one document that contains the term.
    term_concepts: HashMap<String, usize>,
}

impl CollectionStats {
    pub fn new(collection: &[Document]) -> Self {
        let doc_terms: Vec<BTreeMap<String, u32>> = collection.par_iter().map(term_vector).collect();
        let doc_len = doc_terms.iter().map(|tv| tv.values().sum()).collect();
        let mut term_df: HashMap<String, usize> = HashMap::new();
        let mut concept_docs: BTreeMap<LabelId, Vec<usize>> = BTreeMap::new();
        let mut pairs: HashMap<&str, HashSet<&str>> = HashMap::new();
        for (i, (doc, tv)) in collection.iter().zip(&doc_terms).enumerate() {
            for term in tv.keys() {
                *term_df.entry(term.clone()).or_default() += 1;
                if !doc.labels.is_empty() {
                    let set = pairs.entry(term.as_str()).or_default();
                    set.extend(doc.labels.iter().map(String::as_str));
                }
            }
            for label in &doc.labels {
                concept_docs.entry(label.clone()).or_default().push(i);
            }
        }
        let term_concepts = pairs.into_iter().map(|(t, cs)| (t.to_owned(), cs.len())).collect();
        CollectionStats {
            n_docs: collection.len(),
            doc_terms,
            doc_len,
            term_df,
            concept_docs,
            term_concepts,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_concepts(&self) -> usize {
        self.concept_docs.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.term_df.get(term).copied().unwrap_or(0)
    }

    pub fn concept_freq(&self, concept: &str) -> usize {
        self.concept_docs.get(concept).map_or(0, Vec::len)
    }

    /// `sum over d in D_c of freq(t, d) / |d|` together with `cocc(t, c)`.
    fn concept_term(&self, term: &str, docs: &[usize]) -> (f64, usize) {
        let mut tf = 0.0;
        let mut cocc = 0;
        for &d in docs {
            if let Some(&f) = self.doc_terms[d].get(term) {
                tf += f as f64 / self.doc_len[d] as f64;
                cocc += 1;
            }
        }
        (tf, cocc)
    }

    fn icf(&self, term: &str) -> f64 {
        let n_i = self.term_concepts.get(term).copied().unwrap_or(0);
        if n_i == 0 {
            return 0.0;
        }
        (self.n_concepts() as f64 / n_i as f64).ln()
    }
}

fn jaccard_from_counts(cocc: usize, occ_t: usize, occ_c: usize) -> f64 {
    cocc as f64 / (occ_t + occ_c - cocc) as f64
}

/// `TF(t, c) * ln(N / n_t)` with natural log.
pub fn tf_icf(term: &str, concept: &str, stats: &CollectionStats) -> Result<f64> {
    if stats.doc_freq(term) == 0 {
        return Err(Error::TermAbsent(term.to_owned()));
    }
    let docs = stats
        .concept_docs
        .get(concept)
        .ok_or_else(|| Error::UnknownConcept(concept.to_owned()))?;
    let (tf, _) = stats.concept_term(term, docs);
    Ok(tf * stats.icf(term))
}

/// Document-level Jaccard coefficient of term and concept.
pub fn jaccard(term: &str, concept: &str, stats: &CollectionStats) -> Result<f64> {
    let occ_t = stats.doc_freq(term);
    let occ_c = stats.concept_freq(concept);
    if occ_t == 0 && occ_c == 0 {
        return Err(Error::ZeroOccurrence {
            term: term.to_owned(),
            concept: concept.to_owned(),
        });
    }
    let cocc = stats
        .concept_docs
        .get(concept)
        .map_or(0, |docs| stats.concept_term(term, docs).1);
    Ok(jaccard_from_counts(cocc, occ_t, occ_c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationParams {
    pub measure: Measure,
    /// Terms in fewer documents are ignored.
    pub min_doc_freq: usize,
    /// Maximum terms kept per concept.
    pub vector_cap: usize,
}

impl AssociationParams {
    pub fn new(measure: Measure) -> Self {
        AssociationParams {
            measure,
            min_doc_freq: DEFAULT_MIN_DOC_FREQ,
            vector_cap: DEFAULT_VECTOR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationIndex {
    pub params: AssociationParams,
    pub n_concepts: usize,
    pub n_docs: usize,
    /// Per concept, its strongest terms by score descending then term.
    pub concept_vectors: BTreeMap<LabelId, Vec<(String, f64)>>,
    /// Per term, the concepts whose vectors retain it, by concept id.
    pub inverted: BTreeMap<String, Vec<(LabelId, f64)>>,
    /// Training-collection document frequency of every retained term.
    pub doc_freq: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct AssocFile {
    magic: String,
    version: u32,
    index: AssociationIndex,
}

/// Scores every eligible term co-occurring with each concept, keeps the top
/// `vector_cap` per concept, and inverts the result. Terms that never
/// co-occur with a concept score 0 under both measures and are not stored.
pub fn build_associations(collection: &[Document], params: AssociationParams) -> Result<AssociationIndex> {
    let stats = CollectionStats::new(collection);
    build_associations_from_stats(&stats, params)
}

pub fn build_associations_from_stats(stats: &CollectionStats, params: AssociationParams) -> Result<AssociationIndex> {
    if stats.concept_docs.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if params.vector_cap == 0 {
        return Err(Error::InvalidParameter("vector cap must be positive".into()));
    }
    let concepts: Vec<(&LabelId, &Vec<usize>)> = stats.concept_docs.iter().collect();
    let vectors: Vec<(LabelId, Vec<(String, f64)>)> = concepts
        .par_iter()
        .map(|(concept, docs)| {
            let mut tf: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
            for &d in docs.iter() {
                let len = stats.doc_len[d] as f64;
                for (term, &f) in &stats.doc_terms[d] {
                    if stats.doc_freq(term) < params.min_doc_freq {
                        continue;
                    }
                    let e = tf.entry(term.as_str()).or_insert((0.0, 0));
                    e.0 += f as f64 / len;
                    e.1 += 1;
                }
            }
            let occ_c = docs.len();
            let mut scored: Vec<(String, f64)> = tf
                .into_iter()
                .map(|(term, (tf, cocc))| {
                    let score = match params.measure {
                        Measure::TfIcf => tf * stats.icf(term),
                        Measure::Jaccard => jaccard_from_counts(cocc, stats.doc_freq(term), occ_c),
                    };
                    (term.to_owned(), score)
                })
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            scored.truncate(params.vector_cap);
            ((*concept).clone(), scored)
        })
        .collect();

    let mut inverted: BTreeMap<String, Vec<(LabelId, f64)>> = BTreeMap::new();
    for (concept, vector) in &vectors {
        for (term, score) in vector {
            inverted
                .entry(term.clone())
                .or_default()
                .push((concept.clone(), *score));
        }
    }
    let doc_freq = inverted.keys().map(|t| (t.clone(), stats.doc_freq(t))).collect();
    Ok(AssociationIndex {
        params,
        n_concepts: stats.n_concepts(),
        n_docs: stats.n_docs(),
        concept_vectors: vectors.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
        inverted,
        doc_freq,
    })
}

impl AssociationIndex {
    /// TF.IDF weights of the document's terms that appear in any concept
    /// vector, using the training collection's document frequencies.
    pub fn query_weights(&self, doc: &Document) -> BTreeMap<String, f64> {
        term_vector(doc)
            .into_iter()
            .filter_map(|(term, tf)| {
                let df = *self.doc_freq.get(&term)?;
                let w = tf as f64 * (self.n_docs as f64 / df as f64).ln();
                Some((term, w))
            })
            .collect()
    }

    pub fn score(&self, term: &str, concept: &str) -> Option<f64> {
        self.inverted
            .get(term)?
            .binary_search_by(|(c, _)| c.as_str().cmp(concept))
            .ok()
            .map(|i| self.inverted[term][i].1)
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let file = AssocFile {
            magic: ASSOC_MAGIC.into(),
            version: ASSOC_VERSION,
            index: self.clone(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(r)?;
        check_header(&value, ASSOC_MAGIC, ASSOC_VERSION, "association index")?;
        let file: AssocFile = serde_json::from_value(value)?;
        Ok(file.index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

/// Relevance of one concept for a document. Terms outside the concept's
/// retained vector contribute nothing.
pub fn relevance(concept: &str, doc: &Document, assoc: &AssociationIndex) -> f64 {
    relevance_from_weights(concept, &assoc.query_weights(doc), assoc)
}

/// Relevance for an already weighted document.
pub fn relevance_from_weights(concept: &str, weights: &BTreeMap<String, f64>, assoc: &AssociationIndex) -> f64 {
    let Some(vector) = assoc.concept_vectors.get(concept) else {
        return 0.0;
    };
    let scores: HashMap<&str, f64> = vector.iter().map(|(t, s)| (t.as_str(), *s)).collect();
    weights
        .iter()
        .filter_map(|(t, w)| scores.get(t.as_str()).map(|s| w * s))
        .sum()
}

/// How many concepts to return per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelCount {
    /// As many as the document's gold labels.
    Gold,
    Fixed(usize),
}

impl FromStr for LabelCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("gold") {
            return Ok(LabelCount::Gold);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(LabelCount::Fixed(n)),
            _ => Err(Error::InvalidParameter(format!(
                "label count must be \"gold\" or a positive integer, got {s:?}"
            ))),
        }
    }
}

/// All concepts reachable from the document's terms, ranked by relevance.
pub fn esa_rank(doc: &Document, assoc: &AssociationIndex) -> RankedLabels {
    let mut acc: HashMap<&str, f64> = HashMap::new();
    for (term, w) in assoc.query_weights(doc) {
        for (concept, s) in &assoc.inverted[&term] {
            *acc.entry(concept.as_str()).or_insert(0.0) += w * s;
        }
    }
    RankedLabels::from_scores(
        acc.into_iter()
            .map(|(label, score)| RankedLabel {
                label: label.to_owned(),
                score,
            })
            .collect(),
    )
}

/// The `n_labels` most relevant concepts.
pub fn esa_classify(doc: &Document, assoc: &AssociationIndex, n_labels: usize) -> Result<RankedLabels> {
    if n_labels == 0 {
        return Err(Error::InvalidParameter("n_labels must be at least 1".into()));
    }
    let mut ranked = esa_rank(doc, assoc);
    if ranked.is_empty() {
        warn!("document {:?} reaches no concept", doc.id);
    }
    ranked.0.truncate(n_labels);
    Ok(ranked)
}
