//! Candidate collection and the six label features.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelEntry, LabelId, LabelVocabulary};
use crate::error::{Error, Result};
use crate::vsm::Neighbor;

pub const FEATURE_COUNT: usize = 6;

/// Zero-based indices of the numeric features (f1, f2, f5).
pub const NUMERIC_FEATURES: [usize; 3] = [0, 1, 4];

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "f1 neighbor votes",
    "f2 similarity mass",
    "f3 all name tokens",
    "f4 entry term present",
    "f5 entry term frequency",
    "f6 name in title",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Features {
    /// Share of the k neighbors carrying the label.
    pub f1: f64,
    /// Summed similarity of those neighbors, over k.
    pub f2: f64,
    /// Every token of the preferred name occurs somewhere in the document.
    pub f3: bool,
    /// The preferred name or an entry term occurs contiguously.
    pub f4: bool,
    /// Number of such contiguous occurrences; 0 when `f4` is false.
    pub f5: f64,
    /// The preferred name occurs contiguously in the title.
    pub f6: bool,
}

impl Features {
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        [self.f1, self.f2, b(self.f3), b(self.f4), self.f5, b(self.f6)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLabel {
    pub label: LabelId,
    pub features: Features,
    /// Set by the ranker; 0 until scored.
    pub relevance: f64,
}

/// Union of the neighbors' label sets.
pub fn collect_candidates(neighbors: &[Neighbor]) -> Result<BTreeSet<LabelId>> {
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors);
    }
    Ok(neighbors.iter().flat_map(|n| n.labels.iter().cloned()).collect())
}

/// `(f1, f2)` for one candidate label.
pub fn neighbor_features(label: &str, neighbors: &[Neighbor], k: usize) -> Result<(f64, f64)> {
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors);
    }
    if k < neighbors.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} is smaller than the {} neighbors given",
            neighbors.len()
        )));
    }
    let (mut votes, mut mass) = (0usize, 0.0f64);
    for n in neighbors.iter().filter(|n| n.labels.iter().any(|l| l == label)) {
        votes += 1;
        mass += n.score;
    }
    Ok((votes as f64 / k as f64, mass / k as f64))
}

/// Preprocessed views of a document reused across all of its candidates.
#[derive(Debug, Clone)]
pub struct DocumentTerms {
    pub terms: Vec<String>,
    pub title: Vec<String>,
    set: HashSet<String>,
}

impl DocumentTerms {
    pub fn new(doc: &Document) -> Self {
        let terms = doc.terms().into_inner();
        let set = terms.iter().cloned().collect();
        DocumentTerms {
            title: doc.title_terms().into_inner(),
            terms,
            set,
        }
    }
}

fn occurrences(haystack: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return 0;
    }
    haystack.windows(needle.len()).filter(|w| *w == needle).count()
}

pub(crate) fn lexical_from_terms(entry: &LabelEntry, doc: &DocumentTerms) -> (bool, bool, f64, bool) {
    let name = entry.name_terms();
    let f3 = !name.is_empty() && name.iter().all(|t| doc.set.contains(t));
    let f5: usize = entry.match_forms().map(|form| occurrences(&doc.terms, form)).sum();
    let f6 = occurrences(&doc.title, name) > 0;
    (f3, f5 > 0, f5 as f64, f6)
}

/// `(f3, f4, f5, f6)` for one candidate label.
pub fn lexical_features(label: &str, doc: &Document, vocab: &LabelVocabulary) -> Result<(bool, bool, f64, bool)> {
    let entry = vocab.get(label).ok_or_else(|| Error::UnknownLabel(label.to_owned()))?;
    Ok(lexical_from_terms(entry, &DocumentTerms::new(doc)))
}

/// All candidates of a document with their six features, in label order.
pub fn candidate_features(
    doc: &DocumentTerms,
    neighbors: &[Neighbor],
    k: usize,
    vocab: &LabelVocabulary,
) -> Result<Vec<CandidateLabel>> {
    collect_candidates(neighbors)?
        .into_iter()
        .map(|label| {
            let entry = vocab.get(&label).ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            let (f1, f2) = neighbor_features(&label, neighbors, k)?;
            let (f3, f4, f5, f6) = lexical_from_terms(entry, doc);
            Ok(CandidateLabel {
                label,
                features: Features { f1, f2, f3, f4, f5, f6 },
                relevance: 0.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nb(id: &str, score: f64, labels: &[&str]) -> Neighbor {
        Neighbor {
            doc_id: id.into(),
            score,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn vocab() -> LabelVocabulary {
        LabelVocabulary::from_json_str(
            r#"{
                "D1": {"name": "Humans", "entries": ["Human", "Man (Taxonomy)"]},
                "D2": {"name": "Body Mass Index", "entries": ["Quetelet Index", "BMI"]},
                "D3": {"name": "Kidney Calculi", "entries": ["Kidney Stones"]}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn union_of_neighbor_labels() {
        let ns = [nb("x", 0.9, &["A", "B"]), nb("y", 0.5, &["B", "C"])];
        let c: Vec<_> = collect_candidates(&ns).unwrap().into_iter().collect();
        assert_eq!(c, ["A", "B", "C"]);
        let ns = [nb("x", 0.9, &[]), nb("y", 0.5, &[])];
        assert!(collect_candidates(&ns).unwrap().is_empty());
        assert!(matches!(collect_candidates(&[]), Err(Error::NoNeighbors)));
    }

    #[test]
    fn saturated_neighbor_features() {
        let ns: Vec<_> = (0..4).map(|i| nb(&i.to_string(), 1.0, &["A"])).collect();
        assert_eq!(neighbor_features("A", &ns, 4).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn vote_share_and_mass() {
        let mut ns: Vec<_> = (0..25).map(|i| nb(&i.to_string(), 0.1, &["Z"])).collect();
        for n in ns.iter_mut().take(5) {
            n.labels.push("A".into());
        }
        let (f1, _) = neighbor_features("A", &ns, 25).unwrap();
        assert!((f1 - 0.2).abs() < 1e-15);

        let mut ns: Vec<_> = (0..25).map(|i| nb(&i.to_string(), 0.1, &["Z"])).collect();
        ns[0] = nb("0", 0.5, &["B"]);
        ns[1] = nb("1", 0.3, &["B"]);
        let (f1, f2) = neighbor_features("B", &ns, 25).unwrap();
        assert!((f2 - 0.032).abs() < 1e-15);
        assert!(f2 <= f1);
    }

    #[test]
    fn humans_in_abstract_only() {
        let doc = Document::new("d", "Postoperative outcomes", "We studied 40 humans.");
        let (f3, f4, f5, f6) = lexical_features("D1", &doc, &vocab()).unwrap();
        assert!(f3);
        assert!(!f6);
        // "human" is an entry term, matched contiguously
        assert!(f4);
        assert_eq!(f5, 1.0);
    }

    #[test]
    fn no_overlap_is_all_zero() {
        let doc = Document::new("d", "Renal anatomy", "A study of nephrons.");
        assert_eq!(
            lexical_features("D2", &doc, &vocab()).unwrap(),
            (false, false, 0.0, false)
        );
    }

    #[test]
    fn body_mass_index_in_title() {
        let doc = Document::new("d", "body mass index and obesity", "BMI was measured twice.");
        let (f3, f4, f5, f6) = lexical_features("D2", &doc, &vocab()).unwrap();
        assert!(f3 && f4 && f6);
        assert!(f5 >= 1.0);
        // name once plus the "BMI" entry once
        assert_eq!(f5, 2.0);
    }

    #[test]
    fn disjoint_tokens_count_for_f3_only() {
        let doc = Document::new("d", "Stones", "calculi were found in the left kidney");
        let (f3, f4, f5, f6) = lexical_features("D3", &doc, &vocab()).unwrap();
        assert!(f3);
        assert!(!f4);
        assert_eq!(f5, 0.0);
        assert!(!f6);
    }

    #[test]
    fn unknown_label() {
        let doc = Document::new("d", "x", "");
        assert!(matches!(
            lexical_features("D9", &doc, &vocab()),
            Err(Error::UnknownLabel(_))
        ));
    }
}
