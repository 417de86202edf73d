//! TF.IDF inverted index with exact top-k cosine retrieval.
//!
//! Weights are raw term frequency times `ln(n_docs / doc_freq)`. Documents
//! are stored in ascending id order, so internal document numbers double as
//! the tie-break key.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{term_vector, Document, LabelId};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &str = "semdex-vsm-index";
pub const INDEX_VERSION: u32 = 1;

/// Default neighborhood size.
pub const DEFAULT_K: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub doc_id: String,
    /// Cosine similarity in `[0, 1]`.
    pub score: f64,
    pub labels: Vec<LabelId>,
}

#[derive(Debug, Clone)]
pub struct VectorIndex {
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    idf: Vec<f64>,
    doc_ids: Vec<String>,
    labels: Vec<Vec<LabelId>>,
    norms: Vec<f64>,
    term_lookup: HashMap<String, u32>,
    doc_lookup: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    magic: String,
    version: u32,
    doc_ids: Vec<String>,
    labels: Vec<Vec<LabelId>>,
    norms: Vec<f64>,
    terms: Vec<String>,
    postings: Vec<Vec<(u32, u32)>>,
}

fn idf(n_docs: usize, doc_freq: usize) -> f64 {
    (n_docs as f64 / doc_freq as f64).ln()
}

/// Builds the index. Term extraction runs in parallel; the merge is
/// sequential in document-id order, so the result does not depend on the
/// number of workers.
pub fn build_index(collection: &[Document]) -> Result<VectorIndex> {
    if collection.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let mut order: Vec<&Document> = collection.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = order.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::DuplicateDocument(w[0].id.clone()));
    }
    let vectors: Vec<BTreeMap<String, u32>> = order.par_iter().map(|d| term_vector(d)).collect();

    let mut by_term: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    for (doc, vector) in vectors.into_iter().enumerate() {
        for (term, tf) in vector {
            let posting = Posting { doc: doc as u32, tf };
            match by_term.get_mut(&term) {
                Some(list) => list.push(posting),
                None => {
                    by_term.insert(term, vec![posting]);
                }
            }
        }
    }
    let (terms, postings): (Vec<_>, Vec<_>) = by_term.into_iter().unzip();
    let doc_ids = order.iter().map(|d| d.id.clone()).collect();
    let labels = order.iter().map(|d| d.labels.iter().cloned().collect()).collect();
    let n_docs = order.len();
    let mut norms_sq = vec![0.0f64; n_docs];
    for list in &postings {
        let w_idf = idf(n_docs, list.len());
        for p in list {
            let w = p.tf as f64 * w_idf;
            norms_sq[p.doc as usize] += w * w;
        }
    }
    let norms = norms_sq.into_iter().map(f64::sqrt).collect();
    Ok(VectorIndex::assemble(terms, postings, doc_ids, labels, norms))
}

impl VectorIndex {
    fn assemble(
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
        doc_ids: Vec<String>,
        labels: Vec<Vec<LabelId>>,
        norms: Vec<f64>,
    ) -> Self {
        let n_docs = doc_ids.len();
        let idf = postings.iter().map(|p| idf(n_docs, p.len())).collect();
        let term_lookup = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let doc_lookup = doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        VectorIndex {
            terms,
            postings,
            idf,
            doc_ids,
            labels,
            norms,
            term_lookup,
            doc_lookup,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_lookup.contains_key(doc_id)
    }

    pub fn postings(&self, term: &str) -> Option<&[Posting]> {
        self.term_lookup
            .get(term)
            .map(|&t| self.postings[t as usize].as_slice())
    }

    pub fn doc_freq(&self, term: &str) -> Option<usize> {
        self.postings(term).map(<[Posting]>::len)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.term_lookup.get(term).map(|&t| self.idf[t as usize])
    }

    pub fn norm(&self, doc_id: &str) -> Option<f64> {
        self.doc_lookup.get(doc_id).map(|&d| self.norms[d as usize])
    }

    pub fn labels(&self, doc_id: &str) -> Option<&[LabelId]> {
        self.doc_lookup.get(doc_id).map(|&d| self.labels[d as usize].as_slice())
    }

    /// TF.IDF weight of `term` in an indexed document.
    pub fn tfidf_weight(&self, term: &str, doc_id: &str) -> Result<f64> {
        let &t = self
            .term_lookup
            .get(term)
            .ok_or_else(|| Error::UnknownTerm(term.to_owned()))?;
        let &d = self
            .doc_lookup
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?;
        let list = &self.postings[t as usize];
        let i = list
            .binary_search_by_key(&d, |p| p.doc)
            .map_err(|_| Error::TermNotInDocument {
                term: term.to_owned(),
                doc: doc_id.to_owned(),
            })?;
        Ok(list[i].tf as f64 * self.idf[t as usize])
    }

    /// Query weights using this index's document frequencies. Terms unknown
    /// to the index are dropped. Sorted by term.
    fn query_weights(&self, doc: &Document) -> Result<Vec<(u32, f64)>> {
        let tv = term_vector(doc);
        let weights: Vec<(u32, f64)> = tv
            .iter()
            .filter_map(|(term, &tf)| {
                self.term_lookup
                    .get(term)
                    .map(|&t| (t, tf as f64 * self.idf[t as usize]))
            })
            .collect();
        if weights.is_empty() {
            return Err(Error::Unclassifiable(doc.id.clone()));
        }
        Ok(weights)
    }

    /// TF.IDF vector of an arbitrary document against this index.
    pub fn weigh(&self, doc: &Document) -> Result<BTreeMap<String, f64>> {
        Ok(self
            .query_weights(doc)?
            .into_iter()
            .map(|(t, w)| (self.terms[t as usize].clone(), w))
            .collect())
    }

    /// The `k` most cosine-similar indexed documents, ties by ascending id.
    /// Documents sharing no weighted term score 0 and fill the tail in id
    /// order when fewer than `k` documents overlap.
    pub fn top_k_neighbors(&self, query: &Document, k: usize, exclude_self: bool) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let weights = self.query_weights(query)?;
        let query_norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let skip = if exclude_self {
            self.doc_lookup.get(&query.id).copied()
        } else {
            None
        };

        let mut dots = vec![0.0f64; self.n_docs()];
        let mut touched = Vec::new();
        for &(t, wq) in &weights {
            if wq == 0.0 {
                continue;
            }
            let w_idf = self.idf[t as usize];
            for p in &self.postings[t as usize] {
                let slot = &mut dots[p.doc as usize];
                if *slot == 0.0 {
                    touched.push(p.doc);
                }
                *slot += wq * (p.tf as f64 * w_idf);
            }
        }

        let mut scored: Vec<(f64, u32)> = touched
            .into_iter()
            .filter(|&d| Some(d) != skip)
            .filter_map(|d| {
                let s = self.cosine_from_dot(dots[d as usize], query_norm, d);
                (s > 0.0).then_some((s, d))
            })
            .collect();
        let by_rank =
            |a: &(f64, u32), b: &(f64, u32)| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);

        if scored.len() < k {
            let positive: HashSet<u32> = scored.iter().map(|&(_, d)| d).collect();
            let fill = (0..self.n_docs() as u32)
                .filter(|d| Some(*d) != skip && !positive.contains(d))
                .take(k - scored.len());
            scored.extend(fill.map(|d| (0.0, d)).collect::<Vec<_>>());
        }

        Ok(scored
            .into_iter()
            .map(|(score, d)| Neighbor {
                doc_id: self.doc_ids[d as usize].clone(),
                score,
                labels: self.labels[d as usize].clone(),
            })
            .collect())
    }

    fn cosine_from_dot(&self, dot: f64, query_norm: f64, doc: u32) -> f64 {
        let norm = self.norms[doc as usize];
        if dot <= 0.0 || norm == 0.0 || query_norm == 0.0 {
            return 0.0;
        }
        (dot / (query_norm * norm)).min(1.0)
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let file = IndexFile {
            magic: INDEX_MAGIC.to_owned(),
            version: INDEX_VERSION,
            doc_ids: self.doc_ids.clone(),
            labels: self.labels.clone(),
            norms: self.norms.clone(),
            terms: self.terms.clone(),
            postings: self
                .postings
                .iter()
                .map(|l| l.iter().map(|p| (p.doc, p.tf)).collect())
                .collect(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(r)?;
        check_header(&value, INDEX_MAGIC, INDEX_VERSION, "index")?;
        let file: IndexFile = serde_json::from_value(value)?;
        if file.postings.len() != file.terms.len()
            || file.labels.len() != file.doc_ids.len()
            || file.norms.len() != file.doc_ids.len()
        {
            return Err(Error::InvalidParameter("index file sections disagree in length".into()));
        }
        let postings = file
            .postings
            .into_iter()
            .map(|l| l.into_iter().map(|(doc, tf)| Posting { doc, tf }).collect())
            .collect();
        Ok(VectorIndex::assemble(
            file.terms,
            postings,
            file.doc_ids,
            file.labels,
            file.norms,
        ))
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

pub(crate) fn check_header(
    value: &serde_json::Value,
    magic: &'static str,
    version: u32,
    kind: &'static str,
) -> Result<()> {
    let found = value.get("magic").and_then(|m| m.as_str()).unwrap_or("");
    if found != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found: found.to_owned(),
        });
    }
    let found_version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found_version != version {
        return Err(Error::VersionMismatch {
            kind,
            expected: version,
            found: found_version,
        });
    }
    Ok(())
}

/// Cosine similarity of two non-negative sparse vectors. A zero vector
/// against a non-zero one scores 0; two zero vectors are an error.
pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<f64> {
    if let Some((t, w)) = a.iter().chain(b.iter()).find(|(_, w)| w.is_nan() || **w < 0.0) {
        return Err(Error::InvalidParameter(format!("negative weight {w} for term {t:?}")));
    }
    let na = a.values().map(|w| w * w).sum::<f64>().sqrt();
    let nb = b.values().map(|w| w * w).sum::<f64>().sqrt();
    if na == 0.0 && nb == 0.0 {
        return Err(Error::ZeroVectors);
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    // merge join keeps the summation order independent of argument order
    let mut dot = 0.0;
    let (mut ia, mut ib) = (a.iter().peekable(), b.iter().peekable());
    while let (Some((ka, wa)), Some((kb, wb))) = (ia.peek(), ib.peek()) {
        match ka.cmp(kb) {
            Ordering::Less => {
                ia.next();
            }
            Ordering::Greater => {
                ib.next();
            }
            Ordering::Equal => {
                dot += *wa * *wb;
                ia.next();
                ib.next();
            }
        }
    }
    Ok((dot / (na * nb)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn single_doc_index() {
        let idx = build_index(&[Document::new("d1", "b", "")]).unwrap();
        assert_eq!(idx.n_docs(), 1);
        assert_eq!(idx.postings("b").unwrap(), &[Posting { doc: 0, tf: 1 }]);
        assert_eq!(idx.doc_freq("b"), Some(1));
    }

    #[test]
    fn shared_term_doc_freq() {
        let idx = build_index(&[Document::new("d1", "b c", ""), Document::new("d2", "b", "")]).unwrap();
        assert_eq!(idx.doc_freq("b"), Some(2));
        assert_eq!(idx.doc_freq("c"), Some(1));
    }

    #[test]
    fn empty_collection_rejected() {
        assert!(matches!(build_index(&[]), Err(Error::EmptyCollection)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let docs = [Document::new("x", "b", ""), Document::new("x", "c", "")];
        assert!(matches!(build_index(&docs), Err(Error::DuplicateDocument(_))));
    }

    #[test]
    fn weight_vanishes_for_ubiquitous_term() {
        let idx = build_index(&[Document::new("d1", "b c", ""), Document::new("d2", "b", "")]).unwrap();
        assert_eq!(idx.tfidf_weight("b", "d1").unwrap(), 0.0);
    }

    #[test]
    fn weight_hand_arithmetic() {
        let docs = [
            Document::new("d1", "zeta zeta", ""),
            Document::new("d2", "eta", ""),
            Document::new("d3", "theta", ""),
            Document::new("d4", "iota", ""),
        ];
        let idx = build_index(&docs).unwrap();
        let w = idx.tfidf_weight("zeta", "d1").unwrap();
        assert!((w - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert!((w - 2.7726).abs() < 1e-4);
    }

    #[test]
    fn weight_for_absent_term_is_error() {
        let idx = build_index(&[Document::new("d1", "b", ""), Document::new("d2", "c", "")]).unwrap();
        assert!(matches!(
            idx.tfidf_weight("b", "d2"),
            Err(Error::TermNotInDocument { .. })
        ));
        assert!(matches!(idx.tfidf_weight("zz", "d2"), Err(Error::UnknownTerm(_))));
        assert!(matches!(idx.tfidf_weight("b", "d9"), Err(Error::UnknownDocument(_))));
    }

    #[test]
    fn cosine_examples() {
        let v = vec_of(&[("a", 1.0), ("b", 2.0)]);
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&vec_of(&[("a", 1.0)]), &vec_of(&[("b", 1.0)])).unwrap(), 0.0);
        let s = cosine(&vec_of(&[("a", 1.0), ("b", 1.0)]), &vec_of(&[("a", 1.0)])).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vectors() {
        let z = BTreeMap::new();
        assert!(matches!(cosine(&z, &z), Err(Error::ZeroVectors)));
        assert_eq!(cosine(&z, &vec_of(&[("a", 1.0)])).unwrap(), 0.0);
        assert!(cosine(&vec_of(&[("a", -1.0)]), &vec_of(&[("a", 1.0)])).is_err());
    }

    fn small_corpus() -> Vec<Document> {
        vec![
            Document::new("a", "heart attack risk", "").with_labels(["H"]),
            Document::new("b", "heart failure", "").with_labels(["H", "F"]),
            Document::new("c", "kidney failure", "").with_labels(["K", "F"]),
            Document::new("d", "kidney stone", "").with_labels(["K"]),
        ]
    }

    #[test]
    fn self_retrieval_first() {
        let idx = build_index(&small_corpus()).unwrap();
        let q = Document::new("a", "heart attack risk", "");
        let n = idx.top_k_neighbors(&q, 2, false).unwrap();
        assert_eq!(n[0].doc_id, "a");
        assert!((n[0].score - 1.0).abs() < 1e-12);
        let n = idx.top_k_neighbors(&q, 2, true).unwrap();
        assert!(n.iter().all(|x| x.doc_id != "a"));
        assert_eq!(n[0].doc_id, "b");
    }

    #[test]
    fn k_saturates_to_collection() {
        let idx = build_index(&small_corpus()).unwrap();
        let q = Document::new("q", "kidney", "");
        let n = idx.top_k_neighbors(&q, 10, false).unwrap();
        assert_eq!(n.len(), 4);
        assert!(n.windows(2).all(|w| w[0].score >= w[1].score));
        // zero-score tail in id order
        assert_eq!(n[2].doc_id, "a");
        assert_eq!(n[3].doc_id, "b");
    }

    #[test]
    fn unknown_query_terms() {
        let idx = build_index(&small_corpus()).unwrap();
        let q = Document::new("q", "the of", "");
        assert!(matches!(
            idx.top_k_neighbors(&q, 3, false),
            Err(Error::Unclassifiable(_))
        ));
        let q = Document::new("q", "xylophon", "");
        assert!(matches!(
            idx.top_k_neighbors(&q, 3, false),
            Err(Error::Unclassifiable(_))
        ));
    }

    #[test]
    fn persisted_index_round_trips() {
        let idx = build_index(&small_corpus()).unwrap();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let back = VectorIndex::read_from(buf.as_slice()).unwrap();
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        let q = Document::new("q", "heart failure", "");
        assert_eq!(
            idx.top_k_neighbors(&q, 3, false).unwrap(),
            back.top_k_neighbors(&q, 3, false).unwrap()
        );
    }

    #[test]
    fn version_mismatch_rejected() {
        let idx = build_index(&small_corpus()).unwrap();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let s = String::from_utf8(buf)
            .unwrap()
            .replace("\"version\":1", "\"version\":7");
        assert!(matches!(
            VectorIndex::read_from(s.as_bytes()),
            Err(Error::VersionMismatch { found: 7, .. })
        ));
        assert!(matches!(
            VectorIndex::read_from(&b"{\"magic\":\"other\",\"version\":1}"[..]),
            Err(Error::BadMagic { .. })
        ));
    }
}
