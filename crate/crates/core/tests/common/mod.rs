//! Random fixtures and brute-force oracles shared by the integration tests.
//! The oracles recompute everything from `preprocess` output with plain
//! loops and dense vectors; they never touch index internals.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use semdex::text::preprocess;
use semdex::Document;

/// Small random corpus over the words `w0..w{vocab}`, with labels `L0..L{n_labels}`.
/// Documents are emitted in shuffled id order.
pub fn random_corpus(seed: u64, n_docs: usize, vocab: usize, max_len: usize, n_labels: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs: Vec<Document> = (0..n_docs)
        .map(|i| {
            let len = rng.gen_range(1..=max_len);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    // Skewed towards low ids so some terms are frequent.
                    let r: f64 = rng.gen();
                    format!("w{}", ((r * r) * vocab as f64) as usize)
                })
                .collect();
            let split = rng.gen_range(0..=words.len());
            let n = rng.gen_range(0..=3.min(n_labels));
            let labels: BTreeSet<String> = (0..n).map(|_| format!("L{}", rng.gen_range(0..n_labels))).collect();
            Document::new(format!("d{i:04}"), words[..split].join(" "), words[split..].join(" ")).with_labels(labels)
        })
        .collect();
    docs.shuffle(&mut rng);
    docs
}

pub fn counts(doc: &Document) -> BTreeMap<String, u32> {
    let mut m = BTreeMap::new();
    for t in preprocess(&format!("{} {}", doc.title, doc.abstract_text)).iter() {
        *m.entry(t.clone()).or_insert(0) += 1;
    }
    m
}

/// Document frequency of every term by scanning the collection.
pub fn doc_freqs(docs: &[Document]) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for d in docs {
        for t in counts(d).keys() {
            *df.entry(t.clone()).or_insert(0) += 1;
        }
    }
    df
}

pub fn tfidf(tf: u32, n: usize, df: usize) -> f64 {
    tf as f64 * (n as f64 / df as f64).ln()
}

/// Exhaustive cosine ranking: every document is scored, the list is sorted
/// by score then id, and the first `k` kept. `None` when the query shares
/// no term with the collection.
pub fn oracle_top_k(docs: &[Document], query: &Document, k: usize, exclude_self: bool) -> Option<Vec<(String, f64)>> {
    let n = docs.len();
    let df = doc_freqs(docs);
    let q: Vec<(String, f64)> = counts(query)
        .into_iter()
        .filter_map(|(t, tf)| df.get(&t).map(|&d| (t, tfidf(tf, n, d))))
        .collect();
    if q.is_empty() {
        return None;
    }
    let qnorm = q.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    let mut scored: Vec<(String, f64)> = docs
        .iter()
        .filter(|d| !(exclude_self && d.id == query.id))
        .map(|d| {
            let c = counts(d);
            let dnorm = c.iter().map(|(t, &tf)| tfidf(tf, n, df[t]).powi(2)).sum::<f64>().sqrt();
            let dot: f64 = q
                .iter()
                .filter_map(|(t, w)| c.get(t).map(|&tf| w * tfidf(tf, n, df[t])))
                .sum();
            let s = if dot > 0.0 && dnorm > 0.0 && qnorm > 0.0 {
                (dot / (qnorm * dnorm)).min(1.0)
            } else {
                0.0
            };
            (d.id.clone(), s)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Some(scored)
}

/// Set metrics computed with vectors and linear scans.
pub fn oracle_metrics(gold: &[String], pred: &[String]) -> (f64, f64, f64, f64) {
    let mut g: Vec<&String> = gold.iter().collect();
    g.sort();
    g.dedup();
    let mut p: Vec<&String> = pred.iter().collect();
    p.sort();
    p.dedup();
    let inter = g.iter().filter(|x| p.contains(x)).count() as f64;
    let mut union = g.clone();
    for x in &p {
        if !union.contains(x) {
            union.push(x);
        }
    }
    let precision = if p.is_empty() { 0.0 } else { inter / p.len() as f64 };
    let recall = inter / g.len() as f64;
    let f = 2.0 * inter / (g.len() + p.len()) as f64;
    let acc = inter / union.len() as f64;
    (precision, recall, f, acc)
}

/// Cut-off position by direct evaluation of the stopping rule.
pub fn oracle_cutoff(scores: &[f64], alpha: f64) -> usize {
    let s: Vec<f64> = scores.iter().copied().filter(|&x| x > 0.0).collect();
    let mut n = s.len();
    for i in 1..s.len() {
        if s[i] / s[i - 1] < i as f64 / (i as f64 + 1.0 + alpha) {
            n = i;
            break;
        }
    }
    n
}

/// Jaccard of term and concept from document counts.
pub fn oracle_jaccard(docs: &[Document], term: &str, concept: &str) -> f64 {
    let has_t: Vec<bool> = docs.iter().map(|d| counts(d).contains_key(term)).collect();
    let has_c: Vec<bool> = docs.iter().map(|d| d.labels.contains(concept)).collect();
    let both = has_t.iter().zip(&has_c).filter(|(a, b)| **a && **b).count();
    let either = has_t.iter().zip(&has_c).filter(|(a, b)| **a || **b).count();
    both as f64 / either as f64
}

/// TF.ICF of term and concept from document counts.
pub fn oracle_tf_icf(docs: &[Document], term: &str, concept: &str) -> f64 {
    let all_concepts: BTreeSet<&String> = docs.iter().flat_map(|d| d.labels.iter()).collect();
    let with_term: BTreeSet<&String> = docs
        .iter()
        .filter(|d| counts(d).contains_key(term))
        .flat_map(|d| d.labels.iter())
        .collect();
    let tf: f64 = docs
        .iter()
        .filter(|d| d.labels.contains(concept))
        .map(|d| {
            let c = counts(d);
            let len: u32 = c.values().sum();
            c.get(term).map_or(0.0, |&f| f as f64 / len as f64)
        })
        .sum();
    if with_term.is_empty() {
        return 0.0;
    }
    tf * (all_concepts.len() as f64 / with_term.len() as f64).ln()
}
