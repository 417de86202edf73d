//! Synthetic corpora with planted topics.
//!
//! Every topic owns a disjoint signature of made-up terms. A document draws
//! a few topics, emits each of their signatures at least once, pads with
//! Zipf-distributed noise and is labeled with exactly the topics it drew,
//! so its labels are recoverable from lexically similar neighbors.
//!
//! All generated tokens end in a digit, which keeps them unchanged by
//! preprocessing, and no vocabulary name appears in any text.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelEntry, LabelId, LabelVocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub topics: usize,
    pub signature_len: usize,
    pub min_topics: usize,
    pub max_topics: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub noise_vocab: usize,
    /// Exponent of the topic popularity curve; 0 makes topics equally likely.
    pub topic_skew: f64,
    pub noise_skew: f64,
    /// Tokens placed in the title; the rest form the abstract.
    pub title_tokens: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            topics: 50,
            signature_len: 5,
            min_topics: 2,
            max_topics: 4,
            min_tokens: 30,
            max_tokens: 60,
            noise_vocab: 2000,
            topic_skew: 0.7,
            noise_skew: 1.0,
            title_tokens: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub docs: Vec<Document>,
    pub vocabulary: LabelVocabulary,
    /// `signatures[t]` are the terms planted for topic `t`.
    pub signatures: Vec<Vec<String>>,
}

impl PlantedCorpus {
    /// Splits off the first `n` documents for training.
    pub fn split(&self, n: usize) -> (&[Document], &[Document]) {
        self.docs.split_at(n.min(self.docs.len()))
    }
}

pub fn topic_id(t: usize) -> LabelId {
    format!("T{t:03}")
}

fn signature_term(t: usize, j: usize) -> String {
    format!("topic{t}sig{j}")
}

fn noise_term(n: usize) -> String {
    format!("noise{n}")
}

fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-s)).collect()
}

fn vocabulary(topics: usize) -> LabelVocabulary {
    let mut vocab = LabelVocabulary::new();
    for t in 0..topics {
        let name = format!("Planted Subject {}", t + 1);
        let entry =
            LabelEntry::new(name, vec![format!("Subject Number {}", t + 1)]).expect("generated names are non-empty");
        vocab.insert(topic_id(t), entry).expect("generated ids are unique");
    }
    vocab
}

/// `n_docs` documents with ids `{prefix}{i:06}`, reproducible from `seed`.
pub fn planted_corpus(config: &PlantedConfig, n_docs: usize, seed: u64, prefix: &str) -> PlantedCorpus {
    assert!(config.min_topics >= 1 && config.min_topics <= config.max_topics && config.max_topics <= config.topics);
    assert!(config.min_tokens <= config.max_tokens && config.noise_vocab >= 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signatures: Vec<Vec<String>> = (0..config.topics)
        .map(|t| (0..config.signature_len).map(|j| signature_term(t, j)).collect())
        .collect();
    let topic_weights = zipf_weights(config.topics, config.topic_skew);
    let topic_indices: Vec<usize> = (0..config.topics).collect();
    let noise = WeightedIndex::new(zipf_weights(config.noise_vocab, config.noise_skew)).expect("positive weights");

    let mut docs = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let n_topics = rng.gen_range(config.min_topics..=config.max_topics);
        let mut topics: Vec<usize> = topic_indices
            .choose_multiple_weighted(&mut rng, n_topics, |t| topic_weights[*t])
            .expect("positive weights")
            .copied()
            .collect();
        topics.sort_unstable();

        let planted = n_topics * config.signature_len;
        let length = rng.gen_range(config.min_tokens..=config.max_tokens).max(planted);
        let mut tokens: Vec<String> = topics.iter().flat_map(|&t| signatures[t].iter().cloned()).collect();
        while tokens.len() < length {
            tokens.push(noise_term(noise.sample(&mut rng)));
        }
        tokens.shuffle(&mut rng);

        let split = config.title_tokens.min(tokens.len());
        let doc = Document::new(
            format!("{prefix}{i:06}"),
            tokens[..split].join(" "),
            tokens[split..].join(" "),
        )
        .with_labels(topics.iter().map(|&t| topic_id(t)));
        docs.push(doc);
    }

    PlantedCorpus {
        docs,
        vocabulary: vocabulary(config.topics),
        signatures,
    }
}

/// Unlabeled-looking filler corpus for throughput tests: `tokens_per_doc`
/// Zipf tokens over `vocab_size` terms, one random label per document.
pub fn scale_corpus(n_docs: usize, tokens_per_doc: usize, vocab_size: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(zipf_weights(vocab_size, 1.0)).expect("positive weights");
    (0..n_docs)
        .map(|i| {
            let text: Vec<String> = (0..tokens_per_doc).map(|_| noise_term(dist.sample(&mut rng))).collect();
            Document::new(format!("s{i:07}"), "", text.join(" ")).with_labels([topic_id(rng.gen_range(0..100))])
        })
        .collect()
}
