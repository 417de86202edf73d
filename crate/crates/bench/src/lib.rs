//! Shared fixtures for the criterion benchmarks in `benches/`.

use semdex::knn::{assemble_training_set, train_with, ForestParams};
use semdex::synth::{planted_corpus, PlantedConfig};
use semdex::{build_index, Algorithm, Document, LabelVocabulary, RankerModel, VectorIndex};

/// A trained ranker over a planted-topic corpus plus held-out queries.
pub struct RankingFixture {
    pub index: VectorIndex,
    pub vocab: LabelVocabulary,
    pub model: RankerModel,
    pub train: Vec<Document>,
    pub queries: Vec<Document>,
}

pub fn ranking_fixture(n_train: usize, n_queries: usize, n_trees: usize, seed: u64) -> RankingFixture {
    let corpus = planted_corpus(&PlantedConfig::default(), n_train + n_queries, seed, "bench");
    let (train, queries) = corpus.split(n_train);
    let index = build_index(train).expect("non-empty corpus");
    let instances = assemble_training_set(train, &index, &corpus.vocabulary, 25).expect("training set");
    let forest = ForestParams {
        n_trees,
        ..ForestParams::default()
    };
    let model = train_with(&instances, Algorithm::RandomForest, seed, &forest).expect("trainable");
    RankingFixture {
        index,
        vocab: corpus.vocabulary.clone(),
        model,
        train: train.to_vec(),
        queries: queries.to_vec(),
    }
}
