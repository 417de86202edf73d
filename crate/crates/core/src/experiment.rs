//! Comparison harness over the planted-topic generator.
//!
//! One run trains every learner on the same training set, classifies the
//! held-out documents with every selection strategy, runs both association
//! measures, and reports the tables side by side.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelId, LabelVocabulary};
use crate::error::{Error, Result};
use crate::esa::{build_associations, esa_classify, AssociationParams, Measure};
use crate::eval::{evaluate_run, information_gain, render_table, MetricReport, Prediction};
use crate::knn::features::{FEATURE_COUNT, FEATURE_NAMES};
use crate::knn::{
    assemble_training_set, candidate_features, score_candidates, train_with, Algorithm, CandidateLabel, DocumentTerms,
    ForestParams, RankedLabels, RankerModel, Strategy,
};
use crate::synth::{planted_corpus, PlantedConfig};
use crate::vsm::{build_index, Neighbor, VectorIndex};

/// Neighbors and candidate features of one held-out document, computed once
/// and shared by every model and strategy.
#[derive(Debug, Clone)]
pub struct PreparedQuery {
    pub doc_id: String,
    pub gold: BTreeSet<LabelId>,
    pub neighbors: Vec<Neighbor>,
    pub candidates: Vec<CandidateLabel>,
}

impl PreparedQuery {
    pub fn candidate_labels(&self) -> BTreeSet<&str> {
        self.candidates.iter().map(|c| c.label.as_str()).collect()
    }
}

/// Documents with no indexed term get an empty neighborhood.
pub fn prepare_queries(
    docs: &[Document],
    index: &VectorIndex,
    vocab: &LabelVocabulary,
    k: usize,
) -> Result<Vec<PreparedQuery>> {
    docs.par_iter()
        .map(|doc| {
            let neighbors = match index.top_k_neighbors(doc, k, false) {
                Ok(n) => n,
                Err(Error::Unclassifiable(id)) => {
                    warn!("document {id:?} has no indexed terms");
                    Vec::new()
                }
                Err(e) => return Err(e),
            };
            let candidates = candidate_features(&DocumentTerms::new(doc), &neighbors, k, vocab)?;
            Ok(PreparedQuery {
                doc_id: doc.id.clone(),
                gold: doc.labels.clone(),
                neighbors,
                candidates,
            })
        })
        .collect()
}

pub fn rank_queries(model: &RankerModel, queries: &[PreparedQuery]) -> Result<Vec<RankedLabels>> {
    queries
        .par_iter()
        .map(|q| score_candidates(model, &mut q.candidates.clone()))
        .collect()
}

pub fn select_predictions(queries: &[PreparedQuery], ranked: &[RankedLabels], strategy: Strategy) -> Vec<Prediction> {
    queries
        .iter()
        .zip(ranked)
        .map(|(q, r)| Prediction {
            id: q.doc_id.clone(),
            labels: strategy.select(r, &q.neighbors),
            ranked: r.to_pairs(),
        })
        .collect()
}

/// Mean over documents of the share of gold labels found among the
/// neighbors' labels. Documents without gold labels are skipped.
pub fn candidate_recall(queries: &[PreparedQuery]) -> f64 {
    let per_doc: Vec<f64> = queries
        .iter()
        .filter(|q| !q.gold.is_empty())
        .map(|q| {
            let cands = q.candidate_labels();
            q.gold.iter().filter(|g| cands.contains(g.as_str())).count() as f64 / q.gold.len() as f64
        })
        .collect();
    if per_doc.is_empty() {
        return 0.0;
    }
    per_doc.iter().sum::<f64>() / per_doc.len() as f64
}

/// The `n` labels most frequent in `docs`, ties broken by label id.
pub fn most_frequent_labels(docs: &[Document], n: usize) -> Vec<LabelId> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        for l in &d.labels {
            *counts.entry(l).or_default() += 1;
        }
    }
    let mut v: Vec<(&str, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().take(n).map(|(l, _)| l.to_owned()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub corpus: PlantedConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub k: usize,
    pub tau: f64,
    pub alpha: f64,
    pub seed: u64,
    pub n_trees: usize,
    pub baseline_size: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            corpus: PlantedConfig::default(),
            n_train: 2000,
            n_test: 500,
            k: crate::vsm::DEFAULT_K,
            tau: crate::knn::select::DEFAULT_TAU,
            alpha: crate::knn::select::DEFAULT_ALPHA,
            seed: 42,
            n_trees: 100,
            baseline_size: 3,
        }
    }
}

impl BenchConfig {
    pub fn strategies(&self) -> [Strategy; 3] {
        [
            Strategy::Threshold { tau: self.tau },
            Strategy::AverageSize,
            Strategy::Cutoff { alpha: self.alpha },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnRow {
    pub algorithm: Algorithm,
    pub strategy: String,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsaRow {
    pub measure: Measure,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGain {
    pub feature: String,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub training_instances: usize,
    pub positive_instances: usize,
    pub candidate_recall: f64,
    pub baseline: MetricReport,
    pub knn: Vec<KnnRow>,
    pub esa: Vec<EsaRow>,
    pub feature_gain: Vec<FeatureGain>,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub report: BenchReport,
    /// Test-set predictions keyed by `"{algorithm}-{strategy}"` or
    /// `"esa-{measure}"`.
    pub predictions: BTreeMap<String, Vec<Prediction>>,
}

pub fn prediction_key(algorithm: Algorithm, strategy: &Strategy) -> String {
    format!("{}-{}", algorithm.short_name(), strategy.name())
}

/// Information gain of each discretized feature with respect to the class.
pub fn feature_gains(model: &RankerModel, instances: &[crate::knn::TrainingInstance]) -> Result<Vec<FeatureGain>> {
    let rows = instances
        .iter()
        .map(|i| model.discretizer.apply(&i.features))
        .collect::<Result<Vec<_>>>()?;
    let classes: Vec<bool> = instances.iter().map(|i| i.class).collect();
    (0..FEATURE_COUNT)
        .map(|f| {
            let column: Vec<u8> = rows.iter().map(|r| r[f]).collect();
            Ok(FeatureGain {
                feature: FEATURE_NAMES[f].to_owned(),
                gain: information_gain(&column, &classes)?,
            })
        })
        .collect()
}

pub fn run_synthetic(config: &BenchConfig) -> Result<BenchOutput> {
    let corpus = planted_corpus(&config.corpus, config.n_train + config.n_test, config.seed, "syn");
    let (train, test) = corpus.split(config.n_train);
    run_comparison(train, test, &corpus.vocabulary, config)
}

/// Trains on `train`, evaluates on `test`; `config.corpus` is ignored.
pub fn run_comparison(
    train: &[Document],
    test: &[Document],
    vocab: &LabelVocabulary,
    config: &BenchConfig,
) -> Result<BenchOutput> {
    let index = build_index(train)?;
    info!(
        "indexed {} training documents, {} terms",
        index.n_docs(),
        index.n_terms()
    );
    let instances = assemble_training_set(train, &index, vocab, config.k)?;
    let positives = instances.iter().filter(|i| i.class).count();
    info!("{} training instances, {positives} positive", instances.len());
    let queries = prepare_queries(test, &index, vocab, config.k)?;

    let forest = ForestParams {
        n_trees: config.n_trees,
        ..ForestParams::default()
    };
    let mut knn = Vec::new();
    let mut predictions = BTreeMap::new();
    let mut gains = Vec::new();
    for algorithm in Algorithm::ALL {
        let model = train_with(&instances, algorithm, config.seed, &forest)?;
        if algorithm == Algorithm::NaiveBayes {
            gains = feature_gains(&model, &instances)?;
        }
        let ranked = rank_queries(&model, &queries)?;
        for strategy in config.strategies() {
            let preds = select_predictions(&queries, &ranked, strategy);
            let report = evaluate_run(test, &preds)?.report;
            knn.push(KnnRow {
                algorithm,
                strategy: strategy.name().to_owned(),
                report,
            });
            predictions.insert(prediction_key(algorithm, &strategy), preds);
        }
    }

    let mut esa = Vec::new();
    for measure in [Measure::Jaccard, Measure::TfIcf] {
        let assoc = build_associations(train, AssociationParams::new(measure))?;
        let preds = test
            .par_iter()
            .filter(|d| !d.labels.is_empty())
            .map(|d| {
                let ranked = esa_classify(d, &assoc, d.labels.len())?;
                Ok(Prediction {
                    id: d.id.clone(),
                    labels: ranked.top(ranked.len()),
                    ranked: ranked.to_pairs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        esa.push(EsaRow {
            measure,
            report: evaluate_run(test, &preds)?.report,
        });
        let key = match measure {
            Measure::Jaccard => "esa-jaccard",
            Measure::TfIcf => "esa-tficf",
        };
        predictions.insert(key.to_owned(), preds);
    }

    let top = most_frequent_labels(train, config.baseline_size);
    let baseline_preds: Vec<Prediction> = test
        .iter()
        .map(|d| Prediction {
            id: d.id.clone(),
            labels: top.clone(),
            ranked: Vec::new(),
        })
        .collect();
    let baseline = evaluate_run(test, &baseline_preds)?.report;

    Ok(BenchOutput {
        report: BenchReport {
            config: config.clone(),
            training_instances: instances.len(),
            positive_instances: positives,
            candidate_recall: candidate_recall(&queries),
            baseline,
            knn,
            esa,
            feature_gain: gains,
        },
        predictions,
    })
}

impl BenchReport {
    pub fn knn_row(&self, algorithm: Algorithm, strategy: &str) -> Option<&MetricReport> {
        self.knn
            .iter()
            .find(|r| r.algorithm == algorithm && r.strategy == strategy)
            .map(|r| &r.report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "train={} test={} k={} seed={} instances={} (positive {})",
            self.config.n_train,
            self.config.n_test,
            self.config.k,
            self.config.seed,
            self.training_instances,
            self.positive_instances
        );
        let _ = writeln!(out, "candidate recall {:.4}\n", self.candidate_recall);

        let mut gain = String::from("Feature information gain (bits)\n");
        for g in &self.feature_gain {
            let _ = writeln!(gain, "{:<4} {:.4}", g.feature, g.gain);
        }
        out.push_str(&gain);
        out.push('\n');

        for strategy in ["threshold", "avgsize", "cutoff"] {
            let rows: Vec<(String, MetricReport)> = self
                .knn
                .iter()
                .filter(|r| r.strategy == strategy)
                .map(|r| (r.algorithm.to_string(), r.report))
                .collect();
            out.push_str(&render_table(&format!("kNN ranking, {strategy} selection"), &rows));
            out.push('\n');
        }

        let mut rows: Vec<(String, MetricReport)> = self
            .esa
            .iter()
            .map(|r| (format!("ESA {}", r.measure), r.report))
            .collect();
        rows.push((format!("top-{} baseline", self.config.baseline_size), self.baseline));
        out.push_str(&render_table("Association ranking with gold label count", &rows));
        out
    }
}

/// One JSON object per line, in input order.
pub fn predictions_to_jsonl(predictions: &[Prediction]) -> String {
    let mut out = String::new();
    for p in predictions {
        out.push_str(&serde_json::to_string(p).expect("prediction serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_frequent_breaks_ties_by_id() {
        let docs = vec![
            Document::new("1", "", "").with_labels(["B", "C"]),
            Document::new("2", "", "").with_labels(["A", "C"]),
        ];
        assert_eq!(most_frequent_labels(&docs, 2), ["C", "A"]);
    }

    #[test]
    fn small_synthetic_run() {
        let config = BenchConfig {
            n_train: 300,
            n_test: 60,
            n_trees: 10,
            ..BenchConfig::default()
        };
        let out = run_synthetic(&config).unwrap();
        assert_eq!(out.report.knn.len(), 9);
        assert_eq!(out.report.esa.len(), 2);
        assert_eq!(out.report.feature_gain.len(), 6);
        assert!(out.report.candidate_recall > 0.8);
        assert_eq!(out.predictions.len(), 11);
        assert!(out.predictions.values().all(|p| p.len() == 60));
        let text = out.report.render();
        assert!(text.contains("cutoff selection"));
    }
}
