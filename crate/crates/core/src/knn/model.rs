use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelId;
use crate::error::{Error, Result};
use crate::knn::discretize::Discretizer;
use crate::knn::features::CandidateLabel;
use crate::knn::learners::{DecisionTree, ForestParams, NaiveBayes, NominalDataset, RandomForest};
use crate::knn::TrainingInstance;
use crate::vsm::check_header;

pub const MODEL_MAGIC: &str = "semdex-ranker";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NaiveBayes,
    DecisionTree,
    RandomForest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::NaiveBayes, Algorithm::DecisionTree, Algorithm::RandomForest];

    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "nb",
            Algorithm::DecisionTree => "dt",
            Algorithm::RandomForest => "rf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::NaiveBayes => "NB",
            Algorithm::DecisionTree => "DT",
            Algorithm::RandomForest => "RF",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nb" | "naive_bayes" | "naivebayes" => Ok(Algorithm::NaiveBayes),
            "dt" | "decision_tree" | "decisiontree" => Ok(Algorithm::DecisionTree),
            "rf" | "random_forest" | "randomforest" => Ok(Algorithm::RandomForest),
            _ => Err(Error::UnknownAlgorithm(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Learner {
    NaiveBayes(NaiveBayes),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
}

/// A trained label scorer: discretization plus one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerModel {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub discretizer: Discretizer,
    pub learner: Learner,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    magic: String,
    version: u32,
    model: RankerModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLabel {
    pub label: LabelId,
    pub score: f64,
}

/// Labels ordered by score descending, then label ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankedLabels(pub Vec<RankedLabel>);

impl RankedLabels {
    /// Sorts into rank order; input order does not matter.
    pub fn from_scores(mut scores: Vec<RankedLabel>) -> Self {
        scores.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.label.cmp(&b.label))
        });
        scores.dedup_by(|a, b| a.label == b.label);
        RankedLabels(scores)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedLabel> {
        self.0.iter()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.score).collect()
    }

    pub fn top(&self, n: usize) -> Vec<LabelId> {
        self.0.iter().take(n).map(|r| r.label.clone()).collect()
    }

    /// `[[label, score], ...]` pairs for the prediction file.
    pub fn to_pairs(&self) -> Vec<(LabelId, f64)> {
        self.0.iter().map(|r| (r.label.clone(), r.score)).collect()
    }
}

pub fn train(instances: &[TrainingInstance], algorithm: Algorithm, seed: u64) -> Result<RankerModel> {
    train_with(instances, algorithm, seed, &ForestParams::default())
}

pub fn train_with(
    instances: &[TrainingInstance],
    algorithm: Algorithm,
    seed: u64,
    forest: &ForestParams,
) -> Result<RankerModel> {
    if instances.is_empty() {
        return Err(Error::DegenerateTrainingSet("no instances".into()));
    }
    let discretizer = Discretizer::fit(instances.iter().map(|i| (&i.features, i.class)))?;
    let rows = instances
        .iter()
        .map(|i| discretizer.apply(&i.features))
        .collect::<Result<Vec<_>>>()?;
    let classes = instances.iter().map(|i| i.class).collect();
    let data = NominalDataset::new(discretizer.cardinalities(), rows, classes)?;
    let learner = match algorithm {
        Algorithm::NaiveBayes => Learner::NaiveBayes(NaiveBayes::fit(&data)?),
        Algorithm::DecisionTree => Learner::DecisionTree(DecisionTree::fit(&data)?),
        Algorithm::RandomForest => Learner::RandomForest(RandomForest::fit(&data, forest, seed)?),
    };
    Ok(RankerModel {
        algorithm,
        seed,
        discretizer,
        learner,
    })
}

impl RankerModel {
    /// Posterior probability that the candidate is relevant.
    pub fn relevance(&self, candidate: &CandidateLabel) -> Result<f64> {
        let row = self.discretizer.apply(&candidate.features)?;
        Ok(self.relevance_nominal(&row))
    }

    pub fn relevance_nominal(&self, row: &[u8]) -> f64 {
        match &self.learner {
            Learner::NaiveBayes(m) => m.predict_proba(row),
            Learner::DecisionTree(m) => m.predict_proba(row),
            Learner::RandomForest(m) => m.predict_proba(row),
        }
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let file = ModelFile {
            magic: MODEL_MAGIC.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(r)?;
        check_header(&value, MODEL_MAGIC, MODEL_VERSION, "model")?;
        let file: ModelFile = serde_json::from_value(value)?;
        Ok(file.model)
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

/// Scores every candidate and sorts them into rank order.
pub fn score_candidates(model: &RankerModel, candidates: &mut [CandidateLabel]) -> Result<RankedLabels> {
    let mut scored = Vec::with_capacity(candidates.len());
    for c in candidates.iter_mut() {
        c.relevance = model.relevance(c)?;
        scored.push(RankedLabel {
            label: c.label.clone(),
            score: c.relevance,
        });
    }
    Ok(RankedLabels::from_scores(scored))
}
