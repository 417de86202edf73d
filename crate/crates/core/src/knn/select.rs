//! Choosing how many ranked labels to keep.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelId;
use crate::error::{Error, Result};
use crate::knn::model::RankedLabels;
use crate::vsm::Neighbor;

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// Keep labels scoring at least `tau`.
    Threshold { tau: f64 },
    /// Keep as many labels as the neighbors carry on average.
    AverageSize,
    /// Stop at the first steep drop between successive scores.
    Cutoff { alpha: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Threshold { .. } => "threshold",
            Strategy::AverageSize => "avgsize",
            Strategy::Cutoff { .. } => "cutoff",
        }
    }

    /// Parses `threshold|avgsize|cutoff`, filling in the given parameters.
    pub fn parse(name: &str, tau: f64, alpha: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "threshold" | "a" => Ok(Strategy::Threshold { tau }),
            "avgsize" | "average" | "b" => Ok(Strategy::AverageSize),
            "cutoff" | "c" => Ok(Strategy::Cutoff { alpha }),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }

    pub fn select(&self, ranked: &RankedLabels, neighbors: &[Neighbor]) -> Vec<LabelId> {
        match *self {
            Strategy::Threshold { tau } => select_threshold(ranked, tau),
            Strategy::AverageSize => select_average_size(ranked, neighbors),
            Strategy::Cutoff { alpha } => select_cutoff(ranked, alpha),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Threshold { tau } => write!(f, "threshold (tau={tau})"),
            Strategy::AverageSize => write!(f, "average size"),
            Strategy::Cutoff { alpha } => write!(f, "cut-off (alpha={alpha})"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::parse(s, DEFAULT_TAU, DEFAULT_ALPHA)
    }
}

pub fn select_threshold(ranked: &RankedLabels, tau: f64) -> Vec<LabelId> {
    ranked
        .iter()
        .filter(|r| r.score >= tau)
        .map(|r| r.label.clone())
        .collect()
}

/// Mean neighbor label-set size rounded half up, clamped to `[1, |ranked|]`.
pub fn average_size(neighbors: &[Neighbor]) -> usize {
    if neighbors.is_empty() {
        return 1;
    }
    let total: usize = neighbors.iter().map(|n| n.labels.len()).sum();
    let count = neighbors.len();
    ((2 * total + count) / (2 * count)).max(1)
}

pub fn select_average_size(ranked: &RankedLabels, neighbors: &[Neighbor]) -> Vec<LabelId> {
    let n = average_size(neighbors).min(ranked.len());
    ranked.top(n)
}

/// Number of labels kept: the first position `i` where
/// `s[i+1] / s[i] < i / (i + 1 + alpha)`, else all. Zero scores are dropped
/// first.
pub fn cutoff_size(scores: &[f64], alpha: f64) -> usize {
    let positive: Vec<f64> = scores.iter().copied().filter(|s| *s > 0.0).collect();
    if positive.is_empty() {
        return 0;
    }
    for i in 1..positive.len() {
        let ratio = positive[i] / positive[i - 1];
        let bound = i as f64 / (i as f64 + 1.0 + alpha);
        if ratio < bound {
            return i;
        }
    }
    positive.len()
}

pub fn select_cutoff(ranked: &RankedLabels, alpha: f64) -> Vec<LabelId> {
    let n = cutoff_size(&ranked.scores(), alpha);
    ranked
        .iter()
        .filter(|r| r.score > 0.0)
        .take(n)
        .map(|r| r.label.clone())
        .collect()
}
