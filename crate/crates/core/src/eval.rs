//! Example-based multi-label metrics and information gain.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabelId};
use crate::error::{Error, Result};

/// Per-document precision, recall, F (Dice) and accuracy (Jaccard).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleScores {
    pub ebp: f64,
    pub ebr: f64,
    pub ebf: f64,
    pub acc: f64,
}

/// Scores for one document, or `None` when the gold set is empty (such
/// documents are excluded from averaging). An empty prediction scores
/// precision 0.
pub fn example_metrics(gold: &BTreeSet<LabelId>, predicted: &BTreeSet<LabelId>) -> Option<ExampleScores> {
    if gold.is_empty() {
        return None;
    }
    let inter = gold.intersection(predicted).count() as f64;
    let y = gold.len() as f64;
    let z = predicted.len() as f64;
    let union = y + z - inter;
    Some(ExampleScores {
        ebp: if z == 0.0 { 0.0 } else { inter / z },
        ebr: inter / y,
        ebf: 2.0 * inter / (y + z),
        acc: inter / union,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ebp: f64,
    pub ebr: f64,
    pub ebf: f64,
    pub acc: f64,
    /// Documents averaged over.
    pub m: usize,
    /// Documents left out because their gold set is empty.
    pub excluded: usize,
    /// Averaged documents that received no prediction at all.
    pub empty_predictions: usize,
}

/// Arithmetic means, summed in input order.
pub fn aggregate(per_doc: &[ExampleScores]) -> Result<MetricReport> {
    if per_doc.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = per_doc.len() as f64;
    let mut sum = [0.0f64; 4];
    for s in per_doc {
        sum[0] += s.ebp;
        sum[1] += s.ebr;
        sum[2] += s.ebf;
        sum[3] += s.acc;
    }
    Ok(MetricReport {
        ebp: sum[0] / m,
        ebr: sum[1] / m,
        ebf: sum[2] / m,
        acc: sum[3] / m,
        m: per_doc.len(),
        excluded: 0,
        empty_predictions: 0,
    })
}

fn entropy_bits(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `H(class) - H(class | feature)` in bits. Feature values are visited in
/// sorted order so the floating-point sum is reproducible.
pub fn information_gain<T: Ord>(feature: &[T], class: &[bool]) -> Result<f64> {
    if feature.len() != class.len() {
        return Err(Error::LengthMismatch(feature.len(), class.len()));
    }
    if feature.len() < 2 {
        return Err(Error::InvalidParameter(
            "information gain needs at least two rows".into(),
        ));
    }
    let n = class.len();
    let pos = class.iter().filter(|c| **c).count();
    let h = entropy_bits([pos, n - pos].into_iter(), n);
    let mut by_value: BTreeMap<&T, [usize; 2]> = BTreeMap::new();
    for (v, &c) in feature.iter().zip(class) {
        by_value.entry(v).or_default()[c as usize] += 1;
    }
    let conditional: f64 = by_value
        .values()
        .map(|c| {
            let m = c[0] + c[1];
            m as f64 / n as f64 * entropy_bits(c.iter().copied(), m)
        })
        .sum();
    Ok((h - conditional).max(0.0))
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub labels: Vec<LabelId>,
    #[serde(default)]
    pub ranked: Vec<(LabelId, f64)>,
}

pub fn write_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for p in predictions {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvaluation {
    pub report: MetricReport,
    /// `(document id, scores)` for every averaged document, in gold order.
    pub per_doc: Vec<(String, ExampleScores)>,
}

/// Joins predictions to gold documents by id. Gold documents without a
/// prediction line count as empty predictions.
pub fn evaluate_run(gold: &[Document], predictions: &[Prediction]) -> Result<RunEvaluation> {
    let gold_ids: HashSet<&str> = gold.iter().map(|d| d.id.as_str()).collect();
    let unknown: Vec<String> = predictions
        .iter()
        .filter(|p| !gold_ids.contains(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownIds(unknown));
    }
    let by_id: HashMap<&str, &Prediction> = predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut per_doc = Vec::new();
    let mut excluded = 0;
    let mut empty = 0;
    for doc in gold {
        let predicted: BTreeSet<LabelId> = by_id
            .get(doc.id.as_str())
            .map(|p| p.labels.iter().cloned().collect())
            .unwrap_or_default();
        match example_metrics(&doc.labels, &predicted) {
            Some(s) => {
                if predicted.is_empty() {
                    empty += 1;
                }
                per_doc.push((doc.id.clone(), s));
            }
            None => excluded += 1,
        }
    }
    let scores: Vec<ExampleScores> = per_doc.iter().map(|(_, s)| *s).collect();
    let mut report = aggregate(&scores)?;
    report.excluded = excluded;
    report.empty_predictions = empty;
    Ok(RunEvaluation { report, per_doc })
}

/// Plain-text comparison table, one row per named configuration.
pub fn render_table(title: &str, rows: &[(String, MetricReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(13);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>5}",
        "configuration", "EBP", "EBR", "EBF", "Acc", "m"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6.4}  {:>6.4}  {:>6.4}  {:>6.4}  {:>5}",
            name, r.ebp, r.ebr, r.ebf, r.acc, r.m
        );
    }
    out
}
