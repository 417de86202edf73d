//! Supervised discretization of numeric features: recursive entropy
//! minimization with the Fayyad–Irani MDL stopping rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::features::{Features, FEATURE_COUNT, NUMERIC_FEATURES};

/// Entropy in bits of a two-class count.
pub(crate) fn entropy2(pos: f64, neg: f64) -> f64 {
    let n = pos + neg;
    if n == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in [pos, neg] {
        if c > 0.0 {
            let p = c / n;
            h -= p * p.log2();
        }
    }
    h
}

#[derive(Debug, Clone, Copy)]
struct Group {
    value: f64,
    pos: usize,
    neg: usize,
}

/// Cut points for one numeric column, ascending.
pub fn mdl_cut_points(values: &[(f64, bool)]) -> Vec<f64> {
    let mut sorted: Vec<(f64, bool)> = values.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<Group> = Vec::new();
    for (v, class) in sorted {
        match groups.last_mut() {
            Some(g) if g.value == v => {
                if class {
                    g.pos += 1
                } else {
                    g.neg += 1
                }
            }
            _ => groups.push(Group {
                value: v,
                pos: class as usize,
                neg: (!class) as usize,
            }),
        }
    }
    let mut cuts = Vec::new();
    split(&groups, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn split(groups: &[Group], cuts: &mut Vec<f64>) {
    if groups.len() < 2 {
        return;
    }
    let pos: usize = groups.iter().map(|g| g.pos).sum();
    let neg: usize = groups.iter().map(|g| g.neg).sum();
    let n = (pos + neg) as f64;
    let h = entropy2(pos as f64, neg as f64);
    if h == 0.0 {
        return;
    }

    let mut best: Option<(usize, f64)> = None;
    let (mut lp, mut ln) = (0usize, 0usize);
    for i in 1..groups.len() {
        lp += groups[i - 1].pos;
        ln += groups[i - 1].neg;
        let (rp, rn) = (pos - lp, neg - ln);
        let nl = (lp + ln) as f64;
        let nr = (rp + rn) as f64;
        let e = (nl * entropy2(lp as f64, ln as f64) + nr * entropy2(rp as f64, rn as f64)) / n;
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((i, e));
        }
    }
    let Some((at, weighted)) = best else { return };

    let (left, right) = groups.split_at(at);
    let count = |gs: &[Group]| {
        let p: usize = gs.iter().map(|g| g.pos).sum();
        let q: usize = gs.iter().map(|g| g.neg).sum();
        (p as f64, q as f64)
    };
    let classes = |p: f64, q: f64| (p > 0.0) as u32 + (q > 0.0) as u32;
    let (l_pos, l_neg) = count(left);
    let (r_pos, r_neg) = count(right);
    let k = classes(pos as f64, neg as f64) as f64;
    let k1 = classes(l_pos, l_neg) as f64;
    let k2 = classes(r_pos, r_neg) as f64;
    let h1 = entropy2(l_pos, l_neg);
    let h2 = entropy2(r_pos, r_neg);

    let gain = h - weighted;
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - k1 * h1 - k2 * h2);
    let threshold = ((n - 1.0).log2() + delta) / n;
    if gain <= threshold {
        return;
    }
    cuts.push((left[left.len() - 1].value + right[0].value) / 2.0);
    split(left, cuts);
    split(right, cuts);
}

/// Bin index of `value`: values at or below the first cut fall in bin 0.
pub fn bin_of(cuts: &[f64], value: f64) -> usize {
    cuts.partition_point(|c| *c < value)
}

/// Per-feature cut points for the numeric features; binary features pass
/// through as bins 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    /// `(feature index, ascending cut points)` for every numeric feature.
    pub cuts: Vec<(usize, Vec<f64>)>,
}

impl Discretizer {
    pub fn fit<'a>(instances: impl IntoIterator<Item = (&'a Features, bool)>) -> Result<Self> {
        let rows: Vec<([f64; FEATURE_COUNT], bool)> = instances.into_iter().map(|(f, c)| (f.as_array(), c)).collect();
        if rows.len() < 2 {
            return Err(Error::DegenerateTrainingSet(format!(
                "{} instance(s); at least 2 required",
                rows.len()
            )));
        }
        let pos = rows.iter().filter(|r| r.1).count();
        if pos == 0 || pos == rows.len() {
            return Err(Error::DegenerateTrainingSet("only one class present".into()));
        }
        let cuts = NUMERIC_FEATURES
            .iter()
            .map(|&f| {
                let column: Vec<(f64, bool)> = rows.iter().map(|(x, c)| (x[f], *c)).collect();
                (f, mdl_cut_points(&column))
            })
            .collect();
        Ok(Discretizer { cuts })
    }

    /// Number of nominal values of each of the six features.
    pub fn cardinalities(&self) -> Vec<usize> {
        let mut card = vec![2; FEATURE_COUNT];
        for (f, cuts) in &self.cuts {
            card[*f] = cuts.len() + 1;
        }
        card
    }

    pub fn apply(&self, features: &Features) -> Result<Vec<u8>> {
        let x = features.as_array();
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidFeature {
                feature: i + 1,
                value: *v,
            });
        }
        let mut out: Vec<u8> = x.iter().map(|v| (*v > 0.0) as u8).collect();
        for (f, cuts) in &self.cuts {
            out[*f] = bin_of(cuts, x[*f]) as u8;
        }
        Ok(out)
    }
}
