//! Binary-class learners over nominal attributes: naive Bayes, an
//! information-gain decision tree with multiway splits, and a random forest
//! of such trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::discretize::entropy2;

/// Rows of nominal attribute values with a binary class.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalDataset {
    pub cardinalities: Vec<usize>,
    pub rows: Vec<Vec<u8>>,
    pub classes: Vec<bool>,
}

impl NominalDataset {
    pub fn new(cardinalities: Vec<usize>, rows: Vec<Vec<u8>>, classes: Vec<bool>) -> Result<Self> {
        if rows.len() != classes.len() {
            return Err(Error::LengthMismatch(rows.len(), classes.len()));
        }
        for row in &rows {
            if row.len() != cardinalities.len() {
                return Err(Error::LengthMismatch(row.len(), cardinalities.len()));
            }
            if let Some((f, v)) = row.iter().enumerate().find(|(f, v)| **v as usize >= cardinalities[*f]) {
                return Err(Error::InvalidParameter(format!(
                    "value {v} out of range for attribute {f}"
                )));
            }
        }
        Ok(NominalDataset {
            cardinalities,
            rows,
            classes,
        })
    }

    fn check_trainable(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::DegenerateTrainingSet("no instances".into()));
        }
        let pos = self.classes.iter().filter(|c| **c).count();
        if pos == 0 || pos == self.classes.len() {
            return Err(Error::DegenerateTrainingSet("only one class present".into()));
        }
        Ok(())
    }
}

/// Naive Bayes with add-one smoothing on the class prior and on every
/// conditional table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// `[P(class 0), P(class 1)]`.
    pub prior: [f64; 2],
    /// `cond[feature][value] = [P(value | 0), P(value | 1)]`.
    pub cond: Vec<Vec<[f64; 2]>>,
}

impl NaiveBayes {
    pub fn fit(data: &NominalDataset) -> Result<Self> {
        data.check_trainable()?;
        let mut class_counts = [0usize; 2];
        let mut counts: Vec<Vec<[usize; 2]>> = data.cardinalities.iter().map(|&c| vec![[0; 2]; c]).collect();
        for (row, &class) in data.rows.iter().zip(&data.classes) {
            let c = class as usize;
            class_counts[c] += 1;
            for (f, &v) in row.iter().enumerate() {
                counts[f][v as usize][c] += 1;
            }
        }
        let n = data.rows.len() as f64;
        let prior = [
            (class_counts[0] as f64 + 1.0) / (n + 2.0),
            (class_counts[1] as f64 + 1.0) / (n + 2.0),
        ];
        let cond = counts
            .iter()
            .map(|table| {
                let card = table.len() as f64;
                table
                    .iter()
                    .map(|cell| [0, 1].map(|c| (cell[c] as f64 + 1.0) / (class_counts[c] as f64 + card)))
                    .collect()
            })
            .collect();
        Ok(NaiveBayes { prior, cond })
    }

    /// `[P(0 | x), P(1 | x)]`, normalized in log space.
    pub fn posteriors(&self, row: &[u8]) -> [f64; 2] {
        let mut log = [self.prior[0].ln(), self.prior[1].ln()];
        for (f, &v) in row.iter().enumerate() {
            let p = self.cond[f][v as usize];
            log[0] += p[0].ln();
            log[1] += p[1].ln();
        }
        let m = log[0].max(log[1]);
        let e = [(log[0] - m).exp(), (log[1] - m).exp()];
        let z = e[0] + e[1];
        [e[0] / z, e[1] / z]
    }

    pub fn predict_proba(&self, row: &[u8]) -> f64 {
        self.posteriors(row)[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        pos: u32,
        neg: u32,
    },
    Split {
        feature: usize,
        pos: u32,
        neg: u32,
        children: Vec<Node>,
    },
}

impl Node {
    fn counts(&self) -> (u32, u32) {
        match self {
            Node::Leaf { pos, neg } | Node::Split { pos, neg, .. } => (*pos, *neg),
        }
    }

    /// Laplace-corrected probability of class 1 at the reached leaf.
    fn predict(&self, row: &[u8]) -> f64 {
        let mut node = self;
        while let Node::Split { feature, children, .. } = node {
            node = &children[row[*feature] as usize];
        }
        let (pos, neg) = node.counts();
        (pos as f64 + 1.0) / (pos as f64 + neg as f64 + 2.0)
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { children, .. } => 1 + children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }
}

/// How many attributes a node examines.
#[derive(Debug, Clone, Copy)]
enum AttributeSampling {
    /// Every remaining attribute, in index order.
    All,
    /// Attributes in random order until at least this many were examined
    /// and one of them has positive gain.
    Random(usize),
}

struct TreeBuilder<'a> {
    data: &'a NominalDataset,
    sampling: AttributeSampling,
}

const MIN_GAIN: f64 = 1e-12;

impl TreeBuilder<'_> {
    fn build(&self, rows: &[u32], available: &mut Vec<usize>, rng: &mut ChaCha8Rng) -> Node {
        let pos = rows.iter().filter(|&&r| self.data.classes[r as usize]).count() as u32;
        let neg = rows.len() as u32 - pos;
        if pos == 0 || neg == 0 || available.is_empty() {
            return Node::Leaf { pos, neg };
        }
        let node_entropy = entropy2(pos as f64, neg as f64);

        let mut order = available.clone();
        let quota = match self.sampling {
            AttributeSampling::All => order.len(),
            AttributeSampling::Random(m) => {
                order.shuffle(rng);
                m.min(order.len())
            }
        };
        let mut best: Option<(usize, f64)> = None;
        for (examined, &f) in order.iter().enumerate() {
            if examined >= quota && best.is_some_and(|(_, g)| g > MIN_GAIN) {
                break;
            }
            let gain = node_entropy - self.split_entropy(rows, f);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((f, gain));
            }
        }
        let Some((feature, gain)) = best else {
            return Node::Leaf { pos, neg };
        };
        if gain <= MIN_GAIN {
            return Node::Leaf { pos, neg };
        }

        let card = self.data.cardinalities[feature];
        let mut parts: Vec<Vec<u32>> = vec![Vec::new(); card];
        for &r in rows {
            parts[self.data.rows[r as usize][feature] as usize].push(r);
        }
        let slot = available.iter().position(|&f| f == feature).expect("available");
        available.remove(slot);
        let children = parts
            .iter()
            .map(|part| {
                if part.is_empty() {
                    Node::Leaf { pos, neg }
                } else {
                    self.build(part, available, rng)
                }
            })
            .collect();
        available.insert(slot, feature);
        Node::Split {
            feature,
            pos,
            neg,
            children,
        }
    }

    /// Weighted class entropy after splitting on `feature`.
    fn split_entropy(&self, rows: &[u32], feature: usize) -> f64 {
        let mut counts = vec![[0usize; 2]; self.data.cardinalities[feature]];
        for &r in rows {
            let r = r as usize;
            counts[self.data.rows[r][feature] as usize][self.data.classes[r] as usize] += 1;
        }
        let n = rows.len() as f64;
        counts
            .iter()
            .map(|c| {
                let m = (c[0] + c[1]) as f64;
                m / n * entropy2(c[1] as f64, c[0] as f64)
            })
            .sum()
    }
}

/// Unpruned information-gain tree; leaf probabilities are
/// `(pos + 1) / (total + 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
}

impl DecisionTree {
    pub fn fit(data: &NominalDataset) -> Result<Self> {
        data.check_trainable()?;
        let rows: Vec<u32> = (0..data.rows.len() as u32).collect();
        Ok(Self::grow(
            data,
            &rows,
            AttributeSampling::All,
            &mut ChaCha8Rng::seed_from_u64(0),
        ))
    }

    fn grow(data: &NominalDataset, rows: &[u32], sampling: AttributeSampling, rng: &mut ChaCha8Rng) -> Self {
        let builder = TreeBuilder { data, sampling };
        let mut available: Vec<usize> = (0..data.cardinalities.len()).collect();
        DecisionTree {
            root: builder.build(rows, &mut available, rng),
        }
    }

    pub fn predict_proba(&self, row: &[u8]) -> f64 {
        self.root.predict(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Attributes examined per split; `None` means `ceil(sqrt(#attributes))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `i` draws from its own ChaCha stream of `seed`, so the forest
    /// is independent of how trees are scheduled across threads.
    pub fn fit(data: &NominalDataset, params: &ForestParams, seed: u64) -> Result<Self> {
        data.check_trainable()?;
        if params.n_trees == 0 {
            return Err(Error::InvalidParameter("a forest needs at least one tree".into()));
        }
        let n_attr = data.cardinalities.len();
        let m = params
            .max_features
            .unwrap_or_else(|| (n_attr as f64).sqrt().ceil() as usize)
            .clamp(1, n_attr.max(1));
        let sampling = if m >= n_attr {
            AttributeSampling::All
        } else {
            AttributeSampling::Random(m)
        };
        let n = data.rows.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let rows: Vec<u32> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
                } else {
                    (0..n as u32).collect()
                };
                DecisionTree::grow(data, &rows, sampling, &mut rng)
            })
            .collect();
        Ok(RandomForest {
            params: params.clone(),
            trees,
        })
    }

    pub fn predict_proba(&self, row: &[u8]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(row)).sum();
        sum / self.trees.len() as f64
    }
}
