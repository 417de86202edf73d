//! Run configuration: command-line flags over environment variables over a
//! flat `key = value` file over built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use semdex::esa::Measure;
use semdex::knn::select::{DEFAULT_ALPHA, DEFAULT_TAU};
use semdex::vsm::DEFAULT_K;
use semdex::{Algorithm, Strategy};

pub const DEFAULT_SEED: u64 = 42;

/// Keys accepted in a config file.
const KEYS: [&str; 11] = [
    "k",
    "alpha",
    "tau",
    "seed",
    "algorithm",
    "strategy",
    "measure",
    "corpus",
    "index",
    "model",
    "vocab",
];

/// Flags shared by every data-touching subcommand. Path flags also read
/// `SEMDEX_*` environment variables.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Neighbors retrieved per document [default: 25]
    #[arg(long)]
    pub k: Option<usize>,
    /// Cut-off selection steepness [default: 1.6]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Threshold selection minimum score [default: 0.5]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Random seed for training [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Label scorer: nb, dt or rf [default: rf]
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Label selection: threshold, avgsize or cutoff [default: cutoff]
    #[arg(long)]
    pub strategy: Option<String>,
    /// Association measure: jaccard or tficf [default: jaccard]
    #[arg(long)]
    pub measure: Option<String>,
    /// Training corpus (JSON Lines)
    #[arg(long, env = "SEMDEX_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Vector index file
    #[arg(long, env = "SEMDEX_INDEX")]
    pub index: Option<PathBuf>,
    /// Trained ranker model file
    #[arg(long, env = "SEMDEX_MODEL")]
    pub model: Option<PathBuf>,
    /// Label vocabulary (JSON)
    #[arg(long, env = "SEMDEX_VOCAB")]
    pub vocab: Option<PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", i + 1);
        };
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key {key:?}", i + 1);
        }
        out.insert(key, value.trim().to_owned());
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_file(&text).with_context(|| format!("in config {}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub alpha: f64,
    pub tau: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub measure: Measure,
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
}

fn pick<T>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| anyhow::anyhow!("config key {key}: cannot parse {raw:?}: {e}")),
        None => Ok(default),
    }
}

fn parse_flag<T>(raw: Option<&String>, what: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    raw.map(|s| s.parse().map_err(|e| anyhow::anyhow!("--{what}: {e}")))
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, file: &BTreeMap<String, String>) -> Result<Self> {
        let k = pick(args.k, file, "k", DEFAULT_K)?;
        let alpha = pick(args.alpha, file, "alpha", DEFAULT_ALPHA)?;
        let tau = pick(args.tau, file, "tau", DEFAULT_TAU)?;
        let seed = pick(args.seed, file, "seed", DEFAULT_SEED)?;
        let algorithm = pick(
            parse_flag::<Algorithm>(args.algorithm.as_ref(), "algorithm")?,
            file,
            "algorithm",
            Algorithm::RandomForest,
        )?;
        let measure = pick(
            parse_flag::<Measure>(args.measure.as_ref(), "measure")?,
            file,
            "measure",
            Measure::Jaccard,
        )?;
        let strategy_name = args
            .strategy
            .clone()
            .or_else(|| file.get("strategy").cloned())
            .unwrap_or_else(|| "cutoff".to_owned());
        let strategy = Strategy::parse(&strategy_name, tau, alpha)?;
        let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| file.get(key).map(PathBuf::from));
        let config = RunConfig {
            k,
            alpha,
            tau,
            seed,
            algorithm,
            strategy,
            measure,
            corpus: path(&args.corpus, "corpus"),
            index: path(&args.index, "index"),
            model: path(&args.model, "model"),
            vocab: path(&args.vocab, "vocab"),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            bail!("k must be at least 1");
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            bail!("alpha must be positive, got {}", self.alpha);
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            bail!("tau must lie strictly between 0 and 1, got {}", self.tau);
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_owned(), |p| p.display().to_string());
        write!(
            f,
            "k={} alpha={} tau={} seed={} algorithm={} strategy={} measure={} corpus={} index={} model={} vocab={}",
            self.k,
            self.alpha,
            self.tau,
            self.seed,
            self.algorithm.short_name(),
            self.strategy.name(),
            self.measure,
            p(&self.corpus),
            p(&self.index),
            p(&self.model),
            p(&self.vocab),
        )
    }
}
