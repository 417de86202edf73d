use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use log::{info, warn};
use rayon::prelude::*;
use semdex::esa::{build_associations, esa_classify, AssociationIndex, AssociationParams, LabelCount};
use semdex::eval::{evaluate_run, read_predictions, render_table, write_predictions, Prediction};
use semdex::experiment::{predictions_to_jsonl, run_synthetic, BenchConfig};
use semdex::knn::{assemble_training_set, classify, train_with, ForestParams, KnnConfig};
use semdex::{build_index, load_corpus, load_vocabulary, Document, Error, RankerModel, VectorIndex};

use crate::config::{load_config_file, RunArgs, RunConfig};
use crate::{Cli, Command, Suite};

/// Prints a usage error and exits with status 2.
pub fn usage_error(message: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, message).exit()
}

fn require(path: Option<PathBuf>, flag: &str) -> PathBuf {
    path.unwrap_or_else(|| {
        Cli::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                format!("the following required argument was not provided: {flag} <PATH>"),
            )
            .exit()
    })
}

fn resolve(run: &RunArgs, file: &BTreeMap<String, String>, command: &str) -> RunConfig {
    let config = RunConfig::resolve(run, file).unwrap_or_else(|e| usage_error(format!("{e:#}")));
    info!("{command}: {config}");
    config
}

fn existing(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => load_config_file(p).unwrap_or_else(|e| usage_error(format!("{e:#}"))),
        None => BTreeMap::new(),
    };
    match cli.command {
        Command::BuildIndex { run, output } => {
            let cfg = resolve(&run, &file, "build-index");
            let corpus = require(cfg.corpus, "--corpus");
            let output = require(output.or(cfg.index), "--index");
            existing(&corpus, "corpus")?;
            let docs = load_corpus(&corpus)?;
            if let Some(vocab) = &cfg.vocab {
                load_vocabulary(vocab)?.check_labels(&docs)?;
            }
            let index = build_index(&docs)?;
            index.save(&output)?;
            info!(
                "indexed {} documents, {} terms -> {}",
                index.n_docs(),
                index.n_terms(),
                output.display()
            );
        }
        Command::Train { run, trees, output } => {
            let cfg = resolve(&run, &file, "train");
            let corpus = require(cfg.corpus, "--corpus");
            let index_path = require(cfg.index, "--index");
            let vocab_path = require(cfg.vocab, "--vocab");
            let output = require(output.or(cfg.model), "--model");
            if trees == 0 {
                usage_error("--trees must be at least 1");
            }
            for (p, what) in [(&corpus, "corpus"), (&index_path, "index"), (&vocab_path, "vocabulary")] {
                existing(p, what)?;
            }
            let docs = load_corpus(&corpus)?;
            let vocab = load_vocabulary(&vocab_path)?;
            vocab.check_labels(&docs)?;
            let index = VectorIndex::load(&index_path)?;
            if index.n_docs() != docs.len() || docs.iter().any(|d| !index.contains_doc(&d.id)) {
                bail!(
                    "index {} was not built from corpus {}",
                    index_path.display(),
                    corpus.display()
                );
            }
            let instances = assemble_training_set(&docs, &index, &vocab, cfg.k)?;
            let positives = instances.iter().filter(|i| i.class).count();
            info!("{} training instances, {positives} positive", instances.len());
            let forest = ForestParams {
                n_trees: trees,
                ..ForestParams::default()
            };
            let model = train_with(&instances, cfg.algorithm, cfg.seed, &forest)?;
            model.save(&output)?;
            info!("{} model -> {}", cfg.algorithm, output.display());
        }
        Command::Classify {
            run,
            input,
            output,
            exclude_self,
        } => {
            let cfg = resolve(&run, &file, "classify");
            let model_path = require(cfg.model, "--model");
            let index_path = require(cfg.index, "--index");
            let vocab_path = require(cfg.vocab, "--vocab");
            for (p, what) in [
                (&input, "input"),
                (&model_path, "model"),
                (&index_path, "index"),
                (&vocab_path, "vocabulary"),
            ] {
                existing(p, what)?;
            }
            let docs = load_corpus(&input)?;
            let model = RankerModel::load(&model_path)?;
            let index = VectorIndex::load(&index_path)?;
            let vocab = load_vocabulary(&vocab_path)?;
            let knn = KnnConfig {
                k: cfg.k,
                strategy: cfg.strategy,
                exclude_self,
            };
            let predictions = docs
                .par_iter()
                .map(|doc| match classify(doc, &model, &index, &vocab, &knn) {
                    Ok(c) => Ok(Prediction {
                        id: doc.id.clone(),
                        labels: c.labels,
                        ranked: c.ranked.to_pairs(),
                    }),
                    Err(Error::Unclassifiable(id)) => {
                        warn!("document {id:?} has no indexed terms; predicting no labels");
                        Ok(empty_prediction(doc))
                    }
                    Err(e) => Err(e).with_context(|| format!("classifying {}", doc.id)),
                })
                .collect::<Result<Vec<_>>>()?;
            write_predictions(&output, &predictions)?;
            info!("{} predictions -> {}", predictions.len(), output.display());
        }
        Command::Evaluate {
            gold,
            predictions,
            output,
        } => {
            info!(
                "evaluate: gold={} predictions={}",
                gold.display(),
                predictions.display()
            );
            existing(&gold, "gold corpus")?;
            existing(&predictions, "prediction file")?;
            let docs = load_corpus(&gold)?;
            let preds = read_predictions(&predictions)?;
            let run = evaluate_run(&docs, &preds)?;
            let r = run.report;
            print!(
                "{}",
                render_table("Example-based evaluation", &[(predictions.display().to_string(), r)])
            );
            println!(
                "excluded (no gold labels): {}, empty predictions: {}",
                r.excluded, r.empty_predictions
            );
            if let Some(out) = output {
                let json = serde_json::to_string_pretty(&r)?;
                fs::write(&out, json + "\n").with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Command::EsaBuild {
            run,
            min_df,
            cap,
            output,
        } => {
            let cfg = resolve(&run, &file, "esa-build");
            let corpus = require(cfg.corpus, "--corpus");
            if min_df == 0 || cap == 0 {
                usage_error("--min-df and --cap must be at least 1");
            }
            existing(&corpus, "corpus")?;
            let docs = load_corpus(&corpus)?;
            let params = AssociationParams {
                measure: cfg.measure,
                min_doc_freq: min_df,
                vector_cap: cap,
            };
            let assoc = build_associations(&docs, params)?;
            assoc.save(&output)?;
            info!(
                "{} association vectors over {} terms -> {}",
                assoc.concept_vectors.len(),
                assoc.inverted.len(),
                output.display()
            );
        }
        Command::EsaClassify {
            assoc,
            input,
            output,
            labels,
        } => {
            let count: LabelCount = labels.parse().unwrap_or_else(|e| usage_error(e));
            info!(
                "esa-classify: assoc={} input={} labels={labels}",
                assoc.display(),
                input.display()
            );
            existing(&assoc, "association file")?;
            existing(&input, "input")?;
            let index = AssociationIndex::load(&assoc)?;
            let docs = load_corpus(&input)?;
            let predictions = docs
                .par_iter()
                .map(|doc| {
                    let n = match count {
                        LabelCount::Gold => doc.labels.len(),
                        LabelCount::Fixed(n) => n,
                    };
                    if n == 0 {
                        warn!("document {:?} has no gold labels; predicting none", doc.id);
                        return Ok(empty_prediction(doc));
                    }
                    let ranked = esa_classify(doc, &index, n)?;
                    Ok(Prediction {
                        id: doc.id.clone(),
                        labels: ranked.top(n),
                        ranked: ranked.to_pairs(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_predictions(&output, &predictions)?;
            info!("{} predictions -> {}", predictions.len(), output.display());
        }
        Command::Bench {
            run,
            suite,
            train_docs,
            test_docs,
            trees,
            output_dir,
        } => {
            let cfg = resolve(&run, &file, "bench");
            if train_docs == 0 || test_docs == 0 || trees == 0 {
                usage_error("--train-docs, --test-docs and --trees must be at least 1");
            }
            let config = BenchConfig {
                n_train: train_docs,
                n_test: test_docs,
                k: cfg.k,
                tau: cfg.tau,
                alpha: cfg.alpha,
                seed: cfg.seed,
                n_trees: trees,
                ..BenchConfig::default()
            };
            let out = match suite {
                Suite::Synthetic => run_synthetic(&config)?,
            };
            let text = out.report.render();
            print!("{text}");
            if let Some(dir) = output_dir {
                let preds_dir = dir.join("predictions");
                fs::create_dir_all(&preds_dir).with_context(|| format!("creating {}", preds_dir.display()))?;
                fs::write(dir.join("report.json"), out.report.to_json() + "\n")?;
                fs::write(dir.join("report.txt"), &text)?;
                for (key, preds) in &out.predictions {
                    fs::write(preds_dir.join(format!("{key}.jsonl")), predictions_to_jsonl(preds))?;
                }
                info!("report and predictions -> {}", dir.display());
            }
        }
    }
    Ok(())
}

fn empty_prediction(doc: &Document) -> Prediction {
    Prediction {
        id: doc.id.clone(),
        labels: Vec::new(),
        ranked: Vec::new(),
    }
}
