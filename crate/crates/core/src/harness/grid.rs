//! Hyperparameter grids, budgeted sampling and parallel grid search.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{train, BinResult, StopReason, TrainOptions, TrainRun};
use crate::error::{Error, Result};
use crate::generators::Dataset;
use crate::lang::LanguageId;
use crate::neural::{LstmConfig, ModelConfig, PositionalScheme, TransformerConfig};
use crate::rng;

pub const GRID_LRS: [f64; 2] = [1e-2, 1e-3];
/// `(d_model, heads)` pairs of the full transformer grid; four heads are
/// not used with three hidden units.
pub const TRANSFORMER_WIDTHS: [(usize, usize); 9] =
    [(3, 1), (4, 1), (4, 4), (8, 1), (8, 4), (16, 1), (16, 4), (32, 1), (32, 4)];
pub const TRANSFORMER_LAYERS: [usize; 3] = [1, 2, 4];
pub const GRID_SCHEMES: [PositionalScheme; 3] =
    [PositionalScheme::Absolute, PositionalScheme::Relative, PositionalScheme::Masking];
pub const LSTM_HIDDEN: [usize; 10] = [3, 4, 5, 6, 8, 10, 12, 16, 24, 32];
pub const LSTM_LAYERS: [usize; 2] = [1, 2];

/// Desk-scale subsets: 20 configurations per scheme or family.
pub const DESK_TRANSFORMER_WIDTHS: [(usize, usize); 5] = [(8, 1), (8, 4), (16, 1), (16, 4), (32, 4)];
pub const DESK_TRANSFORMER_LAYERS: [usize; 2] = [1, 2];
pub const DESK_LSTM_HIDDEN: [usize; 5] = [4, 8, 16, 24, 32];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub config: ModelConfig,
    pub lr: f64,
}

/// Architectural switches shared by every transformer of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformerFlags {
    pub residual: bool,
    pub layer_norm: bool,
    pub max_len: usize,
}

impl Default for TransformerFlags {
    fn default() -> Self {
        TransformerFlags {
            residual: true,
            layer_norm: true,
            max_len: 1024,
        }
    }
}

fn transformer_points(
    widths: &[(usize, usize)],
    layers: &[usize],
    schemes: &[PositionalScheme],
    flags: TransformerFlags,
) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &scheme in schemes {
        for &(d, h) in widths {
            for &l in layers {
                for &lr in &GRID_LRS {
                    let mut cfg = TransformerConfig::new(d, h, l, scheme);
                    cfg.residual = flags.residual;
                    cfg.layer_norm = flags.layer_norm;
                    cfg.max_len = flags.max_len;
                    out.push(GridPoint {
                        config: ModelConfig::Transformer(cfg),
                        lr,
                    });
                }
            }
        }
    }
    out
}

fn lstm_points(hidden: &[usize]) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &h in hidden {
        for &l in &LSTM_LAYERS {
            for &lr in &GRID_LRS {
                out.push(GridPoint {
                    config: ModelConfig::Lstm(LstmConfig::new(h, l)),
                    lr,
                });
            }
        }
    }
    out
}

/// The full transformer grid restricted to `schemes` (162 points for the
/// three standard schemes).
pub fn transformer_space(schemes: &[PositionalScheme], flags: TransformerFlags) -> Vec<GridPoint> {
    transformer_points(&TRANSFORMER_WIDTHS, &TRANSFORMER_LAYERS, schemes, flags)
}

/// The full LSTM grid (40 points).
pub fn lstm_space() -> Vec<GridPoint> {
    lstm_points(&LSTM_HIDDEN)
}

pub fn desk_transformer_space(schemes: &[PositionalScheme], flags: TransformerFlags) -> Vec<GridPoint> {
    transformer_points(&DESK_TRANSFORMER_WIDTHS, &DESK_TRANSFORMER_LAYERS, schemes, flags)
}

pub fn desk_lstm_space() -> Vec<GridPoint> {
    lstm_points(&DESK_LSTM_HIDDEN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    /// Largest number of points to run; a seeded uniform subset is drawn
    /// when the space is larger.
    pub budget: Option<usize>,
    /// Training settings; `lr` is replaced by each point's rate.
    pub train: TrainOptions,
    pub seed: u64,
    pub save_checkpoints: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            budget: None,
            train: TrainOptions::default(),
            seed: 0,
            save_checkpoints: false,
        }
    }
}

/// One run of a grid, with its position in the unsampled space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub index: usize,
    pub run: TrainRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub language: LanguageId,
    pub dataset_seed: u64,
    pub seed: u64,
    pub space_size: usize,
    pub runs: Vec<GridEntry>,
    /// Per bin, the mean of the five best accuracies.
    pub top5: Vec<BinResult>,
    /// Position in `runs` of the run with the highest mean accuracy.
    pub best: Option<usize>,
}

impl GridResult {
    pub fn best_run(&self) -> Option<&TrainRun> {
        self.best.map(|i| &self.runs[i].run)
    }

    /// Highest accuracy any run reached on each bin.
    pub fn max_per_bin(&self) -> Vec<f64> {
        let n = self.runs.first().map_or(0, |e| e.run.bins.len());
        (0..n)
            .map(|b| self.runs.iter().map(|e| e.run.bins[b].accuracy).fold(0.0, f64::max))
            .collect()
    }
}

/// Mean of the `k` largest values (of all of them when fewer).
pub fn top_k_mean(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.truncate(k);
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Per-bin top-5 means and the best run by mean accuracy (earliest on
/// ties).
pub fn summarize(runs: &[TrainRun]) -> (Vec<BinResult>, Option<usize>) {
    let Some(first) = runs.first() else {
        return (Vec::new(), None);
    };
    let top5 = first
        .bins
        .iter()
        .enumerate()
        .map(|(b, bin)| BinResult {
            range: bin.range,
            accuracy: top_k_mean(&runs.iter().map(|r| r.bins[b].accuracy).collect::<Vec<_>>(), 5),
        })
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.mean_accuracy() > runs[best].mean_accuracy() {
            best = i;
        }
    }
    (top5, Some(best))
}

/// Indices of the points a budget selects, in space order.
pub fn budget_indices(space_size: usize, budget: Option<usize>, seed: u64) -> Vec<usize> {
    match budget {
        Some(b) if b < space_size => {
            let mut idx = sample(&mut rng::stream(seed, u64::MAX), space_size, b).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..space_size).collect(),
    }
}

pub fn run_file_name(index: usize, point: &GridPoint) -> String {
    format!("run-{index:03}-{}-lr{}.json", point.config.label(), point.lr)
}

pub const GRID_INDEX_FILE: &str = "grid.json";

/// Trains every selected point in parallel. Run `i` of the space uses the
/// seed `derive_seed(seed, i)`. With `out`, each run is written as its
/// own JSON file as soon as it finishes and the summary goes to
/// `grid.json`.
pub fn grid_search(
    dataset: &Dataset,
    space: &[GridPoint],
    opts: &GridOptions,
    out: Option<&Path>,
) -> Result<GridResult> {
    if space.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter space".into()));
    }
    for p in space {
        p.config.validate()?;
        TrainOptions { lr: p.lr, ..opts.train.clone() }.validate()?;
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let chosen = budget_indices(space.len(), opts.budget, opts.seed);
    let entries = chosen
        .par_iter()
        .map(|&i| -> Result<GridEntry> {
            let point = &space[i];
            let seed = rng::derive_seed(opts.seed, i as u64);
            let train_opts = TrainOptions {
                lr: point.lr,
                ..opts.train.clone()
            };
            let (model, mut run) = train(&point.config, dataset, &train_opts, seed)?;
            log::info!(
                "{} lr {}: {:?} after {} epochs ({:?})",
                point.config.label(),
                point.lr,
                run.accuracies(),
                run.epochs_run,
                run.stop_reason
            );
            if let Some(dir) = out {
                let name = run_file_name(i, point);
                if opts.save_checkpoints && run.stop_reason != StopReason::Diverged {
                    let ckpt = PathBuf::from(name.replace(".json", ".ckpt.json"));
                    model.save(&dir.join(&ckpt))?;
                    run.checkpoint = Some(ckpt);
                }
                write_json(&dir.join(name), &run)?;
            }
            Ok(GridEntry { index: i, run })
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<TrainRun> = entries.iter().map(|e| e.run.clone()).collect();
    let (top5, best) = summarize(&runs);
    let result = GridResult {
        language: dataset.language.clone(),
        dataset_seed: dataset.seed,
        seed: opts.seed,
        space_size: space.len(),
        runs: entries,
        top5,
        best,
    };
    if let Some(dir) = out {
        write_json(&dir.join(GRID_INDEX_FILE), &result)?;
    }
    Ok(result)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = serde_json::to_vec_pretty(value)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
