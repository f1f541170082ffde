//! RMSProp / MSE training with per-epoch bin evaluation.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use crate::error::{Error, Result};
use crate::generators::{Dataset, Example};
use crate::lang::{LanguageId, Symbol};
use crate::neural::{Model, ModelConfig, RmsProp};
use crate::rng;

pub const MAX_EPOCHS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Evaluate the bins every this many epochs (the last epoch is always
    /// evaluated).
    pub eval_every: usize,
    /// Strings per bin used by the per-epoch evaluation; the final
    /// evaluation always uses every string.
    pub eval_limit: Option<usize>,
    /// Stop as soon as every bin reads 100%.
    pub early_stop: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            lr: 1e-3,
            epochs: MAX_EPOCHS,
            batch_size: 32,
            eval_every: 1,
            eval_limit: None,
            early_stop: true,
        }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidConfig(format!("learning rate {} must be positive", self.lr)));
        }
        if self.epochs == 0 || self.epochs > MAX_EPOCHS {
            return Err(Error::InvalidConfig(format!(
                "epochs must be in [1, {MAX_EPOCHS}], got {}",
                self.epochs
            )));
        }
        if self.batch_size == 0 || self.eval_every == 0 || self.eval_limit == Some(0) {
            return Err(Error::InvalidConfig(
                "batch size, evaluation interval and evaluation limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochsExhausted,
    EarlyStop,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinResult {
    /// Inclusive length range.
    pub range: [usize; 2],
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    /// Empty for epochs without evaluation.
    pub bins: Vec<f64>,
}

/// Summary of one training run; also the on-disk results record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub language: LanguageId,
    pub config: ModelConfig,
    pub lr: f64,
    pub seed: u64,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub bins: Vec<BinResult>,
    pub wall_seconds: f64,
    pub n_parameters: usize,
    pub history: Vec<EpochRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// Set when the run diverged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl TrainRun {
    pub fn accuracies(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.accuracy).collect()
    }

    pub fn mean_accuracy(&self) -> f64 {
        if self.bins.is_empty() {
            0.0
        } else {
            self.bins.iter().map(|b| b.accuracy).sum::<f64>() / self.bins.len() as f64
        }
    }
}

fn eval_bins(model: &Model, dataset: &Dataset, limit: Option<usize>) -> Result<Vec<f64>> {
    dataset
        .bins
        .iter()
        .map(|b| {
            let n = limit.map_or(b.examples.len(), |l| l.min(b.examples.len()));
            if n == 0 {
                Ok(0.0)
            } else {
                evaluate(model, &b.examples[..n])
            }
        })
        .collect()
}

fn is_divergence(e: &Error) -> bool {
    matches!(e, Error::NonFinite(_))
}

/// Trains `config` on `dataset`. Parameter initialisation uses stream 0
/// of `seed`, batch order stream 1; one thread gives a bit-identical run.
pub fn train(config: &ModelConfig, dataset: &Dataset, opts: &TrainOptions, seed: u64) -> Result<(Model, TrainRun)> {
    opts.validate()?;
    config.validate()?;
    if let ModelConfig::Transformer(c) = config {
        let longest = dataset
            .train
            .iter()
            .chain(dataset.bins.iter().flat_map(|b| &b.examples))
            .map(|e| e.length)
            .max()
            .unwrap_or(0);
        if c.positional == crate::neural::PositionalScheme::Learned && c.max_len < longest {
            return Err(Error::InvalidConfig(format!(
                "learned position table holds {} positions but the dataset has strings of length {longest}",
                c.max_len
            )));
        }
    }
    let started = Instant::now();
    let spec = dataset.language_spec()?;
    let mut model = config.build(spec.alphabet().clone(), &mut rng::stream(seed, 0))?;
    let mut order_rng = rng::stream(seed, 1);
    let mut optim = RmsProp::new(opts.lr);
    let mut grads = model.params().zeros_like();
    let train: Vec<&Example> = dataset.train.iter().filter(|e| !e.symbols.is_empty()).collect();
    if train.is_empty() {
        return Err(Error::Precondition("training split has no non-empty strings".into()));
    }

    let mut history = Vec::new();
    let mut stop_reason = StopReason::EpochsExhausted;
    let mut diagnostic = None;
    let mut epochs_run = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    'epochs: for epoch in 1..=opts.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(opts.batch_size) {
            let batch: Vec<(&[Symbol], &[Vec<u8>])> = chunk
                .iter()
                .map(|&i| (&train[i].symbols[..], &train[i].targets[..]))
                .collect();
            grads.zero();
            let step = model
                .loss_and_grad(&batch, &mut grads)
                .and_then(|loss| {
                    if loss.is_finite() {
                        Ok(loss)
                    } else {
                        Err(Error::NonFinite("loss".into()))
                    }
                })
                .and_then(|loss| optim.step(model.params_mut(), &grads).map(|_| loss));
            match step {
                Ok(loss) => {
                    loss_sum += loss;
                    batches += 1;
                }
                Err(e) if is_divergence(&e) => {
                    log::warn!("{}: diverged in epoch {epoch}: {e}", config.label());
                    stop_reason = StopReason::Diverged;
                    diagnostic = Some(format!("epoch {epoch}: {e}"));
                    epochs_run = epoch;
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
        epochs_run = epoch;
        let loss = loss_sum / batches.max(1) as f64;
        let evaluate_now = epoch % opts.eval_every == 0 || epoch == opts.epochs;
        let bins = if evaluate_now {
            eval_bins(&model, dataset, opts.eval_limit)?
        } else {
            Vec::new()
        };
        log::debug!("{} epoch {epoch}: loss {loss:.6} bins {bins:?}", config.label());
        let perfect = evaluate_now && bins.iter().all(|&a| a == 100.0);
        history.push(EpochRecord { epoch, loss, bins });
        if opts.early_stop && perfect {
            let full = if opts.eval_limit.is_some() {
                eval_bins(&model, dataset, None)?.iter().all(|&a| a == 100.0)
            } else {
                true
            };
            if full {
                stop_reason = StopReason::EarlyStop;
                break;
            }
        }
    }

    let accuracies = if stop_reason == StopReason::Diverged {
        vec![0.0; dataset.bins.len()]
    } else {
        eval_bins(&model, dataset, None)?
    };
    let run = TrainRun {
        language: dataset.language.clone(),
        config: config.clone(),
        lr: opts.lr,
        seed,
        epochs_run,
        stop_reason,
        bins: dataset
            .bins
            .iter()
            .zip(accuracies)
            .map(|(b, accuracy)| BinResult {
                range: [b.lo, b.hi],
                accuracy,
            })
            .collect(),
        wall_seconds: started.elapsed().as_secs_f64(),
        n_parameters: model.n_parameters(),
        history,
        checkpoint: None,
        diagnostic,
    };
    Ok((model, run))
}
