//! A model of either family, its configuration, and checkpoint files.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{Lstm, LstmConfig};
use super::tensor::{Mat, ParamSet};
use super::transformer::{Transformer, TransformerConfig};
use crate::error::{Error, Result};
use crate::lang::{Alphabet, Symbol};

/// Anything that maps a word to per-step probability rows over
/// `Σ ∪ {EOS}`.
pub trait Predictor: Sync {
    fn probabilities(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Transformer(TransformerConfig),
    Lstm(LstmConfig),
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Transformer(c) => c.validate(),
            ModelConfig::Lstm(c) => c.validate(),
        }
    }

    pub fn build<R: Rng + ?Sized>(&self, alphabet: Alphabet, rng: &mut R) -> Result<Model> {
        Ok(match self {
            ModelConfig::Transformer(c) => Model::Transformer(Transformer::new(c.clone(), alphabet, rng)?),
            ModelConfig::Lstm(c) => Model::Lstm(Lstm::new(c.clone(), alphabet, rng)?),
        })
    }

    /// Compact label such as `transformer-d16-h4-l1-masking`.
    pub fn label(&self) -> String {
        match self {
            ModelConfig::Transformer(c) => {
                let mut s = format!(
                    "transformer-d{}-h{}-l{}-{}",
                    c.d_model, c.heads, c.layers, c.positional
                );
                if !c.residual {
                    s.push_str("-nores");
                }
                if !c.layer_norm {
                    s.push_str("-noln");
                }
                s
            }
            ModelConfig::Lstm(c) => format!("lstm-h{}-l{}", c.hidden, c.layers),
        }
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug)]
pub enum Model {
    Transformer(Transformer),
    Lstm(Lstm),
}

impl Model {
    pub fn config(&self) -> ModelConfig {
        match self {
            Model::Transformer(m) => ModelConfig::Transformer(m.config().clone()),
            Model::Lstm(m) => ModelConfig::Lstm(m.config().clone()),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Model::Transformer(m) => m.alphabet(),
            Model::Lstm(m) => m.alphabet(),
        }
    }

    pub fn params(&self) -> &ParamSet {
        match self {
            Model::Transformer(m) => m.params(),
            Model::Lstm(m) => m.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            Model::Transformer(m) => m.params_mut(),
            Model::Lstm(m) => m.params_mut(),
        }
    }

    pub fn forward(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        match self {
            Model::Transformer(m) => m.forward(word),
            Model::Lstm(m) => m.forward(word),
        }
    }

    pub fn loss_and_grad(&self, batch: &[(&[Symbol], &[Vec<u8>])], grads: &mut ParamSet) -> Result<f64> {
        match self {
            Model::Transformer(m) => m.loss_and_grad(batch, grads),
            Model::Lstm(m) => m.loss_and_grad(batch, grads),
        }
    }

    /// On/off state of every ReLU over the batch. Empty for the LSTM, which
    /// is smooth everywhere.
    pub fn relu_pattern(&self, batch: &[(&[Symbol], &[Vec<u8>])]) -> Result<Vec<bool>> {
        match self {
            Model::Transformer(m) => {
                let mut out = Vec::new();
                for (word, _) in batch {
                    out.extend(m.relu_pattern(word)?);
                }
                Ok(out)
            }
            Model::Lstm(_) => Ok(Vec::new()),
        }
    }

    /// Batch loss without gradients.
    pub fn loss(&self, batch: &[(&[Symbol], &[Vec<u8>])]) -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for (word, targets) in batch {
            let probs = self.forward(word)?;
            for (p, y) in probs.iter().zip(targets.iter()) {
                if p.len() != y.len() {
                    return Err(Error::Shape("target row width".into()));
                }
                for (p, &y) in p.iter().zip(y) {
                    total += (p - y as f64).powi(2);
                    count += 1;
                }
            }
        }
        Ok(if count == 0 { 0.0 } else { total / count as f64 })
    }

    pub fn n_parameters(&self) -> usize {
        self.params().n_scalars()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let ckpt = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            alphabet: self.alphabet().symbols().iter().collect(),
            config: self.config(),
            tensors: self
                .params()
                .names()
                .iter()
                .zip(self.params().tensors())
                .map(|(name, t)| NamedTensor {
                    name: name.clone(),
                    shape: [t.rows, t.cols],
                    data: t.data.clone(),
                })
                .collect(),
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        fs::write(path, serde_json::to_vec(&ckpt)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint =
            serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))?;
        if ckpt.format_version != CHECKPOINT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported checkpoint version {}", ckpt.format_version),
            ));
        }
        let alphabet = Alphabet::new(ckpt.alphabet.chars());
        let mut params = ParamSet::new();
        for t in ckpt.tensors {
            if t.data.len() != t.shape[0] * t.shape[1] {
                return Err(Error::format(path, format!("tensor {} has the wrong length", t.name)));
            }
            params.add(t.name, Mat::from_vec(t.shape[0], t.shape[1], t.data));
        }
        match ckpt.config {
            ModelConfig::Transformer(c) => Ok(Model::Transformer(Transformer::from_params(c, alphabet, params)?)),
            ModelConfig::Lstm(c) => Ok(Model::Lstm(Lstm::from_params(c, alphabet, params)?)),
        }
    }
}

impl Predictor for Model {
    fn probabilities(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        self.forward(word)
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    alphabet: String,
    config: ModelConfig,
    tensors: Vec<NamedTensor>,
}

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: [usize; 2],
    data: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::PositionalScheme;
    use crate::rng;

    #[test]
    fn checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = rng::stream(5, 0);
        for cfg in [
            ModelConfig::Transformer(TransformerConfig::new(4, 2, 2, PositionalScheme::Relative)),
            ModelConfig::Lstm(LstmConfig::new(3, 2)),
        ] {
            let m = cfg.build(Alphabet::new(['[', ']']), &mut r).unwrap();
            let path = dir.path().join(format!("{}.json", cfg.label()));
            m.save(&path).unwrap();
            let back = Model::load(&path).unwrap();
            assert_eq!(back.config(), cfg);
            assert_eq!(back.params(), m.params());
            assert_eq!(back.forward(&[0, 1, 0]).unwrap(), m.forward(&[0, 1, 0]).unwrap());
        }
    }

    #[test]
    fn config_json_shape() {
        let cfg = ModelConfig::Lstm(LstmConfig::new(8, 1));
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(json, r#"{"kind":"lstm","hidden":8,"layers":1}"#);
        let back: ModelConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
