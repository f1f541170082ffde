//! TOML run configuration. Every key is optional; command-line flags
//! override file values.
//!
//! ```toml
//! language = "dyck1"
//! seed = 0
//! out = "results/dyck1"
//! dataset = "data/dyck1"
//!
//! [data]            # overrides of the standard dataset sizes
//! train_size = 10000
//! bin_size = 2000
//!
//! [model]
//! kind = "transformer"
//! d_model = 16
//! heads = 4
//! layers = 1
//! positional = "masking"
//!
//! [train]
//! lr = 0.001
//! epochs = 100
//!
//! [grid]
//! family = "transformer"
//! schemes = ["absolute", "relative", "masking"]
//! full = false
//! budget = 20
//!
//! [verify]
//! samples = 10000
//!
//! [viz]
//! words = 200
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use langlab::constructions::VerifyOptions;
use langlab::generators::DatasetSpec;
use langlab::harness::{TrainOptions, GRID_SCHEMES};
use langlab::lang::LanguageId;
use langlab::neural::{LstmConfig, ModelConfig, PositionalScheme, TransformerConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog id such as `dyck1` or `tomita5`.
    pub language: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Dataset directory written by `generate`; `data/<language>` when absent.
    pub dataset: Option<PathBuf>,
    pub data: DataOverrides,
    /// Model for `train`; a one-layer masking transformer with `d_model` 16
    /// and 4 heads when absent.
    pub model: Option<ModelConfig>,
    pub train: TrainOptions,
    pub grid: GridSection,
    pub verify: VerifyOptions,
    pub viz: VizSection,
}

/// Replacements for fields of the standard dataset spec of a language.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataOverrides {
    pub train_size: Option<usize>,
    pub train_lo: Option<usize>,
    pub train_hi: Option<usize>,
    pub bin_size: Option<usize>,
    pub n_bins: Option<usize>,
    pub bin_width: Option<usize>,
}

impl DataOverrides {
    pub fn apply(&self, mut spec: DatasetSpec) -> DatasetSpec {
        let set = |field: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut spec.train_size, self.train_size);
        set(&mut spec.train_lo, self.train_lo);
        set(&mut spec.train_hi, self.train_hi);
        set(&mut spec.bin_size, self.bin_size);
        set(&mut spec.n_bins, self.n_bins);
        set(&mut spec.bin_width, self.bin_width);
        spec
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Transformer,
    Lstm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub family: Family,
    pub schemes: Vec<PositionalScheme>,
    /// The full 162-point transformer / 40-point LSTM space instead of the
    /// desk subset.
    pub full: bool,
    pub budget: Option<usize>,
    pub residual: bool,
    pub layer_norm: bool,
    pub max_len: usize,
    pub save_checkpoints: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            family: Family::Transformer,
            schemes: GRID_SCHEMES.to_vec(),
            full: false,
            budget: None,
            residual: true,
            layer_norm: true,
            max_len: 1024,
            save_checkpoints: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VizSection {
    /// Words analysed when no dataset is given.
    pub words: usize,
    pub heatmaps: usize,
    pub positions: usize,
}

impl Default for VizSection {
    fn default() -> Self {
        VizSection {
            words: 200,
            heatmaps: 5,
            positions: 100,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn language(&self, flag: Option<&str>) -> Result<Option<LanguageId>> {
        flag.or(self.language.as_deref())
            .map(|s| s.parse::<LanguageId>().map_err(anyhow::Error::from))
            .transpose()
    }
}

pub fn default_model() -> ModelConfig {
    ModelConfig::Transformer(TransformerConfig::new(16, 4, 1, PositionalScheme::Masking))
}

/// Parses a label in the form printed by `ModelConfig::label`, e.g.
/// `transformer-d16-h4-l1-masking-nores` or `lstm-h8-l1`.
pub fn parse_model_label(label: &str) -> Result<ModelConfig> {
    let parts: Vec<&str> = label.split('-').collect();
    let num = |part: &str, prefix: char| -> Result<usize> {
        part.strip_prefix(prefix)
            .and_then(|n| n.parse().ok())
            .with_context(|| format!("expected {prefix}<number> in model label {label:?}, got {part:?}"))
    };
    match parts.as_slice() {
        ["lstm", h, l] => Ok(ModelConfig::Lstm(LstmConfig::new(num(h, 'h')?, num(l, 'l')?))),
        ["transformer", d, h, l, scheme, flags @ ..] => {
            let positional = scheme.parse::<PositionalScheme>()?;
            let mut cfg = TransformerConfig::new(num(d, 'd')?, num(h, 'h')?, num(l, 'l')?, positional);
            for flag in flags {
                match *flag {
                    "nores" => cfg.residual = false,
                    "noln" => cfg.layer_norm = false,
                    other => bail!("unknown model flag {other:?} in {label:?}"),
                }
            }
            Ok(ModelConfig::Transformer(cfg))
        }
        _ => bail!("cannot parse model label {label:?}"),
    }
}

/// The ranges of the hyperparameter study.
pub fn check_bounds(model: &ModelConfig, lr: f64) -> Result<()> {
    model.validate()?;
    let within = |name: &str, v: usize, lo: usize, hi: usize| -> Result<()> {
        if !(lo..=hi).contains(&v) {
            bail!("{name} = {v} is outside [{lo}, {hi}]");
        }
        Ok(())
    };
    match model {
        ModelConfig::Transformer(c) => {
            within("d_model", c.d_model, 3, 32)?;
            within("heads", c.heads, 1, 4)?;
            within("layers", c.layers, 1, 4)?;
        }
        ModelConfig::Lstm(c) => {
            within("hidden", c.hidden, 3, 32)?;
            within("layers", c.layers, 1, 2)?;
        }
    }
    if !(1e-3..=1e-2).contains(&lr) {
        bail!("learning rate {lr} is outside [0.001, 0.01]");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_roundtrip() {
        let mut t = TransformerConfig::new(8, 1, 2, PositionalScheme::CosPi);
        t.residual = false;
        for cfg in [
            ModelConfig::Transformer(t),
            ModelConfig::Transformer(TransformerConfig::new(32, 4, 4, PositionalScheme::Relative)),
            ModelConfig::Lstm(LstmConfig::new(24, 2)),
        ] {
            assert_eq!(parse_model_label(&cfg.label()).unwrap(), cfg);
        }
        assert!(parse_model_label("transformer-d8-h1").is_err());
        assert!(parse_model_label("lstm-h8-l1-extra").is_err());
    }

    #[test]
    fn toml_sections_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            language = "parity"
            seed = 3
            [data]
            train_size = 100
            [model]
            kind = "lstm"
            hidden = 8
            layers = 1
            [train]
            lr = 0.01
            epochs = 5
            [grid]
            family = "lstm"
            budget = 4
            "#,
        )
        .unwrap();
        assert_eq!(cfg.model, Some(ModelConfig::Lstm(LstmConfig::new(8, 1))));
        assert_eq!(cfg.train.epochs, 5);
        assert_eq!(cfg.grid.family, Family::Lstm);
        assert_eq!(cfg.data.train_size, Some(100));
        assert_eq!(cfg.language(None).unwrap(), Some(LanguageId::Parity));
        assert_eq!(cfg.language(Some("dyck1")).unwrap(), Some(LanguageId::Dyck1));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("langauge = \"dyck1\"").is_err());
        assert!(toml::from_str::<RunConfig>("[train]\nlearning_rate = 0.1").is_err());
    }

    #[test]
    fn bounds() {
        let lstm = |h, l| ModelConfig::Lstm(LstmConfig::new(h, l));
        assert!(check_bounds(&lstm(8, 1), 1e-3).is_ok());
        assert!(check_bounds(&lstm(8, 3), 1e-3).is_err());
        assert!(check_bounds(&lstm(2, 1), 1e-3).is_err());
        assert!(check_bounds(&lstm(8, 1), 0.1).is_err());
        let t = |d, h, l| ModelConfig::Transformer(TransformerConfig::new(d, h, l, PositionalScheme::Masking));
        assert!(check_bounds(&t(32, 4, 4), 1e-2).is_ok());
        assert!(check_bounds(&t(64, 4, 1), 1e-2).is_err());
        assert!(check_bounds(&t(8, 8, 1), 1e-2).is_err());
        assert!(check_bounds(&t(8, 1, 5), 1e-2).is_err());
    }
}
