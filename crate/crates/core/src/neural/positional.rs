//! Sources of order information for the transformer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionalScheme {
    /// Causal masking only; no positional input.
    Masking,
    /// Fixed interleaved sin/cos at geometric wavelengths.
    Absolute,
    /// Learned per-head bias on the clipped offset `i - j` added to the
    /// attention logits.
    Relative,
    /// `cos(pπ)` on every coordinate: −1 at odd positions, +1 at even.
    CosPi,
    /// Trainable table of `max_len` vectors.
    Learned,
}

impl PositionalScheme {
    pub const ALL: [PositionalScheme; 5] = [
        PositionalScheme::Masking,
        PositionalScheme::Absolute,
        PositionalScheme::Relative,
        PositionalScheme::CosPi,
        PositionalScheme::Learned,
    ];

    /// True when the scheme adds a vector to the input embeddings.
    pub fn is_additive(self) -> bool {
        matches!(
            self,
            PositionalScheme::Absolute | PositionalScheme::CosPi | PositionalScheme::Learned
        )
    }

    /// True for causal masking with no other positional information.
    pub fn is_masking_only(self) -> bool {
        self == PositionalScheme::Masking
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PositionalScheme::Masking => "masking",
            PositionalScheme::Absolute => "absolute",
            PositionalScheme::Relative => "relative",
            PositionalScheme::CosPi => "cos_pi",
            PositionalScheme::Learned => "learned",
        }
    }
}

impl fmt::Display for PositionalScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PositionalScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PositionalScheme::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown positional scheme {s:?}")))
    }
}

/// The fixed additive signal at 1-based `position`. Zero for schemes that
/// add nothing (masking, relative) and for the learned table, whose values
/// live in the model parameters.
pub fn positional_signal(scheme: PositionalScheme, position: usize, d_model: usize) -> Vec<f64> {
    assert!(position >= 1, "positions are 1-based");
    let p = position as f64;
    match scheme {
        PositionalScheme::Masking | PositionalScheme::Relative | PositionalScheme::Learned => {
            vec![0.0; d_model]
        }
        PositionalScheme::CosPi => {
            let v = if position % 2 == 0 { 1.0 } else { -1.0 };
            vec![v; d_model]
        }
        PositionalScheme::Absolute => (0..d_model)
            .map(|c| {
                let pair = (c / 2) as f64;
                let rate = 10000f64.powf(-2.0 * pair / d_model as f64);
                if c % 2 == 0 {
                    (p * rate).sin()
                } else {
                    (p * rate).cos()
                }
            })
            .collect(),
    }
}
