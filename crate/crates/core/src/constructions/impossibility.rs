//! Executable consequences of the two masking-only impossibility results.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lang::Symbol;
use crate::neural::{PositionalScheme, Transformer};

fn require_masking(model: &Transformer) -> Result<()> {
    if model.config().positional != PositionalScheme::Masking {
        return Err(Error::Precondition(format!(
            "model uses {} positions; only causal masking is allowed",
            model.config().positional
        )));
    }
    Ok(())
}

/// Largest `‖y_i − y_1‖∞` over the output rows for the word `symbol^n`.
/// Without positional encodings every step sees the same multiset of
/// identical inputs, so this is zero up to rounding.
pub fn check_masking_constancy(model: &Transformer, symbol: Symbol, n: usize) -> Result<f64> {
    require_masking(model)?;
    max_step_deviation(model, symbol, n)
}

/// The same deviation without the masking precondition, for contrast with
/// models that do carry positional information.
pub fn max_step_deviation(model: &Transformer, symbol: Symbol, n: usize) -> Result<f64> {
    let rows = model.forward(&vec![symbol; n])?;
    let Some(first) = rows.first() else {
        return Ok(0.0);
    };
    Ok(rows
        .iter()
        .flat_map(|r| r.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResetDeltas {
    /// Largest difference of the last query's logit against the reset key,
    /// over heads.
    pub score: f64,
    /// `‖V(x_#)_A − V(x_#)_B‖∞`.
    pub value: f64,
}

/// Compares the attention logit of the last position against the reset
/// position, and the value vector at the reset position, between
/// `prefix_a # suffix` and `prefix_b # suffix` at layer `layer`
/// (0-based).
pub fn reset_deltas(
    model: &Transformer,
    layer: usize,
    reset: Symbol,
    prefix_a: &[Symbol],
    prefix_b: &[Symbol],
    suffix: &[Symbol],
) -> Result<ResetDeltas> {
    if prefix_a.len() != prefix_b.len() {
        return Err(Error::Precondition("prefixes must have equal length".into()));
    }
    if layer >= model.config().layers {
        return Err(Error::Precondition(format!("model has no layer {layer}")));
    }
    let word = |p: &[Symbol]| {
        let mut w = p.to_vec();
        w.push(reset);
        w.extend_from_slice(suffix);
        w
    };
    let ta = model.trace(&word(prefix_a))?;
    let tb = model.trace(&word(prefix_b))?;
    let (la, lb) = (&ta.layers[layer], &tb.layers[layer]);
    let pos = prefix_a.len();
    let last = pos + suffix.len();
    let score = la
        .scores
        .iter()
        .zip(&lb.scores)
        .map(|(a, b)| (a.row(last)[pos] - b.row(last)[pos]).abs())
        .fold(0.0, f64::max);
    let value = la
        .value
        .row(pos)
        .iter()
        .zip(lb.value.row(pos))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ResetDeltas { score, value })
}

/// [`reset_deltas`] for a single-layer masking-only model, where the key
/// and value at the reset position depend on the reset symbol alone.
pub fn check_reset_invariance(
    model: &Transformer,
    reset: Symbol,
    prefix_a: &[Symbol],
    prefix_b: &[Symbol],
    suffix: &[Symbol],
) -> Result<ResetDeltas> {
    if model.config().layers != 1 {
        return Err(Error::Precondition(format!(
            "expected a single-layer model, got {} layers",
            model.config().layers
        )));
    }
    require_masking(model)?;
    reset_deltas(model, 0, reset, prefix_a, prefix_b, suffix)
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::constructions::build_shuffle_dyck;
    use crate::lang::{Alphabet, LanguageId};
    use crate::neural::TransformerConfig;
    use crate::rng;

    fn model(layers: usize, scheme: PositionalScheme, residual: bool, seed: u64) -> Transformer {
        let mut cfg = TransformerConfig::new(8, 2, layers, scheme);
        cfg.residual = residual;
        let alphabet = LanguageId::ResetDyck1.spec().unwrap().alphabet().clone();
        Transformer::new(cfg, alphabet, &mut rng::stream(seed, 0)).unwrap()
    }

    #[test]
    fn masking_only_outputs_are_constant() {
        for seed in 0..10 {
            let m = model(1 + seed as usize % 4, PositionalScheme::Masking, true, seed);
            assert!(check_masking_constancy(&m, 0, 8).unwrap() < 1e-6);
        }
    }

    #[test]
    fn cos_pi_breaks_constancy() {
        let m = model(1, PositionalScheme::CosPi, false, 1);
        assert!(check_masking_constancy(&m, 0, 8).is_err());
        let best = (0..10)
            .map(|s| max_step_deviation(&model(1, PositionalScheme::CosPi, false, s), 0, 8).unwrap())
            .fold(0.0, f64::max);
        assert!(best > 0.1, "{best}");
    }

    #[test]
    fn hand_built_on_unary_word() {
        let ht = build_shuffle_dyck(1).unwrap();
        let t = ht.run::<Rational64>(&[0, 0, 0, 0]).unwrap();
        assert!(t.attention_output.iter().all(|a| *a == t.attention_output[0]));
    }

    #[test]
    fn single_layer_reset_invariance() {
        let spec = LanguageId::ResetDyck1.spec().unwrap();
        let a = spec.alphabet();
        let reset = a.index_of('#').unwrap();
        let enc = |s: &str| a.encode(s).unwrap();
        for seed in 0..5 {
            let m = model(1, PositionalScheme::Masking, true, seed);
            let d = check_reset_invariance(&m, reset, &enc("[["), &enc("]]"), &enc("[]")).unwrap();
            assert_eq!(d, ResetDeltas { score: 0.0, value: 0.0 });
            let d = check_reset_invariance(&m, reset, &enc("[]"), &enc("[]"), &enc("[]")).unwrap();
            assert_eq!(d, ResetDeltas { score: 0.0, value: 0.0 });
        }
        let two = model(2, PositionalScheme::Masking, true, 9);
        assert!(check_reset_invariance(&two, reset, &enc("[["), &enc("]]"), &enc("[]")).is_err());
        let d = reset_deltas(&two, 1, reset, &enc("[["), &enc("]]"), &enc("[]")).unwrap();
        assert!(d.value > 0.0);
        let abs = Transformer::new(
            TransformerConfig::new(8, 2, 1, PositionalScheme::Absolute),
            Alphabet::new(['[', ']', '#']),
            &mut rng::stream(0, 0),
        )
        .unwrap();
        assert!(check_reset_invariance(&abs, 2, &[0], &[1], &[]).is_err());
    }
}
