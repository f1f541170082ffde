//! Training loss and the prediction threshold.

use crate::error::{Error, Result};

/// Strict threshold: a coordinate is predicted legal iff `p > 0.5`.
pub const THRESHOLD: f64 = 0.5;

/// Mean over all steps and coordinates of `(p - y)²`.
pub fn loss_mse(predictions: &[Vec<f64>], targets: &[Vec<u8>]) -> Result<f64> {
    if predictions.len() != targets.len()
        || predictions.iter().zip(targets).any(|(p, y)| p.len() != y.len())
    {
        return Err(Error::Shape("predictions and targets differ in shape".into()));
    }
    let count: usize = predictions.iter().map(Vec::len).sum();
    if count == 0 {
        return Ok(0.0);
    }
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .flat_map(|(p, y)| p.iter().zip(y).map(|(p, &y)| (p - y as f64).powi(2)))
        .sum();
    Ok(total / count as f64)
}

pub fn predict_legal(probabilities: &[f64]) -> Vec<u8> {
    probabilities.iter().map(|&p| (p > THRESHOLD) as u8).collect()
}
