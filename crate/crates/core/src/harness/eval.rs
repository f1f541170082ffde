//! Whole-string next-character accuracy and reference predictors.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{Acceptor, HandRunner, HandTransformer};
use crate::error::{Error, Result};
use crate::generators::Example;
use crate::lang::{legal_next, LanguageSpec, Symbol};
use crate::neural::{predict_legal, Predictor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    pub strings: usize,
    pub correct_strings: usize,
    pub steps: usize,
    pub correct_steps: usize,
}

impl EvalStats {
    /// Percentage of strings with every step correct.
    pub fn accuracy(&self) -> f64 {
        if self.strings == 0 {
            0.0
        } else {
            100.0 * self.correct_strings as f64 / self.strings as f64
        }
    }

    pub fn step_accuracy(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            100.0 * self.correct_steps as f64 / self.steps as f64
        }
    }

    fn add(self, o: EvalStats) -> EvalStats {
        EvalStats {
            strings: self.strings + o.strings,
            correct_strings: self.correct_strings + o.correct_strings,
            steps: self.steps + o.steps,
            correct_steps: self.correct_steps + o.correct_steps,
        }
    }
}

fn score_one(model: &(impl Predictor + ?Sized), ex: &Example) -> Result<EvalStats> {
    let probs = model.probabilities(&ex.symbols)?;
    if probs.len() != ex.targets.len() {
        return Err(Error::Shape(format!(
            "{} prediction rows for {} targets",
            probs.len(),
            ex.targets.len()
        )));
    }
    let correct = probs
        .iter()
        .zip(&ex.targets)
        .filter(|(p, y)| predict_legal(p) == **y)
        .count();
    Ok(EvalStats {
        strings: 1,
        correct_strings: usize::from(correct == ex.targets.len()),
        steps: ex.targets.len(),
        correct_steps: correct,
    })
}

pub fn evaluate_stats(model: &(impl Predictor + ?Sized), examples: &[Example]) -> Result<EvalStats> {
    examples
        .par_iter()
        .map(|ex| score_one(model, ex))
        .try_reduce(EvalStats::default, |a, b| Ok(a.add(b)))
}

/// A string counts as correct only if the thresholded prediction matches
/// the target at every step.
pub fn evaluate(model: &(impl Predictor + ?Sized), examples: &[Example]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Precondition("cannot evaluate an empty bin".into()));
    }
    Ok(evaluate_stats(model, examples)?.accuracy())
}

/// Predicts exactly the legal continuations, computed by `legal_next` on
/// every prefix.
pub struct OraclePredictor {
    spec: LanguageSpec,
}

impl OraclePredictor {
    pub fn new(spec: LanguageSpec) -> Self {
        OraclePredictor { spec }
    }
}

impl Predictor for OraclePredictor {
    fn probabilities(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        (1..=word.len())
            .map(|t| Ok(legal_next(&self.spec, &word[..t])?.to_row()))
            .collect()
    }
}

/// Reads next-character predictions off a Shuffle-Dyck construction: an
/// opening bracket is always legal, a closing bracket of type `j` iff
/// `z_{t,2j} > 0` (open brackets of that type outnumber closed ones), and
/// the end of the word iff the acceptor accepts the prefix.
pub struct HandPredictor {
    ht: HandTransformer,
    k: usize,
}

impl HandPredictor {
    pub fn new(ht: HandTransformer) -> Result<Self> {
        let Acceptor::ShuffleDyck { k } = *ht.acceptor() else {
            return Err(Error::Precondition(
                "only Shuffle-Dyck constructions predict next characters".into(),
            ));
        };
        Ok(HandPredictor { ht, k })
    }
}

impl Predictor for HandPredictor {
    fn probabilities(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        let mut runner = HandRunner::<f64>::new(&self.ht)?;
        let mut rows = Vec::with_capacity(word.len());
        for &s in word {
            runner.step(s)?;
            let (z, m) = runner.output().expect("one step taken");
            let mut row = vec![0.0; 2 * self.k + 1];
            for j in 0..self.k {
                row[2 * j] = 1.0;
                if z[2 * j].partial_cmp(&(0.5 / m as f64)) == Some(Ordering::Greater) {
                    row[2 * j + 1] = 1.0;
                }
            }
            if runner.accepted() {
                row[2 * self.k] = 1.0;
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::build_shuffle_dyck;
    use crate::generators::{build_dataset, DatasetSpec};
    use crate::lang::LanguageId;

    /// Flips one step of one string.
    struct OneWrong<'a> {
        inner: OraclePredictor,
        victim: &'a [Symbol],
    }

    impl Predictor for OneWrong<'_> {
        fn probabilities(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
            let mut rows = self.inner.probabilities(word)?;
            if word == self.victim {
                rows[0][0] = 1.0 - rows[0][0];
            }
            Ok(rows)
        }
    }

    #[test]
    fn oracle_and_one_wrong_step() {
        let id = LanguageId::Dyck1;
        let spec = DatasetSpec::for_language(&id).with_sizes(100, 2000);
        let ds = build_dataset(&id, &spec, 1).unwrap();
        let bin = &ds.bins[0].examples;
        let oracle = OraclePredictor::new(id.spec().unwrap());
        assert_eq!(evaluate(&oracle, bin).unwrap(), 100.0);
        let wrong = OneWrong {
            inner: OraclePredictor::new(id.spec().unwrap()),
            victim: &bin[7].symbols,
        };
        let stats = evaluate_stats(&wrong, bin).unwrap();
        assert_eq!(stats.accuracy(), 99.95);
        assert!(stats.accuracy() <= stats.step_accuracy());
        let hand = HandPredictor::new(build_shuffle_dyck(1).unwrap()).unwrap();
        for b in &ds.bins {
            assert_eq!(evaluate(&hand, &b.examples).unwrap(), 100.0);
        }
    }

    #[test]
    fn empty_bin_is_an_error() {
        let oracle = OraclePredictor::new(LanguageId::Dyck1.spec().unwrap());
        assert!(evaluate(&oracle, &[]).is_err());
    }
}
