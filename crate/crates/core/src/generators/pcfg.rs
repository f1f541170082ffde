//! Dyck-1 sampling from the grammar `S → (S) | SS | ε`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Symbol;

/// Rule probabilities: `p` for `S → [S]`, `q` for `S → SS`, the rest for
/// `S → ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcfgDyckParams {
    p: f64,
    q: f64,
}

impl PcfgDyckParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0 && p + q < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "PCFG needs 0 < p, q < 1 and p + q < 1 (got p={p}, q={q})"
            )));
        }
        Ok(PcfgDyckParams { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl Default for PcfgDyckParams {
    fn default() -> Self {
        PcfgDyckParams { p: 0.5, q: 0.25 }
    }
}

/// Attempts before giving up on a length constraint.
pub const RESAMPLE_BUDGET: usize = 1_000_000;

pub const OPEN: Symbol = 0;
pub const CLOSE: Symbol = 1;

enum Task {
    Expand,
    Close,
}

/// One expansion of the grammar, abandoned (`None`) as soon as the output
/// exceeds `max_length`.
fn expand_once<R: Rng + ?Sized>(
    params: &PcfgDyckParams,
    rng: &mut R,
    max_length: usize,
) -> Option<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut stack = vec![Task::Expand];
    // Every pending Close will be emitted, so count it against the budget.
    let mut committed = 0usize;
    while let Some(task) = stack.pop() {
        match task {
            Task::Close => out.push(CLOSE),
            Task::Expand => {
                let u: f64 = rng.gen();
                if u < params.p {
                    committed += 2;
                    if committed > max_length {
                        return None;
                    }
                    out.push(OPEN);
                    stack.push(Task::Close);
                    stack.push(Task::Expand);
                } else if u < params.p + params.q {
                    stack.push(Task::Expand);
                    stack.push(Task::Expand);
                }
            }
        }
    }
    Some(out)
}

/// A Dyck-1 word (`0` = open, `1` = close) of length at most `max_length`,
/// resampling whole derivations that run over.
pub fn sample_dyck1<R: Rng + ?Sized>(
    params: &PcfgDyckParams,
    rng: &mut R,
    max_length: usize,
) -> Result<Vec<Symbol>> {
    sample_dyck1_window(params, rng, 0, max_length)
}

/// Like [`sample_dyck1`] with an additional lower bound on the length.
pub fn sample_dyck1_window<R: Rng + ?Sized>(
    params: &PcfgDyckParams,
    rng: &mut R,
    min_length: usize,
    max_length: usize,
) -> Result<Vec<Symbol>> {
    if min_length > max_length {
        return Err(Error::Generation(format!(
            "empty length window [{min_length}, {max_length}]"
        )));
    }
    for _ in 0..RESAMPLE_BUDGET {
        if let Some(w) = expand_once(params, rng, max_length) {
            if w.len() >= min_length {
                return Ok(w);
            }
        }
    }
    Err(Error::Generation(format!(
        "no Dyck-1 derivation landed in [{min_length}, {max_length}] after {RESAMPLE_BUDGET} attempts"
    )))
}
