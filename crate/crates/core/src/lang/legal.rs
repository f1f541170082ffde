//! Next-character legality: which symbols (and end-of-sequence) may follow
//! a prefix while staying extendable to a member of the language.

use serde::{Deserialize, Serialize};

use super::alphabet::Symbol;
use super::catalog::{LanguageSpec, RunState};
use crate::error::{Error, Result};

/// Legal continuations of one prefix. `symbols[s]` is set iff `prefix·s` is
/// still a prefix of some member; `eos` is set iff the prefix itself is a
/// member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegalSet {
    pub symbols: Vec<bool>,
    pub eos: bool,
}

impl LegalSet {
    /// The k-hot target row: symbol coordinates in alphabet order, then EOS.
    pub fn to_row(&self) -> Vec<f64> {
        self.symbols
            .iter()
            .chain(std::iter::once(&self.eos))
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.symbols
            .iter()
            .chain(std::iter::once(&self.eos))
            .map(|&b| b as u8)
            .collect()
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let (eos, symbols) = bits.split_last().expect("row has an EOS coordinate");
        LegalSet {
            symbols: symbols.iter().map(|&b| b != 0).collect(),
            eos: *eos != 0,
        }
    }
}

fn legal_from_state(spec: &LanguageSpec, state: &RunState) -> LegalSet {
    let rec = spec.recognizer();
    let symbols = (0..spec.alphabet().len())
        .map(|s| {
            let mut next = state.clone();
            rec.advance(&mut next, s);
            !rec.is_dead(&next)
        })
        .collect();
    LegalSet {
        symbols,
        eos: rec.is_accepting(state),
    }
}

fn dead_prefix(spec: &LanguageSpec, prefix: &[Symbol]) -> Error {
    Error::DeadPrefix {
        language: spec.id().to_string(),
        prefix: spec.decode(prefix),
    }
}

/// Legal continuations of `prefix`. Fails with [`Error::DeadPrefix`] when no
/// member of the language starts with `prefix`.
pub fn legal_next(spec: &LanguageSpec, prefix: &[Symbol]) -> Result<LegalSet> {
    spec.alphabet().check(prefix)?;
    let rec = spec.recognizer();
    let mut state = rec.initial();
    for &s in prefix {
        rec.advance(&mut state, s);
    }
    if rec.is_dead(&state) {
        return Err(dead_prefix(spec, prefix));
    }
    Ok(legal_from_state(spec, &state))
}

/// Target rows for every non-empty prefix `s_1..s_t`, `t = 1..=n`, in one
/// left-to-right pass.
pub fn target_rows(spec: &LanguageSpec, word: &[Symbol]) -> Result<Vec<LegalSet>> {
    spec.alphabet().check(word)?;
    let rec = spec.recognizer();
    let mut state = rec.initial();
    let mut rows = Vec::with_capacity(word.len());
    for (t, &s) in word.iter().enumerate() {
        rec.advance(&mut state, s);
        if rec.is_dead(&state) {
            return Err(dead_prefix(spec, &word[..=t]));
        }
        rows.push(legal_from_state(spec, &state));
    }
    Ok(rows)
}

/// Reference definition by search: `s` is legal iff some `w` with
/// `|w| <= horizon` puts `prefix·s·w` in the language. Uses only the
/// recognizer's transitions and acceptance, never its trap-state marker.
/// Exact whenever every live configuration reaches acceptance within
/// `horizon` further symbols.
pub fn brute_force_legal(spec: &LanguageSpec, prefix: &[Symbol], horizon: usize) -> Result<LegalSet> {
    spec.alphabet().check(prefix)?;
    let rec = spec.recognizer();
    let mut state = rec.initial();
    for &s in prefix {
        rec.advance(&mut state, s);
    }
    let symbols = (0..spec.alphabet().len())
        .map(|s| {
            let mut next = state.clone();
            rec.advance(&mut next, s);
            reaches_acceptance(spec, &next, horizon)
        })
        .collect();
    Ok(LegalSet {
        symbols,
        eos: rec.is_accepting(&state),
    })
}

/// Iterative deepening so that shallow witnesses are found first.
fn reaches_acceptance(spec: &LanguageSpec, state: &RunState, horizon: usize) -> bool {
    (0..=horizon).any(|depth| search_exact(spec, state, depth))
}

fn search_exact(spec: &LanguageSpec, state: &RunState, depth: usize) -> bool {
    let rec = spec.recognizer();
    if depth == 0 {
        return rec.is_accepting(state);
    }
    (0..spec.alphabet().len()).any(|s| {
        let mut next = state.clone();
        rec.advance(&mut next, s);
        search_exact(spec, &next, depth - 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::LanguageId;

    fn spec(id: &str) -> LanguageSpec {
        id.parse::<LanguageId>().unwrap().spec().unwrap()
    }

    #[test]
    fn dyck_targets() {
        let l = spec("dyck1");
        let w = l.encode("[[]]").unwrap();
        let rows: Vec<Vec<u8>> = target_rows(&l, &w)
            .unwrap()
            .iter()
            .map(LegalSet::to_bits)
            .collect();
        assert_eq!(rows, vec![vec![1, 1, 0], vec![1, 1, 0], vec![1, 1, 0], vec![1, 0, 1]]);
    }

    #[test]
    fn dead_prefix_is_an_error() {
        let l = spec("dyck1");
        let w = l.encode("]").unwrap();
        assert!(matches!(legal_next(&l, &w), Err(Error::DeadPrefix { .. })));
        assert!(target_rows(&l, &w).is_err());
    }

    #[test]
    fn boolexp_completed_expression_allows_only_eos() {
        let l = spec("boolexp2");
        let set = legal_next(&l, &l.encode("∧∼01").unwrap()).unwrap();
        assert!(set.eos);
        assert!(set.symbols.iter().all(|&b| !b));
        let set = legal_next(&l, &l.encode("∧").unwrap()).unwrap();
        assert!(!set.eos);
        assert!(set.symbols.iter().all(|&b| b));
    }

    #[test]
    fn empty_prefix() {
        let l = spec("tomita2");
        let set = legal_next(&l, &[]).unwrap();
        assert_eq!(set.to_bits(), vec![0, 1, 1]);
    }

    #[test]
    fn bits_roundtrip() {
        let set = LegalSet {
            symbols: vec![true, false, true],
            eos: false,
        };
        assert_eq!(LegalSet::from_bits(&set.to_bits()), set);
        assert_eq!(set.to_row(), vec![1.0, 0.0, 1.0, 0.0]);
    }
}
