use std::collections::VecDeque;

use super::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// A complete deterministic finite automaton.
///
/// `dead` is derived at construction: a state is dead iff no accepting state
/// is reachable from it.
#[derive(Clone, Debug)]
pub struct Dfa {
    alphabet: Alphabet,
    n_states: usize,
    start: usize,
    delta: Vec<usize>,
    accepting: Vec<bool>,
    dead: Vec<bool>,
}

impl Dfa {
    /// `delta[q][s]` is the successor of state `q` on symbol `s`.
    pub fn new(
        alphabet: Alphabet,
        start: usize,
        delta: Vec<Vec<usize>>,
        accepting: Vec<bool>,
    ) -> Result<Self> {
        let n = delta.len();
        if accepting.len() != n || start >= n {
            return Err(Error::InvalidConfig("DFA state tables disagree".into()));
        }
        let mut flat = Vec::with_capacity(n * alphabet.len());
        for row in &delta {
            if row.len() != alphabet.len() || row.iter().any(|&t| t >= n) {
                return Err(Error::InvalidConfig("DFA transition row malformed".into()));
            }
            flat.extend_from_slice(row);
        }
        let dead = dead_states(n, alphabet.len(), &flat, &accepting);
        Ok(Dfa {
            alphabet,
            n_states: n,
            start,
            delta: flat,
            accepting,
            dead,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn next(&self, state: usize, symbol: Symbol) -> usize {
        self.delta[state * self.alphabet.len() + symbol]
    }

    pub fn step(&self, state: usize, symbol: Symbol) -> Result<usize> {
        if symbol >= self.alphabet.len() {
            return Err(Error::SymbolIndex(symbol));
        }
        Ok(self.next(state, symbol))
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn is_dead(&self, state: usize) -> bool {
        self.dead[state]
    }

    pub fn dead_set(&self) -> &[bool] {
        &self.dead
    }

    pub fn run(&self, word: &[Symbol]) -> Result<usize> {
        word.iter().try_fold(self.start, |q, &s| self.step(q, s))
    }

    pub fn accepts(&self, word: &[Symbol]) -> Result<bool> {
        Ok(self.accepting[self.run(word)?])
    }
}

/// Reverse reachability from the accepting states.
fn dead_states(n: usize, sigma: usize, delta: &[usize], accepting: &[bool]) -> Vec<bool> {
    let mut preds = vec![Vec::new(); n];
    for q in 0..n {
        for s in 0..sigma {
            preds[delta[q * sigma + s]].push(q);
        }
    }
    let mut live = accepting.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&q| accepting[q]).collect();
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    live.into_iter().map(|l| !l).collect()
}
