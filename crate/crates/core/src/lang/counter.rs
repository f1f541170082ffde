//! General and stateless counter machines.
//!
//! A counter machine reads one symbol at a time. The counter update and the
//! state transition may look at the current state and at the zero mask of
//! the counters (which counters are non-zero), never at the counter values
//! themselves. Both maps are tabulated over every `(symbol, state, mask)`
//! triple so they are total by construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// Packed zero mask: bit `i` is set iff counter `i` is non-zero.
pub type Mask = u32;

/// Maximum number of counters a tabulated machine supports.
pub const MAX_COUNTERS: usize = 16;

/// Zero check on a counter vector: entry `i` is `false` (0) iff the
/// counter is zero, `true` (1) otherwise.
pub fn zero_mask(counters: &[i64]) -> Vec<bool> {
    counters.iter().map(|&c| c != 0).collect()
}

pub fn pack_mask(counters: &[i64]) -> Mask {
    counters
        .iter()
        .enumerate()
        .fold(0, |m, (i, &c)| if c != 0 { m | (1 << i) } else { m })
}

pub fn unpack_mask(mask: Mask, k: usize) -> Vec<bool> {
    (0..k).map(|i| mask & (1 << i) != 0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CounterOp {
    /// `x ↦ x + m`
    Add(i64),
    /// `x ↦ 0`
    Reset,
}

impl CounterOp {
    pub fn apply(self, value: i64) -> i64 {
        match self {
            CounterOp::Add(m) => value + m,
            CounterOp::Reset => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub state: usize,
    pub counters: Vec<i64>,
}

impl MachineConfig {
    pub fn mask(&self) -> Mask {
        pack_mask(&self.counters)
    }
}

/// A deterministic real-time k-counter machine.
#[derive(Clone)]
pub struct CounterMachine {
    alphabet: Alphabet,
    states: Vec<String>,
    start: usize,
    k: usize,
    /// `k` ops per `(symbol, state, mask)` entry.
    updates: Vec<CounterOp>,
    transitions: Vec<usize>,
    /// Indexed by `state * 2^k + mask`.
    accept: Vec<bool>,
    dead: Option<usize>,
}

impl CounterMachine {
    /// Tabulates a machine from closures over `(symbol, state, mask)`.
    ///
    /// `dead` names a trap state from which no accepting configuration is
    /// reachable; it is what makes `legal_next` possible on the machine.
    #[allow(clippy::too_many_arguments)]
    pub fn tabulate(
        alphabet: Alphabet,
        states: &[&str],
        start: usize,
        k: usize,
        update: impl Fn(Symbol, usize, &[bool]) -> Vec<CounterOp>,
        transition: impl Fn(Symbol, usize, &[bool]) -> usize,
        accept: impl Fn(usize, &[bool]) -> bool,
        dead: Option<usize>,
    ) -> Self {
        assert!(k <= MAX_COUNTERS, "at most {MAX_COUNTERS} counters");
        assert!(start < states.len());
        let n_masks = 1usize << k;
        let mut updates = Vec::with_capacity(alphabet.len() * states.len() * n_masks * k);
        let mut transitions = Vec::with_capacity(alphabet.len() * states.len() * n_masks);
        for sym in 0..alphabet.len() {
            for q in 0..states.len() {
                for m in 0..n_masks {
                    let mask = unpack_mask(m as Mask, k);
                    let ops = update(sym, q, &mask);
                    assert_eq!(ops.len(), k, "update must produce one op per counter");
                    updates.extend(ops);
                    let next = transition(sym, q, &mask);
                    assert!(next < states.len(), "transition to unknown state {next}");
                    transitions.push(next);
                }
            }
        }
        let mut accept_table = Vec::with_capacity(states.len() * n_masks);
        for q in 0..states.len() {
            for m in 0..n_masks {
                accept_table.push(accept(q, &unpack_mask(m as Mask, k)));
            }
        }
        CounterMachine {
            alphabet,
            states: states.iter().map(|s| s.to_string()).collect(),
            start,
            k,
            updates,
            transitions,
            accept: accept_table,
            dead,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counters(&self) -> usize {
        self.k
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn dead_state(&self) -> Option<usize> {
        self.dead
    }

    pub fn initial(&self) -> MachineConfig {
        MachineConfig {
            state: self.start,
            counters: vec![0; self.k],
        }
    }

    fn entry(&self, symbol: Symbol, state: usize, mask: Mask) -> usize {
        (symbol * self.states.len() + state) * (1 << self.k) + mask as usize
    }

    pub fn update(&self, symbol: Symbol, state: usize, mask: Mask) -> &[CounterOp] {
        let e = self.entry(symbol, state, mask);
        &self.updates[e * self.k..(e + 1) * self.k]
    }

    pub fn transition(&self, symbol: Symbol, state: usize, mask: Mask) -> usize {
        self.transitions[self.entry(symbol, state, mask)]
    }

    pub fn is_accepting(&self, config: &MachineConfig) -> bool {
        self.accept[config.state * (1 << self.k) + config.mask() as usize]
    }

    /// One transition `⟨q, c⟩ → ⟨δ(s, q, z(c)), u(s, q, z(c))(c)⟩`.
    pub fn step(&self, config: &MachineConfig, symbol: Symbol) -> Result<MachineConfig> {
        let mut next = config.clone();
        self.step_in_place(&mut next, symbol)?;
        Ok(next)
    }

    pub fn step_in_place(&self, config: &mut MachineConfig, symbol: Symbol) -> Result<()> {
        if symbol >= self.alphabet.len() {
            return Err(Error::SymbolIndex(symbol));
        }
        let mask = config.mask();
        let e = self.entry(symbol, config.state, mask);
        for (c, op) in config
            .counters
            .iter_mut()
            .zip(&self.updates[e * self.k..(e + 1) * self.k])
        {
            *c = op.apply(*c);
        }
        config.state = self.transitions[e];
        Ok(())
    }

    pub fn run(&self, word: &[Symbol]) -> Result<MachineConfig> {
        let mut config = self.initial();
        for &s in word {
            self.step_in_place(&mut config, s)?;
        }
        Ok(config)
    }

    pub fn accepts(&self, word: &[Symbol]) -> Result<bool> {
        Ok(self.is_accepting(&self.run(word)?))
    }

    pub fn accepts_str(&self, text: &str) -> Result<bool> {
        self.accepts(&self.alphabet.encode(text)?)
    }
}

impl fmt::Debug for CounterMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CounterMachine")
            .field("alphabet", &self.alphabet)
            .field("states", &self.states)
            .field("start", &self.start)
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

/// Simplified stateless counter machine: the counter increments and the
/// next state depend on the current symbol only.
#[derive(Clone, Debug)]
pub struct StatelessCounterMachine {
    alphabet: Alphabet,
    states: Vec<String>,
    start: usize,
    increments: Vec<Vec<i64>>,
    next_state: Vec<usize>,
    /// Accepting `(state, packed mask)` pairs.
    accept: Vec<(usize, Mask)>,
}

impl StatelessCounterMachine {
    pub fn new(
        alphabet: Alphabet,
        states: &[&str],
        start: usize,
        increments: Vec<Vec<i64>>,
        next_state: Vec<usize>,
        accept: Vec<(usize, Mask)>,
    ) -> Result<Self> {
        if increments.len() != alphabet.len() || next_state.len() != alphabet.len() {
            return Err(Error::InvalidConfig(
                "stateless machine needs one increment vector and one state per symbol".into(),
            ));
        }
        let k = increments.first().map_or(0, Vec::len);
        if increments.iter().any(|v| v.len() != k) {
            return Err(Error::InvalidConfig(
                "increment vectors differ in length".into(),
            ));
        }
        if k > MAX_COUNTERS {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_COUNTERS} counters"
            )));
        }
        if start >= states.len() || next_state.iter().any(|&q| q >= states.len()) {
            return Err(Error::InvalidConfig("state index out of range".into()));
        }
        Ok(StatelessCounterMachine {
            alphabet,
            states: states.iter().map(|s| s.to_string()).collect(),
            start,
            increments,
            next_state,
            accept,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counters(&self) -> usize {
        self.increments.first().map_or(0, Vec::len)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn increments(&self, symbol: Symbol) -> &[i64] {
        &self.increments[symbol]
    }

    pub fn next_state(&self, symbol: Symbol) -> usize {
        self.next_state[symbol]
    }

    pub fn accept_pairs(&self) -> &[(usize, Mask)] {
        &self.accept
    }

    pub fn is_accepting(&self, state: usize, mask: Mask) -> bool {
        self.accept.contains(&(state, mask))
    }

    pub fn accepts(&self, word: &[Symbol]) -> Result<bool> {
        self.alphabet.check(word)?;
        let mut counters = vec![0i64; self.counters()];
        let mut state = self.start;
        for &s in word {
            for (c, m) in counters.iter_mut().zip(&self.increments[s]) {
                *c += m;
            }
            state = self.next_state[s];
        }
        Ok(self.is_accepting(state, pack_mask(&counters)))
    }

    /// The same machine as a general [`CounterMachine`] whose maps ignore
    /// the state and mask arguments.
    pub fn to_counter_machine(&self) -> CounterMachine {
        let names: Vec<&str> = self.states.iter().map(String::as_str).collect();
        let k = self.counters();
        CounterMachine::tabulate(
            self.alphabet.clone(),
            &names,
            self.start,
            k,
            |s, _, _| self.increments[s].iter().map(|&m| CounterOp::Add(m)).collect(),
            |s, _, _| self.next_state[s],
            |q, mask| {
                let packed = mask
                    .iter()
                    .enumerate()
                    .fold(0, |m, (i, &b)| if b { m | (1 << i) } else { m });
                self.accept.contains(&(q, packed))
            },
            None,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyck1() -> CounterMachine {
        // state 0 = alive, 1 = dead
        CounterMachine::tabulate(
            Alphabet::new(['[', ']']),
            &["alive", "dead"],
            0,
            1,
            |s, _, _| vec![CounterOp::Add(if s == 0 { 1 } else { -1 })],
            |s, q, z| if q == 1 || (s == 1 && !z[0]) { 1 } else { 0 },
            |q, z| q == 0 && !z[0],
            Some(1),
        )
    }

    #[test]
    fn zero_mask_examples() {
        assert_eq!(zero_mask(&[0, 0]), vec![false, false]);
        assert_eq!(zero_mask(&[0, 3]), vec![false, true]);
        assert_eq!(zero_mask(&[-2, 0, 7]), vec![true, false, true]);
        assert_eq!(pack_mask(&[-2, 0, 7]), 0b101);
    }

    #[test]
    fn dyck_steps() {
        let m = dyck1();
        let alive0 = MachineConfig {
            state: 0,
            counters: vec![0],
        };
        assert_eq!(
            m.step(&alive0, 0).unwrap(),
            MachineConfig {
                state: 0,
                counters: vec![1]
            }
        );
        assert_eq!(
            m.step(&alive0, 1).unwrap(),
            MachineConfig {
                state: 1,
                counters: vec![-1]
            }
        );
        assert!(matches!(m.step(&alive0, 2), Err(Error::SymbolIndex(2))));
    }

    #[test]
    fn identity_update_leaves_counters() {
        let m = CounterMachine::tabulate(
            Alphabet::new(['a']),
            &["q"],
            0,
            2,
            |_, _, _| vec![CounterOp::Add(0), CounterOp::Add(0)],
            |_, _, _| 0,
            |_, _| true,
            None,
        );
        let c = MachineConfig {
            state: 0,
            counters: vec![4, -3],
        };
        assert_eq!(m.step(&c, 0).unwrap().counters, vec![4, -3]);
    }

    #[test]
    fn reset_op() {
        assert_eq!(CounterOp::Reset.apply(17), 0);
        assert_eq!(CounterOp::Add(-2).apply(1), -1);
    }

    #[test]
    fn dyck_acceptance() {
        let m = dyck1();
        assert!(m.accepts_str("[]").unwrap());
        assert!(!m.accepts_str("][").unwrap());
        assert!(m.accepts_str("").unwrap());
        assert!(m.accepts_str("[[]][]").unwrap());
        assert!(!m.accepts_str("[[]").unwrap());
    }

    #[test]
    fn stateless_embedding_agrees() {
        let sm = StatelessCounterMachine::new(
            Alphabet::new(['a', 'b']),
            &["start", "after_a", "after_b"],
            0,
            vec![vec![1], vec![-1]],
            vec![1, 2],
            vec![(0, 0), (2, 0)],
        )
        .unwrap();
        let cm = sm.to_counter_machine();
        for len in 0..=8 {
            for bits in 0..(1u32 << len) {
                let w: Vec<Symbol> = (0..len).map(|i| ((bits >> i) & 1) as usize).collect();
                assert_eq!(sm.accepts(&w).unwrap(), cm.accepts(&w).unwrap(), "{w:?}");
            }
        }
    }
}
