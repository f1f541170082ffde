//! The closed catalog of languages and their recognizers.
//!
//! Every language is addressable by a stable string id (`dyck1`,
//! `shuffle2`, `boolexp3`, `tomita5`, `dn4`, `parity`, `aa_star`,
//! `reset_dyck1`, ...). Counter languages are recognized by tabulated
//! [`CounterMachine`]s with an explicit trap state; regular languages by
//! minimal [`Dfa`]s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::alphabet::{Alphabet, Symbol};
use super::counter::{CounterMachine, CounterOp, MachineConfig};
use super::dfa::Dfa;
use crate::error::{Error, Result};

/// Bracket pairs used by Dyck-1 and the Shuffle-k family, in type order.
pub const BRACKETS: [(char, char); 6] = [
    ('[', ']'),
    ('(', ')'),
    ('{', '}'),
    ('<', '>'),
    ('⟨', '⟩'),
    ('«', '»'),
];

/// Operators of BoolExp-3: unary `∼`, binary `+`, ternary `>`.
pub const BOOLEXP3_OPS: [(char, u32); 3] = [('∼', 1), ('+', 2), ('>', 3)];
/// Operators of BoolExp-5: two unary, two binary, one ternary.
pub const BOOLEXP5_OPS: [(char, u32); 5] = [('∼', 1), ('!', 1), ('+', 2), ('&', 2), ('>', 3)];
/// Unary `∼` and binary `∧`.
pub const BOOLEXP2_OPS: [(char, u32); 2] = [('∼', 1), ('∧', 2)];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LanguageId {
    Dyck1,
    Shuffle(usize),
    /// Prefix-notation Boolean expressions over `(operator, arity)` pairs.
    BoolExp(Vec<(char, u32)>),
    AnBn,
    AnBnCn,
    AnBnCnDn,
    ResetDyck1,
    Tomita(u8),
    /// `D_n = (a D_{n-1} b)*`
    Dn(usize),
    Parity,
    AaStar,
    AaaaStar,
    AbabStar,
    /// `aa*bb*cc*dd*ee*`
    AbcdePlus,
    /// `{a,b}*d{b,c}*`
    AbDBc,
    /// `{0,1,2}*02*`
    Zero12,
}

impl LanguageId {
    /// The 27 languages of the experimental study, counter languages first.
    pub fn study_languages() -> Vec<LanguageId> {
        use LanguageId::*;
        vec![
            Shuffle(2),
            Shuffle(4),
            Shuffle(6),
            BoolExp(BOOLEXP3_OPS.to_vec()),
            BoolExp(BOOLEXP5_OPS.to_vec()),
            AnBn,
            AnBnCn,
            AnBnCnDn,
            Dyck1,
            Tomita(1),
            Tomita(4),
            Tomita(7),
            Tomita(2),
            AbcdePlus,
            AbDBc,
            Zero12,
            Dn(2),
            Dn(3),
            Dn(4),
            Dn(12),
            Parity,
            AaStar,
            AaaaStar,
            AbabStar,
            Tomita(3),
            Tomita(5),
            Tomita(6),
        ]
    }

    /// Everything the CLI lists: the study languages plus Reset-Dyck-1
    /// and `D_1`.
    pub fn catalog() -> Vec<LanguageId> {
        let mut all = Self::study_languages();
        all.push(LanguageId::ResetDyck1);
        all.push(LanguageId::Dn(1));
        all
    }

    pub fn spec(&self) -> Result<LanguageSpec> {
        LanguageSpec::new(self.clone())
    }

    pub fn is_counter(&self) -> bool {
        use LanguageId::*;
        matches!(
            self,
            Dyck1 | Shuffle(_) | BoolExp(_) | AnBn | AnBnCn | AnBnCnDn | ResetDyck1
        )
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LanguageId::*;
        match self {
            Dyck1 => write!(f, "dyck1"),
            Shuffle(k) => write!(f, "shuffle{k}"),
            BoolExp(ops) if ops[..] == BOOLEXP3_OPS => write!(f, "boolexp3"),
            BoolExp(ops) if ops[..] == BOOLEXP5_OPS => write!(f, "boolexp5"),
            BoolExp(ops) if ops[..] == BOOLEXP2_OPS => write!(f, "boolexp2"),
            BoolExp(ops) => {
                write!(f, "boolexp:")?;
                for (i, (c, r)) in ops.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}{r}")?;
                }
                Ok(())
            }
            AnBn => write!(f, "anbn"),
            AnBnCn => write!(f, "anbncn"),
            AnBnCnDn => write!(f, "anbncndn"),
            ResetDyck1 => write!(f, "reset_dyck1"),
            Tomita(n) => write!(f, "tomita{n}"),
            Dn(n) => write!(f, "dn{n}"),
            Parity => write!(f, "parity"),
            AaStar => write!(f, "aa_star"),
            AaaaStar => write!(f, "aaaa_star"),
            AbabStar => write!(f, "abab_star"),
            AbcdePlus => write!(f, "abcde_plus"),
            AbDBc => write!(f, "ab_d_bc"),
            Zero12 => write!(f, "zero12"),
        }
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use LanguageId::*;
        let unknown = || Error::UnknownLanguage(s.to_string());
        let id = match s {
            "dyck1" => Dyck1,
            "boolexp2" => BoolExp(BOOLEXP2_OPS.to_vec()),
            "boolexp3" => BoolExp(BOOLEXP3_OPS.to_vec()),
            "boolexp5" => BoolExp(BOOLEXP5_OPS.to_vec()),
            "anbn" => AnBn,
            "anbncn" => AnBnCn,
            "anbncndn" => AnBnCnDn,
            "reset_dyck1" => ResetDyck1,
            "parity" => Parity,
            "aa_star" => AaStar,
            "aaaa_star" => AaaaStar,
            "abab_star" => AbabStar,
            "abcde_plus" => AbcdePlus,
            "ab_d_bc" => AbDBc,
            "zero12" => Zero12,
            _ => {
                if let Some(rest) = s.strip_prefix("shuffle") {
                    let k: usize = rest.parse().map_err(|_| unknown())?;
                    if !(1..=BRACKETS.len()).contains(&k) {
                        return Err(unknown());
                    }
                    Shuffle(k)
                } else if let Some(rest) = s.strip_prefix("tomita") {
                    let n: u8 = rest.parse().map_err(|_| unknown())?;
                    if !(1..=7).contains(&n) {
                        return Err(unknown());
                    }
                    Tomita(n)
                } else if let Some(rest) = s.strip_prefix("dn") {
                    let n: usize = rest.parse().map_err(|_| unknown())?;
                    if !(1..=32).contains(&n) {
                        return Err(unknown());
                    }
                    Dn(n)
                } else if let Some(rest) = s.strip_prefix("boolexp:") {
                    let mut ops = Vec::new();
                    for part in rest.split(',') {
                        let mut chars = part.chars();
                        let c = chars.next().ok_or_else(unknown)?;
                        let r: u32 = chars.as_str().parse().map_err(|_| unknown())?;
                        ops.push((c, r));
                    }
                    BoolExp(ops)
                } else {
                    return Err(unknown());
                }
            }
        };
        Ok(id)
    }
}

impl Serialize for LanguageId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LanguageId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Position of a language in the counter / regular hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum LanguageClass {
    Counter,
    StarFree { dot_depth: u32 },
    NonStarFree,
}

impl LanguageClass {
    pub fn property_tag(&self) -> &'static str {
        match self {
            LanguageClass::Counter => "counter",
            LanguageClass::StarFree { .. } => "SF",
            LanguageClass::NonStarFree => "non-SF",
        }
    }

    pub fn dot_depth(&self) -> Option<u32> {
        match self {
            LanguageClass::StarFree { dot_depth } => Some(*dot_depth),
            _ => None,
        }
    }
}

impl fmt::Display for LanguageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageClass::StarFree { dot_depth } => write!(f, "SF, dot-depth {dot_depth}"),
            other => write!(f, "{}", other.property_tag()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Recognizer {
    Counter(CounterMachine),
    Dfa(Dfa),
}

/// Runtime configuration of a [`Recognizer`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunState {
    Counter(MachineConfig),
    Dfa(usize),
}

impl Recognizer {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Recognizer::Counter(m) => m.alphabet(),
            Recognizer::Dfa(d) => d.alphabet(),
        }
    }

    pub fn initial(&self) -> RunState {
        match self {
            Recognizer::Counter(m) => RunState::Counter(m.initial()),
            Recognizer::Dfa(d) => RunState::Dfa(d.start()),
        }
    }

    /// Advances `state` by one symbol. The caller guarantees `symbol` is in
    /// range.
    pub fn advance(&self, state: &mut RunState, symbol: Symbol) {
        match (self, state) {
            (Recognizer::Counter(m), RunState::Counter(c)) => {
                m.step_in_place(c, symbol).expect("symbol checked by caller")
            }
            (Recognizer::Dfa(d), RunState::Dfa(q)) => *q = d.next(*q, symbol),
            _ => unreachable!("run state does not belong to this recognizer"),
        }
    }

    pub fn is_accepting(&self, state: &RunState) -> bool {
        match (self, state) {
            (Recognizer::Counter(m), RunState::Counter(c)) => m.is_accepting(c),
            (Recognizer::Dfa(d), RunState::Dfa(q)) => d.is_accepting(*q),
            _ => unreachable!("run state does not belong to this recognizer"),
        }
    }

    /// True when no continuation from `state` can be accepted.
    pub fn is_dead(&self, state: &RunState) -> bool {
        match (self, state) {
            (Recognizer::Counter(m), RunState::Counter(c)) => m.dead_state() == Some(c.state),
            (Recognizer::Dfa(d), RunState::Dfa(q)) => d.is_dead(*q),
            _ => unreachable!("run state does not belong to this recognizer"),
        }
    }
}

/// A catalog language: alphabet, recognizer and class tag.
#[derive(Clone, Debug)]
pub struct LanguageSpec {
    id: LanguageId,
    recognizer: Recognizer,
    class: LanguageClass,
}

impl LanguageSpec {
    pub fn new(id: LanguageId) -> Result<Self> {
        use LanguageId::*;
        let (recognizer, class) = match &id {
            Dyck1 => (Recognizer::Counter(shuffle_machine(1)), LanguageClass::Counter),
            Shuffle(k) => {
                if !(1..=BRACKETS.len()).contains(k) {
                    return Err(Error::UnknownLanguage(id.to_string()));
                }
                (Recognizer::Counter(shuffle_machine(*k)), LanguageClass::Counter)
            }
            BoolExp(ops) => (
                Recognizer::Counter(boolexp_machine(ops)?),
                LanguageClass::Counter,
            ),
            AnBn => (Recognizer::Counter(chain_machine(2)), LanguageClass::Counter),
            AnBnCn => (Recognizer::Counter(chain_machine(3)), LanguageClass::Counter),
            AnBnCnDn => (Recognizer::Counter(chain_machine(4)), LanguageClass::Counter),
            ResetDyck1 => (Recognizer::Counter(reset_dyck_machine()), LanguageClass::Counter),
            Tomita(n) => (Recognizer::Dfa(tomita(*n)?), tomita_class(*n)),
            Dn(n) => (
                Recognizer::Dfa(dn(*n)),
                LanguageClass::StarFree {
                    dot_depth: *n as u32,
                },
            ),
            Parity => (Recognizer::Dfa(parity()), LanguageClass::NonStarFree),
            AaStar => (Recognizer::Dfa(unary_cycle(2)), LanguageClass::NonStarFree),
            AaaaStar => (Recognizer::Dfa(unary_cycle(4)), LanguageClass::NonStarFree),
            AbabStar => (Recognizer::Dfa(abab_star()), LanguageClass::NonStarFree),
            AbcdePlus => (
                Recognizer::Dfa(abcde_plus()),
                LanguageClass::StarFree { dot_depth: 1 },
            ),
            AbDBc => (
                Recognizer::Dfa(ab_d_bc()),
                LanguageClass::StarFree { dot_depth: 1 },
            ),
            Zero12 => (
                Recognizer::Dfa(zero12()),
                LanguageClass::StarFree { dot_depth: 2 },
            ),
        };
        Ok(LanguageSpec {
            id,
            recognizer,
            class,
        })
    }

    pub fn id(&self) -> &LanguageId {
        &self.id
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.recognizer.alphabet()
    }

    pub fn recognizer(&self) -> &Recognizer {
        &self.recognizer
    }

    pub fn class(&self) -> LanguageClass {
        self.class
    }

    /// Width of a target row: one coordinate per symbol plus end-of-sequence.
    pub fn target_width(&self) -> usize {
        self.alphabet().len() + 1
    }

    pub fn membership(&self, word: &[Symbol]) -> Result<bool> {
        self.alphabet().check(word)?;
        let mut state = self.recognizer.initial();
        for &s in word {
            self.recognizer.advance(&mut state, s);
        }
        Ok(self.recognizer.is_accepting(&state))
    }

    pub fn membership_str(&self, text: &str) -> Result<bool> {
        self.membership(&self.alphabet().encode(text)?)
    }

    pub fn encode(&self, text: &str) -> Result<Vec<Symbol>> {
        self.alphabet().encode(text)
    }

    pub fn decode(&self, word: &[Symbol]) -> String {
        self.alphabet().decode(word)
    }

    /// Counter readings after each prefix `s_1..s_t`, `t = 1..=n`, shifted
    /// so they read as the natural counts of the language (bracket depth per
    /// type; pending sub-expressions for BoolExp). Empty for DFA languages.
    pub fn counter_trace(&self, word: &[Symbol]) -> Result<Vec<Vec<i64>>> {
        self.alphabet().check(word)?;
        let Recognizer::Counter(m) = &self.recognizer else {
            return Ok(Vec::new());
        };
        let offset = if matches!(self.id, LanguageId::BoolExp(_)) {
            1
        } else {
            0
        };
        let mut config = m.initial();
        let mut out = Vec::with_capacity(word.len());
        for &s in word {
            m.step_in_place(&mut config, s)?;
            out.push(config.counters.iter().map(|c| c + offset).collect());
        }
        Ok(out)
    }
}

/// Shuffle-k machine: counter `j` tracks the depth of bracket type `j`;
/// closing a type at depth zero traps.
fn shuffle_machine(k: usize) -> CounterMachine {
    let alphabet = Alphabet::new(BRACKETS[..k].iter().flat_map(|&(o, c)| [o, c]));
    const ALIVE: usize = 0;
    const DEAD: usize = 1;
    CounterMachine::tabulate(
        alphabet,
        &["alive", "dead"],
        ALIVE,
        k,
        |s, _, _| {
            let mut ops = vec![CounterOp::Add(0); k];
            ops[s / 2] = CounterOp::Add(if s % 2 == 0 { 1 } else { -1 });
            ops
        },
        |s, q, z| {
            if q == DEAD || (s % 2 == 1 && !z[s / 2]) {
                DEAD
            } else {
                ALIVE
            }
        },
        |q, z| q == ALIVE && z.iter().all(|&b| !b),
        Some(DEAD),
    )
}

/// One counter holding (pending sub-expressions - 1): an operator of arity
/// `r` adds `r - 1`, a value subtracts one and completes the expression when
/// the counter was already zero.
fn boolexp_machine(ops: &[(char, u32)]) -> Result<CounterMachine> {
    if ops.is_empty() || ops.iter().any(|&(_, r)| r == 0) {
        return Err(Error::InvalidConfig(
            "BoolExp needs at least one operator, each of arity >= 1".into(),
        ));
    }
    let alphabet = Alphabet::new(ops.iter().map(|&(c, _)| c).chain(['0', '1']));
    let arity: Vec<i64> = ops
        .iter()
        .map(|&(_, r)| r as i64)
        .chain([0, 0])
        .collect();
    const OPEN: usize = 0;
    const DONE: usize = 1;
    const DEAD: usize = 2;
    Ok(CounterMachine::tabulate(
        alphabet,
        &["open", "done", "dead"],
        OPEN,
        1,
        |s, q, _| match q {
            OPEN => vec![CounterOp::Add(arity[s] - 1)],
            _ => vec![CounterOp::Add(0)],
        },
        |s, q, z| match q {
            OPEN if arity[s] == 0 && !z[0] => DONE,
            OPEN => OPEN,
            _ => DEAD,
        },
        |q, _| q == DONE,
        Some(DEAD),
    ))
}

/// `a^n b^n`, `a^n b^n c^n`, `a^n b^n c^n d^n` (n >= 1) with `letters - 1`
/// counters; counter `i` holds `#letter_i - #letter_{i+1}`. Phase `p` is
/// the state reading letter `p`; the last state is the trap.
fn chain_machine(letters: usize) -> CounterMachine {
    let alphabet = Alphabet::new(['a', 'b', 'c', 'd'].into_iter().take(letters));
    let k = letters - 1;
    let names: Vec<String> = (0..letters)
        .map(|p| format!("phase_{}", ['a', 'b', 'c', 'd'][p]))
        .chain(["dead".to_string()])
        .collect();
    let names_ref: Vec<&str> = names.iter().map(String::as_str).collect();
    let dead = letters;

    // Returns the counter ops and next phase, or None for the trap.
    let step = move |s: usize, p: usize, z: &[bool]| -> Option<(Vec<CounterOp>, usize)> {
        let mut ops = vec![CounterOp::Add(0); k];
        if s == p {
            if p == 0 {
                ops[0] = CounterOp::Add(1);
            } else {
                if !z[p - 1] {
                    return None;
                }
                ops[p - 1] = CounterOp::Add(-1);
                if p < k {
                    ops[p] = CounterOp::Add(1);
                }
            }
            Some((ops, p))
        } else if s == p + 1 {
            let ready = if p == 0 { z[0] } else { !z[p - 1] && z[p] };
            if !ready {
                return None;
            }
            ops[p] = CounterOp::Add(-1);
            if s < k {
                ops[s] = CounterOp::Add(1);
            }
            Some((ops, s))
        } else {
            None
        }
    };

    CounterMachine::tabulate(
        alphabet,
        &names_ref,
        0,
        k,
        |s, q, z| {
            if q == dead {
                return vec![CounterOp::Add(0); k];
            }
            step(s, q, z).map_or_else(|| vec![CounterOp::Add(0); k], |(ops, _)| ops)
        },
        |s, q, z| {
            if q == dead {
                return dead;
            }
            step(s, q, z).map_or(dead, |(_, next)| next)
        },
        |q, z| q == letters - 1 && z.iter().all(|&b| !b),
        Some(dead),
    )
}

/// Reset-Dyck-1 over `{[, ], #}`: `#` resets the counter and restarts the
/// Dyck-1 check. No prefix is dead since a later `#` can always recover.
fn reset_dyck_machine() -> CounterMachine {
    const PRE: usize = 0;
    const OK: usize = 1;
    const BROKEN: usize = 2;
    CounterMachine::tabulate(
        Alphabet::new(['[', ']', '#']),
        &["before_reset", "balanced_so_far", "broken"],
        PRE,
        1,
        |s, q, _| match (s, q) {
            (2, _) => vec![CounterOp::Reset],
            (0, OK) => vec![CounterOp::Add(1)],
            (1, OK) => vec![CounterOp::Add(-1)],
            _ => vec![CounterOp::Add(0)],
        },
        |s, q, z| match (s, q) {
            (2, _) => OK,
            (1, OK) if !z[0] => BROKEN,
            (_, q) => q,
        },
        |q, z| q == OK && !z[0],
        None,
    )
}

fn binary() -> Alphabet {
    Alphabet::new(['0', '1'])
}

fn tomita(n: u8) -> Result<Dfa> {
    // Symbol 0 is '0', symbol 1 is '1'. Rows are [on '0', on '1'].
    let (delta, accepting): (Vec<Vec<usize>>, Vec<bool>) = match n {
        // 1*
        1 => (vec![vec![1, 0], vec![1, 1]], vec![true, false]),
        // (10)*
        2 => (
            vec![vec![2, 1], vec![0, 2], vec![2, 2]],
            vec![true, false, false],
        ),
        // no odd run of 1s followed by an odd run of 0s.
        // 0 neutral, 1 odd ones, 2 odd zeros after odd ones, 3 even zeros after odd ones, 4 trap
        3 => (
            vec![
                vec![0, 1],
                vec![2, 0],
                vec![3, 4],
                vec![2, 1],
                vec![4, 4],
            ],
            vec![true, true, false, true, false],
        ),
        // no 000
        4 => (
            vec![vec![1, 0], vec![2, 0], vec![3, 0], vec![3, 3]],
            vec![true, true, true, false],
        ),
        // even number of 0s and of 1s; bit 0 = parity of 0s, bit 1 = parity of 1s
        5 => (
            vec![vec![1, 2], vec![0, 3], vec![3, 0], vec![2, 1]],
            vec![true, false, false, false],
        ),
        // (#0 - #1) mod 3 == 0
        6 => (
            vec![vec![1, 2], vec![2, 0], vec![0, 1]],
            vec![true, false, false],
        ),
        // 0*1*0*1*
        7 => (
            vec![vec![0, 1], vec![2, 1], vec![2, 3], vec![4, 3], vec![4, 4]],
            vec![true, true, true, true, false],
        ),
        _ => return Err(Error::UnknownLanguage(format!("tomita{n}"))),
    };
    Dfa::new(binary(), 0, delta, accepting)
}

fn tomita_class(n: u8) -> LanguageClass {
    match n {
        3 | 5 | 6 => LanguageClass::NonStarFree,
        _ => LanguageClass::StarFree { dot_depth: 1 },
    }
}

/// Depth-bounded Dyck over `{a, b}`: states are depths `0..=n`, then trap.
fn dn(n: usize) -> Dfa {
    let dead = n + 1;
    let mut delta = Vec::with_capacity(n + 2);
    for d in 0..=n {
        let on_a = if d < n { d + 1 } else { dead };
        let on_b = if d > 0 { d - 1 } else { dead };
        delta.push(vec![on_a, on_b]);
    }
    delta.push(vec![dead, dead]);
    let accepting = (0..n + 2).map(|q| q == 0).collect();
    Dfa::new(Alphabet::new(['a', 'b']), 0, delta, accepting).expect("well-formed")
}

fn parity() -> Dfa {
    Dfa::new(binary(), 0, vec![vec![0, 1], vec![1, 0]], vec![true, false]).expect("well-formed")
}

fn unary_cycle(period: usize) -> Dfa {
    let delta = (0..period).map(|q| vec![(q + 1) % period]).collect();
    let accepting = (0..period).map(|q| q == 0).collect();
    Dfa::new(Alphabet::new(['a']), 0, delta, accepting).expect("well-formed")
}

fn abab_star() -> Dfa {
    // state i expects 'a' when i is even, 'b' when odd; 4 is the trap
    let delta = vec![
        vec![1, 4],
        vec![4, 2],
        vec![3, 4],
        vec![4, 0],
        vec![4, 4],
    ];
    Dfa::new(
        Alphabet::new(['a', 'b']),
        0,
        delta,
        vec![true, false, false, false, false],
    )
    .expect("well-formed")
}

fn abcde_plus() -> Dfa {
    // 0 start, 1..=5 inside the run of the (i-1)th letter, 6 trap
    let dead = 6;
    let mut delta = vec![vec![dead; 5]; 7];
    delta[0][0] = 1;
    for letter in 0..5 {
        let inside = letter + 1;
        delta[inside][letter] = inside;
        if letter + 1 < 5 {
            delta[inside][letter + 1] = inside + 1;
        }
    }
    let accepting = (0..7).map(|q| q == 5).collect();
    Dfa::new(Alphabet::new(['a', 'b', 'c', 'd', 'e']), 0, delta, accepting).expect("well-formed")
}

fn ab_d_bc() -> Dfa {
    // alphabet a b c d; 0 before d, 1 after d, 2 trap
    let delta = vec![vec![0, 0, 2, 1], vec![2, 1, 1, 2], vec![2, 2, 2, 2]];
    Dfa::new(
        Alphabet::new(['a', 'b', 'c', 'd']),
        0,
        delta,
        vec![false, true, false],
    )
    .expect("well-formed")
}

fn zero12() -> Dfa {
    // 1 = inside a `02*` suffix
    let delta = vec![vec![1, 0, 0], vec![1, 0, 1]];
    Dfa::new(Alphabet::new(['0', '1', '2']), 0, delta, vec![false, true]).expect("well-formed")
}
