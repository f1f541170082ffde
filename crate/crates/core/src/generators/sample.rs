//! Random member sampling and exhaustive enumeration over a length window.

use rand::seq::SliceRandom;
use rand::Rng;

use super::pcfg::{sample_dyck1, PcfgDyckParams, RESAMPLE_BUDGET};
use super::shuffle::random_interleaving;
use crate::error::{Error, Result};
use crate::lang::{Dfa, LanguageId, LanguageSpec, Recognizer, Symbol};

/// Most words [`enumerate_language`] will return.
pub const ENUMERATION_CAP: usize = 100_000;
/// Most search nodes [`enumerate_language`] will visit.
pub const ENUMERATION_NODE_BUDGET: usize = 20_000_000;

#[derive(Clone, Debug)]
enum Strategy {
    /// Dyck-1 and Shuffle-k: interleave independent Dyck-1 samples.
    Brackets { k: usize, params: PcfgDyckParams },
    /// Random prefix-notation expansion; `arity[s]` is 0 for values.
    BoolExp { arity: Vec<u32>, p_value: f64 },
    /// `a^n b^n ...` with `letters` blocks; `ns` are the admissible `n`.
    Chain { letters: usize, ns: Vec<usize> },
    /// Random `Σ*` prefix, `#`, then a Dyck-1 word.
    ResetDyck { params: PcfgDyckParams },
    /// Uniform length among reachable ones, then uniform live transitions.
    Dfa { reach: Vec<Vec<bool>>, lengths: Vec<usize> },
}

/// Draws members of one language with lengths in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Sampler {
    spec: LanguageSpec,
    lo: usize,
    hi: usize,
    strategy: Strategy,
}

impl Sampler {
    pub fn new(spec: &LanguageSpec, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::Generation(format!("empty length window [{lo}, {hi}]")));
        }
        let strategy = match (spec.id(), spec.recognizer()) {
            (LanguageId::Dyck1, _) => Strategy::Brackets {
                k: 1,
                params: PcfgDyckParams::default(),
            },
            (LanguageId::Shuffle(k), _) => Strategy::Brackets {
                k: *k,
                params: PcfgDyckParams::default(),
            },
            (LanguageId::BoolExp(ops), _) => {
                let arity: Vec<u32> = ops.iter().map(|&(_, r)| r).chain([0, 0]).collect();
                let mean = ops.iter().map(|&(_, r)| r as f64).sum::<f64>() / ops.len() as f64;
                // Critical branching when (1 - p_value) * mean = 1.
                let p_value = (1.0 - 1.0 / mean).max(0.25);
                Strategy::BoolExp { arity, p_value }
            }
            (LanguageId::AnBn | LanguageId::AnBnCn | LanguageId::AnBnCnDn, _) => {
                let letters = spec.alphabet().len();
                let ns: Vec<usize> = (1..=hi / letters)
                    .filter(|n| n * letters >= lo)
                    .collect();
                if ns.is_empty() {
                    return Err(no_members(spec, lo, hi));
                }
                Strategy::Chain { letters, ns }
            }
            (LanguageId::ResetDyck1, _) => {
                if hi == 0 {
                    return Err(no_members(spec, lo, hi));
                }
                Strategy::ResetDyck {
                    params: PcfgDyckParams::default(),
                }
            }
            (_, Recognizer::Dfa(dfa)) => {
                let reach = exact_reach(dfa, hi);
                let lengths: Vec<usize> = (lo..=hi).filter(|&l| reach[l][dfa.start()]).collect();
                if lengths.is_empty() {
                    return Err(no_members(spec, lo, hi));
                }
                Strategy::Dfa { reach, lengths }
            }
            (id, Recognizer::Counter(_)) => {
                return Err(Error::Generation(format!("no sampler for counter language {id}")))
            }
        };
        Ok(Sampler {
            spec: spec.clone(),
            lo,
            hi,
            strategy,
        })
    }

    pub fn spec(&self) -> &LanguageSpec {
        &self.spec
    }

    pub fn window(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Symbol>> {
        let (lo, hi) = (self.lo, self.hi);
        match &self.strategy {
            Strategy::Brackets { k, params } => {
                for _ in 0..RESAMPLE_BUDGET {
                    let mut order: Vec<usize> = (0..*k).collect();
                    order.shuffle(rng);
                    let mut remaining = hi;
                    let mut parts = Vec::with_capacity(*k);
                    for &j in &order {
                        let w = sample_dyck1(params, rng, remaining)?;
                        remaining -= w.len();
                        parts.push(w.into_iter().map(|s| 2 * j + s).collect::<Vec<_>>());
                    }
                    if hi - remaining >= lo {
                        return Ok(random_interleaving(&parts, rng));
                    }
                }
                Err(self.exhausted())
            }
            Strategy::BoolExp { arity, p_value } => {
                let n_ops = arity.len() - 2;
                for _ in 0..RESAMPLE_BUDGET {
                    let mut word = Vec::new();
                    let mut pending = 1usize;
                    while pending > 0 {
                        let pick_op = n_ops > 0 && !rng.gen_bool(*p_value);
                        let op = if pick_op { rng.gen_range(0..n_ops) } else { usize::MAX };
                        // After this symbol, len + pending must stay within hi.
                        let fits = op != usize::MAX
                            && word.len() + 1 + pending - 1 + arity[op] as usize <= hi;
                        if fits {
                            word.push(op);
                            pending += arity[op] as usize - 1;
                        } else {
                            word.push(n_ops + rng.gen_range(0..2));
                            pending -= 1;
                        }
                    }
                    if word.len() >= lo && word.len() <= hi {
                        return Ok(word);
                    }
                }
                Err(self.exhausted())
            }
            Strategy::Chain { letters, ns } => {
                let n = *ns.choose(rng).expect("non-empty");
                Ok((0..*letters)
                    .flat_map(|l| std::iter::repeat(l).take(n))
                    .collect())
            }
            Strategy::ResetDyck { params } => {
                let v = sample_dyck1(params, rng, hi - 1)?;
                let room = hi - 1 - v.len();
                let min_prefix = lo.saturating_sub(1 + v.len());
                let m = rng.gen_range(min_prefix..=room);
                let mut word: Vec<Symbol> = (0..m).map(|_| rng.gen_range(0..3)).collect();
                word.push(2);
                word.extend(v);
                Ok(word)
            }
            Strategy::Dfa { reach, lengths } => {
                let Recognizer::Dfa(dfa) = self.spec.recognizer() else {
                    unreachable!()
                };
                let len = *lengths.choose(rng).expect("non-empty");
                let mut q = dfa.start();
                let mut word = Vec::with_capacity(len);
                let mut live = Vec::with_capacity(dfa.alphabet().len());
                for r in (0..len).rev() {
                    live.clear();
                    live.extend((0..dfa.alphabet().len()).filter(|&s| reach[r][dfa.next(q, s)]));
                    let s = *live.choose(rng).expect("reachability table guarantees a move");
                    word.push(s);
                    q = dfa.next(q, s);
                }
                Ok(word)
            }
        }
    }

    fn exhausted(&self) -> Error {
        Error::Generation(format!(
            "could not sample {} in [{}, {}] within {RESAMPLE_BUDGET} attempts",
            self.spec.id(),
            self.lo,
            self.hi
        ))
    }
}

fn no_members(spec: &LanguageSpec, lo: usize, hi: usize) -> Error {
    Error::Generation(format!("{} has no words with length in [{lo}, {hi}]", spec.id()))
}

/// `reach[r][q]`: some word of length exactly `r` leads from `q` to
/// acceptance.
fn exact_reach(dfa: &Dfa, max_len: usize) -> Vec<Vec<bool>> {
    let n = dfa.n_states();
    let mut reach = Vec::with_capacity(max_len + 1);
    reach.push((0..n).map(|q| dfa.is_accepting(q)).collect::<Vec<bool>>());
    for r in 1..=max_len {
        let prev: &Vec<bool> = &reach[r - 1];
        let row = (0..n)
            .map(|q| (0..dfa.alphabet().len()).any(|s| prev[dfa.next(q, s)]))
            .collect();
        reach.push(row);
    }
    reach
}

/// One member with length in `[lo, hi]`.
pub fn sample_language<R: Rng + ?Sized>(
    spec: &LanguageSpec,
    rng: &mut R,
    lo: usize,
    hi: usize,
) -> Result<Vec<Symbol>> {
    Sampler::new(spec, lo, hi)?.sample(rng)
}

/// Every member with length in `[lo, hi]`, ascending by length then by
/// symbol order. Fails with [`Error::TooDense`] past [`ENUMERATION_CAP`]
/// words or [`ENUMERATION_NODE_BUDGET`] search nodes.
pub fn enumerate_language(spec: &LanguageSpec, lo: usize, hi: usize) -> Result<Vec<Vec<Symbol>>> {
    let too_dense = |reason: String| Error::TooDense {
        language: spec.id().to_string(),
        lo,
        hi,
        reason,
    };
    if lo > hi {
        return Ok(Vec::new());
    }
    let rec = spec.recognizer();
    let sigma = spec.alphabet().len();

    // For DFAs, prune with exact reachability: from state q at depth d some
    // completion must land inside the window.
    let viable: Option<Vec<Vec<bool>>> = match rec {
        Recognizer::Dfa(dfa) => {
            let reach = exact_reach(dfa, hi);
            let table = (0..=hi)
                .map(|d| {
                    (0..dfa.n_states())
                        .map(|q| (lo.max(d)..=hi).any(|l| reach[l - d][q]))
                        .collect()
                })
                .collect();
            Some(table)
        }
        Recognizer::Counter(_) => None,
    };

    let mut out = Vec::new();
    let mut nodes = 0usize;
    let mut stack = vec![(Vec::<Symbol>::new(), rec.initial())];
    while let Some((word, state)) = stack.pop() {
        nodes += 1;
        if nodes > ENUMERATION_NODE_BUDGET {
            return Err(too_dense(format!(
                "search exceeded {ENUMERATION_NODE_BUDGET} nodes"
            )));
        }
        if word.len() >= lo && rec.is_accepting(&state) {
            out.push(word.clone());
            if out.len() > ENUMERATION_CAP {
                return Err(too_dense(format!("more than {ENUMERATION_CAP} words")));
            }
        }
        if word.len() == hi {
            continue;
        }
        for s in (0..sigma).rev() {
            let mut next = state.clone();
            rec.advance(&mut next, s);
            if rec.is_dead(&next) {
                continue;
            }
            if let (Some(table), crate::lang::RunState::Dfa(q)) = (&viable, &next) {
                if !table[word.len() + 1][*q] {
                    continue;
                }
            }
            let mut w = word.clone();
            w.push(s);
            stack.push((w, next));
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::collections::BTreeSet;

    fn spec(id: &str) -> LanguageSpec {
        id.parse::<LanguageId>().unwrap().spec().unwrap()
    }

    fn strings(l: &LanguageSpec, words: &[Vec<Symbol>]) -> Vec<String> {
        words.iter().map(|w| l.decode(w)).collect()
    }

    #[test]
    fn enumerate_chain() {
        let l = spec("anbncn");
        assert_eq!(
            strings(&l, &enumerate_language(&l, 3, 9).unwrap()),
            vec!["abc", "aabbcc", "aaabbbccc"]
        );
        assert_eq!(enumerate_language(&spec("anbn"), 2, 100).unwrap().len(), 50);
        assert_eq!(enumerate_language(&spec("aa_star"), 2, 500).unwrap().len(), 250);
    }

    #[test]
    fn dense_window_is_refused() {
        let l = spec("parity");
        assert!(matches!(
            enumerate_language(&l, 2, 50),
            Err(Error::TooDense { .. })
        ));
    }

    #[test]
    fn sampler_support_matches_enumeration() {
        let mut r = rng::stream(11, 0);
        for (id, lo, hi) in [("aa_star", 2, 10), ("anbn", 2, 6), ("tomita2", 2, 4)] {
            let l = spec(id);
            let all: BTreeSet<Vec<Symbol>> =
                enumerate_language(&l, lo, hi).unwrap().into_iter().collect();
            let sampler = Sampler::new(&l, lo, hi).unwrap();
            let seen: BTreeSet<Vec<Symbol>> =
                (0..500).map(|_| sampler.sample(&mut r).unwrap()).collect();
            assert_eq!(seen, all, "{id}");
        }
    }

    #[test]
    fn empty_window_errors() {
        assert!(Sampler::new(&spec("anbn"), 3, 3).is_err());
        assert!(Sampler::new(&spec("dyck1"), 5, 4).is_err());
    }

    #[test]
    fn samples_respect_window() {
        let mut r = rng::stream(12, 0);
        for id in ["shuffle2", "boolexp3", "reset_dyck1", "dn3", "abcde_plus"] {
            let l = spec(id);
            let sampler = Sampler::new(&l, 10, 40).unwrap();
            for _ in 0..300 {
                let w = sampler.sample(&mut r).unwrap();
                assert!((10..=40).contains(&w.len()), "{id}: {}", w.len());
                assert!(l.membership(&w).unwrap(), "{id}: {}", l.decode(&w));
            }
        }
    }
}
