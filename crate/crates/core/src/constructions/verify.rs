//! Equivalence and property suites for the hand-built constructions.
//!
//! Each equivalence suite compares a construction against an independent
//! recognizer on every word up to a length bound (a depth-first walk that
//! shares prefixes) and on random words: a third uniform over the
//! alphabet, a third sampled members, a third single-symbol mutations of
//! members. Random words are evaluated in exact and in 64-bit float
//! arithmetic; both must agree with the oracle.

use std::time::Instant;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::builders::{build_boolexp, build_rcl, build_shuffle_dyck, shuffle_stateless_machine};
use super::hand::{HandRunner, HandTransformer};
use super::impossibility::{check_masking_constancy, check_reset_invariance};
use super::scalar::Scalar;
use crate::error::Result;
use crate::generators::Sampler;
use crate::lang::catalog::BOOLEXP3_OPS;
use crate::lang::{LanguageId, LanguageSpec, RunState, StatelessCounterMachine, Symbol};
use crate::neural::{PositionalScheme, Transformer, TransformerConfig};
use crate::rng;

/// Ternary BoolExp with `∧` as the binary operator, so that the textbook
/// example words can be checked directly.
pub const BOOLEXP_AND_OPS: [(char, u32); 3] = [('∼', 1), ('∧', 2), ('>', 3)];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Overrides the exhaustive length bound of every suite (defaults:
    /// 10 for bracket languages, 8 for BoolExp).
    pub max_len: Option<usize>,
    pub samples: usize,
    pub random_max_len: usize,
    /// Random models per neural property suite.
    pub models: usize,
    pub seed: u64,
    /// Flips the sign of the `[` embedding of the Shuffle-1 construction.
    pub corrupt_shuffle1: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_len: None,
            samples: 10_000,
            random_max_len: 150,
            models: 100,
            seed: 0,
            corrupt_shuffle1: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub exhaustive_max_len: Option<usize>,
    pub exhaustive: usize,
    pub random: usize,
    pub failures: usize,
    /// First disagreement found, if any.
    pub counterexample: Option<String>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn checked(&self) -> usize {
        self.exhaustive + self.random
    }
}

/// Membership oracle that can be advanced one symbol at a time.
pub trait Oracle: Sync {
    type State: Clone + Send + Sync;
    fn init(&self) -> Self::State;
    fn step(&self, state: &mut Self::State, symbol: Symbol);
    fn accepts(&self, state: &Self::State) -> bool;
}

impl Oracle for LanguageSpec {
    type State = RunState;

    fn init(&self) -> RunState {
        self.recognizer().initial()
    }

    fn step(&self, state: &mut RunState, symbol: Symbol) {
        self.recognizer().advance(state, symbol);
    }

    fn accepts(&self, state: &RunState) -> bool {
        self.recognizer().is_accepting(state)
    }
}

impl Oracle for StatelessCounterMachine {
    type State = (usize, Vec<i64>);

    fn init(&self) -> Self::State {
        (self.start(), vec![0; self.counters()])
    }

    fn step(&self, state: &mut Self::State, symbol: Symbol) {
        for (c, m) in state.1.iter_mut().zip(self.increments(symbol)) {
            *c += m;
        }
        state.0 = self.next_state(symbol);
    }

    fn accepts(&self, state: &Self::State) -> bool {
        self.is_accepting(state.0, crate::lang::counter::pack_mask(&state.1))
    }
}

#[derive(Default)]
struct Tally {
    count: usize,
    failures: usize,
    example: Option<Vec<Symbol>>,
}

impl Tally {
    fn record(&mut self, ok: bool, word: &[Symbol]) {
        self.count += 1;
        if !ok {
            self.failures += 1;
            if self.example.is_none() {
                self.example = Some(word.to_vec());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.failures += other.failures;
        if self.example.is_none() {
            self.example = other.example;
        }
        self
    }
}

fn dfs<O: Oracle>(
    runner: &HandRunner<'_, Rational64>,
    oracle: &O,
    state: &O::State,
    word: &mut Vec<Symbol>,
    max_len: usize,
    sigma: usize,
    tally: &mut Tally,
) -> Result<()> {
    tally.record(runner.accepted() == oracle.accepts(state), word);
    if word.len() == max_len {
        return Ok(());
    }
    for s in 0..sigma {
        let mut r = runner.clone();
        r.step(s)?;
        let mut st = state.clone();
        oracle.step(&mut st, s);
        word.push(s);
        dfs(&r, oracle, &st, word, max_len, sigma, tally)?;
        word.pop();
    }
    Ok(())
}

/// Compares `ht` with `oracle` on every word of length at most `max_len`.
fn exhaustive<O: Oracle>(ht: &HandTransformer, oracle: &O, max_len: usize) -> Result<Tally> {
    let sigma = ht.alphabet().len();
    let root = HandRunner::<Rational64>::new(ht)?;
    let init = oracle.init();
    let mut tally = Tally::default();
    tally.record(root.accepted() == oracle.accepts(&init), &[]);
    if max_len == 0 {
        return Ok(tally);
    }
    let parts = (0..sigma)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut r = root.clone();
            r.step(s)?;
            let mut st = init.clone();
            oracle.step(&mut st, s);
            let mut t = Tally::default();
            dfs(&r, oracle, &st, &mut vec![s], max_len, sigma, &mut t)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(tally, Tally::merge))
}

fn run_stream<S: Scalar>(ht: &HandTransformer, word: &[Symbol]) -> Result<bool> {
    let mut r = HandRunner::<S>::new(ht)?;
    for &s in word {
        r.step(s)?;
    }
    Ok(r.accepted())
}

/// Uniform words, sampled members and single mutations of members.
pub fn random_words<R: Rng + ?Sized>(
    members: &LanguageSpec,
    count: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Symbol>>> {
    let sigma = members.alphabet().len();
    let sampler = Sampler::new(members, 1, max_len)?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let w = match i % 3 {
            0 => {
                let n = rng.gen_range(0..=max_len);
                (0..n).map(|_| rng.gen_range(0..sigma)).collect()
            }
            1 => sampler.sample(rng)?,
            _ => {
                let mut w = sampler.sample(rng)?;
                let at = rng.gen_range(0..=w.len());
                match rng.gen_range(0..3) {
                    0 if at < w.len() => w[at] = rng.gen_range(0..sigma),
                    1 if w.len() < max_len => w.insert(at, rng.gen_range(0..sigma)),
                    _ if at < w.len() => {
                        w.remove(at);
                    }
                    _ => w.push(rng.gen_range(0..sigma)),
                }
                w
            }
        };
        out.push(w);
    }
    Ok(out)
}

fn random_suite<O: Oracle>(
    ht: &HandTransformer,
    oracle: &O,
    words: &[Vec<Symbol>],
) -> Result<Tally> {
    let results = words
        .par_iter()
        .map(|w| -> Result<bool> {
            let mut st = oracle.init();
            for &s in w {
                oracle.step(&mut st, s);
            }
            let want = oracle.accepts(&st);
            Ok(run_stream::<Rational64>(ht, w)? == want && run_stream::<f64>(ht, w)? == want)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tally = Tally::default();
    for (w, ok) in words.iter().zip(results) {
        tally.record(ok, w);
    }
    Ok(tally)
}

#[allow(clippy::too_many_arguments)]
fn equivalence_suite<O: Oracle>(
    name: &str,
    ht: &HandTransformer,
    oracle: &O,
    members: &LanguageSpec,
    default_len: usize,
    opts: &VerifyOptions,
    stream: u64,
) -> Result<SuiteReport> {
    let started = Instant::now();
    let max_len = opts.max_len.unwrap_or(default_len);
    let ex = exhaustive(ht, oracle, max_len)?;
    let mut rng = rng::stream(opts.seed, stream);
    let words = random_words(members, opts.samples, opts.random_max_len, &mut rng)?;
    let rnd = random_suite(ht, oracle, &words)?;
    let (exhaustive, random) = (ex.count, rnd.count);
    let all = ex.merge(rnd);
    Ok(SuiteReport {
        name: name.into(),
        exhaustive_max_len: Some(max_len),
        exhaustive,
        random,
        failures: all.failures,
        counterexample: all.example.map(|w| format!("{:?}", ht.alphabet().decode(&w))),
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn shuffle_suite(k: usize, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut ht = build_shuffle_dyck(k)?;
    if k == 1 && opts.corrupt_shuffle1 {
        ht.set_embedding(0, vec![-1, 1])?;
    }
    let spec = LanguageId::Shuffle(k).spec()?;
    equivalence_suite(&format!("shuffle{k}"), &ht, &spec, &spec, 10, opts, k as u64)
}

pub fn boolexp_suite(name: &str, ops: &[(char, u32)], opts: &VerifyOptions, stream: u64) -> Result<SuiteReport> {
    let ht = build_boolexp(ops)?;
    let spec = LanguageId::BoolExp(ops.to_vec()).spec()?;
    equivalence_suite(name, &ht, &spec, &spec, 8, opts, stream)
}

pub fn rcl_suite(k: usize, opts: &VerifyOptions) -> Result<SuiteReport> {
    let machine = shuffle_stateless_machine(k)?;
    let ht = build_rcl(&machine)?;
    let members = LanguageId::Shuffle(k).spec()?;
    equivalence_suite(&format!("rcl-shuffle{k}"), &ht, &machine, &members, 10, opts, 20 + k as u64)
}

fn property_report(name: &str, started: Instant, tally: Tally, describe: impl Fn(&[Symbol]) -> String) -> SuiteReport {
    SuiteReport {
        name: name.into(),
        exhaustive_max_len: None,
        exhaustive: 0,
        random: tally.count,
        failures: tally.failures,
        counterexample: tally.example.as_deref().map(describe),
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// The textbook BoolExp words and the Shuffle-2 examples, by name.
pub fn instance_suite() -> Result<SuiteReport> {
    let started = Instant::now();
    let mut tally = Tally::default();
    let mut failed = Vec::new();
    let cases: [(HandTransformer, &str, bool); 6] = [
        (build_boolexp(&BOOLEXP_AND_OPS)?, "∧∼01", true),
        (build_boolexp(&BOOLEXP_AND_OPS)?, "∼10", false),
        (build_shuffle_dyck(2)?, "([)]", true),
        (build_shuffle_dyck(2)?, "[((]))", true),
        (build_shuffle_dyck(1)?, "", true),
        (build_rcl(&shuffle_stateless_machine(2)?)?, "])[(", false),
    ];
    for (i, (ht, text, want)) in cases.iter().enumerate() {
        let w = ht.alphabet().encode(text)?;
        let ok = ht.accepts::<Rational64>(&w)? == *want;
        if !ok {
            failed.push(*text);
        }
        tally.record(ok, &[i]);
    }
    Ok(property_report("paper-instances", started, tally, |_| failed.join(", ")))
}

/// `a_i[0] · i` equals the bracket depth after `i` symbols, and every
/// attention row sums to one, for random Shuffle-1 words.
pub fn depth_ratio_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let started = Instant::now();
    let ht = build_shuffle_dyck(1)?;
    let spec = LanguageId::Shuffle(1).spec()?;
    let mut rng = rng::stream(opts.seed, 30);
    let count = (opts.samples / 100).max(30);
    let words = random_words(&spec, count, opts.random_max_len, &mut rng)?;
    let results = words
        .par_iter()
        .map(|w| -> Result<bool> {
            let t = ht.run::<Rational64>(w)?;
            let mut depth = 0i64;
            let mut ok = true;
            for (i, &s) in w.iter().enumerate() {
                depth += if s == 0 { 1 } else { -1 };
                let scaled = t.attention_output[i][0] * Rational64::from_integer(i as i64 + 1);
                let total: Rational64 = t.attention[i].iter().sum();
                ok &= scaled == Rational64::from_integer(depth) && total == Rational64::from_integer(1);
            }
            Ok(ok)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tally = Tally::default();
    for (w, ok) in words.iter().zip(results) {
        tally.record(ok, w);
    }
    Ok(property_report("depth-ratio", started, tally, |w| ht.alphabet().decode(w)))
}

/// With zero keys the attention output equals the mean of the value
/// vectors (plus the input when the residual is on), exactly.
pub fn uniform_attention_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let started = Instant::now();
    let hts = [
        build_shuffle_dyck(2)?,
        build_boolexp(&BOOLEXP3_OPS)?,
        build_rcl(&shuffle_stateless_machine(2)?)?,
    ];
    let mut rng = rng::stream(opts.seed, 31);
    let mut tally = Tally::default();
    for ht in &hts {
        let sigma = ht.alphabet().len();
        for _ in 0..(opts.samples / 100).max(30) {
            let n = rng.gen_range(0..=30);
            let w: Vec<Symbol> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let t = ht.run::<Rational64>(&w)?;
            let mut inputs: Vec<Vec<i64>> = ht.start_embedding().map(<[i64]>::to_vec).into_iter().collect();
            inputs.extend(w.iter().map(|&s| ht.embedding(s).to_vec()));
            let values: Vec<Vec<i64>> = inputs.iter().map(|x| ht.value_of(x)).collect();
            let mut ok = true;
            for i in 0..inputs.len() {
                for c in 0..ht.d_model() {
                    let sum: i64 = values[..=i].iter().map(|v| v[c]).sum();
                    let mut want = Rational64::new(sum, i as i64 + 1);
                    if ht.residual() {
                        want += Rational64::from_integer(inputs[i][c]);
                    }
                    ok &= t.attention_output[i][c] == want;
                }
            }
            tally.record(ok, &w);
        }
    }
    Ok(property_report("uniform-attention", started, tally, |w| format!("{w:?}")))
}

fn random_masking_model<R: Rng + ?Sized>(layers: usize, alphabet: crate::lang::Alphabet, rng: &mut R) -> Result<Transformer> {
    let (d, heads) = *[(4, 1), (4, 2), (8, 2), (8, 4), (16, 4), (6, 3)].choose(rng).expect("nonempty");
    let mut cfg = TransformerConfig::new(d, heads, layers, PositionalScheme::Masking);
    cfg.residual = rng.gen_bool(0.5);
    cfg.layer_norm = rng.gen_bool(0.5);
    Transformer::new(cfg, alphabet, rng)
}

/// Random masking-only transformers of depth 1–4 on `a^n`, `n ≤ 32`: the
/// output rows agree to within `1e-6`.
pub fn masking_constancy_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = rng::stream(opts.seed, 32);
    let alphabet = LanguageId::AaStar.spec()?.alphabet().clone();
    let mut tally = Tally::default();
    let mut worst = 0.0f64;
    for _ in 0..opts.models {
        let layers = rng.gen_range(1..=4);
        let model = random_masking_model(layers, alphabet.clone(), &mut rng)?;
        let n = rng.gen_range(1..=32);
        let dev = check_masking_constancy(&model, 0, n)?;
        worst = worst.max(dev);
        tally.record(dev < 1e-6, &[n]);
    }
    Ok(property_report("masking-constancy", started, tally, |w| {
        format!("a^{} deviates by {worst:e}", w[0])
    }))
}

/// Random single-layer masking-only models: the logit against the reset
/// position and its value vector are bit-identical across equal-length
/// prefixes.
pub fn reset_invariance_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = rng::stream(opts.seed, 33);
    let spec = LanguageId::ResetDyck1.spec()?;
    let alphabet = spec.alphabet().clone();
    let reset = alphabet.index_of('#').expect("reset symbol");
    let sigma = alphabet.len();
    let mut tally = Tally::default();
    for _ in 0..opts.models {
        let model = random_masking_model(1, alphabet.clone(), &mut rng)?;
        let p = rng.gen_range(0..=10);
        let a: Vec<Symbol> = (0..p).map(|_| rng.gen_range(0..sigma)).collect();
        let b: Vec<Symbol> = (0..p).map(|_| rng.gen_range(0..sigma)).collect();
        let suffix: Vec<Symbol> = (0..rng.gen_range(0..=10)).map(|_| rng.gen_range(0..2)).collect();
        let d = check_reset_invariance(&model, reset, &a, &b, &suffix)?;
        let mut word = a;
        word.push(reset);
        word.extend(b);
        tally.record(d.score == 0.0 && d.value == 0.0, &word);
    }
    Ok(property_report("reset-invariance", started, tally, |w| alphabet.decode(w)))
}

/// Every suite, in a fixed order.
pub fn verify_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        instance_suite()?,
        shuffle_suite(1, opts)?,
        shuffle_suite(2, opts)?,
        boolexp_suite("boolexp3", &BOOLEXP3_OPS, opts, 10)?,
        boolexp_suite("boolexp-and", &BOOLEXP_AND_OPS, opts, 11)?,
        rcl_suite(1, opts)?,
        rcl_suite(2, opts)?,
        depth_ratio_suite(opts)?,
        uniform_attention_suite(opts)?,
        masking_constancy_suite(opts)?,
        reset_invariance_suite(opts)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions {
            max_len: Some(5),
            samples: 300,
            random_max_len: 40,
            models: 10,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn all_suites_pass_small() {
        for r in verify_all(&small()).unwrap() {
            assert!(r.passed(), "{r:?}");
            assert!(r.checked() > 0);
        }
    }

    #[test]
    fn exhaustive_counts() {
        let r = shuffle_suite(2, &VerifyOptions { max_len: Some(3), ..small() }).unwrap();
        assert_eq!(r.exhaustive, 1 + 4 + 16 + 64);
    }

    #[test]
    fn corruption_is_caught() {
        let r = shuffle_suite(1, &VerifyOptions { corrupt_shuffle1: true, ..small() }).unwrap();
        assert!(!r.passed());
        assert!(r.counterexample.is_some());
    }
}
