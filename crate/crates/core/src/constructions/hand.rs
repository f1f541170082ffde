//! Transformers with hand-assigned integer weights, evaluated exactly.
//!
//! A forward step computes `q_i = Q x_i`, `k_j = K x_j`, `v_j = V x_j`,
//! attention weights over the causal prefix, `a_i = Σ_j α_ij v_j`
//! (plus `x_i` when the residual connection is on) and the feed-forward
//! output `z_i = ReLU(W a_i + b)`. The acceptor then decides membership
//! from the sequence `z_1 … z_n`.

use std::cmp::Ordering;

use serde::Serialize;

use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::lang::counter::Mask;
use crate::lang::{Alphabet, Symbol};

/// Decision rule over the feed-forward outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Acceptor {
    /// `z_{i,2j+1} = 0` for every step `i` and type `j`, and `z_n = 0`.
    ShuffleDyck { k: usize },
    /// `z_{i,1} = 0` for every step, `z_{i,0} > 0` for every step before
    /// the last (start position included), and `z_n = 0`.
    BoolExp,
    /// Reads the final step only: counter `c` is zero iff coordinates
    /// `2c, 2c+1` both are; the state is the argmax of the trailing block.
    Rcl {
        counters: usize,
        start: usize,
        accept: Vec<(usize, Mask)>,
    },
}

#[derive(Clone, Debug)]
pub struct HandTransformer {
    alphabet: Alphabet,
    d_model: usize,
    embed: Vec<Vec<i64>>,
    start: Option<Vec<i64>>,
    query: Vec<Vec<i64>>,
    key: Vec<Vec<i64>>,
    value: Vec<Vec<i64>>,
    residual: bool,
    ffn_weight: Vec<Vec<i64>>,
    ffn_bias: Vec<i64>,
    acceptor: Acceptor,
}

pub(crate) fn identity(d: usize) -> Vec<Vec<i64>> {
    (0..d)
        .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub(crate) fn zeros(rows: usize, cols: usize) -> Vec<Vec<i64>> {
    vec![vec![0; cols]; rows]
}

fn mat_vec<S: Scalar>(m: &[Vec<i64>], x: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .filter(|(&w, _)| w != 0)
                .fold(S::zero(), |acc, (&w, v)| acc + S::from_int(w) * v.clone())
        })
        .collect()
}

fn to_scalars<S: Scalar>(v: &[i64]) -> Vec<S> {
    v.iter().map(|&x| S::from_int(x)).collect()
}

impl HandTransformer {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        alphabet: Alphabet,
        embed: Vec<Vec<i64>>,
        start: Option<Vec<i64>>,
        query: Vec<Vec<i64>>,
        key: Vec<Vec<i64>>,
        value: Vec<Vec<i64>>,
        residual: bool,
        ffn_weight: Vec<Vec<i64>>,
        ffn_bias: Vec<i64>,
        acceptor: Acceptor,
    ) -> Result<Self> {
        let d = embed.first().map_or(0, Vec::len);
        let square = |m: &[Vec<i64>]| m.len() == d && m.iter().all(|r| r.len() == d);
        if embed.len() != alphabet.len()
            || embed.iter().any(|e| e.len() != d)
            || start.as_ref().is_some_and(|s| s.len() != d)
            || !square(&query)
            || !square(&key)
            || !square(&value)
            || ffn_weight.len() != ffn_bias.len()
            || ffn_weight.iter().any(|r| r.len() != d)
        {
            return Err(Error::Shape("hand-built transformer weights".into()));
        }
        Ok(HandTransformer {
            alphabet,
            d_model: d,
            embed,
            start,
            query,
            key,
            value,
            residual,
            ffn_weight,
            ffn_bias,
            acceptor,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn d_model(&self) -> usize {
        self.d_model
    }

    pub fn embedding(&self, symbol: Symbol) -> &[i64] {
        &self.embed[symbol]
    }

    pub fn start_embedding(&self) -> Option<&[i64]> {
        self.start.as_deref()
    }

    pub fn value_vector(&self, symbol: Symbol) -> Vec<i64> {
        self.value_of(&self.embed[symbol])
    }

    /// `V x` for an arbitrary input vector.
    pub fn value_of(&self, x: &[i64]) -> Vec<i64> {
        self.value
            .iter()
            .map(|row| row.iter().zip(x).map(|(w, x)| w * x).sum())
            .collect()
    }

    pub fn residual(&self) -> bool {
        self.residual
    }

    pub fn acceptor(&self) -> &Acceptor {
        &self.acceptor
    }

    pub fn keys_are_zero(&self) -> bool {
        self.key.iter().flatten().all(|&w| w == 0)
    }

    /// Overwrites one symbol embedding. Used to check that verification
    /// notices a broken construction.
    pub fn set_embedding(&mut self, symbol: Symbol, embedding: Vec<i64>) -> Result<()> {
        self.alphabet.check(&[symbol])?;
        if embedding.len() != self.d_model {
            return Err(Error::Shape("embedding width".into()));
        }
        self.embed[symbol] = embedding;
        Ok(())
    }

    pub fn set_key(&mut self, key: Vec<Vec<i64>>) -> Result<()> {
        if key.len() != self.d_model || key.iter().any(|r| r.len() != self.d_model) {
            return Err(Error::Shape("key matrix".into()));
        }
        self.key = key;
        Ok(())
    }

    fn inputs<S: Scalar>(&self, word: &[Symbol]) -> Vec<Vec<S>> {
        self.start
            .iter()
            .map(|s| to_scalars(s))
            .chain(word.iter().map(|&s| to_scalars(&self.embed[s])))
            .collect()
    }

    fn ffn<S: Scalar>(&self, a: &[S]) -> Vec<S> {
        mat_vec(&self.ffn_weight, a)
            .into_iter()
            .zip(&self.ffn_bias)
            .map(|(v, &b)| {
                let v = v + S::from_int(b);
                if v > S::zero() {
                    v
                } else {
                    S::zero()
                }
            })
            .collect()
    }

    /// Full forward pass with every intermediate kept.
    pub fn run<S: Scalar>(&self, word: &[Symbol]) -> Result<Trace<S>> {
        self.alphabet.check(word)?;
        let x = self.inputs::<S>(word);
        let q: Vec<Vec<S>> = x.iter().map(|x| mat_vec(&self.query, x)).collect();
        let k: Vec<Vec<S>> = x.iter().map(|x| mat_vec(&self.key, x)).collect();
        let v: Vec<Vec<S>> = x.iter().map(|x| mat_vec(&self.value, x)).collect();
        let mut trace = Trace {
            symbols: self
                .start
                .iter()
                .map(|_| None)
                .chain(word.iter().map(|&s| Some(s)))
                .collect(),
            attention: Vec::with_capacity(x.len()),
            attention_output: Vec::with_capacity(x.len()),
            output: Vec::with_capacity(x.len()),
            accepted: false,
        };
        let mut decision = AcceptorState::new(&self.acceptor);
        for i in 0..x.len() {
            let logits: Vec<S> = (0..=i)
                .map(|j| {
                    q[i].iter()
                        .zip(&k[j])
                        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
                })
                .collect();
            let weights = attention_weights(&logits)?;
            let mut a = vec![S::zero(); self.d_model];
            for (w, vj) in weights.iter().zip(&v) {
                for (acc, vv) in a.iter_mut().zip(vj) {
                    *acc = acc.clone() + w.clone() * vv.clone();
                }
            }
            if self.residual {
                for (acc, xx) in a.iter_mut().zip(&x[i]) {
                    *acc = acc.clone() + xx.clone();
                }
            }
            let z = self.ffn(&a);
            decision.push(&z, i + 1);
            trace.attention.push(weights);
            trace.attention_output.push(a);
            trace.output.push(z);
        }
        trace.accepted = decision.decide();
        Ok(trace)
    }

    pub fn accepts<S: Scalar>(&self, word: &[Symbol]) -> Result<bool> {
        Ok(self.run::<S>(word)?.accepted)
    }
}

/// Softmax over one row of logits. Equal logits give exactly uniform
/// weights; anything else needs exponentials, which exact types refuse.
fn attention_weights<S: Scalar>(logits: &[S]) -> Result<Vec<S>> {
    let m = logits.len();
    if logits.iter().all(|l| *l == logits[0]) {
        return Ok(vec![S::one().div_count(m); m]);
    }
    if S::EXACT {
        return Err(Error::InexactAttention);
    }
    let max = logits
        .iter()
        .cloned()
        .fold(logits[0].clone(), |a, b| if b > a { b } else { a });
    let e: Vec<S> = logits.iter().map(|l| (l.clone() - max.clone()).exp()).collect();
    let total = e.iter().cloned().fold(S::zero(), |a, b| a + b);
    Ok(e.into_iter().map(|v| v / total.clone()).collect())
}

/// Incremental evaluation of an acceptor over `z_1, z_2, …`.
#[derive(Clone, Debug)]
pub(crate) struct AcceptorState<'a, S> {
    acceptor: &'a Acceptor,
    ok: bool,
    pub(crate) last: Option<(Vec<S>, usize)>,
}

impl<'a, S: Scalar> AcceptorState<'a, S> {
    pub(crate) fn new(acceptor: &'a Acceptor) -> Self {
        AcceptorState {
            acceptor,
            ok: true,
            last: None,
        }
    }

    /// `m` is the number of positions averaged at this step.
    pub(crate) fn push(&mut self, z: &[S], m: usize) {
        match self.acceptor {
            Acceptor::ShuffleDyck { k } => {
                if (0..*k).any(|j| z[2 * j + 1].sign_at(m) != Ordering::Equal) {
                    self.ok = false;
                }
            }
            Acceptor::BoolExp => {
                if let Some((prev, pm)) = &self.last {
                    if prev[0].sign_at(*pm) != Ordering::Greater {
                        self.ok = false;
                    }
                }
                if z[1].sign_at(m) != Ordering::Equal {
                    self.ok = false;
                }
            }
            Acceptor::Rcl { .. } => {}
        }
        self.last = Some((z.to_vec(), m));
    }

    pub(crate) fn decide(&self) -> bool {
        let all_zero = |z: &[S], m: usize| z.iter().all(|v| v.sign_at(m) == Ordering::Equal);
        match self.acceptor {
            Acceptor::ShuffleDyck { .. } | Acceptor::BoolExp => {
                self.ok && self.last.as_ref().map_or(true, |(z, m)| all_zero(z, *m))
            }
            Acceptor::Rcl {
                counters,
                start,
                accept,
            } => {
                let (state, mask) = match &self.last {
                    None => (*start, 0),
                    Some((z, m)) => {
                        let mask = (0..*counters).fold(0, |mask, c| {
                            if all_zero(&z[2 * c..2 * c + 2], *m) {
                                mask
                            } else {
                                mask | (1 << c)
                            }
                        });
                        let block = &z[2 * counters..];
                        let state = (0..block.len())
                            .max_by(|&a, &b| {
                                block[a].partial_cmp(&block[b]).unwrap_or(Ordering::Equal)
                            })
                            .unwrap_or(*start);
                        (state, mask)
                    }
                };
                accept.contains(&(state, mask))
            }
        }
    }
}

/// Streaming evaluator for zero-key transformers: keeps the running sum of
/// value vectors so a step costs `O(d)`. Cloning it forks a prefix.
#[derive(Clone, Debug)]
pub struct HandRunner<'a, S> {
    ht: &'a HandTransformer,
    embeds: Vec<Vec<S>>,
    values: Vec<Vec<S>>,
    sum: Vec<S>,
    m: usize,
    decision: AcceptorState<'a, S>,
}

impl<'a, S: Scalar> HandRunner<'a, S> {
    pub fn new(ht: &'a HandTransformer) -> Result<Self> {
        if !ht.keys_are_zero() {
            return Err(Error::Precondition(
                "streaming evaluation needs a zero key map".into(),
            ));
        }
        let embeds: Vec<Vec<S>> = ht.embed.iter().map(|e| to_scalars(e)).collect();
        let values = embeds.iter().map(|e| mat_vec(&ht.value, e)).collect();
        let mut runner = HandRunner {
            ht,
            embeds,
            values,
            sum: vec![S::zero(); ht.d_model],
            m: 0,
            decision: AcceptorState::new(&ht.acceptor),
        };
        if let Some(start) = &ht.start {
            let x = to_scalars::<S>(start);
            let v = mat_vec(&ht.value, &x);
            runner.advance(&x, &v);
        }
        Ok(runner)
    }

    fn advance(&mut self, x: &[S], v: &[S]) {
        for (s, vv) in self.sum.iter_mut().zip(v) {
            *s = s.clone() + vv.clone();
        }
        self.m += 1;
        let mut a: Vec<S> = self.sum.iter().map(|s| s.div_count(self.m)).collect();
        if self.ht.residual {
            for (acc, xx) in a.iter_mut().zip(x) {
                *acc = acc.clone() + xx.clone();
            }
        }
        let z = self.ht.ffn(&a);
        self.decision.push(&z, self.m);
    }

    pub fn step(&mut self, symbol: Symbol) -> Result<()> {
        self.ht.alphabet.check(&[symbol])?;
        let x = self.embeds[symbol].clone();
        let v = self.values[symbol].clone();
        self.advance(&x, &v);
        Ok(())
    }

    pub fn accepted(&self) -> bool {
        self.decision.decide()
    }

    /// Feed-forward output of the latest position and the number of
    /// positions it averaged over.
    pub fn output(&self) -> Option<(&[S], usize)> {
        self.decision.last.as_ref().map(|(z, m)| (&z[..], *m))
    }
}

/// Every intermediate of one forward pass. Position 0 is the start symbol
/// when the construction prepends one.
#[derive(Clone, Debug)]
pub struct Trace<S> {
    pub symbols: Vec<Option<Symbol>>,
    pub attention: Vec<Vec<S>>,
    pub attention_output: Vec<Vec<S>>,
    pub output: Vec<Vec<S>>,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    /// `null` for the start symbol.
    pub symbol: Option<char>,
    pub attention: Vec<f64>,
    pub a: Vec<f64>,
    pub z: Vec<f64>,
    pub a_exact: Vec<String>,
    pub z_exact: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceExport {
    pub word: String,
    pub accepted: bool,
    pub steps: Vec<TraceStep>,
}

impl<S: Scalar> Trace<S> {
    pub fn export(&self, alphabet: &Alphabet) -> TraceExport {
        let f = |v: &[S]| v.iter().map(Scalar::to_f64).collect::<Vec<_>>();
        let r = |v: &[S]| v.iter().map(Scalar::render).collect::<Vec<_>>();
        TraceExport {
            word: self
                .symbols
                .iter()
                .flatten()
                .filter_map(|&s| alphabet.char_of(s))
                .collect(),
            accepted: self.accepted,
            steps: (0..self.symbols.len())
                .map(|i| TraceStep {
                    symbol: self.symbols[i].and_then(|s| alphabet.char_of(s)),
                    attention: f(&self.attention[i]),
                    a: f(&self.attention_output[i]),
                    z: f(&self.output[i]),
                    a_exact: r(&self.attention_output[i]),
                    z_exact: r(&self.output[i]),
                })
                .collect(),
        }
    }
}
