//! Causal transformer encoder with a sigmoid next-character head and
//! hand-written reverse-mode gradients.
//!
//! Each layer is post-norm: `h = LN(x + MHA(x))`, `y = LN(h + FFN(h))`, with
//! the residual additions and the layer norms individually switchable.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::positional::{positional_signal, PositionalScheme};
use super::tensor::{affine, affine_backward, axpy, dot, sigmoid, Mat, ParamSet};
use crate::error::{Error, Result};
use crate::lang::{Alphabet, Symbol};

pub const LAYER_NORM_EPS: f64 = 1e-5;

fn yes() -> bool {
    true
}

fn default_max_len() -> usize {
    1024
}

fn default_max_relative() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerConfig {
    pub d_model: usize,
    pub heads: usize,
    pub layers: usize,
    /// FFN hidden width; `4 · d_model` when absent.
    #[serde(default)]
    pub ffn: Option<usize>,
    pub positional: PositionalScheme,
    #[serde(default = "yes")]
    pub residual: bool,
    #[serde(default = "yes")]
    pub layer_norm: bool,
    /// Size of the trainable position table.
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    /// Offsets beyond this share one relative bias.
    #[serde(default = "default_max_relative")]
    pub max_relative: usize,
}

impl TransformerConfig {
    pub fn new(d_model: usize, heads: usize, layers: usize, positional: PositionalScheme) -> Self {
        TransformerConfig {
            d_model,
            heads,
            layers,
            ffn: None,
            positional,
            residual: true,
            layer_norm: true,
            max_len: default_max_len(),
            max_relative: default_max_relative(),
        }
    }

    pub fn ffn_width(&self) -> usize {
        self.ffn.unwrap_or(4 * self.d_model)
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.heads == 0 || self.layers == 0 || self.ffn_width() == 0 {
            return Err(Error::InvalidConfig("transformer sizes must be positive".into()));
        }
        if self.d_model % self.heads != 0 {
            return Err(Error::InvalidConfig(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.heads
            )));
        }
        if self.positional == PositionalScheme::Learned && self.max_len == 0 {
            return Err(Error::InvalidConfig("learned positions need max_len >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct LayerHandles {
    wq: usize,
    bq: usize,
    wk: usize,
    bk: usize,
    wv: usize,
    bv: usize,
    wo: usize,
    bo: usize,
    rel: Option<usize>,
    ln1: Option<(usize, usize)>,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    ln2: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct Handles {
    embed: usize,
    pos: Option<usize>,
    layers: Vec<LayerHandles>,
    wout: usize,
    bout: usize,
}

#[derive(Clone, Debug)]
pub struct Transformer {
    config: TransformerConfig,
    alphabet: Alphabet,
    params: ParamSet,
    h: Handles,
}

struct LnCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
}

struct LayerCache {
    x: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// `heads × n × n`, row `i` filled for `j <= i`.
    attn: Vec<f64>,
    a: Vec<f64>,
    o: Vec<f64>,
    ln1: Option<LnCache>,
    h1: Vec<f64>,
    pre1: Vec<f64>,
    f1: Vec<f64>,
    ln2: Option<LnCache>,
    y: Vec<f64>,
}

struct Cache {
    n: usize,
    layers: Vec<LayerCache>,
    probs: Vec<f64>,
}

/// Intermediate values of one layer, exposed for analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerTrace {
    /// Layer input, `n × d`.
    pub input: Mat,
    pub query: Mat,
    pub key: Mat,
    pub value: Mat,
    /// Raw attention logits per head, `n × n` (entries `j > i` are 0).
    pub scores: Vec<Mat>,
    /// Attention weights per head, `n × n` (entries `j > i` are 0).
    pub attention: Vec<Mat>,
    /// Self-attention block output after the output projection, before
    /// any residual addition.
    pub attention_output: Mat,
    pub output: Mat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForwardTrace {
    pub layers: Vec<LayerTrace>,
    /// Sigmoid outputs, `n × (|Σ| + 1)`.
    pub probabilities: Mat,
}

fn layer_norm_forward(x: &[f64], n: usize, d: usize, g: &Mat, b: &Mat) -> (Vec<f64>, LnCache) {
    let mut out = vec![0.0; n * d];
    let mut xhat = vec![0.0; n * d];
    let mut inv_std = vec![0.0; n];
    for t in 0..n {
        let row = &x[t * d..(t + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        inv_std[t] = inv;
        for c in 0..d {
            let xh = (row[c] - mean) * inv;
            xhat[t * d + c] = xh;
            out[t * d + c] = g.data[c] * xh + b.data[c];
        }
    }
    (out, LnCache { xhat, inv_std })
}

fn layer_norm_backward(
    dout: &[f64],
    n: usize,
    d: usize,
    g: &Mat,
    cache: &LnCache,
    dg: &mut Mat,
    db: &mut Mat,
) -> Vec<f64> {
    let mut dx = vec![0.0; n * d];
    let mut dxhat = vec![0.0; d];
    for t in 0..n {
        let xh = &cache.xhat[t * d..(t + 1) * d];
        let dy = &dout[t * d..(t + 1) * d];
        for c in 0..d {
            dg.data[c] += dy[c] * xh[c];
            db.data[c] += dy[c];
            dxhat[c] = dy[c] * g.data[c];
        }
        let mean_d = dxhat.iter().sum::<f64>() / d as f64;
        let mean_dx = dxhat.iter().zip(xh).map(|(a, b)| a * b).sum::<f64>() / d as f64;
        let inv = cache.inv_std[t];
        for c in 0..d {
            dx[t * d + c] = inv * (dxhat[c] - mean_d - xh[c] * mean_dx);
        }
    }
    dx
}

impl Transformer {
    pub fn new<R: Rng + ?Sized>(config: TransformerConfig, alphabet: Alphabet, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if alphabet.is_empty() {
            return Err(Error::InvalidConfig("empty vocabulary".into()));
        }
        let d = config.d_model;
        let f = config.ffn_width();
        let vocab = alphabet.len();
        let out = vocab + 1;
        let mut p = ParamSet::new();
        let bd = 1.0 / (d as f64).sqrt();
        let bf = 1.0 / (f as f64).sqrt();

        let embed = p.add("embed", Mat::uniform(vocab, d, bd, rng));
        let pos = (config.positional == PositionalScheme::Learned)
            .then(|| p.add("pos_table", Mat::uniform(config.max_len, d, bd, rng)));
        let mut layers = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let mut lin = |name: &str, rows: usize, cols: usize, bound: f64, p: &mut ParamSet| {
                let w = p.add(format!("layer{l}.{name}.weight"), Mat::uniform(rows, cols, bound, rng));
                let b = p.add(format!("layer{l}.{name}.bias"), Mat::uniform(1, rows, bound, rng));
                (w, b)
            };
            let (wq, bq) = lin("query", d, d, bd, &mut p);
            let (wk, bk) = lin("key", d, d, bd, &mut p);
            let (wv, bv) = lin("value", d, d, bd, &mut p);
            let (wo, bo) = lin("attn_out", d, d, bd, &mut p);
            let (w1, b1) = lin("ffn_in", f, d, bd, &mut p);
            let (w2, b2) = lin("ffn_out", d, f, bf, &mut p);
            let rel = (config.positional == PositionalScheme::Relative).then(|| {
                p.add(
                    format!("layer{l}.relative_bias"),
                    Mat::zeros(config.heads, config.max_relative + 1),
                )
            });
            let norm = |name: &str, p: &mut ParamSet| {
                let g = p.add(format!("layer{l}.{name}.gain"), Mat::from_vec(1, d, vec![1.0; d]));
                let b = p.add(format!("layer{l}.{name}.bias"), Mat::zeros(1, d));
                (g, b)
            };
            let ln1 = config.layer_norm.then(|| norm("norm1", &mut p));
            let ln2 = config.layer_norm.then(|| norm("norm2", &mut p));
            layers.push(LayerHandles {
                wq,
                bq,
                wk,
                bk,
                wv,
                bv,
                wo,
                bo,
                rel,
                ln1,
                w1,
                b1,
                w2,
                b2,
                ln2,
            });
        }
        let wout = p.add("output.weight", Mat::uniform(out, d, bd, rng));
        let bout = p.add("output.bias", Mat::uniform(1, out, bd, rng));
        Ok(Transformer {
            config,
            alphabet,
            params: p,
            h: Handles {
                embed,
                pos,
                layers,
                wout,
                bout,
            },
        })
    }

    /// Rebuilds a model from stored parameters, checking names and shapes.
    pub fn from_params(config: TransformerConfig, alphabet: Alphabet, params: ParamSet) -> Result<Self> {
        let mut rng = crate::rng::stream(0, 0);
        let mut model = Transformer::new(config, alphabet, &mut rng)?;
        model.params.check_layout(&params)?;
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &TransformerConfig {
        &self.config
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn output_width(&self) -> usize {
        self.alphabet.len() + 1
    }

    fn p(&self, i: usize) -> &Mat {
        self.params.get(i)
    }

    fn check_input(&self, word: &[Symbol]) -> Result<()> {
        self.alphabet.check(word)?;
        if self.config.positional == PositionalScheme::Learned && word.len() > self.config.max_len {
            return Err(Error::SequenceTooLong {
                len: word.len(),
                max_len: self.config.max_len,
            });
        }
        Ok(())
    }

    fn embed(&self, word: &[Symbol]) -> Vec<f64> {
        let d = self.config.d_model;
        let mut x = Vec::with_capacity(word.len() * d);
        let table = self.p(self.h.embed);
        for (t, &s) in word.iter().enumerate() {
            let start = x.len();
            x.extend_from_slice(table.row(s));
            let row = &mut x[start..];
            match self.config.positional {
                PositionalScheme::Learned => {
                    let pos = self.p(self.h.pos.expect("learned table")).row(t);
                    axpy(1.0, pos, row);
                }
                scheme if scheme.is_additive() => {
                    axpy(1.0, &positional_signal(scheme, t + 1, d), row);
                }
                _ => {}
            }
        }
        x
    }

    /// Sign of every feed-forward pre-activation on `word`, layer by layer.
    pub fn relu_pattern(&self, word: &[Symbol]) -> Result<Vec<bool>> {
        let cache = self.forward_cache(word)?;
        Ok(cache.layers.iter().flat_map(|l| l.pre1.iter().map(|&z| z > 0.0)).collect())
    }

    fn forward_cache(&self, word: &[Symbol]) -> Result<Cache> {
        self.check_input(word)?;
        let n = word.len();
        let d = self.config.d_model;
        let mut x = self.embed(word);
        let mut layers = Vec::with_capacity(self.config.layers);
        for lh in &self.h.layers {
            let cache = self.layer_forward(lh, x, n);
            x = cache.y.clone();
            layers.push(cache);
        }
        let logits = affine(&x, n, self.p(self.h.wout), self.p(self.h.bout));
        let probs = logits.into_iter().map(sigmoid).collect();
        debug_assert_eq!(x.len(), n * d);
        Ok(Cache { n, layers, probs })
    }

    fn layer_forward(&self, lh: &LayerHandles, x: Vec<f64>, n: usize) -> LayerCache {
        let d = self.config.d_model;
        let heads = self.config.heads;
        let dh = self.config.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let q = affine(&x, n, self.p(lh.wq), self.p(lh.bq));
        let k = affine(&x, n, self.p(lh.wk), self.p(lh.bk));
        let v = affine(&x, n, self.p(lh.wv), self.p(lh.bv));
        let rel = lh.rel.map(|i| self.p(i));
        let max_rel = self.config.max_relative;

        let mut attn = vec![0.0; heads * n * n];
        let mut a = vec![0.0; n * d];
        for h in 0..heads {
            let hs = h * dh..(h + 1) * dh;
            for i in 0..n {
                let row = &mut attn[(h * n + i) * n..(h * n + i + 1) * n];
                let qi = &q[i * d..(i + 1) * d][hs.clone()];
                let mut max = f64::NEG_INFINITY;
                for j in 0..=i {
                    let mut s = dot(qi, &k[j * d..(j + 1) * d][hs.clone()]) * scale;
                    if let Some(rel) = rel {
                        s += rel.data[h * (max_rel + 1) + (i - j).min(max_rel)];
                    }
                    row[j] = s;
                    max = max.max(s);
                }
                let mut total = 0.0;
                for r in row[..=i].iter_mut() {
                    *r = (*r - max).exp();
                    total += *r;
                }
                let ai = &mut a[i * d..(i + 1) * d];
                for j in 0..=i {
                    row[j] /= total;
                    axpy(row[j], &v[j * d..(j + 1) * d][hs.clone()], &mut ai[hs.clone()]);
                }
            }
        }
        let o = affine(&a, n, self.p(lh.wo), self.p(lh.bo));
        let mut r1 = o.clone();
        if self.config.residual {
            axpy(1.0, &x, &mut r1);
        }
        let (h1, ln1) = match lh.ln1 {
            Some((g, b)) => {
                let (out, c) = layer_norm_forward(&r1, n, d, self.p(g), self.p(b));
                (out, Some(c))
            }
            None => (r1, None),
        };
        let pre1 = affine(&h1, n, self.p(lh.w1), self.p(lh.b1));
        let f1: Vec<f64> = pre1.iter().map(|&z| z.max(0.0)).collect();
        let mut r2 = affine(&f1, n, self.p(lh.w2), self.p(lh.b2));
        if self.config.residual {
            axpy(1.0, &h1, &mut r2);
        }
        let (y, ln2) = match lh.ln2 {
            Some((g, b)) => {
                let (out, c) = layer_norm_forward(&r2, n, d, self.p(g), self.p(b));
                (out, Some(c))
            }
            None => (r2, None),
        };
        LayerCache {
            x,
            q,
            k,
            v,
            attn,
            a,
            o,
            ln1,
            h1,
            pre1,
            f1,
            ln2,
            y,
        }
    }

    /// Per-step probability rows over `Σ ∪ {EOS}`.
    pub fn forward(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        let cache = self.forward_cache(word)?;
        Ok(cache
            .probs
            .chunks(self.output_width())
            .map(<[f64]>::to_vec)
            .collect())
    }

    pub fn trace(&self, word: &[Symbol]) -> Result<ForwardTrace> {
        let cache = self.forward_cache(word)?;
        let n = cache.n;
        let d = self.config.d_model;
        let heads = self.config.heads;
        let dh = self.config.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let max_rel = self.config.max_relative;
        let layers = cache
            .layers
            .iter()
            .zip(&self.h.layers)
            .map(|(c, lh)| {
                let rel = lh.rel.map(|i| self.p(i));
                let scores = (0..heads)
                    .map(|h| {
                        let hs = h * dh..(h + 1) * dh;
                        let mut m = Mat::zeros(n, n);
                        for i in 0..n {
                            for j in 0..=i {
                                let mut s = dot(
                                    &c.q[i * d..(i + 1) * d][hs.clone()],
                                    &c.k[j * d..(j + 1) * d][hs.clone()],
                                ) * scale;
                                if let Some(rel) = rel {
                                    s += rel.data[h * (max_rel + 1) + (i - j).min(max_rel)];
                                }
                                m.data[i * n + j] = s;
                            }
                        }
                        m
                    })
                    .collect();
                let attention = (0..heads)
                    .map(|h| Mat::from_vec(n, n, c.attn[h * n * n..(h + 1) * n * n].to_vec()))
                    .collect();
                LayerTrace {
                    input: Mat::from_vec(n, d, c.x.clone()),
                    query: Mat::from_vec(n, d, c.q.clone()),
                    key: Mat::from_vec(n, d, c.k.clone()),
                    value: Mat::from_vec(n, d, c.v.clone()),
                    scores,
                    attention,
                    attention_output: Mat::from_vec(n, d, c.o.clone()),
                    output: Mat::from_vec(n, d, c.y.clone()),
                }
            })
            .collect();
        Ok(ForwardTrace {
            layers,
            probabilities: Mat::from_vec(n, self.output_width(), cache.probs),
        })
    }

    /// Mean squared error over every step and coordinate of the batch;
    /// gradients are accumulated into `grads`.
    pub fn loss_and_grad(&self, batch: &[(&[Symbol], &[Vec<u8>])], grads: &mut ParamSet) -> Result<f64> {
        let width = self.output_width();
        let total: usize = batch.iter().map(|(w, _)| w.len() * width).sum();
        if total == 0 {
            return Ok(0.0);
        }
        let mut loss = 0.0;
        for (word, targets) in batch {
            if targets.len() != word.len() || targets.iter().any(|r| r.len() != width) {
                return Err(Error::Shape(format!(
                    "targets for a word of length {} must be {}x{}",
                    word.len(),
                    word.len(),
                    width
                )));
            }
            let cache = self.forward_cache(word)?;
            let mut dprobs = vec![0.0; cache.probs.len()];
            for (idx, (&p, dp)) in cache.probs.iter().zip(dprobs.iter_mut()).enumerate() {
                let y = targets[idx / width][idx % width] as f64;
                loss += (p - y) * (p - y);
                *dp = 2.0 * (p - y) / total as f64;
            }
            self.backward(word, &cache, &dprobs, grads);
        }
        Ok(loss / total as f64)
    }

    fn backward(&self, word: &[Symbol], cache: &Cache, dprobs: &[f64], grads: &mut ParamSet) {
        let n = cache.n;
        let d = self.config.d_model;
        let dlogits: Vec<f64> = dprobs
            .iter()
            .zip(&cache.probs)
            .map(|(dp, p)| dp * p * (1.0 - p))
            .collect();
        let last = &cache.layers.last().expect("at least one layer").y;
        let mut dx = vec![0.0; n * d];
        {
            let (dw, db) = two_mut(grads, self.h.wout, self.h.bout);
            affine_backward(last, &dlogits, n, self.p(self.h.wout), dw, db, Some(&mut dx));
        }
        for (lh, lc) in self.h.layers.iter().zip(&cache.layers).rev() {
            dx = self.layer_backward(lh, lc, n, dx, grads);
        }
        let dembed = grads.get_mut(self.h.embed);
        for (t, &s) in word.iter().enumerate() {
            axpy(1.0, &dx[t * d..(t + 1) * d], dembed.row_mut(s));
        }
        if let Some(pos) = self.h.pos {
            let dpos = grads.get_mut(pos);
            for t in 0..n {
                axpy(1.0, &dx[t * d..(t + 1) * d], dpos.row_mut(t));
            }
        }
    }

    fn layer_backward(
        &self,
        lh: &LayerHandles,
        c: &LayerCache,
        n: usize,
        dy: Vec<f64>,
        grads: &mut ParamSet,
    ) -> Vec<f64> {
        let d = self.config.d_model;
        let f = self.config.ffn_width();
        let heads = self.config.heads;
        let dh = self.config.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let max_rel = self.config.max_relative;

        let dr2 = match (lh.ln2, &c.ln2) {
            (Some((g, b)), Some(lc)) => {
                let (dg, db) = two_mut(grads, g, b);
                layer_norm_backward(&dy, n, d, self.p(g), lc, dg, db)
            }
            _ => dy,
        };
        let mut dh1 = if self.config.residual {
            dr2.clone()
        } else {
            vec![0.0; n * d]
        };
        let mut df1 = vec![0.0; n * f];
        {
            let (dw, db) = two_mut(grads, lh.w2, lh.b2);
            affine_backward(&c.f1, &dr2, n, self.p(lh.w2), dw, db, Some(&mut df1));
        }
        for (g, &z) in df1.iter_mut().zip(&c.pre1) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
        {
            let (dw, db) = two_mut(grads, lh.w1, lh.b1);
            affine_backward(&c.h1, &df1, n, self.p(lh.w1), dw, db, Some(&mut dh1));
        }
        let dr1 = match (lh.ln1, &c.ln1) {
            (Some((g, b)), Some(lc)) => {
                let (dg, db) = two_mut(grads, g, b);
                layer_norm_backward(&dh1, n, d, self.p(g), lc, dg, db)
            }
            _ => dh1,
        };
        let mut dx = if self.config.residual {
            dr1.clone()
        } else {
            vec![0.0; n * d]
        };
        let mut da = vec![0.0; n * d];
        {
            let (dw, db) = two_mut(grads, lh.wo, lh.bo);
            affine_backward(&c.a, &dr1, n, self.p(lh.wo), dw, db, Some(&mut da));
        }

        let mut dq = vec![0.0; n * d];
        let mut dk = vec![0.0; n * d];
        let mut dv = vec![0.0; n * d];
        let mut dalpha = vec![0.0; n];
        for h in 0..heads {
            let hs = h * dh..(h + 1) * dh;
            for i in 0..n {
                let row = &c.attn[(h * n + i) * n..(h * n + i + 1) * n];
                let dai = &da[i * d..(i + 1) * d][hs.clone()];
                let mut weighted = 0.0;
                for j in 0..=i {
                    dalpha[j] = dot(dai, &c.v[j * d..(j + 1) * d][hs.clone()]);
                    weighted += row[j] * dalpha[j];
                    axpy(row[j], dai, &mut dv[j * d..(j + 1) * d][hs.clone()]);
                }
                for j in 0..=i {
                    let ds = row[j] * (dalpha[j] - weighted);
                    if ds == 0.0 {
                        continue;
                    }
                    if let Some(rel) = lh.rel {
                        grads.get_mut(rel).data[h * (max_rel + 1) + (i - j).min(max_rel)] += ds;
                    }
                    let kj = &c.k[j * d..(j + 1) * d][hs.clone()];
                    axpy(ds * scale, kj, &mut dq[i * d..(i + 1) * d][hs.clone()]);
                    let qi = &c.q[i * d..(i + 1) * d][hs.clone()];
                    axpy(ds * scale, qi, &mut dk[j * d..(j + 1) * d][hs.clone()]);
                }
            }
        }
        for (dproj, w, b) in [(&dq, lh.wq, lh.bq), (&dk, lh.wk, lh.bk), (&dv, lh.wv, lh.bv)] {
            let (dw, db) = two_mut(grads, w, b);
            affine_backward(&c.x, dproj, n, self.p(w), dw, db, Some(&mut dx));
        }
        dx
    }
}

/// Mutable borrows of two distinct tensors.
pub(crate) fn two_mut(p: &mut ParamSet, a: usize, b: usize) -> (&mut Mat, &mut Mat) {
    assert_ne!(a, b);
    let tensors = p.tensors_mut();
    if a < b {
        let (lo, hi) = tensors.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = tensors.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn model(scheme: PositionalScheme, layers: usize, seed: u64) -> Transformer {
        let mut r = rng::stream(seed, 0);
        Transformer::new(
            TransformerConfig::new(8, 2, layers, scheme),
            Alphabet::new(['a', 'b', 'c']),
            &mut r,
        )
        .unwrap()
    }

    #[test]
    fn causal_for_every_scheme() {
        for scheme in PositionalScheme::ALL {
            let m = model(scheme, 2, 1);
            let a = m.forward(&[0, 1, 2, 0, 1]).unwrap();
            let b = m.forward(&[0, 1, 2, 2, 2]).unwrap();
            assert_eq!(a[..3], b[..3], "{scheme}");
            assert_ne!(a[3], b[3], "{scheme}");
        }
    }

    #[test]
    fn masking_only_constant_on_unary_input() {
        let m = model(PositionalScheme::Masking, 3, 2);
        let rows = m.forward(&[1; 12]).unwrap();
        for r in &rows {
            for (x, y) in r.iter().zip(&rows[0]) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_output_layer_gives_half() {
        let mut m = model(PositionalScheme::Absolute, 1, 3);
        let (w, b) = (m.h.wout, m.h.bout);
        m.params_mut().get_mut(w).fill(0.0);
        m.params_mut().get_mut(b).fill(0.0);
        for row in m.forward(&[0, 2, 1]).unwrap() {
            assert!(row.iter().all(|&p| p == 0.5));
        }
    }

    #[test]
    fn divisibility_checked() {
        let mut r = rng::stream(0, 0);
        let cfg = TransformerConfig::new(6, 4, 1, PositionalScheme::Masking);
        assert!(Transformer::new(cfg, Alphabet::new(['a']), &mut r).is_err());
    }

    #[test]
    fn learned_table_bounds_length() {
        let mut r = rng::stream(0, 0);
        let mut cfg = TransformerConfig::new(4, 1, 1, PositionalScheme::Learned);
        cfg.max_len = 4;
        let m = Transformer::new(cfg, Alphabet::new(['a']), &mut r).unwrap();
        assert!(m.forward(&[0; 4]).is_ok());
        assert!(matches!(
            m.forward(&[0; 5]),
            Err(Error::SequenceTooLong { len: 5, max_len: 4 })
        ));
    }

    #[test]
    fn trace_rows_sum_to_one() {
        let m = model(PositionalScheme::Relative, 2, 4);
        let t = m.trace(&[0, 1, 1, 2]).unwrap();
        for layer in &t.layers {
            for head in &layer.attention {
                for i in 0..4 {
                    let s: f64 = head.row(i).iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
