//! Stacked LSTM baseline with the same sigmoid next-character head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{affine, affine_backward, axpy, sigmoid, Mat, ParamSet};
use super::transformer::two_mut;
use crate::error::{Error, Result};
use crate::lang::{Alphabet, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LstmConfig {
    pub hidden: usize,
    pub layers: usize,
}

impl LstmConfig {
    pub fn new(hidden: usize, layers: usize) -> Self {
        LstmConfig { hidden, layers }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.layers == 0 {
            return Err(Error::InvalidConfig("LSTM sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct LayerHandles {
    wx: usize,
    wh: usize,
    b: usize,
}

/// Gate order in the stacked weight matrices: input, forget, cell, output.
#[derive(Clone, Debug)]
pub struct Lstm {
    config: LstmConfig,
    alphabet: Alphabet,
    params: ParamSet,
    layers: Vec<LayerHandles>,
    wout: usize,
    bout: usize,
}

struct LayerCache {
    input: Vec<f64>,
    in_dim: usize,
    /// Activated gates per step, `n × 4h` in i, f, g, o order.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

struct Cache {
    n: usize,
    layers: Vec<LayerCache>,
    probs: Vec<f64>,
}

impl Lstm {
    pub fn new<R: Rng + ?Sized>(config: LstmConfig, alphabet: Alphabet, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if alphabet.is_empty() {
            return Err(Error::InvalidConfig("empty vocabulary".into()));
        }
        let h = config.hidden;
        let bound = 1.0 / (h as f64).sqrt();
        let mut p = ParamSet::new();
        let mut layers = Vec::new();
        for l in 0..config.layers {
            let in_dim = if l == 0 { alphabet.len() } else { h };
            layers.push(LayerHandles {
                wx: p.add(format!("lstm{l}.input_weight"), Mat::uniform(4 * h, in_dim, bound, rng)),
                wh: p.add(format!("lstm{l}.hidden_weight"), Mat::uniform(4 * h, h, bound, rng)),
                b: p.add(format!("lstm{l}.bias"), Mat::uniform(1, 4 * h, bound, rng)),
            });
        }
        let out = alphabet.len() + 1;
        let wout = p.add("output.weight", Mat::uniform(out, h, bound, rng));
        let bout = p.add("output.bias", Mat::uniform(1, out, bound, rng));
        Ok(Lstm {
            config,
            alphabet,
            params: p,
            layers,
            wout,
            bout,
        })
    }

    pub fn from_params(config: LstmConfig, alphabet: Alphabet, params: ParamSet) -> Result<Self> {
        let mut rng = crate::rng::stream(0, 0);
        let mut model = Lstm::new(config, alphabet, &mut rng)?;
        model.params.check_layout(&params)?;
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &LstmConfig {
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

    fn forward_cache(&self, word: &[Symbol]) -> Result<Cache> {
        self.alphabet.check(word)?;
        let n = word.len();
        let hd = self.config.hidden;
        let sigma = self.alphabet.len();
        let mut input = vec![0.0; n * sigma];
        for (t, &s) in word.iter().enumerate() {
            input[t * sigma + s] = 1.0;
        }
        let mut in_dim = sigma;
        let mut layers = Vec::with_capacity(self.layers.len());
        for lh in &self.layers {
            let wx = self.params.get(lh.wx);
            let wh = self.params.get(lh.wh);
            let zx = affine(&input, n, wx, self.params.get(lh.b));
            let mut gates = vec![0.0; n * 4 * hd];
            let mut c = vec![0.0; n * hd];
            let mut tanh_c = vec![0.0; n * hd];
            let mut h = vec![0.0; n * hd];
            let mut h_prev = vec![0.0; hd];
            let mut c_prev = vec![0.0; hd];
            for t in 0..n {
                let z = &mut gates[t * 4 * hd..(t + 1) * 4 * hd];
                z.copy_from_slice(&zx[t * 4 * hd..(t + 1) * 4 * hd]);
                for (r, zr) in z.iter_mut().enumerate() {
                    *zr += super::tensor::dot(wh.row(r), &h_prev);
                }
                for u in 0..hd {
                    z[u] = sigmoid(z[u]);
                    z[hd + u] = sigmoid(z[hd + u]);
                    z[2 * hd + u] = z[2 * hd + u].tanh();
                    z[3 * hd + u] = sigmoid(z[3 * hd + u]);
                    let ct = z[hd + u] * c_prev[u] + z[u] * z[2 * hd + u];
                    let tc = ct.tanh();
                    c[t * hd + u] = ct;
                    tanh_c[t * hd + u] = tc;
                    h[t * hd + u] = z[3 * hd + u] * tc;
                }
                h_prev.copy_from_slice(&h[t * hd..(t + 1) * hd]);
                c_prev.copy_from_slice(&c[t * hd..(t + 1) * hd]);
            }
            let next_input = h.clone();
            layers.push(LayerCache {
                input,
                in_dim,
                gates,
                c,
                tanh_c,
                h,
            });
            input = next_input;
            in_dim = hd;
        }
        let logits = affine(&input, n, self.params.get(self.wout), self.params.get(self.bout));
        let probs = logits.into_iter().map(sigmoid).collect();
        Ok(Cache { n, layers, probs })
    }

    pub fn forward(&self, word: &[Symbol]) -> Result<Vec<Vec<f64>>> {
        let cache = self.forward_cache(word)?;
        Ok(cache
            .probs
            .chunks(self.output_width())
            .map(<[f64]>::to_vec)
            .collect())
    }

    /// Hidden states of the top layer, `n × hidden`.
    pub fn hidden_states(&self, word: &[Symbol]) -> Result<Mat> {
        let cache = self.forward_cache(word)?;
        let top = cache.layers.last().expect("at least one layer");
        Ok(Mat::from_vec(cache.n, self.config.hidden, top.h.clone()))
    }

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
            let mut dlogits = vec![0.0; cache.probs.len()];
            for (idx, (&p, dl)) in cache.probs.iter().zip(dlogits.iter_mut()).enumerate() {
                let y = targets[idx / width][idx % width] as f64;
                loss += (p - y) * (p - y);
                *dl = 2.0 * (p - y) / total as f64 * p * (1.0 - p);
            }
            self.backward(&cache, &dlogits, grads);
        }
        Ok(loss / total as f64)
    }

    fn backward(&self, cache: &Cache, dlogits: &[f64], grads: &mut ParamSet) {
        let n = cache.n;
        let hd = self.config.hidden;
        let top = cache.layers.last().expect("at least one layer");
        let mut dh_above = vec![0.0; n * hd];
        {
            let (dw, db) = two_mut(grads, self.wout, self.bout);
            affine_backward(&top.h, dlogits, n, self.params.get(self.wout), dw, db, Some(&mut dh_above));
        }
        for (li, (lh, lc)) in self.layers.iter().zip(&cache.layers).enumerate().rev() {
            let wx = self.params.get(lh.wx);
            let wh = self.params.get(lh.wh);
            let mut dz_all = vec![0.0; n * 4 * hd];
            let mut dh_next = vec![0.0; hd];
            let mut dc_next = vec![0.0; hd];
            for t in (0..n).rev() {
                let g = &lc.gates[t * 4 * hd..(t + 1) * 4 * hd];
                let dz = &mut dz_all[t * 4 * hd..(t + 1) * 4 * hd];
                for u in 0..hd {
                    let (i, f, gg, o) = (g[u], g[hd + u], g[2 * hd + u], g[3 * hd + u]);
                    let tc = lc.tanh_c[t * hd + u];
                    let c_prev = if t > 0 { lc.c[(t - 1) * hd + u] } else { 0.0 };
                    let dh = dh_above[t * hd + u] + dh_next[u];
                    let d_o = dh * tc;
                    let dc = dh * o * (1.0 - tc * tc) + dc_next[u];
                    dz[u] = dc * gg * i * (1.0 - i);
                    dz[hd + u] = dc * c_prev * f * (1.0 - f);
                    dz[2 * hd + u] = dc * i * (1.0 - gg * gg);
                    dz[3 * hd + u] = d_o * o * (1.0 - o);
                    dc_next[u] = dc * f;
                }
                dh_next.iter_mut().for_each(|x| *x = 0.0);
                for (r, &dzr) in dz.iter().enumerate() {
                    if dzr != 0.0 {
                        axpy(dzr, wh.row(r), &mut dh_next);
                    }
                }
            }
            // Recurrent weights see h_{t-1}; shift the hidden sequence by one.
            let mut h_prev = vec![0.0; n * hd];
            if n > 1 {
                h_prev[hd..].copy_from_slice(&lc.h[..(n - 1) * hd]);
            }
            {
                let dwh = grads.get_mut(lh.wh);
                for t in 0..n {
                    let dz = &dz_all[t * 4 * hd..(t + 1) * 4 * hd];
                    let hp = &h_prev[t * hd..(t + 1) * hd];
                    for (r, &dzr) in dz.iter().enumerate() {
                        if dzr != 0.0 {
                            axpy(dzr, hp, dwh.row_mut(r));
                        }
                    }
                }
            }
            let mut dinput = vec![0.0; n * lc.in_dim];
            let (dwx, db) = two_mut(grads, lh.wx, lh.b);
            let want_dx = li > 0;
            affine_backward(
                &lc.input,
                &dz_all,
                n,
                wx,
                dwx,
                db,
                want_dx.then_some(&mut dinput[..]),
            );
            dh_above = dinput;
        }
    }
}
