//! Analysis exports of a trained model: attention-block outputs against
//! counter/length ratios, attention maps, per-symbol value vectors and
//! positional signals. Everything is written as CSV plus `manifest.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::write_json;
use crate::error::{Error, Result};
use crate::lang::{LanguageSpec, Symbol};
use crate::neural::{positional_signal, Model, PositionalScheme, Transformer};

/// Sample Pearson correlation; `None` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    /// Counter index whose `count / length` ratio is compared.
    pub ratio: usize,
    pub layer: usize,
    pub coordinate: usize,
    pub r: f64,
}

/// One row per position of every word: counter/length ratios and the
/// analysed coordinates of each layer.
struct RatioTable {
    ratios: Vec<Vec<f64>>,
    /// `layers × positions × coordinates`
    coords: Vec<Vec<Vec<f64>>>,
    rows: Vec<(usize, usize)>,
}

fn ratio_table(model: &Model, spec: &LanguageSpec, words: &[Vec<Symbol>]) -> Result<RatioTable> {
    let mut table = RatioTable {
        ratios: Vec::new(),
        coords: Vec::new(),
        rows: Vec::new(),
    };
    for (wi, w) in words.iter().enumerate() {
        let counters = spec.counter_trace(w)?;
        let layers: Vec<Vec<Vec<f64>>> = match model {
            Model::Transformer(t) => t
                .trace(w)?
                .layers
                .iter()
                .map(|l| (0..w.len()).map(|i| l.attention_output.row(i).to_vec()).collect())
                .collect(),
            Model::Lstm(m) => {
                let h = m.hidden_states(w)?;
                vec![(0..w.len()).map(|i| h.row(i).to_vec()).collect()]
            }
        };
        if table.coords.is_empty() {
            table.coords = vec![Vec::new(); layers.len()];
        }
        for (l, rows) in layers.into_iter().enumerate() {
            table.coords[l].extend(rows);
        }
        for (t, c) in counters.iter().enumerate() {
            table.ratios.push(c.iter().map(|&v| v as f64 / (t + 1) as f64).collect());
        }
        if counters.is_empty() {
            table.ratios.extend(std::iter::repeat(Vec::new()).take(w.len()));
        }
        table.rows.extend((0..w.len()).map(|t| (wi, t + 1)));
    }
    Ok(table)
}

fn correlations(table: &RatioTable) -> Vec<Correlation> {
    let k = table.ratios.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for ratio in 0..k {
        let y: Vec<f64> = table.ratios.iter().map(|r| r[ratio]).collect();
        for (layer, rows) in table.coords.iter().enumerate() {
            let d = rows.first().map_or(0, Vec::len);
            for coordinate in 0..d {
                let x: Vec<f64> = rows.iter().map(|r| r[coordinate]).collect();
                if let Some(r) = pearson(&x, &y) {
                    out.push(Correlation {
                        ratio,
                        layer,
                        coordinate,
                        r,
                    });
                }
            }
        }
    }
    out
}

/// Pearson coefficient of every (layer, coordinate) of the attention-block
/// output (top-layer hidden state for an LSTM) against every
/// counter/length ratio, pooled over all positions of `words`.
pub fn ratio_correlations(model: &Model, spec: &LanguageSpec, words: &[Vec<Symbol>]) -> Result<Vec<Correlation>> {
    Ok(correlations(&ratio_table(model, spec, words)?))
}

/// Largest `|r|` per ratio.
pub fn best_correlations(all: &[Correlation]) -> Vec<Correlation> {
    let k = all.iter().map(|c| c.ratio + 1).max().unwrap_or(0);
    (0..k)
        .filter_map(|ratio| {
            all.iter()
                .filter(|c| c.ratio == ratio)
                .max_by(|a, b| a.r.abs().total_cmp(&b.r.abs()))
                .cloned()
        })
        .collect()
}

/// Mean over rows `i ≥ 2` of the attention entropy divided by the entropy
/// of the uniform row, per `(layer, head)`.
pub fn attention_entropy_ratio(model: &Transformer, words: &[Vec<Symbol>]) -> Result<Vec<Vec<f64>>> {
    let cfg = model.config();
    let mut sums = vec![vec![0.0; cfg.heads]; cfg.layers];
    let mut count = 0usize;
    for w in words {
        let trace = model.trace(w)?;
        for (l, layer) in trace.layers.iter().enumerate() {
            for (h, att) in layer.attention.iter().enumerate() {
                for i in 1..w.len() {
                    let row = &att.row(i)[..=i];
                    let entropy: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
                    sums[l][h] += entropy / ((i + 1) as f64).ln();
                }
            }
        }
        count += w.len().saturating_sub(1);
    }
    Ok(sums
        .into_iter()
        .map(|row| row.into_iter().map(|s| if count == 0 { 0.0 } else { s / count as f64 }).collect())
        .collect())
}

/// Value vector of each symbol at position 1, per layer-0 head block.
pub fn value_vectors(model: &Transformer) -> Result<Vec<Vec<f64>>> {
    (0..model.alphabet().len())
        .map(|s| Ok(model.trace(&[s])?.layers[0].value.row(0).to_vec()))
        .collect()
}

/// Additive position signal for positions `1..=n` (learned table rows for
/// the learned scheme); empty for schemes without one.
pub fn position_traces(model: &Transformer, n: usize) -> Vec<Vec<f64>> {
    let cfg = model.config();
    match cfg.positional {
        PositionalScheme::Learned => {
            let Some(idx) = model.params().index_of("pos_table") else {
                return Vec::new();
            };
            let table = model.params().get(idx);
            (0..n.min(table.rows)).map(|p| table.row(p).to_vec()).collect()
        }
        s if s.is_additive() => (1..=n).map(|p| positional_signal(s, p, cfg.d_model)).collect(),
        _ => Vec::new(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VizManifest {
    pub language: String,
    pub model: String,
    pub words: usize,
    pub files: Vec<String>,
    pub best_correlations: Vec<Correlation>,
    /// `[layer][head]`; empty for LSTMs.
    pub attention_entropy_ratio: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct VizOptions {
    /// Words whose full attention maps are written.
    pub heatmaps: usize,
    /// Positions of the positional-signal trace.
    pub positions: usize,
}

impl Default for VizOptions {
    fn default() -> Self {
        VizOptions {
            heatmaps: 5,
            positions: 100,
        }
    }
}

fn csv_writer(dir: &Path, name: &str, files: &mut Vec<String>) -> Result<csv::Writer<fs::File>> {
    files.push(name.to_string());
    let path = dir.join(name);
    csv::Writer::from_path(&path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    })
}

fn header(prefix: &[&str], stem: &str, n: usize) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((0..n).map(|i| format!("{stem}{i}")))
        .collect()
}

/// Writes the bundle into `out` and returns its manifest.
pub fn export_visualization(
    model: &Model,
    spec: &LanguageSpec,
    words: &[Vec<Symbol>],
    opts: VizOptions,
    out: &Path,
) -> Result<VizManifest> {
    if model.alphabet() != spec.alphabet() {
        return Err(Error::Precondition(format!(
            "model alphabet {:?} does not match {}",
            model.alphabet().symbols().iter().collect::<String>(),
            spec.id()
        )));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files = Vec::new();

    let table = ratio_table(model, spec, words)?;
    let k = table.ratios.first().map_or(0, Vec::len);
    let d = table.coords.first().and_then(|l| l.first()).map_or(0, Vec::len);
    let mut w = csv_writer(out, "attention_ratios.csv", &mut files)?;
    let mut head = header(&["word", "position", "layer"], "ratio", k);
    head.extend((0..d).map(|i| format!("coord{i}")));
    w.write_record(&head)?;
    for (layer, rows) in table.coords.iter().enumerate() {
        for (idx, &(wi, t)) in table.rows.iter().enumerate() {
            let mut rec = vec![wi.to_string(), t.to_string(), layer.to_string()];
            rec.extend(table.ratios[idx].iter().map(f64::to_string));
            rec.extend(rows[idx].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(out, e))?;

    let all = correlations(&table);
    let mut w = csv_writer(out, "pearson.csv", &mut files)?;
    w.write_record(["ratio", "layer", "coordinate", "r"])?;
    for c in &all {
        w.serialize((c.ratio, c.layer, c.coordinate, c.r))?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;

    let mut entropy = Vec::new();
    if let Model::Transformer(t) = model {
        let mut w = csv_writer(out, "attention_maps.csv", &mut files)?;
        w.write_record(["word", "layer", "head", "query", "key", "weight"])?;
        for (wi, word) in words.iter().take(opts.heatmaps).enumerate() {
            let trace = t.trace(word)?;
            for (l, layer) in trace.layers.iter().enumerate() {
                for (h, att) in layer.attention.iter().enumerate() {
                    for i in 0..word.len() {
                        for j in 0..=i {
                            w.serialize((wi, l, h, i + 1, j + 1, att.row(i)[j]))?;
                        }
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io(out, e))?;

        let values = value_vectors(t)?;
        let mut w = csv_writer(out, "value_vectors.csv", &mut files)?;
        w.write_record(header(&["symbol", "norm"], "coord", t.config().d_model))?;
        for (s, v) in values.iter().enumerate() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut rec = vec![t.alphabet().char_of(s).unwrap_or('?').to_string(), norm.to_string()];
            rec.extend(v.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(out, e))?;

        let positions = position_traces(t, opts.positions);
        if !positions.is_empty() {
            let mut w = csv_writer(out, "positions.csv", &mut files)?;
            w.write_record(header(&["position"], "coord", t.config().d_model))?;
            for (p, v) in positions.iter().enumerate() {
                let mut rec = vec![(p + 1).to_string()];
                rec.extend(v.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| Error::io(out, e))?;
        }
        entropy = attention_entropy_ratio(t, words)?;
    }

    let manifest = VizManifest {
        language: spec.id().to_string(),
        model: model.config().label(),
        words: words.len(),
        files,
        best_correlations: best_correlations(&all),
        attention_entropy_ratio: entropy,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
