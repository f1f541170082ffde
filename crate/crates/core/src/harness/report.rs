//! CSV tables regenerated from stored grid and run results.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::grid::{summarize, top_k_mean, GridResult, GRID_INDEX_FILE};
use super::train::TrainRun;
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::neural::{ModelConfig, PositionalScheme};

/// File written by a single training run.
pub const RUN_FILE: &str = "run.json";

/// Model row label: `lstm`, `transformer-<scheme>` and, with
/// `pool_encodings`, `transformer-encodings` for every scheme other than
/// masking. Disabled residual / layer norm add `-nores` / `-noln`.
pub fn model_variant(config: &ModelConfig, pool_encodings: bool) -> String {
    match config {
        ModelConfig::Lstm(_) => "lstm".into(),
        ModelConfig::Transformer(c) => {
            let scheme = if pool_encodings && c.positional != PositionalScheme::Masking {
                "encodings"
            } else {
                c.positional.as_str()
            };
            let mut s = format!("transformer-{scheme}");
            if !c.residual {
                s.push_str("-nores");
            }
            if !c.layer_norm {
                s.push_str("-noln");
            }
            s
        }
    }
}

fn layers_of(config: &ModelConfig) -> usize {
    match config {
        ModelConfig::Lstm(c) => c.layers,
        ModelConfig::Transformer(c) => c.layers,
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else if matches!(path.file_name().and_then(|n| n.to_str()), Some(GRID_INDEX_FILE | RUN_FILE)) {
            out.push(path);
        }
    }
    Ok(())
}

/// Every run recorded under `dir`: all runs of each `grid.json` plus each
/// standalone `run.json`.
pub fn load_runs(dir: &Path) -> Result<Vec<TrainRun>> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    let mut runs = Vec::new();
    for path in files {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if path.file_name().and_then(|n| n.to_str()) == Some(GRID_INDEX_FILE) {
            let grid: GridResult =
                serde_json::from_slice(&bytes).map_err(|e| Error::format(&path, e.to_string()))?;
            runs.extend(grid.runs.into_iter().map(|e| e.run));
        } else {
            runs.push(serde_json::from_slice(&bytes).map_err(|e| Error::format(&path, e.to_string()))?);
        }
    }
    Ok(runs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub language: String,
    pub property: String,
    pub dot_depth: String,
    pub model: String,
    pub layers: String,
    pub bin: usize,
    pub lo: usize,
    pub hi: usize,
    pub top5_mean: f64,
    pub best_run: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    /// Table name → rows.
    pub tables: BTreeMap<String, Vec<TableRow>>,
    /// `table: language / model` combinations without any run.
    pub missing: Vec<String>,
}

struct Group<'a> {
    language: &'a LanguageId,
    model: String,
    layers: Option<usize>,
}

fn rows_for(group: &Group<'_>, runs: &[&TrainRun]) -> Vec<TableRow> {
    let owned: Vec<TrainRun> = runs.iter().map(|r| (*r).clone()).collect();
    let n_bins = owned.iter().map(|r| r.bins.len()).min().unwrap_or(0);
    let (_, best) = summarize(&owned);
    let class = group.language.spec().map(|s| s.class()).ok();
    (0..n_bins)
        .map(|b| TableRow {
            language: group.language.to_string(),
            property: class.map_or(String::new(), |c| c.property_tag().to_string()),
            dot_depth: class.and_then(|c| c.dot_depth()).map_or("-".into(), |d| d.to_string()),
            model: group.model.clone(),
            layers: group.layers.map_or(String::new(), |l| l.to_string()),
            bin: b,
            lo: owned[0].bins[b].range[0],
            hi: owned[0].bins[b].range[1],
            top5_mean: top_k_mean(&owned.iter().map(|r| r.bins[b].accuracy).collect::<Vec<_>>(), 5),
            best_run: best.map_or(0.0, |i| owned[i].bins[b].accuracy),
            runs: owned.len(),
        })
        .collect()
}

const TABLE_HEADER: [&str; 11] = [
    "language", "property", "dot_depth", "model", "layers", "bin", "lo", "hi", "top5_mean", "best_run", "runs",
];

/// Builds the counter, regular, reset and positional tables from `runs`.
pub fn build_report(runs: &[TrainRun]) -> Report {
    let mut report = Report::default();
    let mut table = |name: &str, languages: &[LanguageId], expected: &[&str], pool: bool, by_layers: bool| {
        let mut rows = Vec::new();
        for lang in languages {
            let mine: Vec<&TrainRun> = runs.iter().filter(|r| &r.language == lang).collect();
            let mut groups: BTreeMap<(String, Option<usize>), Vec<&TrainRun>> = BTreeMap::new();
            for r in &mine {
                let layers = by_layers.then(|| layers_of(&r.config));
                groups.entry((model_variant(&r.config, pool), layers)).or_default().push(r);
            }
            for model in expected {
                if !groups.keys().any(|(m, _)| m == model) {
                    report.missing.push(format!("{name}: {lang} / {model}"));
                }
            }
            let mut keys: Vec<_> = groups.keys().cloned().collect();
            keys.sort_by_key(|(m, l)| (expected.iter().position(|e| e == m).unwrap_or(usize::MAX), m.clone(), *l));
            for key in keys {
                let group = Group {
                    language: lang,
                    model: key.0.clone(),
                    layers: key.1,
                };
                rows.extend(rows_for(&group, &groups[&key]));
            }
        }
        report.tables.insert(name.to_string(), rows);
    };

    let study = LanguageId::study_languages();
    let counter: Vec<LanguageId> = study.iter().filter(|l| l.is_counter()).cloned().collect();
    let regular: Vec<LanguageId> = study.iter().filter(|l| !l.is_counter()).cloned().collect();
    table(
        "counter",
        &counter,
        &["lstm", "transformer-absolute", "transformer-relative", "transformer-masking"],
        false,
        false,
    );
    table(
        "regular",
        &regular,
        &["transformer-masking", "transformer-encodings", "lstm"],
        true,
        false,
    );
    table(
        "reset",
        &[LanguageId::ResetDyck1],
        &["transformer-masking", "transformer-encodings", "lstm"],
        true,
        true,
    );
    table(
        "positional",
        &[LanguageId::AaStar, LanguageId::AaaaStar],
        &[
            "transformer-masking-nores",
            "transformer-absolute-nores",
            "transformer-relative-nores",
            "transformer-cos_pi-nores",
            "transformer-learned-nores",
        ],
        false,
        false,
    );
    report
}

/// Reads every run under `results` and writes `<table>.csv` files plus
/// `missing.txt` into `out`.
pub fn write_report(results: &Path, out: &Path) -> Result<Report> {
    let runs = load_runs(results)?;
    let report = build_report(&runs);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (name, rows) in &report.tables {
        let path = out.join(format!("{name}.csv"));
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(|e| Error::format(&path, e.to_string()))?;
        w.write_record(TABLE_HEADER)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    let path = out.join("missing.txt");
    let mut text = report.missing.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
