use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use langlab::constructions::verify_all;
use langlab::generators::{build_dataset, Dataset, DatasetSpec, Sampler};
use langlab::harness::{
    desk_lstm_space, desk_transformer_space, export_visualization, grid_search, lstm_space,
    transformer_space, write_report, BinResult, GridOptions, TransformerFlags, VizOptions, RUN_FILE,
};
use langlab::lang::{LanguageId, Symbol};
use langlab::neural::Model;
use langlab::rng;

use crate::config::{check_bounds, default_model, parse_model_label, Family, RunConfig};
use crate::{CheckFailed, GenerateArgs, GridArgs, ReportArgs, TrainArgs, VerifyArgs, VizArgs};

const CHECKPOINT_FILE: &str = "model.ckpt.json";

fn print_bins(bins: &[BinResult]) {
    for (j, b) in bins.iter().enumerate() {
        println!("  bin {j} [{}, {}]: {:.1}", b.range[0], b.range[1], b.accuracy);
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, serde_json::to_vec_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

/// Loads the dataset named by the flag, the config, or `data/<language>`,
/// and checks it against the requested language.
fn load_dataset(flag: Option<&Path>, cfg: &RunConfig, language: Option<&LanguageId>) -> Result<Dataset> {
    let dir = match (flag, &cfg.dataset, language) {
        (Some(p), _, _) => p.to_path_buf(),
        (None, Some(p), _) => p.clone(),
        (None, None, Some(id)) => PathBuf::from("data").join(id.to_string()),
        (None, None, None) => bail!("no dataset given; pass --data or --language"),
    };
    let dataset = Dataset::load(&dir).with_context(|| format!("loading dataset {}", dir.display()))?;
    if let Some(id) = language {
        if *id != dataset.language {
            bail!("dataset {} holds {}, not {id}", dir.display(), dataset.language);
        }
    }
    Ok(dataset)
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let Some(id) = cfg.language(args.language.as_deref())? else {
        bail!("no language given");
    };
    let mut overrides = cfg.data.clone();
    overrides.train_size = args.train_size.or(overrides.train_size);
    overrides.bin_size = args.bin_size.or(overrides.bin_size);
    overrides.n_bins = args.n_bins.or(overrides.n_bins);
    let spec = overrides.apply(DatasetSpec::for_language(&id));
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let out = args
        .common
        .out
        .or(cfg.out)
        .unwrap_or_else(|| PathBuf::from("data").join(id.to_string()));
    let dataset = build_dataset(&id, &spec, seed)?;
    let manifest = dataset.save(&out)?;
    println!("{id} (seed {seed}) -> {}", out.display());
    println!("  train [{}, {}]: {}", spec.train_lo, spec.train_hi, manifest.train_count);
    for (j, b) in manifest.bins.iter().enumerate() {
        println!("  bin {j} [{}, {}]: {}", b.lo, b.hi, b.count);
    }
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let language = cfg.language(args.language.as_deref())?;
    let model = match args.model.as_deref() {
        Some(label) => parse_model_label(label)?,
        None => cfg.model.clone().unwrap_or_else(default_model),
    };
    let mut opts = cfg.train.clone();
    opts.lr = args.lr.unwrap_or(opts.lr);
    opts.epochs = args.epochs.unwrap_or(opts.epochs);
    check_bounds(&model, opts.lr)?;
    opts.validate()?;
    let dataset = load_dataset(args.data.as_deref(), &cfg, language.as_ref())?;
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let out = args.common.out.or(cfg.out).unwrap_or_else(|| {
        PathBuf::from("results")
            .join(dataset.language.to_string())
            .join(format!("{}-lr{}-s{seed}", model.label(), opts.lr))
    });

    let (trained, mut run) = langlab::harness::train(&model, &dataset, &opts, seed)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    if run.diagnostic.is_none() {
        trained.save(&out.join(CHECKPOINT_FILE))?;
        run.checkpoint = Some(PathBuf::from(CHECKPOINT_FILE));
    }
    write_json(&out.join(RUN_FILE), &run)?;
    println!(
        "{} {} lr {} seed {seed}: {:?} after {} epochs ({:.1}s)",
        dataset.language,
        model.label(),
        opts.lr,
        run.stop_reason,
        run.epochs_run,
        run.wall_seconds
    );
    if let Some(d) = &run.diagnostic {
        println!("  {d}");
    }
    print_bins(&run.bins);
    println!("  -> {}", out.display());
    Ok(())
}

pub fn grid(args: GridArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let language = cfg.language(args.language.as_deref())?;
    let mut g = cfg.grid.clone();
    g.family = args.family.unwrap_or(g.family);
    g.full |= args.full;
    g.budget = args.budget.or(g.budget);
    g.save_checkpoints |= args.save_checkpoints;
    let flags = TransformerFlags {
        residual: g.residual,
        layer_norm: g.layer_norm,
        max_len: g.max_len,
    };
    let space = match (g.family, g.full) {
        (Family::Transformer, true) => transformer_space(&g.schemes, flags),
        (Family::Transformer, false) => desk_transformer_space(&g.schemes, flags),
        (Family::Lstm, true) => lstm_space(),
        (Family::Lstm, false) => desk_lstm_space(),
    };
    for p in &space {
        check_bounds(&p.config, p.lr)?;
    }
    let mut train = cfg.train.clone();
    train.epochs = args.epochs.unwrap_or(train.epochs);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let opts = GridOptions {
        budget: g.budget,
        train,
        seed,
        save_checkpoints: g.save_checkpoints,
    };
    let dataset = load_dataset(args.data.as_deref(), &cfg, language.as_ref())?;
    let family = match g.family {
        Family::Transformer => "transformer",
        Family::Lstm => "lstm",
    };
    let out = args.common.out.or(cfg.out).unwrap_or_else(|| {
        PathBuf::from("results")
            .join(dataset.language.to_string())
            .join(format!("grid-{family}"))
    });

    let result = grid_search(&dataset, &space, &opts, Some(&out))?;
    println!(
        "{} {family} grid: {} of {} configurations (seed {seed}) -> {}",
        dataset.language,
        result.runs.len(),
        result.space_size,
        out.display()
    );
    println!("top-5 mean per bin:");
    print_bins(&result.top5);
    if let Some(best) = result.best_run() {
        println!("best run: {} lr {}", best.config.label(), best.lr);
        print_bins(&best.bins);
    }
    let diverged = result.runs.iter().filter(|e| e.run.diagnostic.is_some()).count();
    if diverged > 0 {
        println!("{diverged} run(s) diverged; see their run files");
    }
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut opts = cfg.verify.clone();
    opts.max_len = args.max_len.or(opts.max_len);
    opts.samples = args.samples.unwrap_or(opts.samples);
    opts.random_max_len = args.random_max_len.unwrap_or(opts.random_max_len);
    opts.models = args.models.unwrap_or(opts.models);
    opts.seed = args.common.seed.or(cfg.seed).unwrap_or(opts.seed);
    opts.corrupt_shuffle1 |= args.corrupt_embedding;

    let reports = verify_all(&opts)?;
    let mut failed = Vec::new();
    for r in &reports {
        let bound = r.exhaustive_max_len.map(|n| format!(" (n <= {n})")).unwrap_or_default();
        println!(
            "{} {:<20} exhaustive {}{bound}, random {}, failures {} [{:.1}s]",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.exhaustive,
            r.random,
            r.failures,
            r.seconds
        );
        if let Some(c) = &r.counterexample {
            println!("     counterexample: {c}");
        }
        if !r.passed() {
            failed.push(r.name.clone());
        }
    }
    if let Some(out) = args.common.out.or(cfg.out) {
        write_json(&out, &reports)?;
    }
    if !failed.is_empty() {
        return Err(CheckFailed(format!("verification failed: {}", failed.join(", "))).into());
    }
    Ok(())
}

pub fn viz(args: VizArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let model = Model::load(&args.checkpoint)?;
    let n_words = args.words.unwrap_or(cfg.viz.words);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let (id, words): (LanguageId, Vec<Vec<Symbol>>) = match &args.data {
        Some(dir) => {
            let language = cfg.language(args.language.as_deref())?;
            let ds = load_dataset(Some(dir), &cfg, language.as_ref())?;
            let words = ds
                .bins
                .first()
                .map(|b| b.examples.iter().take(n_words).map(|e| e.symbols.clone()).collect())
                .unwrap_or_default();
            (ds.language, words)
        }
        None => {
            let Some(id) = cfg.language(args.language.as_deref())? else {
                bail!("no language given; pass --language or --data");
            };
            let spec = id.spec()?;
            let window = DatasetSpec::for_language(&id);
            let sampler = Sampler::new(&spec, window.train_lo, window.train_hi)?;
            let mut r = rng::stream(seed, 0);
            let words = (0..n_words).map(|_| sampler.sample(&mut r)).collect::<langlab::Result<_>>()?;
            (id, words)
        }
    };
    if words.is_empty() {
        bail!("no words to analyse");
    }
    let spec = id.spec()?;
    let out = args
        .common
        .out
        .or(cfg.out)
        .unwrap_or_else(|| PathBuf::from("viz").join(id.to_string()));
    let opts = VizOptions {
        heatmaps: cfg.viz.heatmaps,
        positions: cfg.viz.positions,
    };
    let manifest = export_visualization(&model, &spec, &words, opts, &out)?;
    println!("{id} {} on {} words -> {}", manifest.model, manifest.words, out.display());
    println!("best |r| per depth ratio:");
    for c in &manifest.best_correlations {
        println!("  ratio {} layer {} coordinate {}: r = {:.3}", c.ratio, c.layer, c.coordinate, c.r);
    }
    for (l, heads) in manifest.attention_entropy_ratio.iter().enumerate() {
        let text: Vec<String> = heads.iter().map(|h| format!("{h:.3}")).collect();
        println!("attention entropy / uniform, layer {l}: {}", text.join(" "));
    }
    println!("per-coordinate r values: {}", out.join("pearson.csv").display());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let out = args.common.out.unwrap_or_else(|| PathBuf::from("tables"));
    let report = write_report(&args.results, &out)?;
    for (name, rows) in &report.tables {
        println!("{name}: {} rows", rows.len());
    }
    if !report.missing.is_empty() {
        println!("{} expected cell(s) missing; see {}", report.missing.len(), out.join("missing.txt").display());
    }
    println!("-> {}", out.display());
    Ok(())
}
