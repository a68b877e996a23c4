//! Command-line front end: ingest the Bar Crawl CSV layout into a featurized
//! sample cache, train and evaluate hyperdimensional classifiers, sweep one
//! hyperparameter axis at a time, and benchmark per-window latency.

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand};
use serde::Serialize;

use tachd::config::PipelineConfig;
use tachd::dataset::{load_cache, split, CachedSet, SplitMode};
use tachd::encoding::EncoderVariant;
use tachd::features::FeatureExtractor;
use tachd::metrics::{LatencySummary, MetricsReport};
use tachd::model::{train_encoded, AssociativeMemory, ModelKind};
use tachd::pipeline::{
    encode_set, evaluate, evaluate_encoded, fit_encoder, ingest_dataset, run_experiment,
    ACCEL_FILE, TAC_DIR,
};
use tachd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tachd",
    version,
    about = "Detects heavy-drinking episodes from accelerometer windows with hyperdimensional classifiers"
)]
struct Cli {
    /// Flat `key = value` config file; the flags below override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the configured train/test split mode.
    #[arg(long, global = true, value_parser = ["shuffled", "ordered"])]
    split: Option<String>,

    /// Directory for caches, models, and reports.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reads the raw dataset and writes the featurized sample cache.
    Ingest {
        /// Dataset directory (falls back to `dataset.dir` from the config).
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,

        /// Recompute even when a fresh cache exists, and do not write one.
        #[arg(long)]
        no_cache: bool,
    },

    /// Trains on the configured split and reports test metrics.
    Train {
        /// Sample cache (defaults to `<out>/samples.bin`).
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,
    },

    /// Inference-only evaluation of a saved model on the test split.
    Eval {
        /// Model file (defaults to `<out>/model.bin`).
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,

        /// Sample cache (defaults to `<out>/samples.bin`).
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,
    },

    /// Walks one hyperparameter axis, one run per point per split mode.
    Sweep {
        /// Grid axis: n-gram size 2..=7, learning rate 1..=5, every encoder
        /// variant, or every learning rule.
        #[arg(long, value_parser = ["ngram", "lr", "encoder", "model"])]
        grid: String,

        /// Sample cache (defaults to `<out>/samples.bin`).
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,
    },

    /// Times feature extraction + encoding + inference per window.
    Bench {
        /// Sample cache (defaults to `<out>/samples.bin`).
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,

        /// Number of windows to time.
        #[arg(short = 'n', long, default_value_t = 200)]
        windows: usize,

        /// Time a saved model instead of training one first.
        #[arg(long, value_name = "FILE", conflicts_with = "train")]
        model: Option<PathBuf>,

        /// Train a model on the fly before timing.
        #[arg(long)]
        train: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    fs::create_dir_all(&cli.out)?;
    match &cli.cmd {
        Cmd::Ingest { data, no_cache } => cmd_ingest(cli, &cfg, data.as_deref(), *no_cache),
        Cmd::Train { cache } => cmd_train(cli, &cfg, cache.as_deref()),
        Cmd::Eval { model, cache } => cmd_eval(cli, &cfg, model.as_deref(), cache.as_deref()),
        Cmd::Sweep { grid, cache } => cmd_sweep(cli, &cfg, grid, cache.as_deref()),
        Cmd::Bench { cache, windows, model, train } => {
            cmd_bench(cli, &cfg, cache.as_deref(), *windows, model.as_deref(), *train)
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = &cli.split {
        cfg.split = SplitMode::parse(mode)?;
    }
    Ok(cfg)
}

fn cache_path(cli: &Cli, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| cli.out.join("samples.bin"))
}

/// Loads a sample cache, re-deriving labels when the configured threshold
/// differs from the one the cache was built with.
fn load_samples(path: &Path, cfg: &PipelineConfig) -> Result<CachedSet> {
    if !path.is_file() {
        return Err(Error::InvalidConfig(format!(
            "sample cache {} not found; run `tachd ingest` first",
            path.display()
        )));
    }
    let mut set = load_cache(path)?;
    if set.threshold != cfg.threshold {
        println!(
            "relabeling cached windows: threshold {} -> {}",
            set.threshold, cfg.threshold
        );
        for s in &mut set.samples {
            s.label = (s.tac >= cfg.threshold) as u8;
        }
        set.threshold = cfg.threshold;
    }
    Ok(set)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn append_jsonl(path: &Path, value: &impl Serialize) -> Result<()> {
    let line = serde_json::to_string(value).map_err(|e| Error::Format(e.to_string()))?;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// Metrics JSONL line plus the two-column ROC text.
fn write_report(cli: &Cli, report: &MetricsReport) -> Result<()> {
    append_jsonl(&cli.out.join("metrics.jsonl"), report)?;
    fs::write(cli.out.join("roc.txt"), report.roc_text())?;
    Ok(())
}

// ---------------------------------------------------------------- ingest --

#[derive(Serialize)]
struct IngestReport<'a> {
    threshold: f64,
    drunk_fraction: f64,
    stats: &'a tachd::dataset::IngestStats,
}

fn dataset_mtime(dir: &Path) -> Option<SystemTime> {
    let mut newest = fs::metadata(dir.join(ACCEL_FILE)).ok()?.modified().ok()?;
    if let Ok(entries) = fs::read_dir(dir.join(TAC_DIR)) {
        for entry in entries.flatten() {
            if let Ok(m) = entry.metadata().and_then(|m| m.modified()) {
                newest = newest.max(m);
            }
        }
    }
    Some(newest)
}

fn print_ingest(set: &CachedSet) {
    let s = &set.stats;
    let row = |k: &str, v: String| println!("{k:<26} {v}");
    row("participants", s.participants.to_string());
    row("accel rows", s.accel_rows.to_string());
    row("malformed rows", s.malformed_rows.to_string());
    row("out-of-order rows", s.out_of_order_rows.to_string());
    row("duplicate timestamps", s.duplicate_times.to_string());
    row("tac files missing", s.tac_files_missing.to_string());
    row("tac readings", s.tac_readings.to_string());
    row("windows", s.windows_total.to_string());
    row("dropped (time gap)", s.windows_dropped_gap.to_string());
    row("dropped (tac coverage)", s.windows_dropped_coverage.to_string());
    let frac = if s.samples == 0 { 0.0 } else { s.drunk_samples as f64 / s.samples as f64 };
    row(
        "labeled samples",
        format!("{} ({} drunk, {:.1} %)", s.samples, s.drunk_samples, frac * 100.0),
    );
}

fn cmd_ingest(cli: &Cli, cfg: &PipelineConfig, data: Option<&Path>, no_cache: bool) -> Result<()> {
    let dir = data
        .map(Path::to_path_buf)
        .or_else(|| cfg.data_dir.clone())
        .ok_or_else(|| {
            Error::InvalidConfig("no dataset directory; pass --data or set dataset.dir".into())
        })?;
    if !dir.join(ACCEL_FILE).is_file() {
        return Err(Error::InvalidConfig(format!(
            "dataset missing: no {} under {}",
            ACCEL_FILE,
            dir.display()
        )));
    }

    let cache = cli.out.join("samples.bin");
    if !no_cache && cache.is_file() {
        let fresh = match (fs::metadata(&cache).and_then(|m| m.modified()), dataset_mtime(&dir)) {
            (Ok(c), Some(d)) => c >= d,
            _ => false,
        };
        if fresh {
            let set = load_cache(&cache)?;
            println!("cache {} is newer than the dataset; skipping ingest", cache.display());
            print_ingest(&set);
            return Ok(());
        }
    }

    let started = Instant::now();
    let set = ingest_dataset(&dir, cfg)?;
    println!("ingested {} in {:.1} s", dir.display(), started.elapsed().as_secs_f64());
    print_ingest(&set);

    let frac = if set.stats.samples == 0 {
        0.0
    } else {
        set.stats.drunk_samples as f64 / set.stats.samples as f64
    };
    write_json(
        &cli.out.join("ingest.json"),
        &IngestReport { threshold: set.threshold, drunk_fraction: frac, stats: &set.stats },
    )?;

    if no_cache {
        println!("--no-cache: sample cache not written");
    } else {
        tachd::dataset::save_cache(&cache, &set)?;
        println!("cache written to {}", cache.display());
    }
    Ok(())
}

// ----------------------------------------------------------- train / eval --

fn cmd_train(cli: &Cli, cfg: &PipelineConfig, cache: Option<&Path>) -> Result<()> {
    let set = load_samples(&cache_path(cli, cache), cfg)?;
    let started = Instant::now();
    let result = run_experiment(cfg, set.samples)?;

    let model_path = cli.out.join("model.bin");
    result.memory.save(&model_path)?;
    write_report(cli, &result.report)?;

    println!(
        "{} + {}: trained on {} windows ({} epochs), tested on {} in {:.1} s",
        cfg.variant.as_str(),
        cfg.model.as_str(),
        result.train_len,
        result.outcome.epochs_run,
        result.test_len,
        started.elapsed().as_secs_f64(),
    );
    print!("{}", result.report.human_table());
    println!("model written to {}", model_path.display());
    Ok(())
}

fn cmd_eval(
    cli: &Cli,
    cfg: &PipelineConfig,
    model: Option<&Path>,
    cache: Option<&Path>,
) -> Result<()> {
    let model_path = model.map(Path::to_path_buf).unwrap_or_else(|| cli.out.join("model.bin"));
    let memory = AssociativeMemory::load(&model_path)?;
    if cfg.model.regenerates() {
        return Err(Error::UnsupportedEncoder(format!(
            "{} regenerates encoder dimensions during training, so the encoder \
             cannot be rebuilt from config alone; use `tachd train`, which \
             evaluates in the same run",
            cfg.model.as_str()
        )));
    }
    if memory.dim() != cfg.dim {
        return Err(Error::DimMismatch { left: memory.dim(), right: cfg.dim });
    }

    let set = load_samples(&cache_path(cli, cache), cfg)?;
    let spec = cfg.feature_spec()?;
    let (train_set, test_set) = split(set.samples, cfg.split, cfg.ratio, cfg.seed, cfg.within_pid)?;
    if test_set.is_empty() {
        return Err(Error::EmptyInput("split produced an empty test set".into()));
    }
    // Non-regenerative training never touches the encoder, so refitting on
    // the same split reproduces the encoder the model was trained with.
    let encoder = fit_encoder(cfg, &spec, &train_set)?;

    let started = Instant::now();
    let eval = evaluate(&memory, &encoder, &test_set, &spec)?;
    let report =
        MetricsReport::from_predictions(&eval.labels, &eval.preds, &eval.scores, cfg.echo(), cfg.seed)?;
    write_report(cli, &report)?;

    println!(
        "evaluated {} on {} windows in {:.1} s",
        model_path.display(),
        test_set.len(),
        started.elapsed().as_secs_f64(),
    );
    print!("{}", report.human_table());
    Ok(())
}

// ------------------------------------------------------------------ sweep --

#[derive(Serialize)]
struct SweepRecord {
    grid: String,
    point: String,
    split: String,
    accuracy: f64,
    sober_accuracy: f64,
    drunk_accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    epochs_run: usize,
    seed: u64,
}

fn grid_points(grid: &str, base: &PipelineConfig) -> Vec<(String, PipelineConfig)> {
    let mut points = Vec::new();
    match grid {
        "ngram" => {
            for n in 2..=7 {
                let mut c = base.clone();
                c.ngram = n;
                points.push((format!("n={n}"), c));
            }
        }
        "lr" => {
            for a in 1..=5 {
                let mut c = base.clone();
                c.lr = a as f64;
                points.push((format!("lr={a}"), c));
            }
        }
        "encoder" => {
            for v in EncoderVariant::ALL {
                let mut c = base.clone();
                c.variant = v;
                points.push((v.as_str().to_string(), c));
            }
        }
        "model" => {
            for k in ModelKind::ALL {
                let mut c = base.clone();
                c.model = k;
                points.push((k.as_str().to_string(), c));
            }
        }
        _ => unreachable!("clap validates the grid name"),
    }
    points
}

/// Whether every point on this axis reuses the base configuration's encoder.
fn grid_keeps_encoder(grid: &str) -> bool {
    matches!(grid, "lr" | "model")
}

fn sweep_one(
    grid: &str,
    point: &str,
    cfg: &PipelineConfig,
    samples: &[tachd::dataset::LabeledSample],
) -> Result<SweepRecord> {
    let result = run_experiment(cfg, samples.to_vec())?;
    Ok(record_from(grid, point, cfg, &result.report, result.outcome.epochs_run))
}

fn record_from(
    grid: &str,
    point: &str,
    cfg: &PipelineConfig,
    report: &MetricsReport,
    epochs_run: usize,
) -> SweepRecord {
    SweepRecord {
        grid: grid.to_string(),
        point: point.to_string(),
        split: cfg.split.as_str().to_string(),
        accuracy: report.accuracy,
        sober_accuracy: report.sober_accuracy,
        drunk_accuracy: report.drunk_accuracy,
        precision: report.precision,
        recall: report.recall,
        f1: report.f1,
        epochs_run,
        seed: cfg.seed,
    }
}

fn cmd_sweep(cli: &Cli, cfg: &PipelineConfig, grid: &str, cache: Option<&Path>) -> Result<()> {
    let set = load_samples(&cache_path(cli, cache), cfg)?;
    let modes: &[SplitMode] = if cli.split.is_some() {
        &[cfg.split]
    } else {
        &[SplitMode::Shuffled, SplitMode::Chronological]
    };

    let mut records = Vec::new();
    for &mode in modes {
        let mut base = cfg.clone();
        base.split = mode;

        if grid_keeps_encoder(grid) {
            // Every point shares the base encoder, so the corpus is split,
            // fitted, and encoded once; only regenerative rules fall back to
            // the full per-point pipeline (they mutate the encoder).
            let spec = base.feature_spec()?;
            let (train_set, test_set) =
                split(set.samples.clone(), base.split, base.ratio, base.seed, base.within_pid)?;
            if test_set.is_empty() {
                return Err(Error::EmptyInput("split produced an empty test set".into()));
            }
            let encoder = fit_encoder(&base, &spec, &train_set)?;
            let train_hv = encode_set(&encoder, &train_set, &spec)?;
            let test_hv = encode_set(&encoder, &test_set, &spec)?;
            let labels: Vec<u8> = train_set.iter().map(|s| s.label).collect();
            let test_labels: Vec<u8> = test_set.iter().map(|s| s.label).collect();

            for (point, pcfg) in grid_points(grid, &base) {
                if pcfg.model.regenerates() {
                    records.push(sweep_one(grid, &point, &pcfg, &set.samples)?);
                    continue;
                }
                let outcome = train_encoded(&pcfg.train_config(), train_hv.clone(), &labels)?;
                let memory =
                    if pcfg.quantize { outcome.memory.quantized() } else { outcome.memory };
                let eval = evaluate_encoded(&memory, &test_hv, &test_labels)?;
                let report = MetricsReport::from_predictions(
                    &eval.labels,
                    &eval.preds,
                    &eval.scores,
                    pcfg.echo(),
                    pcfg.seed,
                )?;
                records.push(record_from(grid, &point, &pcfg, &report, outcome.epochs_run));
            }
        } else {
            for (point, pcfg) in grid_points(grid, &base) {
                records.push(sweep_one(grid, &point, &pcfg, &set.samples)?);
            }
        }
    }

    let path = cli.out.join("sweep.jsonl");
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?);
        lines.push('\n');
    }
    fs::write(&path, lines)?;

    println!(
        "{:<18} {:<9} {:>8} {:>7} {:>7} {:>6} {:>6} {:>6} {:>6}",
        "point", "split", "accuracy", "sober", "drunk", "prec", "recall", "f1", "epochs"
    );
    for r in &records {
        println!(
            "{:<18} {:<9} {:>8.2} {:>7.2} {:>7.2} {:>6.3} {:>6.3} {:>6.3} {:>6}",
            r.point,
            r.split,
            r.accuracy * 100.0,
            r.sober_accuracy * 100.0,
            r.drunk_accuracy * 100.0,
            r.precision,
            r.recall,
            r.f1,
            r.epochs_run,
        );
    }
    println!("sweep table written to {}", path.display());
    Ok(())
}

// ------------------------------------------------------------------ bench --

#[derive(Serialize)]
struct BenchReport {
    windows: usize,
    latency: LatencySummary,
    encoder: String,
    model: String,
    dim: usize,
    hardware: String,
    seed: u64,
}

fn hardware_note() -> String {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|text| {
            text.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|s| s.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    format!(
        "{cpu}; {} {}; {cores} cores; single-threaded timing",
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

fn cmd_bench(
    cli: &Cli,
    cfg: &PipelineConfig,
    cache: Option<&Path>,
    windows: usize,
    model: Option<&Path>,
    train: bool,
) -> Result<()> {
    if windows < 1 {
        return Err(Error::InvalidConfig("bench needs at least one window".into()));
    }
    if model.is_none() && !train {
        return Err(Error::InvalidConfig(
            "bench needs a trained model: pass --model <file> or --train".into(),
        ));
    }
    let set = load_samples(&cache_path(cli, cache), cfg)?;
    let spec = cfg.feature_spec()?;

    let (memory, encoder) = if let Some(path) = model {
        let memory = AssociativeMemory::load(path)?;
        if cfg.model.regenerates() {
            return Err(Error::UnsupportedEncoder(format!(
                "{} regenerates encoder dimensions during training; benchmark \
                 it with --train instead of a saved model",
                cfg.model.as_str()
            )));
        }
        if memory.dim() != cfg.dim {
            return Err(Error::DimMismatch { left: memory.dim(), right: cfg.dim });
        }
        let (train_set, _) =
            split(set.samples.clone(), cfg.split, cfg.ratio, cfg.seed, cfg.within_pid)?;
        let encoder = fit_encoder(cfg, &spec, &train_set)?;
        (memory, encoder)
    } else {
        println!("training {} + {} before timing...", cfg.variant.as_str(), cfg.model.as_str());
        let result = run_experiment(cfg, set.samples.clone())?;
        (result.memory, result.encoder)
    };

    let extractor = FeatureExtractor::standard();
    // One untimed pass warms caches and surfaces errors before the clock runs.
    {
        let s = &set.samples[0];
        let f = extractor.assemble(&s.window, &spec)?;
        let h = encoder.encode(&s.window, &f)?;
        let _ = memory.classify_lenient(&h);
    }

    let mut timings = Vec::with_capacity(windows);
    for i in 0..windows {
        let s = &set.samples[i % set.samples.len()];
        let started = Instant::now();
        let f = extractor.assemble(&s.window, &spec)?;
        let h = encoder.encode(&s.window, &f)?;
        let _ = memory.classify_lenient(&h);
        timings.push(started.elapsed().as_secs_f64());
    }
    let latency = LatencySummary::from_timings(&timings)?;

    let report = BenchReport {
        windows,
        latency,
        encoder: cfg.variant.as_str().to_string(),
        model: cfg.model.as_str().to_string(),
        dim: cfg.dim,
        hardware: hardware_note(),
        seed: cfg.seed,
    };
    write_json(&cli.out.join("bench.json"), &report)?;

    println!(
        "per-window latency over {} windows: mean {:.4} s, p50 {:.4} s, p95 {:.4} s",
        windows, latency.mean_s, latency.p50_s, latency.p95_s
    );
    println!("hardware: {}", report.hardware);
    Ok(())
}
