//! Command-line pipeline: ingest, split, gen-toy, train-regression,
//! train-classification, transfer, report.
//!
//! Every command resolves its configuration (config file plus flags) into a
//! canonical key-value form, stamps its output directory with the digest and
//! seed in `run.meta`, and refuses to overwrite an existing run unless
//! `--force` is given. Exit codes: 0 ok, 2 config error, 3 missing artifact,
//! 4 already exists, 5 diverged loss, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::KvConfig;
use crate::dataset::{
    assign_real, assign_synthetic, filter_single_label, split_stats_csv, Assignment, ClassLabel,
    LabeledRecord, RegressionParam, SplitAssignment, Task,
};
use crate::error::io_err;
use crate::model::{HeadKind, ModelSpec, Network};
use crate::report;
use crate::signal::store::{RecordMeta, RecordStore};
use crate::signal::{decode_signal, normalize, parse_asc, parse_wfdb_header, select_leads};
use crate::toy::{gen_toy, ToySpec};
use crate::training::{checkpoint, fit, TrainConfig};
use crate::transfer::{build_grid, filter_grid, run_transfer, TransferEnv};
use crate::{Error, Result};

pub const RUN_META_FILE: &str = "run.meta";

#[derive(Parser)]
#[command(
    name = "ecgtl",
    about = "8-lead ECG pipeline: ingest, split, train, transfer, report",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse raw dataset files into the canonical record store.
    Ingest(IngestArgs),
    /// Generate a synthetic toy dataset with exact labels.
    GenToy(GenToyArgs),
    /// Assign records to train/validation/test partitions.
    Split(SplitArgs),
    /// Train a regression model for one ECG parameter.
    TrainRegression(TrainRegressionArgs),
    /// Train the five-class classification baseline.
    TrainClassification(TrainClassificationArgs),
    /// Run transfer-learning grid cells against the classification subset.
    Transfer(TransferArgs),
    /// Render result tables, ROC dumps, and plots.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Source kind: `synthetic` (ASCII matrices) or `clinical` (header + 16-bit signal).
    #[arg(long)]
    pub kind: String,
    /// Directory of raw records.
    #[arg(long)]
    pub input: PathBuf,
    /// Labels CSV; see the README for the per-kind column layout.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct GenToyArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Optional config file ([toy] section).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Additive noise amplitude.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct SplitArgs {
    /// Record store directory.
    #[arg(long)]
    pub store: PathBuf,
    /// `real` (stratified halves A/B, then 70/10/20 per class) or
    /// `synthetic` (one global 70/10/20).
    #[arg(long)]
    pub mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct TrainRegressionArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// Manifest CSV produced by `split`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Target parameter: hr, qrs, pr, or qt.
    #[arg(long)]
    pub parameter: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional config file ([model] and [training] sections).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct TrainClassificationArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct TransferArgs {
    /// Classification record store.
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Root of pretrained regression checkpoints:
    /// `<dir>/<real-setA|synthetic>/<hr|qrs|pr|qt>/checkpoint.bin`.
    #[arg(long)]
    pub checkpoints: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; per-run seeds derive from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated key=value terms: setting, dataset, mode, param.
    #[arg(long)]
    pub grid_filter: Option<String>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    /// results.csv produced by `transfer`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Directory of reference benchmark CSVs to render alongside.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// split_stats.csv to render as a class-distribution chart.
    #[arg(long)]
    pub split_stats: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(&args),
        Command::GenToy(args) => cmd_gen_toy(&args),
        Command::Split(args) => cmd_split(&args),
        Command::TrainRegression(args) => cmd_train_regression(&args),
        Command::TrainClassification(args) => cmd_train_classification(&args),
        Command::Transfer(args) => cmd_transfer(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// run.meta guard
// ---------------------------------------------------------------------------

fn guard_output(out: &Path, resolved: &KvConfig, force: bool) -> Result<String> {
    let digest = resolved.digest();
    let meta_path = out.join(RUN_META_FILE);
    if meta_path.exists() && !force {
        return Err(Error::AlreadyExists(out.to_path_buf()));
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    Ok(digest)
}

fn write_run_meta(out: &Path, resolved: &KvConfig) -> Result<()> {
    let meta_path = out.join(RUN_META_FILE);
    let mut text = format!("digest = {}\n", resolved.digest());
    text.push_str(&resolved.render());
    fs::write(&meta_path, text).map_err(io_err(&meta_path))
}

fn load_config_file(path: Option<&Path>) -> Result<KvConfig> {
    match path {
        None => Ok(KvConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|_| Error::ConfigInvalid(format!("cannot read config {}", p.display())))?;
            KvConfig::parse(&text)
        }
    }
}

// ---------------------------------------------------------------------------
// record loading
// ---------------------------------------------------------------------------

fn load_partition(
    store: &RecordStore,
    manifest: &SplitAssignment,
    part: Assignment,
) -> Result<Vec<LabeledRecord>> {
    let metas = store.read_meta_all()?;
    let mut by_id: std::collections::BTreeMap<&str, &RecordMeta> =
        metas.iter().map(|m| (m.record_id.as_str(), m)).collect();
    let mut records = Vec::new();
    for id in manifest.ids_in(part) {
        let meta = by_id.remove(id).ok_or_else(|| {
            Error::MissingArtifact(format!("record {id} listed in manifest but not in store"))
        })?;
        let matrix = store.read_matrix(id)?;
        records.push(LabeledRecord::from_meta(matrix, meta)?);
    }
    if records.is_empty() {
        return Err(Error::EmptySplit(part.as_str().to_string()));
    }
    Ok(records)
}

fn read_manifest(path: &Path) -> Result<SplitAssignment> {
    if !path.is_file() {
        return Err(Error::MissingArtifact(format!(
            "manifest {}",
            path.display()
        )));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    SplitAssignment::from_csv(&text)
}

/// Partition names for (train, val, test) given the manifest flavor and the
/// role: regression pretraining uses Set A, classification uses Set B.
fn partitions(manifest: &SplitAssignment, classification: bool) -> (Assignment, Assignment, Assignment) {
    if manifest.is_real() {
        if classification {
            (Assignment::BTrain, Assignment::BVal, Assignment::BTest)
        } else {
            (Assignment::ATrain, Assignment::AVal, Assignment::ATest)
        }
    } else {
        (Assignment::Train, Assignment::Val, Assignment::Test)
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct LabelRow {
    labels: Vec<ClassLabel>,
    targets: [Option<f64>; 4], // hr, pr, qt, qrs
}

fn read_label_csv(path: &Path, with_classes: bool) -> Result<std::collections::BTreeMap<String, LabelRow>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let expected = if with_classes {
        "record_id,labels,hr_bpm,pr_ms,qt_ms,qrs_ms"
    } else {
        "record_id,hr_bpm,pr_ms,qt_ms,qrs_ms"
    };
    match lines.next() {
        Some(h) if h == expected => {}
        other => {
            return Err(Error::ConfigInvalid(format!(
                "labels file must start with {expected:?}, found {other:?}"
            )))
        }
    }
    let mut rows = std::collections::BTreeMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let want = if with_classes { 6 } else { 5 };
        if cells.len() != want {
            return Err(Error::ConfigInvalid(format!("bad labels row: {line:?}")));
        }
        let labels = if with_classes {
            cells[1]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<ClassLabel>>>()?
        } else {
            Vec::new()
        };
        let offset = if with_classes { 2 } else { 1 };
        let mut targets = [None; 4];
        for (i, t) in targets.iter_mut().enumerate() {
            let cell = cells[offset + i];
            if !cell.is_empty() {
                *t = Some(cell.parse().map_err(|_| {
                    Error::ConfigInvalid(format!("bad target cell {cell:?} in {line:?}"))
                })?);
            }
        }
        rows.insert(cells[0].to_string(), LabelRow { labels, targets });
    }
    Ok(rows)
}

fn list_inputs(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingArtifact(format!(
            "input directory {}",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(extension))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let mut resolved = KvConfig::default();
    resolved.set("command", "name", "ingest");
    resolved.set("command", "kind", &args.kind);
    resolved.set("command", "input", args.input.display());
    resolved.set("command", "labels", args.labels.display());
    guard_output(&args.out, &resolved, args.force)?;

    let with_classes = match args.kind.as_str() {
        "synthetic" => false,
        "clinical" => true,
        other => {
            return Err(Error::ConfigInvalid(format!(
                "unknown ingest kind {other:?} (expected synthetic or clinical)"
            )))
        }
    };
    let label_rows = read_label_csv(&args.labels, with_classes)?;
    let mut store = RecordStore::create(&args.out)?;
    let mut written = 0usize;
    let mut dropped_multi_label = 0usize;
    let mut missing_labels = 0usize;

    if with_classes {
        let headers = list_inputs(&args.input, "hea")?;
        if headers.is_empty() {
            return Err(Error::MissingArtifact(format!(
                "no .hea files under {}",
                args.input.display()
            )));
        }
        // ids paired with their raw label sets, single-label filter applied
        let mut candidates = Vec::new();
        for hea in &headers {
            let id = hea.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            match label_rows.get(id) {
                Some(row) => candidates.push((hea.clone(), row.labels.clone())),
                None => missing_labels += 1,
            }
        }
        let before = candidates.len();
        let kept = filter_single_label(candidates);
        dropped_multi_label = before - kept.len();
        for (hea, class) in kept {
            let id = hea.file_stem().and_then(|s| s.to_str()).unwrap().to_string();
            let header_text = fs::read_to_string(&hea).map_err(io_err(&hea))?;
            let header = parse_wfdb_header(&header_text)?;
            let dat = hea.with_extension("dat");
            let bytes = fs::read(&dat).map_err(io_err(&dat))?;
            let raw = decode_signal(&bytes, &header)?;
            let eight = select_leads(&raw)?;
            let matrix = normalize(&eight)?;
            let row = &label_rows[&id];
            store.write_record(
                &matrix,
                &RecordMeta {
                    record_id: id,
                    class_label: Some(class.as_str().to_string()),
                    hr_bpm: row.targets[0],
                    pr_ms: row.targets[1],
                    qt_ms: row.targets[2],
                    qrs_ms: row.targets[3],
                },
            )?;
            written += 1;
        }
    } else {
        let files = list_inputs(&args.input, "asc")?;
        if files.is_empty() {
            return Err(Error::MissingArtifact(format!(
                "no .asc files under {}",
                args.input.display()
            )));
        }
        for path in &files {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap().to_string();
            let Some(row) = label_rows.get(&id) else {
                missing_labels += 1;
                continue;
            };
            let file = fs::File::open(path).map_err(io_err(path))?;
            let raw = parse_asc(std::io::BufReader::new(file))?;
            let matrix = normalize(&raw)?;
            store.write_record(
                &matrix,
                &RecordMeta {
                    record_id: id,
                    class_label: None,
                    hr_bpm: row.targets[0],
                    pr_ms: row.targets[1],
                    qt_ms: row.targets[2],
                    qrs_ms: row.targets[3],
                },
            )?;
            written += 1;
        }
    }

    write_run_meta(&args.out, &resolved)?;
    println!(
        "ingested {written} records ({dropped_multi_label} multi-label dropped, {missing_labels} without label rows)"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-toy
// ---------------------------------------------------------------------------

fn toy_spec_from(cfg: &KvConfig, args: &GenToyArgs) -> Result<ToySpec> {
    let mut spec = ToySpec::default();
    if let Some(v) = cfg.get_usize("toy", "count")? {
        spec.count = v;
    }
    if let Some(v) = cfg.get_f64("toy", "noise")? {
        spec.noise_amplitude = v;
    }
    if let Some(v) = cfg.get_u64("toy", "seed")? {
        spec.seed = v;
    }
    for (key, field) in [
        ("hr_range", &mut spec.hr_range),
        ("pr_range", &mut spec.pr_range),
        ("qt_range", &mut spec.qt_range),
        ("qrs_range", &mut spec.qrs_range),
    ] {
        if let Some(text) = cfg.get("toy", key) {
            let parts: Vec<&str> = text.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::ConfigInvalid(format!("[toy] {key}: expected lo,hi")));
            }
            let lo = parts[0]
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("[toy] {key}: bad number")))?;
            let hi = parts[1]
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("[toy] {key}: bad number")))?;
            *field = (lo, hi);
        }
    }
    if let Some(v) = args.count {
        spec.count = v;
    }
    if let Some(v) = args.noise {
        spec.noise_amplitude = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    Ok(spec)
}

pub fn cmd_gen_toy(args: &GenToyArgs) -> Result<()> {
    let cfg = load_config_file(args.config.as_deref())?;
    let spec = toy_spec_from(&cfg, args)?;
    let mut resolved = KvConfig::default();
    resolved.set("command", "name", "gen-toy");
    resolved.set("toy", "count", spec.count);
    resolved.set("toy", "noise", spec.noise_amplitude);
    resolved.set("toy", "seed", spec.seed);
    guard_output(&args.out, &resolved, args.force)?;

    let stats = gen_toy(&spec, &args.out)?;
    write_run_meta(&args.out, &resolved)?;
    println!(
        "generated {} records (noise amplitude {}, label noise floor {})",
        stats.records, stats.noise_amplitude, stats.label_noise_floor
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

pub fn cmd_split(args: &SplitArgs) -> Result<()> {
    let mut resolved = KvConfig::default();
    resolved.set("command", "name", "split");
    resolved.set("command", "store", args.store.display());
    resolved.set("command", "mode", &args.mode);
    resolved.set("command", "seed", args.seed);
    guard_output(&args.out, &resolved, args.force)?;

    let store = RecordStore::open(&args.store)?;
    let metas = store.read_meta_all()?;
    if metas.is_empty() {
        return Err(Error::EmptySplit("store has no records".into()));
    }

    let assignment = match args.mode.as_str() {
        "real" => {
            let labeled: Result<Vec<(String, ClassLabel)>> = metas
                .iter()
                .map(|m| {
                    let class = m
                        .class_label
                        .as_deref()
                        .ok_or_else(|| {
                            Error::ConfigInvalid(format!(
                                "record {} has no class label; real-mode split needs one",
                                m.record_id
                            ))
                        })?
                        .parse::<ClassLabel>()?;
                    Ok((m.record_id.clone(), class))
                })
                .collect();
            let labeled = labeled?;
            let (assignment, warnings) = assign_real(&labeled, args.seed);
            for w in warnings {
                eprintln!("warning: {w}");
            }
            assignment
        }
        "synthetic" => {
            let ids: Vec<String> = metas.iter().map(|m| m.record_id.clone()).collect();
            assign_synthetic(&ids, args.seed)
        }
        other => {
            return Err(Error::ConfigInvalid(format!(
                "unknown split mode {other:?} (expected real or synthetic)"
            )))
        }
    };

    let manifest_path = args.out.join("manifest.csv");
    fs::write(&manifest_path, assignment.to_csv()).map_err(io_err(&manifest_path))?;
    let labeled: Vec<(String, Option<ClassLabel>)> = metas
        .iter()
        .map(|m| {
            let class = m.class_label.as_deref().and_then(|s| s.parse().ok());
            (m.record_id.clone(), class)
        })
        .collect();
    let stats_path = args.out.join("split_stats.csv");
    fs::write(&stats_path, split_stats_csv(&labeled, &assignment)).map_err(io_err(&stats_path))?;
    write_run_meta(&args.out, &resolved)?;
    println!(
        "split {} records (manifest digest {})",
        assignment.assignments.len(),
        assignment.digest()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// training commands
// ---------------------------------------------------------------------------

fn resolve_training(
    cfg: &KvConfig,
    head: HeadKind,
) -> Result<(ModelSpec, TrainConfig)> {
    let spec = ModelSpec::parse_from(cfg, head)?;
    let train = TrainConfig::parse_from(cfg)?;
    Ok((spec, train))
}

fn train_command(
    store_path: &Path,
    manifest_path: &Path,
    out: &Path,
    config: Option<&Path>,
    seed: u64,
    force: bool,
    task: Task,
) -> Result<()> {
    let cfg = load_config_file(config)?;
    let head = match task {
        Task::Classification => HeadKind::Classification(crate::dataset::CLASS_COUNT),
        Task::Regression(_) => HeadKind::Regression,
    };
    let (spec, train_cfg) = resolve_training(&cfg, head)?;

    let mut resolved = KvConfig::default();
    resolved.set("command", "name", match task {
        Task::Classification => "train-classification".to_string(),
        Task::Regression(p) => format!("train-regression:{}", p.key()),
    });
    resolved.set("command", "store", store_path.display());
    resolved.set("command", "manifest", manifest_path.display());
    resolved.set("command", "seed", seed);
    spec.render_into(&mut resolved);
    train_cfg.render_into(&mut resolved);
    let digest = guard_output(out, &resolved, force)?;

    let store = RecordStore::open(store_path)?;
    let manifest = read_manifest(manifest_path)?;
    let classification = task == Task::Classification;
    let (train_part, val_part, _) = partitions(&manifest, classification);
    let train_records = load_partition(&store, &manifest, train_part)?;
    let val_records = load_partition(&store, &manifest, val_part)?;

    let network = Network::build(&spec, seed)?;
    let summary_path = out.join("model_summary.txt");
    fs::write(&summary_path, network.summary()).map_err(io_err(&summary_path))?;
    let outcome = fit(network, &train_records, &val_records, task, &train_cfg, seed)?;
    if outcome.excluded_train > 0 {
        eprintln!(
            "note: {} records excluded from {} (missing target)",
            outcome.excluded_train,
            train_part.as_str()
        );
    }

    checkpoint::save(&out.join("checkpoint.bin"), &outcome.best, &digest)?;
    let history_path = out.join("history.csv");
    fs::write(&history_path, outcome.last.history.to_csv()).map_err(io_err(&history_path))?;
    write_run_meta(out, &resolved)?;
    println!(
        "trained {} epochs; best val {} {} at epoch {} (manifest digest {})",
        outcome.last.epoch,
        outcome.last.history.val_metric_name,
        outcome.best.best_val_metric,
        outcome.best.best_epoch,
        manifest.digest()
    );
    Ok(())
}

pub fn cmd_train_regression(args: &TrainRegressionArgs) -> Result<()> {
    let parameter: RegressionParam = args.parameter.parse()?;
    train_command(
        &args.store,
        &args.manifest,
        &args.out,
        args.config.as_deref(),
        args.seed,
        args.force,
        Task::Regression(parameter),
    )
}

pub fn cmd_train_classification(args: &TrainClassificationArgs) -> Result<()> {
    train_command(
        &args.store,
        &args.manifest,
        &args.out,
        args.config.as_deref(),
        args.seed,
        args.force,
        Task::Classification,
    )
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

pub fn cmd_transfer(args: &TransferArgs) -> Result<()> {
    let cfg = load_config_file(args.config.as_deref())?;
    let (baseline_spec, train_cfg) =
        resolve_training(&cfg, HeadKind::Classification(crate::dataset::CLASS_COUNT))?;

    let mut resolved = KvConfig::default();
    resolved.set("command", "name", "transfer");
    resolved.set("command", "store", args.store.display());
    resolved.set("command", "manifest", args.manifest.display());
    resolved.set("command", "checkpoints", args.checkpoints.display());
    resolved.set("command", "seed", args.seed);
    if let Some(f) = &args.grid_filter {
        resolved.set("command", "grid_filter", f);
    }
    baseline_spec.render_into(&mut resolved);
    train_cfg.render_into(&mut resolved);
    let digest = guard_output(&args.out, &resolved, args.force)?;

    let store = RecordStore::open(&args.store)?;
    let manifest = read_manifest(&args.manifest)?;
    let (train_part, val_part, test_part) = partitions(&manifest, true);
    let train_records = load_partition(&store, &manifest, train_part)?;
    let val_records = load_partition(&store, &manifest, val_part)?;
    let test_records = load_partition(&store, &manifest, test_part)?;

    let env = TransferEnv {
        train: &train_records,
        val: &val_records,
        test: &test_records,
        config: train_cfg,
        manifest_digest: manifest.digest(),
        baseline_spec,
    };

    let grid = build_grid(args.seed);
    let runs = match &args.grid_filter {
        Some(filter) => filter_grid(&grid, filter)?,
        None => grid,
    };
    if runs.is_empty() {
        return Err(Error::ConfigInvalid(
            "grid filter removed every run".into(),
        ));
    }

    let mut rows = Vec::new();
    for run in runs {
        let result = run_transfer(run, &args.checkpoints, &env)?;
        let (setting, parameter) = run.labels();
        let cell_dir = args.out.join("cells").join(run.slug());
        fs::create_dir_all(&cell_dir).map_err(io_err(&cell_dir))?;
        checkpoint::save(&cell_dir.join("checkpoint.bin"), &result.best_state, &digest)?;
        let history_path = cell_dir.join("history.csv");
        fs::write(&history_path, result.history.to_csv()).map_err(io_err(&history_path))?;
        if let Some(scores) = &result.test_scores {
            let scores_path = cell_dir.join("test_scores.csv");
            fs::write(&scores_path, report::scores_to_csv(scores)).map_err(io_err(&scores_path))?;
        }
        let row = report::ResultRow {
            setting: setting.clone(),
            parameter: parameter.clone(),
            train_accuracy: result.train_metrics.accuracy.unwrap_or(f64::NAN),
            train_auc: result.train_metrics.auc.unwrap_or(f64::NAN),
            val_accuracy: result.val_metrics.accuracy.unwrap_or(f64::NAN),
            val_auc: result.val_metrics.auc.unwrap_or(f64::NAN),
            test_accuracy: result.test_metrics.accuracy.unwrap_or(f64::NAN),
            test_auc: result.test_metrics.auc.unwrap_or(f64::NAN),
            seed: run.seed(),
            config_digest: digest.clone(),
            manifest_digest: result.manifest_digest.clone(),
        };
        println!(
            "{setting} {parameter}: test accuracy {:.3}, test AUC {:.3}",
            row.test_accuracy, row.test_auc
        );
        rows.push(row);
    }

    let results_path = args.out.join("results.csv");
    fs::write(&results_path, report::results_to_csv(&rows)).map_err(io_err(&results_path))?;
    write_run_meta(&args.out, &resolved)?;
    println!("wrote {} result rows", rows.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut resolved = KvConfig::default();
    resolved.set("command", "name", "report");
    resolved.set("command", "results", args.results.display());
    guard_output(&args.out, &resolved, args.force)?;

    if !args.results.is_file() {
        return Err(Error::MissingArtifact(format!(
            "results file {}",
            args.results.display()
        )));
    }
    let rows = report::results_from_csv(
        &fs::read_to_string(&args.results).map_err(io_err(&args.results))?,
    )?;
    report::check_manifest_digests(&rows)?;

    let mut tables = String::new();
    for (dataset, title) in [
        ("real-setA", "Real-to-real transfer (Set A -> Set B)"),
        ("synthetic", "Synthetic-to-real transfer"),
    ] {
        if rows.iter().any(|r| r.setting.starts_with(dataset)) {
            tables.push_str(&report::render_transfer_markdown(title, dataset, &rows));
            tables.push('\n');
        }
    }
    if tables.is_empty() && !rows.is_empty() {
        tables.push_str(&report::render_transfer_markdown("Results", "", &rows));
    }
    let tables_path = args.out.join("transfer_tables.md");
    fs::write(&tables_path, &tables).map_err(io_err(&tables_path))?;

    // ROC dumps and curves from per-cell score files next to the results
    let plots_dir = args.out.join("plots");
    fs::create_dir_all(&plots_dir).map_err(io_err(&plots_dir))?;
    if let Some(results_dir) = args.results.parent() {
        let cells_dir = results_dir.join("cells");
        if cells_dir.is_dir() {
            let mut cells: Vec<PathBuf> = fs::read_dir(&cells_dir)
                .map_err(io_err(&cells_dir))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.join("test_scores.csv").is_file())
                .collect();
            cells.sort();
            for cell in cells {
                let slug = cell.file_name().and_then(|s| s.to_str()).unwrap_or("cell");
                let scores = report::scores_from_csv(
                    &fs::read_to_string(cell.join("test_scores.csv"))
                        .map_err(io_err(cell.join("test_scores.csv")))?,
                )?;
                let roc_path = args.out.join(format!("roc_{slug}.csv"));
                fs::write(&roc_path, crate::metrics::roc_points_csv(&scores))
                    .map_err(io_err(&roc_path))?;
                let mut curves = Vec::new();
                for class in ClassLabel::ALL {
                    let column = scores.column(class.index());
                    let positives: Vec<bool> = scores
                        .labels()
                        .iter()
                        .map(|&l| l == class.index())
                        .collect();
                    if let Ok((curve, auc)) = crate::metrics::roc_binary(&column, &positives) {
                        curves.push((
                            format!("{} (AUC {auc:.3})", class.as_str()),
                            curve.points.iter().map(|p| (p.fpr, p.tpr)).collect(),
                        ));
                    }
                }
                let svg_path = plots_dir.join(format!("roc_{slug}.svg"));
                fs::write(&svg_path, report::svg::roc_svg(&format!("Test ROC: {slug}"), &curves))
                    .map_err(io_err(&svg_path))?;
            }
        }
    }

    // class-distribution chart from split stats
    if let Some(stats_path) = &args.split_stats {
        let text = fs::read_to_string(stats_path).map_err(io_err(stats_path))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::ConfigInvalid("empty split stats".into()))?;
        let parts: Vec<String> = header.split(',').skip(1).map(String::from).collect();
        let mut class_names = Vec::new();
        let mut per_part: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != parts.len() + 1 {
                return Err(Error::ConfigInvalid(format!("bad stats row: {line:?}")));
            }
            class_names.push(cells[0].to_string());
            for (i, cell) in cells[1..].iter().enumerate() {
                per_part[i].push(cell.parse().map_err(|_| {
                    Error::ConfigInvalid(format!("bad count {cell:?} in {line:?}"))
                })?);
            }
        }
        let names: Vec<&str> = class_names.iter().map(String::as_str).collect();
        let sets: Vec<(String, Vec<usize>)> =
            parts.into_iter().zip(per_part).collect();
        let svg_path = plots_dir.join("class_distribution.svg");
        fs::write(&svg_path, report::svg::class_distribution_svg(&names, &sets))
            .map_err(io_err(&svg_path))?;
    }

    // reference benchmark tables
    if let Some(reference) = &args.reference {
        let mut out = String::new();
        let reg = reference.join("regression_models.csv");
        if reg.is_file() {
            let rows = report::regression_models_from_csv(
                &fs::read_to_string(&reg).map_err(io_err(&reg))?,
            )?;
            out.push_str(&report::render_regression_models_markdown(&rows));
            out.push('\n');
        }
        let clf = reference.join("classification_models.csv");
        if clf.is_file() {
            let rows = report::classification_models_from_csv(
                &fs::read_to_string(&clf).map_err(io_err(&clf))?,
            )?;
            out.push_str(&report::render_classification_models_markdown(&rows));
            out.push('\n');
        }
        for (file, title) in [
            ("transfer_real.csv", "Reference: real-to-real transfer"),
            ("transfer_synthetic.csv", "Reference: synthetic-to-real transfer"),
        ] {
            let path = reference.join(file);
            if path.is_file() {
                let rows = report::reference_transfer_from_csv(
                    &fs::read_to_string(&path).map_err(io_err(&path))?,
                )?;
                out.push_str(&report::render_reference_transfer_markdown(title, &rows));
                out.push('\n');
            }
        }
        if out.is_empty() {
            return Err(Error::MissingArtifact(format!(
                "no reference CSVs under {}",
                reference.display()
            )));
        }
        let ref_path = args.out.join("reference_tables.md");
        fs::write(&ref_path, out).map_err(io_err(&ref_path))?;
    }

    write_run_meta(&args.out, &resolved)?;
    println!("report written to {}", args.out.display());
    Ok(())
}
