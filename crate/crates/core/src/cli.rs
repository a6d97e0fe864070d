//! Command-line surface: `train`, `eval`, `baseline`, `gradcheck`, `bench`.
//!
//! Hyperparameters resolve as flags over `--config` file over defaults. The
//! resolved [`RunConfig`] can be dumped with `--print-config`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::checkpoint::{load_model, save_model};
use crate::data::{load_ucr, LabeledDataset};
use crate::dtw::{baseline_evaluate, DtwConfig};
use crate::error::{Error, Result};
use crate::gradcheck::{self, GradReport};
use crate::model::{evaluate, train_with, Hyperparameters};
use crate::published;
use crate::report::{render_report, MeasuredRow, ReportEntry, Source};

pub const METRICS_HEADER: &str =
    "epoch,data_loss,l1_penalty,l2_penalty,regularized_cost,train_accuracy,seconds";

#[derive(Debug, Parser)]
#[command(name = "srdcnn", version, about = "Sparse-regularized 1D CNN for time-series classification")]
pub struct Cli {
    /// Emit results, and errors, as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write a checkpoint plus per-epoch metrics.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a test file.
    Eval(EvalArgs),
    /// DTW 1-NN accuracy on a train/test pair.
    Baseline(BaselineArgs),
    /// Finite-difference gradient checks.
    Gradcheck(GradcheckArgs),
    /// Train and evaluate on named datasets and compare with published numbers.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Default)]
pub struct HyperArgs {
    /// JSON file of hyperparameters; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Optional test file; its accuracy is reported after training.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics CSV path [default: checkpoint path with a .metrics.csv suffix].
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long)]
    pub znormalize: bool,
    /// Write 0 in the seconds column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Report JSON to append the measured accuracy to.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Dataset name for the report [default: derived from the test file name].
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub znormalize: bool,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Sakoe-Chiba window as a fraction of the series length.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    #[arg(long)]
    pub znormalize: bool,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Only check the tiny end-to-end model.
    #[arg(long)]
    pub tiny: bool,
    #[arg(long, default_value_t = gradcheck::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = gradcheck::DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dataset name, looked up as <data-dir>/<Name>_TRAIN.tsv and _TEST.tsv.
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<String>,
    #[arg(long, default_value = "data")]
    pub data_dir: PathBuf,
    /// Number of training seeds averaged per dataset, starting at --seed.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Also write the report JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub znormalize: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

/// Everything a run depends on, after defaults, config file and flags merge.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub checkpoint_path: Option<PathBuf>,
    pub metrics_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub datasets: Vec<String>,
    pub data_dir: Option<PathBuf>,
    pub hyperparameters: Option<Hyperparameters>,
    pub znormalize: bool,
    pub seed: u64,
    pub seeds: Option<u64>,
    pub window: Option<f64>,
    pub timing: bool,
    pub threshold: Option<f64>,
    pub tiny: bool,
}

impl RunConfig {
    fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            train_path: None,
            test_path: None,
            checkpoint_path: None,
            metrics_path: None,
            report_path: None,
            datasets: Vec::new(),
            data_dir: None,
            hyperparameters: None,
            znormalize: false,
            seed: 0,
            seeds: None,
            window: None,
            timing: true,
            threshold: None,
            tiny: false,
        }
    }
}

fn resolve_hyper(args: &HyperArgs) -> Result<Hyperparameters> {
    let mut hp = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?
        }
        None => Hyperparameters::default(),
    };
    if let Some(v) = args.epochs {
        hp.epochs = v;
    }
    if let Some(v) = args.lr {
        hp.lr = v;
    }
    if let Some(v) = args.alpha1 {
        hp.alpha1 = v;
    }
    if let Some(v) = args.alpha2 {
        hp.alpha2 = v;
    }
    if let Some(v) = args.seed {
        hp.seed = v;
    }
    hp.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(hp)
}

fn default_metrics_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".metrics.csv");
    PathBuf::from(s)
}

/// Dataset name from a file like `Coffee_TEST.tsv`.
fn dataset_name(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    for suffix in ["_TEST", "_TRAIN", "_test", "_train"] {
        if let Some(base) = stem.strip_suffix(suffix) {
            return base.to_string();
        }
    }
    stem.to_string()
}

fn bench_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    let canonical = published::lookup(name).map_or(name, |r| r.dataset.as_str());
    let pick = |split: &str| {
        let candidates = [canonical, name]
            .into_iter()
            .flat_map(|n| ["tsv", "txt", "csv"].map(|ext| dir.join(format!("{n}_{split}.{ext}"))));
        let all: Vec<PathBuf> = candidates.collect();
        all.iter().find(|p| p.exists()).cloned().unwrap_or_else(|| all[0].clone())
    };
    (pick("TRAIN"), pick("TEST"))
}

impl Cli {
    pub fn resolve(&self) -> Result<RunConfig> {
        let cfg = match &self.command {
            Command::Train(a) => {
                let hp = resolve_hyper(&a.hyper)?;
                RunConfig {
                    train_path: Some(a.train.clone()),
                    test_path: a.test.clone(),
                    checkpoint_path: Some(a.out.clone()),
                    metrics_path: Some(a.metrics.clone().unwrap_or_else(|| default_metrics_path(&a.out))),
                    seed: hp.seed,
                    hyperparameters: Some(hp),
                    znormalize: a.znormalize,
                    timing: !a.no_timing,
                    ..RunConfig::new("train")
                }
            }
            Command::Eval(a) => RunConfig {
                test_path: Some(a.test.clone()),
                checkpoint_path: Some(a.model.clone()),
                report_path: a.report.clone(),
                datasets: vec![a.dataset.clone().unwrap_or_else(|| dataset_name(&a.test))],
                znormalize: a.znormalize,
                ..RunConfig::new("eval")
            },
            Command::Baseline(a) => RunConfig {
                train_path: Some(a.train.clone()),
                test_path: Some(a.test.clone()),
                window: Some(a.window),
                znormalize: a.znormalize,
                ..RunConfig::new("baseline")
            },
            Command::Gradcheck(a) => RunConfig {
                seed: a.seed,
                threshold: Some(a.threshold),
                tiny: a.tiny,
                ..RunConfig::new("gradcheck")
            },
            Command::Bench(a) => {
                let hp = resolve_hyper(&a.hyper)?;
                RunConfig {
                    datasets: a.datasets.clone(),
                    data_dir: Some(a.data_dir.clone()),
                    report_path: a.report.clone(),
                    seed: hp.seed,
                    seeds: Some(a.seeds),
                    hyperparameters: Some(hp),
                    window: Some(a.window),
                    znormalize: a.znormalize,
                    ..RunConfig::new("bench")
                }
            }
        };
        if let Some(w) = cfg.window {
            DtwConfig::with_window(w).map_err(|e| Error::Usage(e.to_string()))?;
        }
        if cfg.seeds == Some(0) {
            return Err(Error::Usage("--seeds must be at least 1".into()));
        }
        Ok(cfg)
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Usage(format!("no such file: {}", path.display())))
    }
}

fn load(path: &Path, znormalize: bool) -> Result<LabeledDataset> {
    let data = load_ucr(path)?;
    Ok(if znormalize { data.znormalized() } else { data })
}

fn format_record(r: &crate::model::EpochRecord, timing: bool) -> String {
    let seconds = if timing { r.seconds } else { 0.0 };
    format!(
        "{},{},{},{},{},{},{}",
        r.epoch, r.data_loss, r.l1_term, r.l2_term, r.regularized_cost, r.train_accuracy, seconds
    )
}

/// What a command prints on success.
struct Outcome {
    text: String,
    json: serde_json::Value,
    success: bool,
}

fn run_train(cfg: &RunConfig, json: bool) -> Result<Outcome> {
    let train_path = cfg.train_path.as_deref().unwrap();
    let out = cfg.checkpoint_path.as_deref().unwrap();
    let metrics_path = cfg.metrics_path.as_deref().unwrap();
    let hp = cfg.hyperparameters.as_ref().unwrap();
    require_file(train_path)?;
    if let Some(t) = &cfg.test_path {
        require_file(t)?;
    }
    let train = load(train_path, cfg.znormalize)?;
    let test = cfg.test_path.as_deref().map(|p| load(p, cfg.znormalize)).transpose()?;

    let file = File::create(metrics_path).map_err(|e| Error::io(metrics_path, e))?;
    let mut csv = BufWriter::new(file);
    let io_err = |e| Error::io(metrics_path, e);
    writeln!(csv, "{METRICS_HEADER}").map_err(io_err)?;
    csv.flush().map_err(io_err)?;
    let (model, history) = train_with(&train, hp, |record, _| {
        writeln!(csv, "{}", format_record(record, cfg.timing)).map_err(io_err)?;
        csv.flush().map_err(io_err)?;
        if !json && record.epoch % 100 == 0 {
            eprintln!(
                "epoch {:>5}  cost {:.6}  train acc {:.4}",
                record.epoch, record.regularized_cost, record.train_accuracy
            );
        }
        Ok(())
    })?;
    save_model(&model, out)?;

    let last = history.records.last().expect("epochs >= 1");
    let test_acc = test.as_ref().map(|t| evaluate(&model, t)).transpose()?;
    let mut text = format!(
        "trained {} epochs: cost {:.6}, train accuracy {:.4}\ncheckpoint {}\nmetrics {}\n",
        last.epoch,
        last.regularized_cost,
        last.train_accuracy,
        out.display(),
        metrics_path.display()
    );
    if let Some(acc) = test_acc {
        text.push_str(&format!("test accuracy {acc:.4}\n"));
    }
    Ok(Outcome {
        text,
        json: serde_json::json!({
            "command": "train",
            "epochs": last.epoch,
            "regularized_cost": last.regularized_cost,
            "train_accuracy": last.train_accuracy,
            "test_accuracy": test_acc,
            "checkpoint": out,
            "metrics": metrics_path,
        }),
        success: true,
    })
}

fn append_report(path: &Path, new: &[ReportEntry]) -> Result<()> {
    let mut entries: Vec<ReportEntry> = if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            Vec::new()
        } else {
            serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: not a report array: {e}", path.display())))?
        }
    } else {
        Vec::new()
    };
    entries.extend_from_slice(new);
    let mut text = serde_json::to_string_pretty(&entries).expect("entries serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run_eval(cfg: &RunConfig) -> Result<Outcome> {
    let model_path = cfg.checkpoint_path.as_deref().unwrap();
    let test_path = cfg.test_path.as_deref().unwrap();
    require_file(model_path)?;
    require_file(test_path)?;
    let model = load_model(model_path)?;
    let test = load(test_path, cfg.znormalize)?;
    let acc = evaluate(&model, &test)?;
    let dataset = cfg.datasets[0].clone();
    if let Some(report) = &cfg.report_path {
        append_report(
            report,
            &[ReportEntry {
                dataset: dataset.clone(),
                source: Source::Measured,
                method: published::SRDCNN.to_string(),
                accuracy: acc,
                citation: format!("measured by this tool; checkpoint {}", model_path.display()),
            }],
        )?;
    }
    Ok(Outcome {
        text: format!("{dataset}: test accuracy {acc:.4} ({} instances)\n", test.len()),
        json: serde_json::json!({
            "command": "eval",
            "dataset": dataset,
            "accuracy": acc,
            "instances": test.len(),
        }),
        success: true,
    })
}

fn run_baseline(cfg: &RunConfig) -> Result<Outcome> {
    let train_path = cfg.train_path.as_deref().unwrap();
    let test_path = cfg.test_path.as_deref().unwrap();
    require_file(train_path)?;
    require_file(test_path)?;
    let train = load(train_path, cfg.znormalize)?;
    let test = load(test_path, cfg.znormalize)?;
    let window = cfg.window.unwrap();
    let acc = baseline_evaluate(&train, &test, &DtwConfig::with_window(window)?)?;
    Ok(Outcome {
        text: format!("DTW 1-NN (window {window}) test accuracy {acc:.4}\n"),
        json: serde_json::json!({
            "command": "baseline",
            "window": window,
            "accuracy": acc,
        }),
        success: true,
    })
}

fn run_gradcheck(cfg: &RunConfig, step: f64) -> Result<Outcome> {
    let threshold = cfg.threshold.unwrap();
    let tiny = gradcheck::check_tiny_model(cfg.seed, step, threshold)?;
    let report = if cfg.tiny {
        tiny
    } else {
        let layers = gradcheck::check_all_layers(cfg.seed, step, threshold)?;
        GradReport::combine(vec![("layers".into(), layers), ("tiny_model".into(), tiny)], threshold)
    };
    Ok(Outcome {
        text: format!("{report}\n"),
        json: serde_json::json!({
            "command": "gradcheck",
            "passed": report.passed,
            "max_rel_error": report.max_rel_error,
            "threshold": report.threshold,
            "blocks": report.blocks.iter().map(|b| serde_json::json!({
                "name": b.name,
                "max_rel_error": b.max_rel_error,
                "checked": b.checked,
                "skipped": b.skipped,
            })).collect::<Vec<_>>(),
        }),
        success: report.passed,
    })
}

fn run_bench(cfg: &RunConfig, json: bool) -> Result<Outcome> {
    let hp = cfg.hyperparameters.as_ref().unwrap();
    let seeds = cfg.seeds.unwrap();
    let dtw = DtwConfig::with_window(cfg.window.unwrap())?;
    let dir = cfg.data_dir.as_deref().unwrap();
    let pairs: Vec<(String, PathBuf, PathBuf)> = cfg
        .datasets
        .iter()
        .map(|name| {
            let (train, test) = bench_paths(dir, name);
            (name.clone(), train, test)
        })
        .collect();
    for (_, train, test) in &pairs {
        require_file(train)?;
        require_file(test)?;
    }

    let mut rows = Vec::new();
    for (name, train_path, test_path) in &pairs {
        let train = load(train_path, cfg.znormalize)?;
        let test = load(test_path, cfg.znormalize)?;
        let mut total = 0.0;
        for s in 0..seeds {
            let seed_hp = Hyperparameters {
                seed: hp.seed + s,
                ..hp.clone()
            };
            let (model, _) = train_with(&train, &seed_hp, |_, _| Ok(()))?;
            let acc = evaluate(&model, &test)?;
            if !json {
                eprintln!("{name}: seed {} test accuracy {acc:.4}", seed_hp.seed);
            }
            total += acc;
        }
        let dtw_acc = baseline_evaluate(&train, &test, &dtw)?;
        rows.push(MeasuredRow {
            dataset: name.clone(),
            srdcnn: Some(total / seeds as f64),
            dtw: Some(dtw_acc),
            note: format!(
                "mean over {seeds} seed(s) from {}, {} epochs; DTW window {}",
                hp.seed, hp.epochs, dtw.window
            ),
        });
    }
    let report = render_report(&rows);
    if let Some(path) = &cfg.report_path {
        fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))?;
    }
    Ok(Outcome {
        text: report.text.clone(),
        json: serde_json::to_value(&report.entries).expect("entries serialize"),
        success: true,
    })
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    match &cli.command {
        Command::Train(_) => run_train(cfg, cli.json),
        Command::Eval(_) => run_eval(cfg),
        Command::Baseline(_) => run_baseline(cfg),
        Command::Gradcheck(a) => run_gradcheck(cfg, a.step),
        Command::Bench(_) => run_bench(cfg, cli.json),
    }
}

fn report_error(err: &Error, json: bool) {
    if json {
        let obj = serde_json::json!({
            "error": { "kind": err.kind(), "message": err.to_string() }
        });
        eprintln!("{obj}");
    } else {
        eprintln!("error: {err}");
    }
}

/// Exit status for a failed run: 2 for usage problems, 1 otherwise.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => 2,
        _ => 1,
    }
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) if json => {
            report_error(&Error::Usage(e.render().to_string().trim().to_string()), true);
            return 2;
        }
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let cfg = match cli.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            report_error(&e, cli.json);
            return exit_code(&e);
        }
    };
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return 0;
    }
    match execute(&cli, &cfg) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", outcome.json);
            } else {
                print!("{}", outcome.text);
            }
            if outcome.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            report_error(&e, cli.json);
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("srdcnn").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("hp.json");
        fs::write(&cfg_path, r#"{"epochs": 7, "lr": 0.5, "alpha1": 0.3}"#).unwrap();
        let cli = parse(&[
            "train", "--train", "a.tsv", "--out", "m.json",
            "--config", cfg_path.to_str().unwrap(), "--lr", "0.01",
        ]);
        let hp = cli.resolve().unwrap().hyperparameters.unwrap();
        assert_eq!(hp.epochs, 7);
        assert_eq!(hp.lr, 0.01);
        assert_eq!(hp.alpha1, 0.3);
        assert_eq!(hp.alpha2, Hyperparameters::default().alpha2);
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("hp.json");
        fs::write(&cfg_path, r#"{"epoch": 7}"#).unwrap();
        let cli = parse(&["train", "--train", "a", "--out", "b", "--config", cfg_path.to_str().unwrap()]);
        assert!(matches!(cli.resolve(), Err(Error::Usage(_))));
    }

    #[test]
    fn metrics_path_defaults_next_to_checkpoint() {
        let cfg = parse(&["train", "--train", "a.tsv", "--out", "run/m.json"]).resolve().unwrap();
        assert_eq!(cfg.metrics_path.unwrap(), PathBuf::from("run/m.json.metrics.csv"));
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn dataset_names_from_files() {
        assert_eq!(dataset_name(Path::new("data/Coffee_TEST.tsv")), "Coffee");
        assert_eq!(dataset_name(Path::new("x/foo.txt")), "foo");
    }

    #[test]
    fn invalid_window_rejected_before_running() {
        let cli = parse(&["baseline", "--train", "a", "--test", "b", "--window", "1.5"]);
        assert!(matches!(cli.resolve(), Err(Error::Usage(_))));
    }

    #[test]
    fn record_formatting() {
        let r = crate::model::EpochRecord {
            epoch: 3,
            data_loss: 0.5,
            l1_term: 0.25,
            l2_term: 0.125,
            regularized_cost: 0.875,
            train_accuracy: 1.0,
            seconds: 0.01,
        };
        assert_eq!(format_record(&r, false), "3,0.5,0.25,0.125,0.875,1,0");
        assert_eq!(format_record(&r, true), "3,0.5,0.25,0.125,0.875,1,0.01");
    }
}
