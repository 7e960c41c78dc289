//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE`, a plain `key = value` file whose
//! keys are long flag names without the dashes. Flags given on the command
//! line override values from the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{default_theta_grid, metrics, run_experiment, ExperimentConfig};
use crate::features::{build_vocab, TokenizerConfig};
use crate::gradcheck::{run_suite, DEFAULT_SEED, TOLERANCE};
use crate::graph::io::{load_dir, load_hsn, write_dir, DatasetPaths};
use crate::graph::stats::stats;
use crate::graph::synth::{generate_synthetic, SynthConfig};
use crate::graph::{derive_entity_labels, split_folds, NodeType};
use crate::train::{fit, prepare_inputs, write_trace, Mode, ModelDims, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "credence", version, about = "Credibility inference over article/creator/subject graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset and print its size.
    Ingest(IngestArgs),
    /// Generate a synthetic dataset with planted credibility signal.
    Synth(SynthArgs),
    /// Write dataset statistics as CSV files.
    Stats(StatsArgs),
    /// Fit one (theta, fold) cell and write checkpoint, vocabulary and trace.
    Train(TrainArgs),
    /// Run the theta x fold protocol and write metric reports.
    Eval(EvalArgs),
    /// Finite-difference check of the full loss on a tiny graph.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// key=value file with defaults for any long flag
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct IngestArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    articles: PathBuf,
    #[arg(long)]
    creators: PathBuf,
    #[arg(long)]
    subjects: PathBuf,
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 600)]
    articles: usize,
    #[arg(long, default_value_t = 100)]
    creators: usize,
    #[arg(long, default_value_t = 20)]
    subjects: usize,
    #[arg(long, default_value_t = 0.8)]
    strength: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct StatsArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Tokens listed per direction in the word contrast
    #[arg(long, default_value_t = 20)]
    top: usize,
}

#[derive(Debug, Args)]
struct Hyper {
    /// Explicit word-set size per node category
    #[arg(long, default_value_t = 200)]
    d: usize,
    #[arg(long, default_value_t = 64)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 64)]
    latent_dim: usize,
    #[arg(long, default_value_t = 64)]
    state_dim: usize,
    /// Token sequence length
    #[arg(long, default_value_t = 48)]
    q: usize,
    /// Diffusion rounds
    #[arg(long, default_value_t = 2, value_parser = at_least_one)]
    rounds: usize,
    /// Ablation: evaluate every unit once with both neighbor ports at zero
    #[arg(long)]
    no_diffusion: bool,
    #[arg(long, default_value_t = 1e-4)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train the 6-way head and group its predictions for bi-class scoring
    #[arg(long)]
    bi_from_multi: bool,
}

fn at_least_one(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl Hyper {
    fn train_config(&self, mode: Mode) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            dims: ModelDims {
                d: self.d,
                embed: self.embed_dim,
                hidden: self.hidden_dim,
                latent: self.latent_dim,
                state: self.state_dim,
                q: self.q,
            },
            rounds: if self.no_diffusion { 0 } else { self.rounds },
            alpha: self.alpha,
            learning_rate: self.lr,
            momentum: self.momentum,
            epochs: self.epochs,
            seed: self.seed,
            mode,
            bi_from_multi: self.bi_from_multi,
            tokenizer: TokenizerConfig::default(),
            fold: 0,
            theta: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bi,
    Multi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bi => Mode::Bi,
            ModeArg::Multi => Mode::Multi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Bi,
    Multi,
    Both,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 0)]
    fold: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Bi)]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct EvalArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated sampling ratios; defaults to 0.1,0.2,...,1.0
    #[arg(long, value_delimiter = ',')]
    theta_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, value_enum, default_value_t = EvalMode::Both)]
    mode: EvalMode,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent (theta, fold) cells
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct GradcheckArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_FINITE: i32 = 3;

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => EXIT_USAGE,
        Error::NonFiniteLoss { .. } => EXIT_NON_FINITE,
        _ => EXIT_DATA,
    }
}

/// Reads a `key = value` file into `--key value` arguments. Boolean values
/// become bare flags (`true`) or are dropped (`false`).
fn config_args(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::usage(format!("{}:{}: expected key = value", path.display(), n + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(Error::usage(format!("{}:{}: nested config", path.display(), n + 1)));
        }
        match value.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Splices config-file arguments in front of the user's own flags so that
/// the latter win.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            match it.next() {
                Some(p) => path = Some(PathBuf::from(p)),
                None => return Err(Error::usage("--config needs a file")),
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    if rest.len() < 2 {
        return Err(Error::usage("--config must follow a subcommand"));
    }
    let mut out: Vec<OsString> = rest[..2].to_vec();
    out.extend(config_args(&path)?);
    out.extend(rest.into_iter().skip(2));
    Ok(out)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Stats(a) => run_stats(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => evaluate(a),
        Command::Gradcheck(a) => gradcheck(a),
    }
}

fn ingest(a: IngestArgs) -> Result<i32> {
    let hsn = load_hsn(&DatasetPaths {
        articles: a.articles,
        creators: a.creators,
        subjects: a.subjects,
        edges: a.edges,
    })?;
    println!("articles\t{}", hsn.count(NodeType::Article));
    println!("creators\t{}", hsn.count(NodeType::Creator));
    println!("subjects\t{}", hsn.count(NodeType::Subject));
    println!("authorship_links\t{}", hsn.count(NodeType::Article));
    println!("subject_links\t{}", hsn.subject_link_count());
    Ok(EXIT_OK)
}

fn synth(a: SynthArgs) -> Result<i32> {
    let cfg = SynthConfig::new(a.articles, a.creators, a.subjects, a.strength, a.seed);
    let data = generate_synthetic(&cfg)?;
    write_dir(&data.hsn, &a.out)?;
    println!(
        "wrote {} articles, {} creators, {} subjects to {}",
        a.articles,
        a.creators,
        a.subjects,
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn run_stats(a: StatsArgs) -> Result<i32> {
    let hsn = derive_entity_labels(&load_dir(&a.data)?);
    let report = stats(&hsn, a.top, &TokenizerConfig::default());
    report.write_csv(&a.out)?;
    let s = &report.summary;
    println!(
        "articles {} creators {} subjects {} subject_links {}",
        s.articles, s.creators, s.subjects, s.subject_links
    );
    Ok(EXIT_OK)
}

fn train(a: TrainArgs) -> Result<i32> {
    let hsn = derive_entity_labels(&load_dir(&a.data)?);
    let mut cfg = a.hyper.train_config(a.mode.into())?;
    cfg.fold = a.fold;
    cfg.theta = a.theta;
    let split = split_folds(&hsn, a.folds, a.theta, cfg.seed)?;
    let fold = split
        .folds
        .get(a.fold)
        .ok_or_else(|| Error::usage(format!("fold {} out of range for {} folds", a.fold, a.folds)))?;
    let vocab = build_vocab(&hsn, &fold.sampled, cfg.dims.d, &cfg.tokenizer)?;
    let fitted = fit(&hsn, &vocab, &fold.sampled, &cfg)?;

    fs::create_dir_all(&a.out)?;
    fitted.params.save(&a.out.join("model.bin"))?;
    vocab.write(&a.out.join("vocab.txt"))?;
    write_trace(&a.out.join("trace.csv"), &fitted.trace)?;

    let inputs = prepare_inputs(&hsn, &vocab, cfg.dims.q, &cfg.tokenizer);
    let preds = fitted.params.predict_all(&hsn, &inputs)?;
    let mut w = csv::Writer::from_path(a.out.join("test_metrics.csv"))?;
    w.write_record(["node_type", "accuracy", "precision", "recall", "f1"])?;
    for kind in NodeType::ALL {
        let test = fold.test.get(kind);
        let mut truth = std::collections::BTreeMap::new();
        let mut pred = std::collections::BTreeMap::new();
        for &i in test {
            let label = hsn.label(kind, i).expect("labels derived");
            truth.insert(hsn.id(kind, i).to_owned(), cfg.mode.class_of(label));
            pred.insert(hsn.id(kind, i).to_owned(), preds.class(kind, i, cfg.mode));
        }
        let m = metrics(&pred, &truth, cfg.mode)?;
        w.write_record([
            kind.as_str().to_owned(),
            m.accuracy.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
        ])?;
        println!("{kind}\taccuracy {:.4}\tf1 {:.4}", m.accuracy, m.f1);
    }
    w.flush()?;
    let last = fitted.trace.last().expect("at least one epoch");
    println!("final loss {:.6} after {} epochs", last.loss, fitted.trace.len());
    Ok(EXIT_OK)
}

fn evaluate(a: EvalArgs) -> Result<i32> {
    let hsn = derive_entity_labels(&load_dir(&a.data)?);
    let modes = match a.mode {
        EvalMode::Bi => vec![Mode::Bi],
        EvalMode::Multi => vec![Mode::Multi],
        EvalMode::Both => Mode::ALL.to_vec(),
    };
    if a.parallel == 0 {
        return Err(Error::usage("--parallel must be at least 1"));
    }
    let cfg = ExperimentConfig {
        train: a.hyper.train_config(modes[0])?,
        modes,
        parallel: a.parallel,
    };
    let grid = if a.theta_grid.is_empty() {
        default_theta_grid()
    } else {
        a.theta_grid
    };
    let report = run_experiment(&hsn, &grid, a.folds, &cfg, a.hyper.seed)?;
    report.write_csv(&a.out)?;
    for row in report.summary() {
        println!(
            "{}\t{}\ttheta {}\taccuracy {:.4}\tf1 {:.4}",
            row.mode, row.node_type, row.theta, row.metrics.accuracy, row.metrics.f1
        );
    }
    Ok(EXIT_OK)
}

fn gradcheck(a: GradcheckArgs) -> Result<i32> {
    let err = run_suite(a.seed)?;
    println!("max relative error {err:.3e} (tolerance {TOLERANCE:.0e})");
    Ok(if err < TOLERANCE { EXIT_OK } else { EXIT_DATA })
}
