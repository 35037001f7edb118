//! `rfexplain`: train forests, explain single predictions, benchmark reductions.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rfexplain::benchmark::{format_table, run_benchmark, to_csv, TABLE_ROWS};
use rfexplain::bundle::ModelBundle;
use rfexplain::data::{load_csv, read_headers, Dataset, DatasetMeta};
use rfexplain::pipeline::PipelineConfig;
use rfexplain::train::{f1_score, MaxFeatures, TrainParams};
use rfexplain::Error;

#[derive(Parser)]
#[command(name = "rfexplain", version, about = "Rule explanations for random-forest predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a forest on a CSV file and save it as a model bundle.
    Train(TrainArgs),
    /// Explain the prediction for one instance.
    Explain(ExplainArgs),
    /// Mean feature/path reduction over a dataset for each technique combination.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed; falls back to $LF_SEED, then 0.
    #[arg(long, env = "LF_SEED", default_value_t = 0)]
    seed: u64,
    /// Column metadata (JSON). Without it every column but the last is numeric.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output model bundle.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Fraction held out for the F1 report; 0 trains on everything.
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[arg(long, default_value_t = 100)]
    n_estimators: usize,
    /// Maximum depth; unlimited when omitted.
    #[arg(long)]
    max_depth: Option<usize>,
    /// sqrt, log2, all, or a fraction in (0, 1].
    #[arg(long, default_value = "sqrt")]
    max_features: String,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    bootstrap: bool,
}

#[derive(Args)]
struct Reduction {
    /// Skip association-rule reduction.
    #[arg(long)]
    no_ar: bool,
    /// Skip k-medoids reduction.
    #[arg(long)]
    no_cluster: bool,
    /// Skip random trimming.
    #[arg(long)]
    no_random: bool,
    #[arg(long, default_value_t = rfexplain::association::DEFAULT_MIN_SUPPORT)]
    min_support: f64,
    /// Number of medoids (default: ceil(sqrt(paths))).
    #[arg(long)]
    medoids: Option<usize>,
    /// Keep at least this fraction of all trees.
    #[arg(long)]
    min_path_fraction: Option<f64>,
}

impl Reduction {
    fn config(&self, seed: u64) -> PipelineConfig {
        PipelineConfig {
            use_association_rules: !self.no_ar,
            use_clustering: !self.no_cluster,
            use_random: !self.no_random,
            min_support: self.min_support,
            n_medoids_override: self.medoids,
            min_path_fraction: self.min_path_fraction,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    /// `name=value,name=value,...` or a CSV row in feature order.
    #[arg(long, conflicts_with_all = ["data", "row"])]
    instance: Option<String>,
    /// Take the instance from this CSV (with --row).
    #[arg(long, requires = "row")]
    data: Option<PathBuf>,
    /// 0-based row of --data, counted after rows with missing values are dropped.
    #[arg(long, requires = "data")]
    row: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    reduction: Reduction,
    /// Collapse the n least important clauses in the text.
    #[arg(long, default_value_t = 0)]
    hide_last: usize,
    /// Print only the JSON document.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    reduction: Reduction,
    /// Worker threads (default: number of processors).
    #[arg(long)]
    workers: Option<usize>,
    /// Use only the first n rows.
    #[arg(long)]
    limit: Option<usize>,
    /// Write the CSV here instead of printing it under the table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the rows as JSON.
    #[arg(long)]
    json: bool,
}

/// Writes to stdout, ignoring a reader that went away (`| head`).
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

macro_rules! out {
    ($($t:tt)*) => { emit(&format!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&format!("{}\n", format_args!($($t)*))) };
}

/// Failure with its exit code class.
enum Failure {
    Usage(String),
    Data(String),
    Model(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Model(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Model(m) => m,
        }
    }
}

fn data_failure(context: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::InvalidParameter(m) => Failure::Usage(m),
        e => Failure::Data(format!("{}: {e}", context.display())),
    }
}

fn model_failure(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(m) => Failure::Usage(m),
        e if e.is_data_error() => Failure::Data(e.to_string()),
        e => Failure::Model(e.to_string()),
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_meta(meta: Option<&Path>, data: &Path) -> std::result::Result<DatasetMeta, Failure> {
    match meta {
        Some(m) => DatasetMeta::load(m).map_err(data_failure(m)),
        None => DatasetMeta::all_numeric(&read_headers(data).map_err(data_failure(data))?)
            .map_err(data_failure(data)),
    }
}

fn load_bundle(path: &Path, meta: Option<&Path>) -> std::result::Result<ModelBundle, Failure> {
    let mut bundle = ModelBundle::load(path).map_err(|e| match e {
        Error::Io(io) => Failure::Model(format!("{}: {io}", path.display())),
        e => Failure::Model(e.to_string()),
    })?;
    if let Some(m) = meta {
        let meta = DatasetMeta::load(m).map_err(data_failure(m))?;
        if meta.encoded_width() != bundle.forest.n_features() {
            return Err(Failure::Data(format!(
                "{}: encodes {} features, model has {}",
                m.display(),
                meta.encoded_width(),
                bundle.forest.n_features()
            )));
        }
        bundle.meta = meta;
    }
    Ok(bundle)
}

fn load_data(path: &Path, meta: &DatasetMeta) -> std::result::Result<Dataset, Failure> {
    let data = load_csv(path, meta).map_err(data_failure(path))?;
    if data.dropped_missing > 0 {
        eprintln!(
            "note: dropped {} row(s) with missing values from {}",
            data.dropped_missing,
            path.display()
        );
    }
    Ok(data)
}

fn train(args: &TrainArgs) -> Outcome {
    let meta = load_meta(args.common.meta.as_deref(), &args.data)?;
    let data = load_data(&args.data, &meta)?;
    let params = TrainParams {
        n_estimators: args.n_estimators,
        max_depth: args.max_depth,
        max_features: args
            .max_features
            .parse::<MaxFeatures>()
            .map_err(|e| Failure::Usage(e.to_string()))?,
        min_samples_leaf: args.min_samples_leaf,
        bootstrap: args.bootstrap,
        seed: args.common.seed,
    };
    let (fit, holdout) = if args.holdout == 0.0 {
        (data, None)
    } else {
        let (fit, hold) = data
            .split(args.holdout, args.common.seed)
            .map_err(data_failure(&args.data))?;
        (fit, Some(hold))
    };
    let bundle = ModelBundle::train(&fit, meta, &params).map_err(data_failure(&args.data))?;
    bundle
        .save(&args.model)
        .map_err(|e| Failure::Model(format!("{}: {e}", args.model.display())))?;

    outln!(
        "trained {} trees on {} rows ({} features)",
        bundle.forest.n_estimators(),
        fit.len(),
        bundle.forest.n_features()
    );
    if let Some(hold) = holdout {
        let predicted = hold
            .scaled(&bundle.scaler)
            .map_err(model_failure)?
            .iter()
            .map(|x| bundle.forest.predict(x).map(|p| p.class))
            .collect::<rfexplain::Result<Vec<u8>>>()
            .map_err(model_failure)?;
        outln!(
            "holdout F1 {:.4} on {} rows",
            f1_score(&hold.labels, &predicted),
            hold.len()
        );
    }
    outln!("model written to {}", args.model.display());
    Ok(())
}

fn parse_instance(text: &str, meta: &DatasetMeta) -> rfexplain::Result<Vec<f64>> {
    if text.contains('=') {
        let pairs = text
            .split(',')
            .map(|kv| {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Data { line: None, message: format!("expected name=value, got {kv:?}") })?;
                Ok((k.trim().to_string(), v.trim().to_string()))
            })
            .collect::<rfexplain::Result<Vec<_>>>()?;
        meta.encode_pairs(&pairs)
    } else {
        meta.encode_csv_row(text)
    }
}

fn explain(args: &ExplainArgs) -> Outcome {
    let bundle = load_bundle(&args.model, args.common.meta.as_deref())?;
    let encoded = match (&args.instance, &args.data, args.row) {
        (Some(text), _, _) => parse_instance(text, &bundle.meta).map_err(|e| Failure::Data(format!("instance: {e}")))?,
        (None, Some(path), Some(row)) => {
            let data = load_data(path, &bundle.meta)?;
            data.rows.get(row).cloned().ok_or_else(|| {
                Failure::Usage(format!("--row {row} out of range ({} rows)", data.len()))
            })?
        }
        _ => return Err(Failure::Usage("give --instance or --data with --row".into())),
    };
    let config = args.reduction.config(args.common.seed);
    let explanation = bundle
        .explain(&encoded, &config, args.hide_last)
        .map_err(model_failure)?;
    for name in &explanation.clamped {
        eprintln!("warning: {name} was outside the training range and has been clamped");
    }
    if explanation.reduction.report.degraded {
        eprintln!("warning: the vote is tied, so no reduction was applied");
    }
    let json = explanation.to_json(&bundle);
    if !args.json {
        outln!("{}", explanation.rule.render());
    }
    outln!("{}", serde_json::to_string_pretty(&json).expect("json value"));
    Ok(())
}

fn benchmark(args: &BenchmarkArgs) -> Outcome {
    let bundle = load_bundle(&args.model, args.common.meta.as_deref())?;
    let mut data = load_data(&args.data, &bundle.meta)?;
    if let Some(n) = args.limit {
        data.rows.truncate(n);
        data.labels.truncate(n);
    }
    let rows: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| bundle.prepare(r).map(|i| i.values))
        .collect::<rfexplain::Result<_>>()
        .map_err(model_failure)?;
    let base = args.reduction.config(args.common.seed);
    let table = run_benchmark(&bundle.forest, &rows, &base, &TABLE_ROWS, args.workers)
        .map_err(|e| match e {
            Error::EmptyDataset => Failure::Data(format!("{}: {e}", args.data.display())),
            e => model_failure(e),
        })?;
    if args.json {
        outln!("{}", serde_json::to_string_pretty(&table).expect("json value"));
        return Ok(());
    }
    out!("{}", format_table(&table));
    let csv = to_csv(&table);
    match &args.csv {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => out!("\n{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Train(a) => train(a),
        Command::Explain(a) => explain(a),
        Command::Benchmark(a) => benchmark(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
