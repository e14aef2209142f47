//! Command-line entry points: cluster, train, classify, evaluate, cv.
//!
//! Exit codes are a stable contract: 0 success, 2 I/O or argument error,
//! 3 data or degenerate-input error, 4 model integrity error.
//! Configuration comes from `--config` (or the `CASCADE_TITLES_CONFIG`
//! environment variable) with individual flags winning over file values.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cascade::{classify, cross_validate_cascade, evaluate_cascade, train_cascade};
use crate::config::Config;
use crate::corpus::{load_jsonl, Document, DocumentSet};
use crate::error::{Error, Result};
use crate::persist::{load_cascade, save_cascade, save_cluster_set};
use crate::title_cluster::cluster_corpus;

/// Appended to every subcommand's `--help`.
const CONFIG_HELP: &str = "\
CONFIG KEYS (TOML file via --config or $CASCADE_TITLES_CONFIG; flags win):
  seed                 master seed for every randomized step (default 42)
  min_df               vocabulary min document frequency (default 2)
  min_title_freq       title frequency floor for clustering (default 4)
  quality_q            SVD retained energy fraction in (0,1] (default 0.9)
  assignment_threshold cluster membership cosine threshold (default 0.2)
  max_labels           cap on induced cluster labels (default 256)
  k                    fine labels returned per document (default 5)
  min_tf               query term frequency floor (default 1)
  c                    SVM regularization C (default 1.0)
  strategy             \"ova\" or \"crammer-singer\" (default \"ova\")
  bias                 add an always-on bias feature (default false)
  max_iters            SVM epoch cap (default 1000)
  tol                  SVM per-epoch objective tolerance (default 1e-6)
  svd_tol              SVD iterate tolerance (default 1e-9)
  svd_max_iters        SVD iteration cap (default 1000)
  base_count           per-class undersampling cap (default 150000)
  min_group_size       smallest group that gets a vertical (default 5)
  stoplist             stop-list file path (default: built-in English)
  exceptions           tokens kept verbatim (default [\"c++\", \"c#\", \".net\"])
  [aliases]            e.g. healthcare = [29, 31]";

#[derive(Parser)]
#[command(
    name = "cascade-titles",
    version,
    about = "Two-stage job title classification: SVD title clustering, k-NN over cluster meta-documents, and a linear SVM coarse classifier routing to per-group verticals",
    after_help = CONFIG_HELP
)]
pub struct Cli {
    /// Config file (TOML); falls back to $CASCADE_TITLES_CONFIG.
    #[arg(long, global = true, env = "CASCADE_TITLES_CONFIG")]
    pub config: Option<PathBuf>,
    /// Seed override for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
#[command(after_help = CONFIG_HELP)]
pub struct ClusterArgs {
    /// Input documents (JSON lines).
    pub input: PathBuf,
    /// Output directory for the cluster set.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
#[command(after_help = CONFIG_HELP)]
pub struct TrainArgs {
    /// Labeled input documents (JSON lines with `soc`).
    pub input: PathBuf,
    /// Output directory for the cascade model.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
#[command(after_help = CONFIG_HELP)]
pub struct ClassifyArgs {
    /// Cascade model directory.
    #[arg(long)]
    pub model: PathBuf,
    /// Input documents (JSON lines); omit when using --title.
    pub input: Option<PathBuf>,
    /// Classify a single ad-hoc title instead of a file.
    #[arg(long, conflicts_with = "input")]
    pub title: Option<String>,
    /// Fine labels per document (default: config `k`).
    #[arg(long)]
    pub k: Option<usize>,
    /// Write output lines here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
#[command(after_help = CONFIG_HELP)]
pub struct EvaluateArgs {
    /// Cascade model directory.
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled input documents (JSON lines with `soc`).
    pub input: PathBuf,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Fine labels per document (default: config `k`).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args)]
#[command(after_help = CONFIG_HELP)]
pub struct CvArgs {
    /// Labeled input documents (JSON lines with `soc`).
    pub input: PathBuf,
    /// Number of folds.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Also write the machine-readable report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Discover title clusters and write them as a directory.
    Cluster(ClusterArgs),
    /// Train the coarse SVM plus per-group vertical classifiers.
    Train(TrainArgs),
    /// Classify documents with a trained cascade.
    Classify(ClassifyArgs),
    /// Score a trained cascade against labeled documents.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation, training a cascade per fold.
    Cv(CvArgs),
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::IoAt { .. } | Error::Parameter(_) | Error::Config(_) => 2,
        Error::Parse { .. }
        | Error::Format(_)
        | Error::Validation(_)
        | Error::DegenerateInput(_)
        | Error::Convergence(_) => 3,
        Error::Integrity(_) => 4,
    }
}

/// Runs a parsed command line; the caller turns the error into an exit
/// code via [`exit_code`].
pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::Cluster(args) => cmd_cluster(&config, &args),
        Command::Train(args) => cmd_train(&config, &args),
        Command::Classify(args) => cmd_classify(&config, &args),
        Command::Evaluate(args) => cmd_evaluate(&config, &args),
        Command::Cv(args) => cmd_cv(&config, &args),
    }
}

/// Formats a score with six significant digits.
fn sig6(value: f64) -> String {
    if value == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 15) as usize;
    format!("{value:.decimals$}")
}

fn cmd_cluster(config: &Config, args: &ClusterArgs) -> Result<()> {
    let docs = load_jsonl(&args.input)?;
    let pipeline = config.pipeline()?;
    let clusters = cluster_corpus::<f64>(&docs, &pipeline, &config.cluster_params())?;
    save_cluster_set(&clusters, &args.output)?;
    println!("clusters: {}", clusters.n_clusters());
    println!("other bucket: {}", clusters.other_bucket.len());
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for cluster in &clusters.clusters {
        *histogram.entry(cluster.members.len()).or_insert(0) += 1;
    }
    println!("size histogram:");
    for (size, count) in histogram {
        println!("  {size:>6} members: {count} cluster(s)");
    }
    Ok(())
}

fn cmd_train(config: &Config, args: &TrainArgs) -> Result<()> {
    let docs = load_jsonl(&args.input)?;
    let model = train_cascade::<f64>(&docs, config)?;
    save_cascade(&model, &args.output)?;
    for note in &model.build_notes {
        eprintln!("warning: {note}");
    }
    println!("groups: {}", model.group_keys.len());
    for key in &model.group_keys {
        match model.verticals.get(key) {
            Some(v) => {
                let n_docs: usize = v.clusters.covered_ids().len();
                println!(
                    "group {key}: {} clusters, {} documents",
                    v.clusters.n_clusters(),
                    n_docs
                );
            }
            None => println!("group {key}: no vertical (abstains)"),
        }
    }
    Ok(())
}

fn classify_line(model: &crate::Cascade, doc: &Document, k: usize) -> Result<String> {
    let p = classify(model, doc, k)?;
    let mut line = format!("{}\t{}\t{}", doc.id, p.coarse_group, p.abstained);
    for (label, score) in &p.fine_titles {
        line.push('\t');
        line.push_str(label);
        line.push('\t');
        line.push_str(&sig6(*score));
    }
    Ok(line)
}

fn cmd_classify(config: &Config, args: &ClassifyArgs) -> Result<()> {
    let model = load_cascade::<f64>(&args.model)?;
    let k = args.k.unwrap_or(config.k);
    let docs: Vec<Document> = match (&args.input, &args.title) {
        (Some(path), None) => load_jsonl(path)?.docs().to_vec(),
        (None, Some(title)) => vec![Document {
            id: "title".to_string(),
            title: title.clone(),
            description: String::new(),
            requirements: String::new(),
            gold_soc: None,
            gold_titles: None,
        }],
        (None, None) => {
            return Err(Error::Parameter(
                "classify needs an input file or --title".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let mut lines = Vec::with_capacity(docs.len());
    for doc in &docs {
        lines.push(classify_line(&model, doc, k)?);
    }
    match &args.output {
        Some(path) => {
            let mut content = lines.join("\n");
            if !content.is_empty() {
                content.push('\n');
            }
            std::fs::write(path, content).map_err(|e| Error::io_at(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for line in &lines {
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

fn write_report(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io_at(path, e))
}

fn cmd_evaluate(config: &Config, args: &EvaluateArgs) -> Result<()> {
    let model = load_cascade::<f64>(&args.model)?;
    let docs = load_jsonl(&args.input)?;
    let k = args.k.unwrap_or(config.k);
    let eval = evaluate_cascade(&model, &docs, k)?;
    print!("{}", eval.report.render_table());
    if let Some(rate) = eval.fine_top1_rate {
        println!("fine_top1_rate {rate:.4}");
    }
    if let Some(path) = &args.output {
        let mut kv = eval.report.render_kv();
        if let Some(rate) = eval.fine_top1_rate {
            kv.push_str(&format!("fine_top1_rate {rate}\n"));
        }
        write_report(path, &kv)?;
    }
    Ok(())
}

fn cmd_cv(config: &Config, args: &CvArgs) -> Result<()> {
    let docs = load_jsonl(&args.input)?;
    let labeled = docs.iter().filter(|d| d.gold_soc.is_some()).count();
    if args.folds < 2 || args.folds > labeled {
        // Data-dependent bound, so a degenerate-data error (exit 3)
        // rather than an argument error.
        return Err(Error::DegenerateInput(format!(
            "fold count {} must satisfy 2 <= folds <= {labeled} labeled documents",
            args.folds
        )));
    }
    let labeled_docs: Vec<Document> = docs
        .iter()
        .filter(|d| d.gold_soc.is_some())
        .cloned()
        .collect();
    let labeled_set = DocumentSet::new(labeled_docs)?;
    let report = cross_validate_cascade::<f64>(&labeled_set, config, args.folds, config.seed)?;
    print!("{}", report.render_table());
    if let Some(path) = &args.output {
        write_report(path, &report.render_kv())?;
    }
    if !report.valid {
        return Err(Error::DegenerateInput(
            "cross-validation aborted on a fold; partial report written".into(),
        ));
    }
    Ok(())
}
