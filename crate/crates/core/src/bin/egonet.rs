use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use egonet::evaluation::{auc_link_prediction, mse_block};
use egonet::experiment::{summarize, write_records_csv, write_summary_csv, ExperimentConfig, RankRule};
use egonet::generators::{generate, sample_adjacency, ModelKind, ModelSpec};
use egonet::graph::{extract_ego_view, AdjacencyMatrix, EgoView};
use egonet::io::{self as eio, EdgeListOptions};
use egonet::sampling::{sample_nodes, Mechanism, SamplingPlan};
use egonet::tuning::{select_rank, TuningOptions};
use egonet::{recover_full, Error, Estimator};

#[derive(Parser)]
#[command(name = "egonet", version, about = "Impute missing links of egocentrically sampled networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a probability matrix and one network from a synthetic model.
    Generate(GenerateArgs),
    /// Sample observed nodes from a network and write the ego view.
    Sample(SampleArgs),
    /// Impute the hidden block of an ego view.
    Impute(ImputeArgs),
    /// Choose the rank by cross-validation on an ego view.
    TuneRank(TuneArgs),
    /// Score an estimate against a probability block and/or an adjacency block.
    Evaluate(EvaluateArgs),
    /// Run a replicated experiment grid from a config file.
    Experiment(ExperimentArgs),
    /// Emit ROC curve points for an estimate against a binary block.
    Roc(RocArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Model spec file (TOML or JSON); command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Communities or latent dimension.
    #[arg(long)]
    k: Option<usize>,
    /// Target expected degree.
    #[arg(long)]
    degree: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability matrix output.
    #[arg(long)]
    prob: Option<PathBuf>,
    /// Adjacency output (edge list with --edges, else a 0/1 matrix).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    edges: bool,
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file.
    #[arg(long, conflicts_with = "adjacency")]
    edge_list: Option<PathBuf>,
    /// Adjacency matrix file.
    #[arg(long)]
    adjacency: Option<PathBuf>,
    #[arg(long)]
    one_based: bool,
    /// Node count for edge lists with isolated trailing nodes.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, default_value = "mcar", value_parser = parse_mechanism)]
    mechanism: Mechanism,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ego view output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImputeArgs {
    /// Ego view file.
    #[arg(long)]
    view: PathBuf,
    #[arg(long, default_value = "le", value_parser = parse_estimator)]
    estimator: Estimator,
    #[arg(long, default_value = "cv", value_parser = parse_rank)]
    rank: RankRule,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    truncate: bool,
    /// Write the full N x N estimate in node order instead of the hidden block.
    #[arg(long)]
    full: bool,
    /// Seed for cross-validation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Matrix output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    view: PathBuf,
    #[arg(long, default_value = "le", value_parser = parse_estimator)]
    estimator: Estimator,
    /// Comma-separated ranks, e.g. 1,2,3 or 1-10.
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Selection trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Estimated block.
    #[arg(long)]
    estimate: PathBuf,
    /// True probability block, for MSE.
    #[arg(long)]
    prob: Option<PathBuf>,
    /// True 0/1 block, for AUC.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Per-replication CSV; overrides the config's output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mean and standard error per cell; stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_parser = parse_rank)]
    rank: Option<RankRule>,
    #[arg(long, action = ArgAction::Set)]
    truncate: Option<bool>,
}

#[derive(Args)]
struct RocArgs {
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Points CSV (fpr,tpr); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
fn parse_rank(s: &str) -> Result<RankRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_candidates(s: &str) -> egonet::Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad candidate list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn output(path: Option<&Path>) -> egonet::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit(path: Option<&Path>, text: &str) -> egonet::Result<()> {
    let mut w = output(path)?;
    let target = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::Io { path: target, source: e })
}

fn load_graph(input: &GraphInput) -> egonet::Result<AdjacencyMatrix> {
    match (&input.edge_list, &input.adjacency) {
        (Some(p), None) => eio::load_edge_list(
            p,
            EdgeListOptions {
                one_based: input.one_based,
                n_nodes: input.nodes,
            },
        ),
        (None, Some(p)) => AdjacencyMatrix::new(eio::load_matrix(p)?),
        _ => Err(Error::InvalidArgument("give --edge-list or --adjacency".into())),
    }
}

fn choose_rank(view: &EgoView, rule: RankRule, estimator: Estimator, seed: u64) -> egonet::Result<usize> {
    match rule {
        RankRule::Fixed(k) => Ok(k),
        RankRule::CrossValidated => {
            let options = TuningOptions {
                estimator,
                ..TuningOptions::defaults_for(view.n_observed(), seed)
            };
            Ok(select_rank(view, &options)?.chosen_rank)
        }
    }
}

fn run(command: Command) -> egonet::Result<()> {
    match command {
        Command::Generate(args) => {
            let mut spec = match &args.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                        path: p.clone(),
                        source: e,
                    })?;
                    if p.extension().is_some_and(|e| e == "json") {
                        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                    } else {
                        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                    }
                }
                None => {
                    let kind = args.model.ok_or_else(|| Error::InvalidArgument("--model or --config required".into()))?;
                    let n = args.nodes.ok_or_else(|| Error::InvalidArgument("--nodes required".into()))?;
                    ModelSpec::new(kind, n)
                }
            };
            if let Some(kind) = args.model {
                spec.kind = kind;
            }
            if let Some(n) = args.nodes {
                spec.n_nodes = n;
            }
            if let Some(k) = args.k {
                spec.k = k;
            }
            if args.degree.is_some() {
                spec.target_degree = args.degree;
            }
            spec.seed = args.seed;
            let model = generate(&spec)?;
            if let Some(scaled) = &model.scaling {
                eprintln!(
                    "scale factor {:.6}, achieved degree {:.4}, saturated entries {}",
                    scaled.factor, scaled.achieved_degree, scaled.saturated_entries
                );
            }
            if let Some(p) = &args.prob {
                eio::save_matrix(p, model.probability.values())?;
            }
            let adjacency = sample_adjacency(&model.probability, egonet::rng::derive_seed(args.seed, 1));
            let text = if args.edges {
                eio::format_edge_list(&adjacency)
            } else {
                eio::format_matrix(adjacency.values())
            };
            emit(args.out.as_deref(), &text)
        }
        Command::Sample(args) => {
            let adjacency = load_graph(&args.input)?;
            let plan = SamplingPlan::new(args.mechanism, args.rho).with_seed(args.seed);
            let sample = sample_nodes(&adjacency, &plan)?;
            if sample.rate_capped {
                eprintln!("warning: a group sampling rate exceeded 1 and was capped");
            }
            let view = extract_ego_view(&adjacency, &sample.observed)?;
            emit(args.out.as_deref(), &eio::format_ego_view(&view))
        }
        Command::Impute(args) => {
            let view = eio::load_ego_view(&args.view)?;
            let k = choose_rank(&view, args.rank, args.estimator, args.seed)?;
            let (estimate, elapsed) = if args.full {
                let (fit, t) = egonet::time_fit(|| recover_full(&view, k, args.truncate));
                (fit?.in_node_order(), t)
            } else {
                let (fit, t) = egonet::time_fit(|| args.estimator.impute(&view, k, args.truncate));
                (fit?.p22_hat, t)
            };
            eprintln!("{} rank {k} in {:.3} ms", args.estimator, elapsed.as_secs_f64() * 1e3);
            emit(args.out.as_deref(), &eio::format_matrix(&estimate))
        }
        Command::TuneRank(args) => {
            let view = eio::load_ego_view(&args.view)?;
            let defaults = TuningOptions::defaults_for(view.n_observed(), args.seed);
            let options = TuningOptions {
                candidates: match &args.candidates {
                    Some(s) => parse_candidates(s)?,
                    None => defaults.candidates,
                },
                holdout_fraction: args.holdout.unwrap_or(defaults.holdout_fraction),
                repeats: args.repeats.unwrap_or(defaults.repeats),
                estimator: args.estimator,
                seed: args.seed,
            };
            let selection = select_rank(&view, &options)?;
            if let Some(p) = &args.out {
                selection.write_trace_csv(output(Some(p))?)?;
            }
            println!("{}", selection.chosen_rank);
            Ok(())
        }
        Command::Evaluate(args) => {
            if args.prob.is_none() && args.truth.is_none() {
                return Err(Error::InvalidArgument("give --prob and/or --truth".into()));
            }
            let estimate = eio::load_matrix(&args.estimate)?;
            if let Some(p) = &args.prob {
                println!("mse {}", mse_block(&estimate, &eio::load_matrix(p)?)?);
            }
            if let Some(t) = &args.truth {
                println!("auc {}", auc_link_prediction(&estimate, &eio::load_matrix(t)?)?.auc);
            }
            Ok(())
        }
        Command::Roc(args) => {
            let estimate = eio::load_matrix(&args.estimate)?;
            let roc = auc_link_prediction(&estimate, &eio::load_matrix(&args.truth)?)?;
            let mut text = String::from("fpr,tpr\n");
            for (fpr, tpr) in &roc.points {
                text.push_str(&format!("{fpr},{tpr}\n"));
            }
            emit(args.out.as_deref(), &text)?;
            eprintln!("auc {}", roc.auc);
            Ok(())
        }
        Command::Experiment(args) => {
            let mut config = ExperimentConfig::from_path(&args.config)?;
            if let Some(seed) = args.seed {
                config.master_seed = seed;
            }
            if let Some(rank) = args.rank {
                config.rank = rank;
            }
            if let Some(t) = args.truncate {
                config.truncate = t;
            }
            if let Some(out) = args.out {
                config.output = Some(out);
            }
            let records = egonet::run_experiment(&config, args.threads)?;
            write_records_csv(&records, output(config.output.as_deref())?)?;
            if config.output.is_some() || args.summary.is_some() {
                write_summary_csv(&summarize(&records), output(args.summary.as_deref())?)?;
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => 1,
        Error::Io { .. } | Error::Parse { .. } => 2,
        Error::Numerical(_) | Error::UndefinedAuc(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
