//! Monte-Carlo experiment runner.
//!
//! A config names a network source (a synthetic model or an edge list), a
//! sampling plan, the estimators and a rank rule. Optional grid lists expand
//! it into cells; every cell is replicated with seeds derived from the master
//! seed, so the output does not depend on scheduling or thread count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::evaluation::{auc_link_prediction, mse_block, time_fit, MetricReport};
use crate::generators::{generate, sample_adjacency, ModelKind, ModelSpec};
use crate::graph::{extract_ego_view, AdjacencyMatrix, ProbabilityMatrix};
use crate::io::{load_edge_list, EdgeListOptions};
use crate::rng::derive_seed;
use crate::sampling::{sample_nodes, Mechanism, SamplingPlan};
use crate::tuning::{select_rank, TuningOptions};

/// Fixed rank or cross-validated choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RankRepr", into = "RankRepr")]
pub enum RankRule {
    Fixed(usize),
    CrossValidated,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RankRepr {
    Fixed(usize),
    Word(String),
}

impl TryFrom<RankRepr> for RankRule {
    type Error = Error;

    fn try_from(r: RankRepr) -> Result<Self> {
        match r {
            RankRepr::Fixed(k) => RankRule::Fixed(k).checked(),
            RankRepr::Word(w) => w.parse(),
        }
    }
}

impl From<RankRule> for RankRepr {
    fn from(r: RankRule) -> Self {
        match r {
            RankRule::Fixed(k) => RankRepr::Fixed(k),
            RankRule::CrossValidated => RankRepr::Word("cv".into()),
        }
    }
}

impl RankRule {
    fn checked(self) -> Result<Self> {
        match self {
            RankRule::Fixed(0) => Err(Error::invalid("rank must be at least 1")),
            r => Ok(r),
        }
    }
}

impl FromStr for RankRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("cv") {
            return Ok(RankRule::CrossValidated);
        }
        s.parse::<usize>()
            .map_err(|_| Error::invalid(format!("rank must be a positive integer or 'cv', got '{s}'")))
            .and_then(|k| RankRule::Fixed(k).checked())
    }
}

impl fmt::Display for RankRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankRule::Fixed(k) => write!(f, "{k}"),
            RankRule::CrossValidated => f.write_str("cv"),
        }
    }
}

/// An observed network read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSource {
    pub path: PathBuf,
    #[serde(default)]
    pub one_based: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
}

/// Overrides for cross-validation; unset fields take the tuning defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
}

/// Lists that replace the matching scalar in the base config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<ModelKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<Vec<Mechanism>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<Vec<f64>>,
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Le]
}
fn default_rank() -> RankRule {
    RankRule::CrossValidated
}
fn default_true() -> bool {
    true
}
fn default_replications() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSource>,
    pub sampling: SamplingPlan,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_rank")]
    pub rank: RankRule,
    #[serde(default = "default_true")]
    pub truncate: bool,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

impl ExperimentConfig {
    pub fn synthetic(model: ModelSpec, sampling: SamplingPlan) -> Self {
        Self {
            model: Some(model),
            network: None,
            sampling,
            estimators: default_estimators(),
            rank: default_rank(),
            truncate: true,
            replications: 1,
            master_seed: 0,
            output: None,
            tuning: TuningConfig::default(),
            grid: GridConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// TOML, or JSON when the file extension is `.json`.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        parsed.map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.model, &self.network) {
            (Some(m), None) => m.validate()?,
            (None, Some(_)) => {
                if self.grid.models.is_some() || self.grid.degree.is_some() {
                    return Err(Error::Config(
                        "model and degree grids need a synthetic model".into(),
                    ));
                }
            }
            _ => return Err(Error::Config("give exactly one of [model] or [network]".into())),
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("select at least one estimator".into()));
        }
        self.rank.checked()?;
        for cell in self.cells() {
            cell.sampling.validate()?;
            if let Some(m) = &cell.model {
                m.validate()?;
            }
        }
        Ok(())
    }

    /// Grid expansion in model, mechanism, rho, degree order.
    pub fn cells(&self) -> Vec<Cell> {
        let models: Vec<Option<ModelKind>> = match (&self.model, &self.grid.models) {
            (Some(_), Some(list)) => list.iter().copied().map(Some).collect(),
            (Some(m), None) => vec![Some(m.kind)],
            (None, _) => vec![None],
        };
        let mechanisms = self.grid.mechanisms.clone().unwrap_or_else(|| vec![self.sampling.mechanism]);
        let rhos = self.grid.rho.clone().unwrap_or_else(|| vec![self.sampling.rho]);
        let degrees: Vec<Option<f64>> = match &self.grid.degree {
            Some(list) => list.iter().copied().map(Some).collect(),
            None => vec![self.model.as_ref().and_then(|m| m.target_degree)],
        };
        let mut cells = Vec::new();
        for kind in &models {
            for &mechanism in &mechanisms {
                for &rho in &rhos {
                    for &degree in &degrees {
                        let model = self.model.as_ref().map(|m| ModelSpec {
                            kind: kind.unwrap_or(m.kind),
                            target_degree: degree,
                            ..m.clone()
                        });
                        let sampling = SamplingPlan {
                            mechanism,
                            rho,
                            // Custom multipliers only apply to the base mechanism.
                            deltas: if mechanism == self.sampling.mechanism {
                                self.sampling.deltas
                            } else {
                                None
                            },
                            ..self.sampling.clone()
                        };
                        cells.push(Cell {
                            index: cells.len(),
                            model,
                            sampling,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// One point of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub model: Option<ModelSpec>,
    pub sampling: SamplingPlan,
}

impl Cell {
    pub fn model_label(&self) -> String {
        self.model.as_ref().map_or_else(|| "observed".to_string(), |m| m.kind.to_string())
    }

    pub fn degree(&self) -> Option<f64> {
        self.model.as_ref().and_then(|m| m.target_degree)
    }
}

/// One replication of one estimator on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub model: String,
    pub mechanism: Mechanism,
    pub rho: f64,
    pub degree: Option<f64>,
    pub estimator: Estimator,
    pub replication: usize,
    /// Replication seed; rerunning the cell with it reproduces the row.
    pub seed: u64,
    pub rank: usize,
    pub metrics: MetricReport,
}

pub const CSV_HEADER: [&str; 10] = [
    "model",
    "mechanism",
    "rho",
    "degree",
    "estimator",
    "replication",
    "seed",
    "mse",
    "auc",
    "wall_time_ms",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentRecord {
    fn csv_row(&self) -> [String; 10] {
        [
            self.model.clone(),
            self.mechanism.to_string(),
            self.rho.to_string(),
            opt(self.degree),
            self.estimator.to_string(),
            self.replication.to_string(),
            self.seed.to_string(),
            opt(self.metrics.mse),
            opt(self.metrics.auc),
            self.metrics.wall_time_ms().to_string(),
        ]
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("writing CSV: {e}"))
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

/// Mean and standard error of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`; 0 for a single value.
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Option<Self> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let se = if count < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        };
        Some(Self { mean, se, count })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub mechanism: Mechanism,
    pub rho: f64,
    pub degree: Option<f64>,
    pub estimator: Estimator,
    pub replications: usize,
    pub mse: Option<MeanSe>,
    pub auc: Option<MeanSe>,
    pub wall_time_ms: MeanSe,
}

/// Groups records by cell and estimator, keeping first-appearance order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(SummaryKey, Vec<&ExperimentRecord>)> = Vec::new();
    for r in records {
        let key = SummaryKey::of(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let first = members[0];
            let collect = |f: fn(&MetricReport) -> Option<f64>| -> Vec<f64> {
                members.iter().filter_map(|r| f(&r.metrics)).collect()
            };
            let times: Vec<f64> = members.iter().map(|r| r.metrics.wall_time_ms()).collect();
            SummaryRow {
                model: first.model.clone(),
                mechanism: first.mechanism,
                rho: first.rho,
                degree: first.degree,
                estimator: first.estimator,
                replications: members.len(),
                mse: MeanSe::of(&collect(|m| m.mse)),
                auc: MeanSe::of(&collect(|m| m.auc)),
                wall_time_ms: MeanSe::of(&times).expect("group is nonempty"),
            }
        })
        .collect()
}

#[derive(PartialEq)]
struct SummaryKey {
    model: String,
    mechanism: Mechanism,
    rho: u64,
    degree: Option<u64>,
    estimator: Estimator,
}

impl SummaryKey {
    fn of(r: &ExperimentRecord) -> Self {
        Self {
            model: r.model.clone(),
            mechanism: r.mechanism,
            rho: r.rho.to_bits(),
            degree: r.degree.map(f64::to_bits),
            estimator: r.estimator,
        }
    }
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "model",
    "mechanism",
    "rho",
    "degree",
    "estimator",
    "replications",
    "mse_mean",
    "mse_se",
    "auc_mean",
    "auc_se",
    "wall_time_ms_mean",
];

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in rows {
        w.write_record([
            s.model.clone(),
            s.mechanism.to_string(),
            s.rho.to_string(),
            opt(s.degree),
            s.estimator.to_string(),
            s.replications.to_string(),
            opt(s.mse.map(|m| m.mean)),
            opt(s.mse.map(|m| m.se)),
            opt(s.auc.map(|m| m.mean)),
            opt(s.auc.map(|m| m.se)),
            s.wall_time_ms.mean.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

/// Seed of replication `replication` in cell `cell`.
pub fn replication_seed(master_seed: u64, cell: usize, replication: usize) -> u64 {
    derive_seed(derive_seed(master_seed, cell as u64), replication as u64)
}

// Sub-streams of a replication seed.
const MODEL_STREAM: u64 = 0;
const EDGE_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;
const TUNING_STREAM: u64 = 3;

/// Loaded once per run so edge-list files are not reread per replication.
enum Network {
    Synthetic,
    Observed(AdjacencyMatrix),
}

/// Runs one replication of `cell` from its seed. Synthetic cells score MSE
/// against the hidden probability block and AUC against the hidden
/// adjacency block; observed networks score AUC only.
pub fn run_replication(
    config: &ExperimentConfig,
    cell: &Cell,
    replication: usize,
    seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    let network = match &config.network {
        Some(src) => Network::Observed(load_network(src)?),
        None => Network::Synthetic,
    };
    run_with_network(config, cell, replication, seed, &network)
}

fn load_network(src: &NetworkSource) -> Result<AdjacencyMatrix> {
    load_edge_list(
        &src.path,
        EdgeListOptions {
            one_based: src.one_based,
            n_nodes: src.n_nodes,
        },
    )
}

fn run_with_network(
    config: &ExperimentConfig,
    cell: &Cell,
    replication: usize,
    seed: u64,
    network: &Network,
) -> Result<Vec<ExperimentRecord>> {
    let (probability, adjacency): (Option<ProbabilityMatrix>, std::borrow::Cow<AdjacencyMatrix>) =
        match (network, &cell.model) {
            (Network::Observed(a), _) => (None, std::borrow::Cow::Borrowed(a)),
            (Network::Synthetic, Some(spec)) => {
                let spec = ModelSpec {
                    seed: derive_seed(seed, MODEL_STREAM),
                    ..spec.clone()
                };
                let p = generate(&spec)?.probability;
                let a = sample_adjacency(&p, derive_seed(seed, EDGE_STREAM));
                (Some(p), std::borrow::Cow::Owned(a))
            }
            (Network::Synthetic, None) => return Err(Error::Config("cell has no network source".into())),
        };
    let plan = SamplingPlan {
        seed: derive_seed(seed, SAMPLE_STREAM),
        ..cell.sampling.clone()
    };
    let sample = sample_nodes(&adjacency, &plan)?;
    let view = extract_ego_view(&adjacency, &sample.observed)?;
    let p22 = probability.as_ref().map(|p| p.hidden_block(&view));
    let a22 = adjacency.hidden_block(&view);

    let mut records = Vec::with_capacity(config.estimators.len());
    for &estimator in &config.estimators {
        let rank = match config.rank {
            RankRule::Fixed(k) => k,
            RankRule::CrossValidated => {
                let defaults = TuningOptions::defaults_for(view.n_observed(), derive_seed(seed, TUNING_STREAM));
                let options = TuningOptions {
                    candidates: config.tuning.candidates.clone().unwrap_or(defaults.candidates),
                    holdout_fraction: config.tuning.holdout_fraction.unwrap_or(defaults.holdout_fraction),
                    repeats: config.tuning.repeats.unwrap_or(defaults.repeats),
                    estimator,
                    seed: defaults.seed,
                };
                select_rank(&view, &options)?.chosen_rank
            }
        };
        let (fit, wall_time) = time_fit(|| estimator.impute(&view, rank, config.truncate));
        let fit = fit?;
        let mse = p22.as_ref().map(|p| mse_block(&fit.p22_hat, p)).transpose()?;
        let auc = match auc_link_prediction(&fit.p22_hat, &a22) {
            Ok(roc) => Some(roc.auc),
            Err(Error::UndefinedAuc(_)) => None,
            Err(e) => return Err(e),
        };
        records.push(ExperimentRecord {
            model: cell.model_label(),
            mechanism: cell.sampling.mechanism,
            rho: cell.sampling.rho,
            degree: cell.degree(),
            estimator,
            replication,
            seed,
            rank,
            metrics: MetricReport { mse, auc, wall_time },
        });
    }
    Ok(records)
}

/// Runs every cell and replication. `threads = None` uses all available
/// cores; records come back ordered by cell, replication, estimator.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let network = match &config.network {
        Some(src) => Network::Observed(load_network(src)?),
        None => Network::Synthetic,
    };
    let cells = config.cells();
    let jobs: Vec<(&Cell, usize)> = cells
        .iter()
        .flat_map(|c| (0..config.replications).map(move |r| (c, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<ExperimentRecord>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, r)| {
                let seed = replication_seed(config.master_seed, cell.index, r);
                run_with_network(config, cell, r, seed, &network)
            })
            .collect()
    });
    let mut records = Vec::with_capacity(jobs.len() * config.estimators.len());
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}
