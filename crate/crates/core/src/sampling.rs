//! Egocentric node-sampling mechanisms.
//!
//! Sample sizes are fixed counts (rounded proportions), not per-node coin
//! flips. Returned index lists are ascending.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Mcar,
    MnarPositive,
    MnarNegative,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Mcar => "mcar",
            Mechanism::MnarPositive => "mnar_positive",
            Mechanism::MnarNegative => "mnar_negative",
        }
    }

    /// Per-group multipliers for the high-, middle- and low-degree groups.
    pub fn default_deltas(self) -> [f64; 3] {
        match self {
            Mechanism::Mcar => [1.0, 1.0, 1.0],
            Mechanism::MnarPositive => [1.5, 1.0, 0.5],
            Mechanism::MnarNegative => [0.5, 1.0, 1.5],
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mcar" => Ok(Mechanism::Mcar),
            "mnar_positive" | "mnar+" | "positive" => Ok(Mechanism::MnarPositive),
            "mnar_negative" | "mnar_" | "negative" => Ok(Mechanism::MnarNegative),
            other => Err(Error::invalid(format!("unknown sampling mechanism '{other}'"))),
        }
    }
}

pub const DEFAULT_GROUP_FRACTIONS: [f64; 3] = [0.33, 0.34, 0.33];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub mechanism: Mechanism,
    pub rho: f64,
    /// Defaults to the mechanism's multipliers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<[f64; 3]>,
    #[serde(default = "default_fractions")]
    pub group_fractions: [f64; 3],
    #[serde(default)]
    pub seed: u64,
}

fn default_fractions() -> [f64; 3] {
    DEFAULT_GROUP_FRACTIONS
}

impl SamplingPlan {
    pub fn new(mechanism: Mechanism, rho: f64) -> Self {
        Self {
            mechanism,
            rho,
            deltas: None,
            group_fractions: DEFAULT_GROUP_FRACTIONS,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_deltas(mut self, deltas: [f64; 3]) -> Self {
        self.deltas = Some(deltas);
        self
    }

    pub fn deltas(&self) -> [f64; 3] {
        self.deltas.unwrap_or_else(|| self.mechanism.default_deltas())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if self.deltas().iter().any(|&d| !(d > 0.0)) {
            return Err(Error::invalid("deltas must be positive"));
        }
        let total: f64 = self.group_fractions.iter().sum();
        if self.group_fractions.iter().any(|&f| f < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("group fractions must be nonnegative and sum to 1"));
        }
        Ok(())
    }
}

/// A drawn sample plus whether any group rate had to be capped at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSample {
    pub observed: Vec<usize>,
    pub rate_capped: bool,
}

fn round_count(x: f64) -> usize {
    x.round().max(0.0) as usize
}

pub fn sample_mcar(n_total: usize, rho: f64, seed: u64) -> Result<Vec<usize>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    let count = round_count(rho * n_total as f64);
    if count == 0 || count >= n_total {
        return Err(Error::invalid(format!(
            "rho = {rho} on {n_total} nodes samples {count}; need between 1 and N-1"
        )));
    }
    let mut rng = stream(seed);
    let mut picked = index::sample(&mut rng, n_total, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Nodes sorted by degree, highest first, ties by ascending index, then cut
/// into three groups by `fractions`.
pub fn degree_groups(adjacency: &AdjacencyMatrix, fractions: [f64; 3]) -> [Vec<usize>; 3] {
    let degrees = adjacency.degrees();
    let n = degrees.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    let first = round_count(fractions[0] * n as f64).min(n);
    let second = round_count(fractions[1] * n as f64).min(n - first);
    let rest = order.split_off(first + second);
    let middle = order.split_off(first);
    [order, middle, rest]
}

/// Degree-stratified sampling: group `g` contributes
/// `round(min(delta_g * rho, 1) * |group g|)` uniformly chosen nodes.
pub fn sample_mnar(adjacency: &AdjacencyMatrix, plan: &SamplingPlan) -> Result<NodeSample> {
    plan.validate()?;
    let groups = degree_groups(adjacency, plan.group_fractions);
    let mut rng = stream(plan.seed);
    let mut observed = Vec::new();
    let mut rate_capped = false;
    for (group, delta) in groups.iter().zip(plan.deltas()) {
        let mut rate = delta * plan.rho;
        if rate > 1.0 {
            rate = 1.0;
            rate_capped = true;
        }
        let count = round_count(rate * group.len() as f64).min(group.len());
        observed.extend(index::sample(&mut rng, group.len(), count).into_iter().map(|i| group[i]));
    }
    observed.sort_unstable();
    let n_total = adjacency.n_nodes();
    if observed.is_empty() || observed.len() >= n_total {
        return Err(Error::invalid(format!(
            "sampling plan observes {} of {n_total} nodes; need between 1 and N-1",
            observed.len()
        )));
    }
    Ok(NodeSample {
        observed,
        rate_capped,
    })
}

/// Dispatches on the plan's mechanism.
pub fn sample_nodes(adjacency: &AdjacencyMatrix, plan: &SamplingPlan) -> Result<NodeSample> {
    match plan.mechanism {
        Mechanism::Mcar => {
            plan.validate()?;
            Ok(NodeSample {
                observed: sample_mcar(adjacency.n_nodes(), plan.rho, plan.seed)?,
                rate_capped: false,
            })
        }
        Mechanism::MnarPositive | Mechanism::MnarNegative => sample_mnar(adjacency, plan),
    }
}
