//! Synthetic probability matrices and Bernoulli network draws.
//!
//! Each model first builds an unclamped "raw" matrix, optionally rescales it
//! to a target expected degree, and finally clamps into `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{off_diagonal_sum, AdjacencyMatrix, Matrix, ProbabilityMatrix};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Sbm,
    Dcbm,
    Rdpg,
    Distance,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sbm => "sbm",
            ModelKind::Dcbm => "dcbm",
            ModelKind::Rdpg => "rdpg",
            ModelKind::Distance => "distance",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbm" => Ok(ModelKind::Sbm),
            "dcbm" => Ok(ModelKind::Dcbm),
            "rdpg" | "product" => Ok(ModelKind::Rdpg),
            "distance" | "latent_space" => Ok(ModelKind::Distance),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

fn default_k() -> usize {
    5
}
fn default_within() -> f64 {
    0.6
}
fn default_out_in_ratio() -> f64 {
    0.2
}
fn default_alpha() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n_nodes: usize,
    /// Number of communities (sbm, dcbm) or latent dimension (rdpg, distance).
    #[serde(default = "default_k")]
    pub k: usize,
    /// Explicit community-connection matrix for sbm; overrides `within` and
    /// `out_in_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_matrix: Option<Vec<Vec<f64>>>,
    /// Within-block connection value of the planted-partition B.
    #[serde(default = "default_within")]
    pub within: f64,
    /// Between-block to within-block ratio of the planted-partition B.
    #[serde(default = "default_out_in_ratio")]
    pub out_in_ratio: f64,
    /// Power-law exponent of the dcbm degree parameters.
    #[serde(default = "default_alpha")]
    pub degree_power_alpha: f64,
    /// Expected average degree after rescaling; `None` leaves the scale alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_degree: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n_nodes: usize) -> Self {
        Self {
            kind,
            n_nodes,
            k: default_k(),
            b_matrix: None,
            within: default_within(),
            out_in_ratio: default_out_in_ratio(),
            degree_power_alpha: default_alpha(),
            target_degree: None,
            seed: 0,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_target_degree(mut self, degree: f64) -> Self {
        self.target_degree = Some(degree);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_b_matrix(mut self, b: Vec<Vec<f64>>) -> Self {
        self.b_matrix = Some(b);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::invalid("model needs at least two nodes"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if let Some(d) = self.target_degree {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::invalid(format!("target degree must be positive, got {d}")));
            }
        }
        if !(0.0..=1.0).contains(&self.within) || !(self.out_in_ratio >= 0.0) {
            return Err(Error::invalid("within must lie in [0, 1] and out_in_ratio be nonnegative"));
        }
        if !(self.degree_power_alpha > 0.0) {
            return Err(Error::invalid("degree_power_alpha must be positive"));
        }
        if let Some(b) = &self.b_matrix {
            self.block_matrix_from(b)?;
        }
        Ok(())
    }

    fn block_matrix_from(&self, b: &[Vec<f64>]) -> Result<Matrix> {
        let k = self.k;
        if b.len() != k || b.iter().any(|row| row.len() != k) {
            return Err(Error::invalid(format!("b_matrix must be {k}x{k}")));
        }
        let m = Matrix::from_fn(k, k, |i, j| b[i][j]);
        if m.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::invalid("b_matrix entries must lie in [0, 1]"));
        }
        if (0..k).any(|i| (0..k).any(|j| m[(i, j)] != m[(j, i)])) {
            return Err(Error::invalid("b_matrix must be symmetric"));
        }
        Ok(m)
    }

    /// The community-connection matrix: `b_matrix` if given, otherwise
    /// `within` on the diagonal and `out_in_ratio * within` elsewhere.
    pub fn block_matrix(&self) -> Result<Matrix> {
        match &self.b_matrix {
            Some(b) => self.block_matrix_from(b),
            None => Ok(planted_partition(self.k, self.within, self.out_in_ratio * self.within)),
        }
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(format!(
                "spec is for model '{}', expected '{}'",
                self.kind, kind
            )));
        }
        Ok(())
    }
}

pub fn planted_partition(k: usize, within: f64, between: f64) -> Matrix {
    Matrix::from_fn(k, k, |i, j| if i == j { within } else { between })
}

/// Outcome of rescaling to a target degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub matrix: ProbabilityMatrix,
    /// Multiplier `c` applied before clamping.
    pub factor: f64,
    /// Off-diagonal entries with `c * P_ij > 1`.
    pub saturated_entries: usize,
    /// Share of the off-diagonal scaled mass removed by clamping.
    pub saturated_mass_fraction: f64,
    /// Expected average degree after clamping.
    pub achieved_degree: f64,
}

impl ScaledMatrix {
    pub fn is_saturated(&self) -> bool {
        self.saturated_entries > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedModel {
    pub probability: ProbabilityMatrix,
    /// Community labels for the block models.
    pub labels: Option<Vec<usize>>,
    pub scaling: Option<ScaledMatrix>,
}

/// Rescales a nonnegative symmetric matrix so that `sum_{i != j} P_ij / N`
/// equals `target_degree`, then clamps into `[0, 1]`.
pub fn scale_raw_to_degree(raw: &Matrix, target_degree: f64) -> Result<ScaledMatrix> {
    if !(target_degree > 0.0) || !target_degree.is_finite() {
        return Err(Error::invalid(format!("target degree must be positive, got {target_degree}")));
    }
    let n = raw.nrows();
    let mass = off_diagonal_sum(raw);
    if !(mass > 0.0) {
        return Err(Error::invalid("cannot rescale a matrix with no off-diagonal mass"));
    }
    let factor = target_degree * n as f64 / mass;
    let mut saturated_entries = 0;
    let mut removed = 0.0;
    let scaled = Matrix::from_fn(n, n, |i, j| {
        let x = factor * raw[(i, j)];
        if x > 1.0 && i != j {
            saturated_entries += 1;
            removed += x - 1.0;
        }
        x.clamp(0.0, 1.0)
    });
    let matrix = ProbabilityMatrix::new(scaled)?;
    let achieved_degree = matrix.expected_degree();
    Ok(ScaledMatrix {
        matrix,
        factor,
        saturated_entries,
        saturated_mass_fraction: removed / (factor * mass),
        achieved_degree,
    })
}

pub fn scale_to_degree(p: &ProbabilityMatrix, target_degree: f64) -> Result<ScaledMatrix> {
    scale_raw_to_degree(p.values(), target_degree)
}

fn finalize(raw: Matrix, spec: &ModelSpec, labels: Option<Vec<usize>>) -> Result<GeneratedModel> {
    match spec.target_degree {
        Some(target) => {
            let scaled = scale_raw_to_degree(&raw, target)?;
            Ok(GeneratedModel {
                probability: scaled.matrix.clone(),
                labels,
                scaling: Some(scaled),
            })
        }
        None => Ok(GeneratedModel {
            probability: ProbabilityMatrix::new(raw.map(|x| x.clamp(0.0, 1.0)))?,
            labels,
            scaling: None,
        }),
    }
}

fn draw_labels(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// `P_ij = B[z_i][z_j]`.
pub fn sbm_from_labels(labels: &[usize], b: &Matrix) -> Result<Matrix> {
    dcbm_from_parts(labels, &vec![1.0; labels.len()], b)
}

/// `P_ij = theta_i * theta_j * B[z_i][z_j]`.
pub fn dcbm_from_parts(labels: &[usize], theta: &[f64], b: &Matrix) -> Result<Matrix> {
    if labels.len() != theta.len() {
        return Err(Error::invalid("labels and theta lengths differ"));
    }
    if let Some(&bad) = labels.iter().find(|&&z| z >= b.nrows()) {
        return Err(Error::invalid(format!("label {bad} has no row in B")));
    }
    let n = labels.len();
    Ok(Matrix::from_fn(n, n, |i, j| theta[i] * theta[j] * b[(labels[i], labels[j])]))
}

/// Unclamped, unscaled model matrix plus community labels where applicable.
pub fn generate_raw(spec: &ModelSpec) -> Result<(Matrix, Option<Vec<usize>>)> {
    spec.validate()?;
    let mut rng = stream(derive_seed(spec.seed, 0));
    let n = spec.n_nodes;
    let k = spec.k;
    match spec.kind {
        ModelKind::Sbm => {
            let labels = draw_labels(n, k, &mut rng);
            let raw = sbm_from_labels(&labels, &spec.block_matrix()?)?;
            Ok((raw, Some(labels)))
        }
        ModelKind::Dcbm => {
            let labels = draw_labels(n, k, &mut rng);
            // Pareto with lower bound 1 and tail index 1/alpha, via inverse CDF.
            let raw_theta: Vec<f64> = (0..n)
                .map(|_| (1.0 - rng.gen::<f64>()).powf(-spec.degree_power_alpha))
                .collect();
            let mut max_in_block = vec![0.0f64; k];
            for (&z, &t) in labels.iter().zip(&raw_theta) {
                max_in_block[z] = max_in_block[z].max(t);
            }
            let theta: Vec<f64> = labels
                .iter()
                .zip(&raw_theta)
                .map(|(&z, &t)| t / max_in_block[z])
                .collect();
            let b = planted_partition(k, spec.within, spec.out_in_ratio * spec.within);
            let raw = dcbm_from_parts(&labels, &theta, &b)?.map(|x| x.clamp(0.0, 1.0));
            Ok((raw, Some(labels)))
        }
        ModelKind::Rdpg => {
            let beta = Beta::new(0.5, 1.0).expect("valid beta parameters");
            let z = Matrix::from_fn(n, k, |_, _| beta.sample(&mut rng));
            Ok((rdpg_from_latent(&z), None))
        }
        ModelKind::Distance => {
            let z = Matrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
            Ok((distance_from_latent(&z), None))
        }
    }
}

/// `P_ij = <z_i, z_j>` for latent positions in the rows of `z`.
pub fn rdpg_from_latent(z: &Matrix) -> Matrix {
    z * z.transpose()
}

/// `P_ij = 1 / (1 + exp(|z_i - z_j|))` for latent positions in the rows of `z`.
pub fn distance_from_latent(z: &Matrix) -> Matrix {
    let n = z.nrows();
    let mut raw = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dist = (z.row(i) - z.row(j)).norm();
            let p = 1.0 / (1.0 + dist.exp());
            raw[(i, j)] = p;
            raw[(j, i)] = p;
        }
    }
    raw
}

pub fn generate(spec: &ModelSpec) -> Result<GeneratedModel> {
    let (raw, labels) = generate_raw(spec)?;
    finalize(raw, spec, labels)
}

pub fn gen_sbm(spec: &ModelSpec) -> Result<ProbabilityMatrix> {
    spec.expect_kind(ModelKind::Sbm)?;
    Ok(generate(spec)?.probability)
}

pub fn gen_dcbm(spec: &ModelSpec) -> Result<ProbabilityMatrix> {
    spec.expect_kind(ModelKind::Dcbm)?;
    Ok(generate(spec)?.probability)
}

pub fn gen_rdpg(spec: &ModelSpec) -> Result<ProbabilityMatrix> {
    spec.expect_kind(ModelKind::Rdpg)?;
    Ok(generate(spec)?.probability)
}

pub fn gen_distance(spec: &ModelSpec) -> Result<ProbabilityMatrix> {
    spec.expect_kind(ModelKind::Distance)?;
    Ok(generate(spec)?.probability)
}

/// One undirected draw: `A_ij ~ Bernoulli(P_ij)` independently for `i < j`.
pub fn sample_adjacency(p: &ProbabilityMatrix, seed: u64) -> AdjacencyMatrix {
    let mut rng = stream(seed);
    let n = p.n_nodes();
    let pv = p.values();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < pv[(i, j)] {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    AdjacencyMatrix::new(a).expect("Bernoulli draw is a valid adjacency matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_sbm_is_constant() {
        let spec = ModelSpec::new(ModelKind::Sbm, 6).with_k(1).with_b_matrix(vec![vec![0.3]]);
        let p = gen_sbm(&spec).unwrap();
        assert!(p.values().iter().all(|&x| x == 0.3));
    }

    #[test]
    fn two_block_structure() {
        let b = Matrix::from_row_slice(2, 2, &[0.6, 0.1, 0.1, 0.6]);
        let p = sbm_from_labels(&[0, 0, 1, 1], &b).unwrap();
        assert_eq!(p.view((0, 2), (2, 2)).into_owned(), Matrix::from_element(2, 2, 0.1));
        assert_eq!(p.view((0, 0), (2, 2)).into_owned(), Matrix::from_element(2, 2, 0.6));
    }

    #[test]
    fn unit_degrees_reduce_to_sbm() {
        let b = planted_partition(3, 0.6, 0.12);
        let labels = [0, 2, 1, 1, 0, 2, 2];
        let d = dcbm_from_parts(&labels, &[1.0; 7], &b).unwrap();
        assert_eq!(d, sbm_from_labels(&labels, &b).unwrap());
    }

    #[test]
    fn scaling_hand_arithmetic() {
        let p = ProbabilityMatrix::new(Matrix::from_element(10, 10, 0.5)).unwrap();
        let s = scale_to_degree(&p, 2.0).unwrap();
        assert!((s.factor - 4.0 / 9.0).abs() < 1e-15);
        assert!((s.matrix.values()[(0, 1)] - 2.0 / 9.0).abs() < 1e-15);
        assert!((s.achieved_degree - 2.0).abs() < 1e-12);
        assert!(!s.is_saturated());
    }

    #[test]
    fn scaling_fixed_point() {
        let p = ProbabilityMatrix::new(Matrix::from_element(10, 10, 0.5)).unwrap();
        let s = scale_to_degree(&p, p.expected_degree()).unwrap();
        assert_eq!(s.factor, 1.0);
        assert_eq!(&s.matrix, &p);
    }

    #[test]
    fn scaling_saturates() {
        let p = ProbabilityMatrix::new(Matrix::from_element(10, 10, 0.5)).unwrap();
        let s = scale_to_degree(&p, 100.0).unwrap();
        assert!(s.is_saturated());
        assert_eq!(s.saturated_entries, 90);
        assert!(s.matrix.values().iter().all(|&x| x == 1.0));
        assert!(s.saturated_mass_fraction > 0.0);
    }

    #[test]
    fn scaling_rejects_zero_matrix() {
        let p = ProbabilityMatrix::new(Matrix::zeros(4, 4)).unwrap();
        assert!(matches!(scale_to_degree(&p, 2.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_and_one_probability_draws() {
        let zero = ProbabilityMatrix::new(Matrix::zeros(8, 8)).unwrap();
        assert_eq!(sample_adjacency(&zero, 1).edge_count(), 0);
        let ones = ProbabilityMatrix::new(Matrix::from_element(8, 8, 1.0)).unwrap();
        assert_eq!(sample_adjacency(&ones, 1).edge_count(), 28);
    }

    #[test]
    fn distance_diagonal_is_half() {
        let spec = ModelSpec::new(ModelKind::Distance, 20).with_seed(4);
        let p = gen_distance(&spec).unwrap();
        assert!(p.values().diagonal().iter().all(|&x| x == 0.5));
        assert!(p.values().iter().all(|&x| x > 0.0 && x <= 0.5));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let spec = ModelSpec::new(ModelKind::Rdpg, 10);
        assert!(gen_sbm(&spec).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(ModelKind::Sbm, 10).with_k(0).validate().is_err());
        assert!(ModelSpec::new(ModelKind::Sbm, 10).with_target_degree(-1.0).validate().is_err());
        let asym = ModelSpec::new(ModelKind::Sbm, 10)
            .with_k(2)
            .with_b_matrix(vec![vec![0.5, 0.1], vec![0.2, 0.5]]);
        assert!(asym.validate().is_err());
    }

    #[test]
    fn spec_parses_from_toml() {
        let spec: ModelSpec = toml::from_str(
            "kind = \"dcbm\"\nn_nodes = 50\ntarget_degree = 20.0\n",
        )
        .unwrap();
        assert_eq!(spec.kind, ModelKind::Dcbm);
        assert_eq!(spec.k, 5);
        assert_eq!(spec.out_in_ratio, 0.2);
        assert_eq!(spec.degree_power_alpha, 0.1);
    }
}
