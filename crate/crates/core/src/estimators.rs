//! Imputation of the unobserved block of an egocentric sample.
//!
//! All three estimators share one closing step: given a rank-K smoothing of
//! the observed-observed block with pseudo-inverse `S+`, the hidden block is
//! `a12^T * S+ * a12`. They differ only in how the smoothing is obtained:
//!
//! * `Le` takes the rank-K truncated SVD of `a11` directly.
//! * `Se` takes the rank-K approximation of the full observed rows
//!   `[a11 | a12]` and keeps its first `n` columns.
//! * `LePlus` averages the two.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EgoView, Matrix};
use crate::spectral::{reconstruct, truncated_svd, RankKFactorization, DEFAULT_PINV_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Le,
    Se,
    LePlus,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Le, Estimator::Se, Estimator::LePlus];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Le => "le",
            Estimator::Se => "se",
            Estimator::LePlus => "le_plus",
        }
    }

    pub fn impute(self, view: &EgoView, k: usize, truncate: bool) -> Result<ImputationResult> {
        match self {
            Estimator::Le => le_impute(view, k, truncate),
            Estimator::Se => se_impute(view, k, truncate),
            Estimator::LePlus => le_plus_impute(view, k, truncate),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "le" => Ok(Estimator::Le),
            "se" => Ok(Estimator::Se),
            "le_plus" | "le_" | "leplus" => Ok(Estimator::LePlus),
            other => Err(Error::invalid(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Estimated probabilities among hidden nodes, in the view's hidden order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    pub p22_hat: Matrix,
    pub rank_used: usize,
    pub truncated: bool,
}

/// Estimated full probability matrix in fronted order (observed nodes first).
#[derive(Debug, Clone, PartialEq)]
pub struct FullRecoveryResult {
    pub p_hat: Matrix,
    pub rank_used: usize,
    pub truncated: bool,
    order: Vec<usize>,
}

impl FullRecoveryResult {
    /// Node label of each fronted row/column.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `p_hat` permuted back to original node labels.
    pub fn in_node_order(&self) -> Matrix {
        let n = self.order.len();
        let mut out = Matrix::zeros(n, n);
        for (i, &a) in self.order.iter().enumerate() {
            for (j, &b) in self.order.iter().enumerate() {
                out[(a, b)] = self.p_hat[(i, j)];
            }
        }
        out
    }
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn clamp_in_place(m: &mut Matrix) {
    m.apply(|x| *x = clamp_unit(*x));
}

fn check_rank(view: &EgoView, k: usize) -> Result<()> {
    let n = view.n_observed();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "rank must be in [1, {n}] for {n} observed nodes, got {k}"
        )));
    }
    Ok(())
}

/// `a12^T * pinv(f) * a12`, evaluated as `(a12^T v) diag(d+) (u^T a12)` so the
/// n x n pseudo-inverse is never formed.
fn close_through(f: &RankKFactorization, a12: &Matrix) -> Matrix {
    let inv = f.inverted_values(DEFAULT_PINV_REL_TOL);
    let mut left = a12.transpose() * f.v();
    for (j, &s) in inv.iter().enumerate() {
        left.column_mut(j).scale_mut(s);
    }
    let right = f.u().transpose() * a12;
    left * right
}

/// Rank-`k` smoothing of the observed rows `[a11 | a12]`.
fn smooth_observed_rows(view: &EgoView, k: usize) -> Result<Matrix> {
    Ok(reconstruct(&truncated_svd(&view.observed_rows(), k)?))
}

pub(crate) fn le_raw(view: &EgoView, k: usize) -> Result<Matrix> {
    check_rank(view, k)?;
    let f = truncated_svd(view.a11(), k)?;
    Ok(close_through(&f, view.a12()))
}

fn se_from_smoothed(view: &EgoView, smoothed: &Matrix, k: usize) -> Result<Matrix> {
    let n = view.n_observed();
    let p11 = smoothed.columns(0, n).into_owned();
    let f = truncated_svd(&p11, k)?;
    Ok(close_through(&f, view.a12()))
}

pub(crate) fn se_raw(view: &EgoView, k: usize) -> Result<Matrix> {
    check_rank(view, k)?;
    let smoothed = smooth_observed_rows(view, k)?;
    se_from_smoothed(view, &smoothed, k)
}

fn finish(mut p22_hat: Matrix, k: usize, truncate: bool) -> ImputationResult {
    if truncate {
        clamp_in_place(&mut p22_hat);
    }
    ImputationResult {
        p22_hat,
        rank_used: k,
        truncated: truncate,
    }
}

pub fn le_impute(view: &EgoView, k: usize, truncate: bool) -> Result<ImputationResult> {
    Ok(finish(le_raw(view, k)?, k, truncate))
}

pub fn se_impute(view: &EgoView, k: usize, truncate: bool) -> Result<ImputationResult> {
    Ok(finish(se_raw(view, k)?, k, truncate))
}

/// Elementwise mean of two estimates.
pub fn midpoint(a: &Matrix, b: &Matrix) -> Matrix {
    (a + b) * 0.5
}

/// Elementwise mean of the unclamped LE and SE blocks, clamped once at the end.
pub fn le_plus_impute(view: &EgoView, k: usize, truncate: bool) -> Result<ImputationResult> {
    let le = le_raw(view, k)?;
    let se = se_raw(view, k)?;
    Ok(finish(midpoint(&le, &se), k, truncate))
}

/// All four blocks: the observed rows come from the rank-`k` smoothing of
/// `[a11 | a12]` (with the observed-observed part symmetrized) and the hidden
/// block from LE.
pub fn recover_full(view: &EgoView, k: usize, truncate: bool) -> Result<FullRecoveryResult> {
    check_rank(view, k)?;
    let smoothed = smooth_observed_rows(view, k)?;
    let p22 = le_raw(view, k)?;
    let n = view.n_observed();
    let m = view.n_hidden();
    let total = view.n_total();

    let c = smoothed.columns(0, n);
    let p11 = (c + c.transpose()) * 0.5;
    let p12 = smoothed.columns(n, m);

    let mut p_hat = Matrix::zeros(total, total);
    p_hat.view_mut((0, 0), (n, n)).copy_from(&p11);
    p_hat.view_mut((0, n), (n, m)).copy_from(&p12);
    p_hat.view_mut((n, 0), (m, n)).copy_from(&p12.transpose());
    p_hat.view_mut((n, n), (m, m)).copy_from(&p22);
    if truncate {
        clamp_in_place(&mut p_hat);
    }
    Ok(FullRecoveryResult {
        p_hat,
        rank_used: k,
        truncated: truncate,
        order: view.fronted_order(),
    })
}

/// Hidden-block estimates for every rank in `ranks` from one decomposition
/// of `a11`. Ranks are applied incrementally, so each output matches
/// `le_impute(view, k, truncate)` up to floating-point summation order.
pub fn le_impute_ranks(view: &EgoView, ranks: &[usize], truncate: bool) -> Result<Vec<ImputationResult>> {
    for &k in ranks {
        check_rank(view, k)?;
    }
    let Some(&max_k) = ranks.iter().max() else {
        return Ok(Vec::new());
    };
    let f = truncated_svd(view.a11(), max_k)?;
    let inv = f.inverted_values(DEFAULT_PINV_REL_TOL);
    let left = view.a12().transpose() * f.v();
    let right = f.u().transpose() * view.a12();
    let m = view.n_hidden();

    let mut partial = Vec::with_capacity(max_k);
    let mut acc = Matrix::zeros(m, m);
    for (j, &w) in inv.iter().enumerate() {
        if w != 0.0 {
            let col = left.column(j) * w;
            acc.ger(1.0, &col, &right.row(j).transpose(), 1.0);
        }
        partial.push(acc.clone());
    }
    Ok(ranks
        .iter()
        .map(|&k| finish(partial[k - 1].clone(), k, truncate))
        .collect())
}
