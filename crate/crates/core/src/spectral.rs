//! Truncated SVD and the rank-K Moore-Penrose pseudo-inverse.
//!
//! Decompositions run on faer's dense SVD with sequential parallelism, so a
//! given input always produces bit-identical factors regardless of how many
//! threads the caller uses.

use std::sync::Once;

use crate::error::{Error, Result};
use crate::graph::Matrix;

/// Relative cutoff below which singular values are treated as zero when
/// pseudo-inverting.
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-12;

/// `u * diag(d) * v^T` with orthonormal `u` (p x K), `v` (q x K) and
/// nonincreasing, nonnegative `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankKFactorization {
    u: Matrix,
    d: Vec<f64>,
    v: Matrix,
}

impl RankKFactorization {
    /// Checks shapes and the ordering of `d`; orthonormality is the caller's
    /// responsibility.
    pub fn new(u: Matrix, d: Vec<f64>, v: Matrix) -> Result<Self> {
        let k = d.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(Error::invalid(format!(
                "factor shapes disagree: u has {} columns, v has {}, d has {k} values",
                u.ncols(),
                v.ncols()
            )));
        }
        if d.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::invalid("singular values must be finite and nonnegative"));
        }
        if d.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("singular values must be nonincreasing"));
        }
        Ok(Self { u, d, v })
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    /// Reciprocal singular values with the relative cutoff applied.
    pub(crate) fn inverted_values(&self, rel_tol: f64) -> Vec<f64> {
        let lead = self.d.first().copied().unwrap_or(0.0);
        self.d
            .iter()
            .map(|&s| if lead > 0.0 && s > rel_tol * lead { 1.0 / s } else { 0.0 })
            .collect()
    }
}

/// Thin SVD of a p x q matrix: all `min(p, q)` singular triplets.
#[derive(Debug, Clone)]
pub struct Svd {
    u: Matrix,
    d: Vec<f64>,
    v: Matrix,
}

fn sequential_backend() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

impl Svd {
    pub fn compute(m: &Matrix) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::invalid("cannot decompose an empty matrix"));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        sequential_backend();
        let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        let svd = fm
            .thin_svd()
            .map_err(|e| Error::Numerical(format!("SVD failed to converge: {e:?}")))?;
        let s = svd.S().column_vector();
        let r = s.nrows();

        // faer returns descending values; sort anyway so the contract does not
        // hinge on a backend detail.
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let fu = svd.U();
        let fv = svd.V();
        let u = Matrix::from_fn(m.nrows(), r, |i, j| fu[(i, order[j])]);
        let v = Matrix::from_fn(m.ncols(), r, |i, j| fv[(i, order[j])]);
        let d = order.iter().map(|&j| s[j].max(0.0)).collect();
        Ok(Self { u, d, v })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.d
    }

    pub fn max_rank(&self) -> usize {
        self.d.len()
    }

    /// Leading `k` triplets.
    pub fn truncate(&self, k: usize) -> Result<RankKFactorization> {
        if k == 0 || k > self.max_rank() {
            return Err(Error::invalid(format!(
                "rank must be in [1, {}], got {k}",
                self.max_rank()
            )));
        }
        Ok(RankKFactorization {
            u: self.u.columns(0, k).into_owned(),
            d: self.d[..k].to_vec(),
            v: self.v.columns(0, k).into_owned(),
        })
    }
}

pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    Ok(Svd::compute(m)?.d)
}

/// Best rank-`k` approximation of `m` in Frobenius norm.
pub fn truncated_svd(m: &Matrix, k: usize) -> Result<RankKFactorization> {
    let max_rank = m.nrows().min(m.ncols());
    if k == 0 || k > max_rank {
        return Err(Error::invalid(format!(
            "rank must be in [1, {max_rank}], got {k}"
        )));
    }
    Svd::compute(m)?.truncate(k)
}

pub fn reconstruct(f: &RankKFactorization) -> Matrix {
    let mut scaled = f.u.clone();
    for (j, &s) in f.d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * f.v.transpose()
}

/// `v * diag(d+) * u^T`, inverting only singular values above `rel_tol * d[0]`.
pub fn pinv_rank_k(f: &RankKFactorization, rel_tol: f64) -> Matrix {
    let inv = f.inverted_values(rel_tol);
    let mut scaled = f.v.clone();
    for (j, &s) in inv.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * f.u.transpose()
}
