//! Error and link-prediction metrics for imputed blocks.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::Matrix;

/// `||p22_hat - p22_true||_F^2 / m^2` over all entries, diagonal included.
pub fn mse_block(p22_hat: &Matrix, p22_true: &Matrix) -> Result<f64> {
    if p22_hat.shape() != p22_true.shape() {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            p22_hat.shape(),
            p22_true.shape()
        )));
    }
    if p22_hat.is_empty() {
        return Err(Error::invalid("cannot compute MSE of an empty block"));
    }
    let sq: f64 = p22_hat
        .iter()
        .zip(p22_true.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq / p22_hat.len() as f64)
}

/// Threshold sweep of scores against binary truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` pairs from `(0, 0)` to `(1, 1)`, one per distinct score.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
}

impl RocCurve {
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
            .sum()
    }
}

/// ROC curve and exact AUC for paired scores and labels.
///
/// AUC is the Mann-Whitney statistic `(concordant + tied / 2) / (pos * neg)`,
/// accumulated in integer counts over tie groups.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels have different lengths"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc(format!(
            "need both classes, got {positives} positives and {negatives} negatives"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // Walk tie groups from the highest score down.
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut twice_concordant_plus_tied = 0u128;
    let mut start = 0;
    while start < order.len() {
        let s = scores[order[start]];
        let mut end = start;
        let (mut gp, mut gn) = (0u64, 0u64);
        while end < order.len() && scores[order[end]] == s {
            if labels[order[end]] {
                gp += 1;
            } else {
                gn += 1;
            }
            end += 1;
        }
        // Each positive in this group beats every negative below it and ties
        // with the negatives inside it.
        let neg_below = negatives as u64 - fp - gn;
        twice_concordant_plus_tied += 2 * gp as u128 * neg_below as u128 + gp as u128 * gn as u128;
        tp += gp;
        fp += gn;
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
        start = end;
    }
    let auc = twice_concordant_plus_tied as f64 / (2.0 * positives as f64 * negatives as f64);
    Ok(RocCurve {
        points,
        auc,
        positives,
        negatives,
    })
}

/// Link prediction on a hidden block: scores the strict upper triangle of
/// `scores` against the 0/1 entries of `truth`.
pub fn auc_link_prediction(scores: &Matrix, truth: &Matrix) -> Result<RocCurve> {
    if scores.shape() != truth.shape() || scores.nrows() != scores.ncols() {
        return Err(Error::invalid(format!(
            "need equal square blocks, got {:?} and {:?}",
            scores.shape(),
            truth.shape()
        )));
    }
    let (s, l) = upper_triangle_pairs(scores, truth)?;
    roc_curve(&s, &l)
}

pub(crate) fn upper_triangle_pairs(scores: &Matrix, truth: &Matrix) -> Result<(Vec<f64>, Vec<bool>)> {
    let m = scores.nrows();
    let mut s = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    let mut l = Vec::with_capacity(s.capacity());
    for j in 0..m {
        for i in 0..j {
            s.push(scores[(i, j)]);
            l.push(binary(truth[(i, j)])?);
        }
    }
    Ok((s, l))
}

pub(crate) fn binary(x: f64) -> Result<bool> {
    if x == 1.0 {
        Ok(true)
    } else if x == 0.0 {
        Ok(false)
    } else {
        Err(Error::invalid(format!("truth entries must be 0 or 1, found {x}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mse: Option<f64>,
    pub auc: Option<f64>,
    pub wall_time: Duration,
}

impl MetricReport {
    pub fn wall_time_ms(&self) -> f64 {
        self.wall_time.as_secs_f64() * 1e3
    }
}

/// Runs `fit` and measures it on the monotonic clock.
pub fn time_fit<T>(fit: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = fit();
    (out, start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_blocks_have_zero_mse() {
        let m = Matrix::from_fn(4, 4, |i, j| (i + j) as f64 / 10.0);
        assert_eq!(mse_block(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_mse() {
        let p = Matrix::from_fn(6, 6, |i, j| ((i * j) % 5) as f64 / 10.0);
        let hat = p.add_scalar(0.1);
        assert!((mse_block(&hat, &p).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn mse_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Matrix::from_fn(5, 5, |_, _| rng.gen::<f64>());
        let b = Matrix::from_fn(5, 5, |_, _| rng.gen::<f64>());
        let mut total = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                total += (a[(i, j)] - b[(i, j)]).powi(2);
            }
        }
        assert!((mse_block(&a, &b).unwrap() - total / 25.0).abs() < 1e-14);
    }

    #[test]
    fn mse_shape_mismatch() {
        let a = Matrix::zeros(3, 3);
        let b = Matrix::zeros(2, 2);
        assert!(matches!(mse_block(&a, &b), Err(Error::InvalidArgument(_))));
    }

    fn truth4() -> Matrix {
        let mut t = Matrix::zeros(4, 4);
        for (i, j) in [(0, 1), (2, 3)] {
            t[(i, j)] = 1.0;
            t[(j, i)] = 1.0;
        }
        t
    }

    #[test]
    fn perfect_scores() {
        let t = truth4();
        let roc = auc_link_prediction(&t, &t).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert_eq!(roc.positives, 2);
        assert_eq!(roc.negatives, 4);
    }

    #[test]
    fn constant_scores() {
        let roc = auc_link_prediction(&Matrix::from_element(4, 4, 0.3), &truth4()).unwrap();
        assert_eq!(roc.auc, 0.5);
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn single_class_is_undefined() {
        let t = Matrix::zeros(3, 3);
        assert!(matches!(
            auc_link_prediction(&Matrix::zeros(3, 3), &t),
            Err(Error::UndefinedAuc(_))
        ));
    }

    #[test]
    fn non_binary_truth_rejected() {
        let mut t = truth4();
        t[(0, 2)] = 0.5;
        assert!(auc_link_prediction(&t, &t).is_err());
    }

    #[test]
    fn curve_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scores: Vec<f64> = (0..50).map(|_| (rng.gen::<f64>() * 5.0).floor()).collect();
        let labels: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let roc = roc_curve(&scores, &labels).unwrap();
        assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
        assert!(roc.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        assert!((roc.trapezoid_area() - roc.auc).abs() < 1e-12);
    }

    #[test]
    fn timing_wraps_the_call() {
        let (v, d) = time_fit(|| 41 + 1);
        assert_eq!(v, 42);
        assert!(d < Duration::from_secs(1));
    }
}
