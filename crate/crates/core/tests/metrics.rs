use std::time::Duration;

use egonet::{auc_link_prediction, mse_block, roc_curve, time_fit, Matrix};

#[test]
fn mse_by_hand() {
    let est = Matrix::from_row_slice(2, 2, &[0.1, 0.5, 0.5, 0.3]);
    let truth = Matrix::from_row_slice(2, 2, &[0.0, 0.2, 0.2, 0.3]);
    // (0.01 + 0.09 + 0.09 + 0) / 4
    assert!((mse_block(&est, &truth).unwrap() - 0.0475).abs() < 1e-15);
    assert!(mse_block(&est, &Matrix::zeros(3, 3)).is_err());
}

#[test]
fn auc_counts_pairs_with_half_ties() {
    // Positives score 0.8 and 0.4; negatives 0.4 and 0.1.
    // Pairs: (0.8>0.4) (0.8>0.1) (0.4=0.4) (0.4>0.1) -> 3.5 / 4.
    let roc = roc_curve(&[0.8, 0.4, 0.4, 0.1], &[true, true, false, false]).unwrap();
    assert_eq!(roc.auc, 0.875);
    assert_eq!((roc.positives, roc.negatives), (2, 2));
    assert!((roc.trapezoid_area() - 0.875).abs() < 1e-15);
}

#[test]
fn link_auc_ignores_diagonal_and_lower_triangle() {
    let scores = Matrix::from_row_slice(3, 3, &[9.0, 0.9, 0.1, -5.0, 9.0, 0.5, 7.0, 7.0, 9.0]);
    let truth = Matrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
    // Upper pairs: (0,1) s=0.9 y=1, (0,2) s=0.1 y=0, (1,2) s=0.5 y=1.
    assert_eq!(auc_link_prediction(&scores, &truth).unwrap().auc, 1.0);
    assert!(auc_link_prediction(&scores, &Matrix::zeros(3, 3)).is_err());
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

#[test]
fn timing_overhead_is_small() {
    let samples: Vec<Duration> = (0..101).map(|_| time_fit(|| ()).1).collect();
    assert!(median(samples) < Duration::from_millis(1));
    let (value, _) = time_fit(|| 41 + 1);
    assert_eq!(value, 42);
}
