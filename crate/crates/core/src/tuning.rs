//! Cross-validated choice of the rank K.
//!
//! Each repeat hides a random subset V of the observed nodes, treats the rest
//! as a smaller egocentric sample whose hidden block is V x V, and scores
//! every candidate rank by link-prediction AUC on that block. The final rank
//! is the rounded mean of the per-repeat winners.

use std::io::Write;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::estimators::{le_impute_ranks, Estimator};
use crate::evaluation::auc_link_prediction;
use crate::graph::{complement, submatrix, EgoView, Matrix};
use crate::rng::{derive_seed, stream};

const MAX_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TuningOptions {
    pub candidates: Vec<usize>,
    pub holdout_fraction: f64,
    pub repeats: usize,
    pub estimator: Estimator,
    pub seed: u64,
}

impl TuningOptions {
    /// Candidates `1..=min(20, n/4)`, 10% holdout, 5 repeats.
    pub fn defaults_for(n_observed: usize, seed: u64) -> Self {
        let top = (n_observed / 4).clamp(1, 20);
        Self {
            candidates: (1..=top).collect(),
            holdout_fraction: 0.1,
            repeats: 5,
            estimator: Estimator::Le,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSelection {
    pub candidate_ranks: Vec<usize>,
    pub holdout_fraction: f64,
    pub repeats: usize,
    pub chosen_rank: usize,
    /// `per_rank_auc[r][c]`: AUC of candidate `c` on repeat `r`.
    pub per_rank_auc: Vec<Vec<f64>>,
    pub per_repeat_choice: Vec<usize>,
    pub seed: u64,
}

impl RankSelection {
    /// One row per (repeat, rank): `repeat,rank,auc,selected`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("writing tuning trace: {e}"));
        w.write_record(["repeat", "rank", "auc", "selected"]).map_err(io)?;
        for (r, row) in self.per_rank_auc.iter().enumerate() {
            for (c, auc) in row.iter().enumerate() {
                let rank = self.candidate_ranks[c];
                w.write_record([
                    r.to_string(),
                    rank.to_string(),
                    format!("{auc}"),
                    (rank == self.per_repeat_choice[r]).to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Config(format!("writing tuning trace: {e}")))
    }
}

/// Rounds half away from zero.
pub fn rounded_mean_rank(choices: &[usize]) -> usize {
    let mean = choices.iter().sum::<usize>() as f64 / choices.len() as f64;
    mean.round() as usize
}

struct Split {
    sub_view: EgoView,
    truth: Matrix,
}

fn draw_split(a11: &Matrix, holdout: usize, seed: u64) -> Result<Split> {
    let n = a11.nrows();
    let mut rng = stream(seed);
    let mut held = index::sample(&mut rng, n, holdout).into_vec();
    held.sort_unstable();
    let kept = complement(&held, n)?;
    let sub_view = EgoView::new(
        kept.clone(),
        submatrix(a11, &kept, &kept),
        submatrix(a11, &kept, &held),
        n,
    )?;
    Ok(Split {
        sub_view,
        truth: submatrix(a11, &held, &held),
    })
}

fn has_both_classes(truth: &Matrix) -> bool {
    let m = truth.nrows();
    let mut pos = false;
    let mut neg = false;
    for j in 0..m {
        for i in 0..j {
            if truth[(i, j)] == 1.0 {
                pos = true;
            } else {
                neg = true;
            }
        }
    }
    pos && neg
}

fn score_candidates(split: &Split, options: &TuningOptions) -> Result<Vec<f64>> {
    let estimates = match options.estimator {
        Estimator::Le => le_impute_ranks(&split.sub_view, &options.candidates, false)?,
        est => options
            .candidates
            .iter()
            .map(|&k| est.impute(&split.sub_view, k, false))
            .collect::<Result<_>>()?,
    };
    estimates
        .iter()
        .map(|r| Ok(auc_link_prediction(&r.p22_hat, &split.truth)?.auc))
        .collect()
}

pub fn select_rank(view: &EgoView, options: &TuningOptions) -> Result<RankSelection> {
    let n = view.n_observed();
    let mut candidates = options.candidates.clone();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate ranks"));
    }
    if !(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0) {
        return Err(Error::invalid("holdout fraction must lie in (0, 1)"));
    }
    if options.repeats == 0 {
        return Err(Error::invalid("need at least one repeat"));
    }
    let holdout = (options.holdout_fraction * n as f64).round() as usize;
    if holdout < 2 || holdout >= n {
        return Err(Error::invalid(format!(
            "holdout of {holdout} nodes out of {n} leaves no validation pairs or no training nodes"
        )));
    }
    let max_rank = ((1.0 - options.holdout_fraction) * n as f64).floor() as usize;
    let max_rank = max_rank.min(n - holdout);
    if candidates[0] == 0 || *candidates.last().unwrap() > max_rank {
        return Err(Error::invalid(format!(
            "candidate ranks must lie in [1, {max_rank}]"
        )));
    }
    let options = TuningOptions {
        candidates: candidates.clone(),
        ..options.clone()
    };

    let mut per_rank_auc = Vec::with_capacity(options.repeats);
    let mut per_repeat_choice = Vec::with_capacity(options.repeats);
    for r in 0..options.repeats {
        let repeat_seed = derive_seed(options.seed, r as u64);
        let split = (0..MAX_ATTEMPTS)
            .map(|attempt| draw_split(view.a11(), holdout, derive_seed(repeat_seed, attempt)))
            .find(|s| s.as_ref().map_or(true, |s| has_both_classes(&s.truth)))
            .unwrap_or_else(|| {
                Err(Error::UndefinedAuc(format!(
                    "repeat {r}: every holdout draw had a single-class validation block"
                )))
            })?;
        let aucs = score_candidates(&split, &options)?;
        // First maximum wins, i.e. the smallest rank among ties.
        let best = aucs
            .iter()
            .enumerate()
            .fold(0, |best, (i, &a)| if a > aucs[best] { i } else { best });
        per_repeat_choice.push(candidates[best]);
        per_rank_auc.push(aucs);
    }
    Ok(RankSelection {
        chosen_rank: rounded_mean_rank(&per_repeat_choice),
        candidate_ranks: candidates,
        holdout_fraction: options.holdout_fraction,
        repeats: options.repeats,
        per_rank_auc,
        per_repeat_choice,
        seed: options.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::sbm_from_labels;
    use crate::graph::partition;

    #[test]
    fn rounding() {
        assert_eq!(rounded_mean_rank(&[4, 5, 5]), 5);
        assert_eq!(rounded_mean_rank(&[2, 3]), 3);
        assert_eq!(rounded_mean_rank(&[2, 2, 3]), 2);
    }

    fn two_cliques(n_total: usize, n: usize) -> EgoView {
        // Binary rank-2 probability matrix: two disjoint cliques of unequal
        // size, so the leading singular values never tie.
        let labels: Vec<usize> = (0..n_total).map(|i| usize::from(i % 3 == 0)).collect();
        let b = Matrix::identity(2, 2);
        let p = sbm_from_labels(&labels, &b).unwrap();
        let blocks = partition(&p, n).unwrap();
        EgoView::from_blocks(blocks.m11, blocks.m12).unwrap()
    }

    #[test]
    fn singleton_candidate() {
        let view = two_cliques(40, 30);
        let opts = TuningOptions {
            candidates: vec![3],
            holdout_fraction: 0.3,
            repeats: 3,
            estimator: Estimator::Le,
            seed: 1,
        };
        assert_eq!(select_rank(&view, &opts).unwrap().chosen_rank, 3);
    }

    #[test]
    fn noiseless_rank_two_is_found() {
        // 18 held-out nodes include pairs inside both cliques, so rank 1 falls
        // short of a perfect score.
        let view = two_cliques(80, 60);
        for estimator in [Estimator::Le, Estimator::Se] {
            let opts = TuningOptions {
                candidates: vec![1, 2, 3, 4],
                holdout_fraction: 0.3,
                repeats: 4,
                estimator,
                seed: 9,
            };
            let sel = select_rank(&view, &opts).unwrap();
            assert_eq!(sel.chosen_rank, 2, "{estimator}");
            for (row, &choice) in sel.per_rank_auc.iter().zip(&sel.per_repeat_choice) {
                assert!((row[1] - 1.0).abs() < 1e-12);
                // Rank 1 leaves the small clique at round-off level; its sign
                // noise can occasionally order the pairs perfectly too.
                assert!(choice == 2 || (choice == 1 && row[0] == row[1]));
            }
        }
    }

    #[test]
    fn reproducible_trace() {
        let view = two_cliques(40, 30);
        let opts = TuningOptions::defaults_for(30, 77);
        let opts = TuningOptions {
            holdout_fraction: 0.3,
            ..opts
        };
        let a = select_rank(&view, &opts).unwrap();
        let b = select_rank(&view, &opts).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        a.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("repeat,rank,auc,selected\n"));
        assert_eq!(text.lines().count(), 1 + a.repeats * a.candidate_ranks.len());
    }

    #[test]
    fn degenerate_holdout_errors() {
        let view = EgoView::from_blocks(Matrix::zeros(20, 20), Matrix::zeros(20, 5)).unwrap();
        let opts = TuningOptions {
            candidates: vec![1],
            holdout_fraction: 0.2,
            repeats: 1,
            estimator: Estimator::Le,
            seed: 0,
        };
        assert!(matches!(select_rank(&view, &opts), Err(Error::UndefinedAuc(_))));
    }

    #[test]
    fn candidate_range_checked() {
        let view = two_cliques(40, 30);
        let opts = TuningOptions {
            candidates: vec![1, 28],
            holdout_fraction: 0.3,
            repeats: 1,
            estimator: Estimator::Le,
            seed: 0,
        };
        assert!(matches!(select_rank(&view, &opts), Err(Error::InvalidArgument(_))));
    }
}
