//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `cargo test -p egonet --test acceptance -- 6` runs only criterion 6.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use egonet::estimators::{clamp_unit, le_impute};
use egonet::evaluation::auc_link_prediction;
use egonet::experiment::{run_experiment, summarize, write_records_csv, ExperimentConfig, RankRule, SummaryRow};
use egonet::generators::{generate, sample_adjacency, ModelKind, ModelSpec};
use egonet::graph::{complement, extract_ego_view, submatrix, EgoView, Matrix};
use egonet::sampling::{sample_mcar, Mechanism, SamplingPlan};
use egonet::{time_fit, Estimator};

const MASTER_SEED: u64 = 2026;
const REPLICATIONS: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

// Criterion 1: noiseless blocks of a rank-K PSD matrix are recovered exactly.
fn exact_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(1..=5);
        let n_total = rng.gen_range(2 * k + 2..=100);
        let n = rng.gen_range(k + 1..n_total);
        // Entries of X in [0, 1/sqrt(K)] keep P = X X^T inside [0, 1].
        let scale = 1.0 / (k as f64).sqrt();
        let x = Matrix::from_fn(n_total, k, |_, _| rng.gen::<f64>() * scale);
        let p = &x * x.transpose();
        let mut observed: Vec<usize> = rand::seq::index::sample(&mut rng, n_total, n).into_vec();
        observed.sort_unstable();
        let hidden = complement(&observed, n_total).unwrap();
        let view = EgoView::new(
            observed.clone(),
            submatrix(&p, &observed, &observed),
            submatrix(&p, &observed, &hidden),
            n_total,
        )
        .unwrap();
        let truth = submatrix(&p, &hidden, &hidden);
        let fit = le_impute(&view, k, false).unwrap();
        let rel = (&fit.p22_hat - &truth).norm() / truth.norm();
        worst = worst.max(rel);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-8 && within_budget(elapsed, Duration::from_secs(5)),
        format!("max relative error {worst:.2e} (< 1e-8), {:.2} s (< 5 s)", elapsed.as_secs_f64()),
    )
}

fn cell_config(kind: ModelKind, degree: f64, mechanism: Mechanism, rho: f64, rank: usize) -> ExperimentConfig {
    let model = ModelSpec::new(kind, 500).with_k(5).with_target_degree(degree);
    let mut cfg = ExperimentConfig::synthetic(model, SamplingPlan::new(mechanism, rho));
    cfg.estimators = vec![Estimator::Le];
    cfg.rank = RankRule::Fixed(rank);
    cfg.truncate = true;
    cfg.replications = REPLICATIONS;
    cfg.master_seed = MASTER_SEED;
    cfg
}

fn run_summary(cfg: &ExperimentConfig) -> (Vec<SummaryRow>, Duration) {
    let start = Instant::now();
    let records = run_experiment(cfg, None).expect("experiment runs");
    (summarize(&records), start.elapsed())
}

fn mse_window(cfg: ExperimentConfig, low: f64, high: f64, paper: f64, budget: Duration) -> Outcome {
    let (summary, elapsed) = run_summary(&cfg);
    let mse = summary[0].mse.expect("synthetic cells report MSE");
    let pass = (low..=high).contains(&(mse.mean * 1e3)) && within_budget(elapsed, budget);
    outcome(
        pass,
        format!(
            "LE mean MSE {:.3}e-3 (se {:.3}e-3), window [{low}, {high}]e-3, reference {paper}e-3, {:.0} s",
            mse.mean * 1e3,
            mse.se * 1e3,
            elapsed.as_secs_f64()
        ),
    )
}

// Criterion 2: block model, MCAR rho = 0.5, degree 20.
fn sbm_mcar() -> Outcome {
    let cfg = cell_config(ModelKind::Sbm, 20.0, Mechanism::Mcar, 0.5, 5);
    mse_window(cfg, 1.15, 1.55, 1.35, Duration::from_secs(300))
}

// Criterion 3: product model, MCAR rho = 0.5, degree 20. The rank is chosen
// per replication by cross-validation over 1..=10 with a 30% holdout; the
// latent dimension itself (5) overfits this sparse cell.
fn product_mcar() -> Outcome {
    let mut cfg = cell_config(ModelKind::Rdpg, 20.0, Mechanism::Mcar, 0.5, 1);
    cfg.rank = RankRule::CrossValidated;
    cfg.tuning.candidates = Some((1..=10).collect());
    cfg.tuning.holdout_fraction = Some(0.3);
    mse_window(cfg, 0.50, 0.67, 0.582, Duration::from_secs(300))
}

// Criterion 4: LE beats SE at rho = 0.9 for both degrees.
fn le_beats_se_at_high_rho() -> Outcome {
    let mut cfg = cell_config(ModelKind::Sbm, 20.0, Mechanism::Mcar, 0.9, 5);
    cfg.estimators = vec![Estimator::Le, Estimator::Se];
    cfg.grid.degree = Some(vec![20.0, 50.0]);
    let (summary, _) = run_summary(&cfg);
    let mut pass = true;
    let mut parts = Vec::new();
    for degree in [20.0, 50.0] {
        let mean = |e: Estimator| {
            summary
                .iter()
                .find(|s| s.degree == Some(degree) && s.estimator == e)
                .and_then(|s| s.mse)
                .expect("cell present")
                .mean
        };
        let (le, se) = (mean(Estimator::Le), mean(Estimator::Se));
        pass &= le < se;
        parts.push(format!("deg {degree}: LE {:.4}e-3 vs SE {:.4}e-3", le * 1e3, se * 1e3));
    }
    outcome(pass, parts.join("; "))
}

// Criterion 5: positive degree-dependent sampling, rho = 0.2, degree 20.
fn sbm_mnar_positive() -> Outcome {
    let cfg = cell_config(ModelKind::Sbm, 20.0, Mechanism::MnarPositive, 0.2, 5);
    mse_window(cfg, 1.75, 2.35, 2.05, Duration::from_secs(300))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

// Criterion 6: relative error shrinks as the network grows.
fn consistency() -> Outcome {
    let start = Instant::now();
    let mut medians = Vec::new();
    for (s, n_total) in [200usize, 400, 800, 1600].into_iter().enumerate() {
        let degree = (n_total as f64).ln().powi(2);
        let errors: Vec<f64> = (0..20)
            .map(|r| {
                let seed = egonet::rng::derive_seed(MASTER_SEED, (s * 100 + r) as u64);
                let spec = ModelSpec::new(ModelKind::Sbm, n_total)
                    .with_k(3)
                    .with_target_degree(degree)
                    .with_seed(egonet::rng::derive_seed(seed, 0));
                let p = generate(&spec).unwrap().probability;
                let a = sample_adjacency(&p, egonet::rng::derive_seed(seed, 1));
                let observed = sample_mcar(n_total, 0.5, egonet::rng::derive_seed(seed, 2)).unwrap();
                let view = extract_ego_view(&a, &observed).unwrap();
                let truth = p.hidden_block(&view);
                let fit = le_impute(&view, 3, true).unwrap();
                (&fit.p22_hat - &truth).norm() / truth.norm()
            })
            .collect();
        medians.push(median(errors));
    }
    let elapsed = start.elapsed();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.4}")).collect();
    outcome(
        decreasing && within_budget(elapsed, Duration::from_secs(600)),
        format!(
            "median relative error at N = 200/400/800/1600: {}, {:.0} s (< 600 s)",
            shown.join(" > "),
            elapsed.as_secs_f64()
        ),
    )
}

// Criterion 7: AUC equals the pairwise Mann-Whitney count.
fn auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut worst = 0.0f64;
    let mut instances = 0;
    while instances < 200 {
        let m = rng.gen_range(3..=20);
        let levels = rng.gen_range(2..=10);
        let density = rng.gen::<f64>();
        let mut scores = Matrix::zeros(m, m);
        let mut truth = Matrix::zeros(m, m);
        for j in 0..m {
            for i in 0..j {
                // Coarse score levels force ties.
                let s = (rng.gen_range(0..levels) as f64) / levels as f64;
                let t = f64::from(u8::from(rng.gen::<f64>() < density));
                scores[(i, j)] = s;
                scores[(j, i)] = s;
                truth[(i, j)] = t;
                truth[(j, i)] = t;
            }
        }
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for j in 0..m {
            for i in 0..j {
                if truth[(i, j)] == 1.0 {
                    pos.push(scores[(i, j)]);
                } else {
                    neg.push(scores[(i, j)]);
                }
            }
        }
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut wins = 0.0;
        for &p in &pos {
            for &q in &neg {
                wins += if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 };
            }
        }
        let oracle = wins / (pos.len() * neg.len()) as f64;
        let auc = auc_link_prediction(&scores, &truth).unwrap().auc;
        worst = worst.max((auc - oracle).abs());
        instances += 1;
    }
    outcome(worst < 1e-12, format!("200 instances, max |auc - oracle| = {worst:.1e} (< 1e-12)"))
}

// Criterion 8: clamping into [0, 1] never moves an estimate away from a
// probability.
fn clamp_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut violations = 0;
    for _ in 0..100_000 {
        let x: f64 = rng.gen_range(-3.0..4.0);
        let p: f64 = rng.gen();
        if (clamp_unit(x) - p).abs() > (x - p).abs() {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations in 1e5 pairs"))
}

// Criterion 9: one LE fit at N = 500, n = 250, K = 5 in under a second.
fn performance_floor() -> Outcome {
    let spec = ModelSpec::new(ModelKind::Sbm, 500).with_k(5).with_target_degree(20.0).with_seed(MASTER_SEED);
    let p = generate(&spec).unwrap().probability;
    let a = sample_adjacency(&p, 1);
    let view = extract_ego_view(&a, &sample_mcar(500, 0.5, 2).unwrap()).unwrap();
    let times: Vec<Duration> = (0..5)
        .map(|_| {
            let (fit, t) = time_fit(|| le_impute(&view, 5, true));
            fit.unwrap();
            t
        })
        .collect();
    let first = times[0];
    let worst = *times.iter().max().unwrap();
    outcome(
        worst < Duration::from_secs(1),
        format!(
            "first call {:.1} ms, slowest of 5 {:.1} ms (< 1000 ms)",
            first.as_secs_f64() * 1e3,
            worst.as_secs_f64() * 1e3
        ),
    )
}

fn without_wall_time(csv: &[u8]) -> String {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    text.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

// Criterion 10: the full grid is byte-identical across runs and thread counts.
fn determinism() -> Outcome {
    let model = ModelSpec::new(ModelKind::Sbm, 500).with_k(5).with_target_degree(20.0);
    let mut cfg = ExperimentConfig::synthetic(model, SamplingPlan::new(Mechanism::Mcar, 0.5));
    cfg.estimators = Estimator::ALL.to_vec();
    cfg.rank = RankRule::Fixed(5);
    cfg.replications = 2;
    cfg.master_seed = MASTER_SEED;
    cfg.grid.models = Some(vec![ModelKind::Sbm, ModelKind::Dcbm, ModelKind::Rdpg, ModelKind::Distance]);
    cfg.grid.mechanisms = Some(vec![Mechanism::Mcar, Mechanism::MnarPositive, Mechanism::MnarNegative]);
    cfg.grid.rho = Some(vec![0.1, 0.2, 0.5, 0.9]);
    cfg.grid.degree = Some(vec![20.0, 50.0]);
    let run = |threads| {
        let records = run_experiment(&cfg, Some(threads)).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        (records.len(), without_wall_time(&buf))
    };
    // The repeat runs on three threads, so scheduling differs too.
    let start = Instant::now();
    let (rows, first) = run(1);
    let (_, second) = run(3);
    outcome(
        first == second,
        format!(
            "{rows} rows; second run (3 threads) identical: {}, {:.0} s",
            first == second,
            start.elapsed().as_secs_f64()
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [Criterion; 10] = [
        (1, "exact recovery of noiseless rank-K blocks", exact_recovery),
        (2, "SBM MCAR (0.5, 20) LE MSE window", sbm_mcar),
        (3, "product MCAR (0.5, 20) LE MSE window", product_mcar),
        (4, "LE below SE at rho 0.9, degrees 20 and 50", le_beats_se_at_high_rho),
        (5, "SBM MNAR+ (0.2, 20) LE MSE window", sbm_mnar_positive),
        (6, "relative error decreasing in N", consistency),
        (7, "AUC equals pairwise oracle", auc_oracle),
        (8, "clamping never increases error", clamp_monotone),
        (9, "LE at N=500 under one second", performance_floor),
        (10, "byte-identical experiment CSVs", determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}: {name}: {}", result.detail);
        failed += usize::from(!result.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
