//! Imputation of the unobserved block of an egocentrically sampled network.
//!
//! An egocentric sample observes `n` of `N` nodes together with every link
//! touching them, which leaves the links among the `N - n` unsampled nodes
//! missing. The estimators here fill that block in from a low-rank
//! approximation of the observed rows:
//!
//! ```
//! use egonet::{generate, sample_adjacency, sample_mcar, extract_ego_view, le_impute, mse_block};
//! use egonet::{ModelKind, ModelSpec};
//!
//! let spec = ModelSpec::new(ModelKind::Sbm, 200).with_k(3).with_target_degree(15.0).with_seed(1);
//! let p = generate(&spec).unwrap().probability;
//! let a = sample_adjacency(&p, 2);
//! let view = extract_ego_view(&a, &sample_mcar(200, 0.5, 3).unwrap()).unwrap();
//! let fit = le_impute(&view, 3, true).unwrap();
//! let mse = mse_block(&fit.p22_hat, &p.hidden_block(&view)).unwrap();
//! assert!(mse < 0.01);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod io;
pub mod rng;
pub mod sampling;
pub mod spectral;
pub mod tuning;

pub use error::{Error, Result};
pub use estimators::{
    clamp_unit, le_impute, le_impute_ranks, le_plus_impute, midpoint, recover_full, se_impute, Estimator,
    FullRecoveryResult, ImputationResult,
};
pub use evaluation::{auc_link_prediction, mse_block, roc_curve, time_fit, MetricReport, RocCurve};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentRecord, RankRule};
pub use generators::{
    generate, sample_adjacency, scale_to_degree, GeneratedModel, ModelKind, ModelSpec, ScaledMatrix,
};
pub use graph::{
    extract_ego_view, partition, AdjacencyMatrix, BlockPartition, EgoView, Matrix, ProbabilityMatrix,
};
pub use io::{load_edge_list, EdgeListOptions};
pub use sampling::{sample_mcar, sample_mnar, sample_nodes, Mechanism, NodeSample, SamplingPlan};
pub use spectral::{pinv_rank_k, reconstruct, truncated_svd, RankKFactorization, Svd};
pub use tuning::{select_rank, RankSelection, TuningOptions};
