//! Estimation by analogy for software project effort.
//!
//! Historical projects are described by mixed-type features (interval,
//! nominal, ordinal, with missing values). A new project's effort is the mean
//! or median effort of its k most similar historical projects. The crate
//! offers two ways to pick k:
//!
//! * **LOOCV**: one global k chosen by leave-one-out over the training set,
//!   minimizing the median absolute error.
//! * **DD** (distance distributions): for each query, find the historical
//!   project whose distances to all others are distributed most like the
//!   query's (two-sample KS statistic), then reuse the k that best estimates
//!   that project.
//!
//! The [`evaluation`] module provides the leave-one-out harness, the usual
//! MRE/MER/AE accuracy measures and a paired Wilcoxon signed-rank test.
//!
//! Data-parallel loops use rayon when the `parallel` feature (on by default)
//! is enabled; results do not depend on it.

pub mod dataset;
pub mod dissimilarity;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod ops;
pub mod par;
pub mod stats;

pub use dataset::{
    ordinal_to_unit_interval, parse_csv, parse_csv_reader, Cell, Dataset, FeatureKind, FeatureSpec, ProjectRecord,
    Schema,
};
pub use dissimilarity::{distance_matrix, distances_to_query, gower_distance, DistanceMatrix};
pub use distributions::{ks_statistic, nearest_distribution, row_distribution, DistanceDistribution};
pub use error::{Error, Result};
pub use estimator::{
    dd_select_k, eba_estimate, loocv_select_k, predict, rank_neighbors, EstimationConfig, Method, Prediction, Statistic,
};
pub use ops::OpCounts;
pub use par::Execution;
