//! Accuracy measures, the leave-one-out harness and paired method comparison.

mod harness;
mod measures;
mod wilcoxon;

pub use harness::{compare_methods, loo_evaluate, Evaluation, MethodComparison, ProjectOutcome};
pub use measures::{global_measures, local_errors, GlobalMeasures, LocalError, LocalErrors};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_normal, ComparisonResult, EXACT_LIMIT};
