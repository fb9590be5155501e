use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{predict, EstimationConfig, Method, Statistic};
use crate::ops::OpCounts;
use crate::par::{map_indices, Execution};

use super::measures::{global_measures, GlobalMeasures, LocalError, LocalErrors};
use super::wilcoxon::{wilcoxon_signed_rank, ComparisonResult};

/// What happened to one held-out project.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectOutcome {
    pub index: usize,
    pub actual: f64,
    pub estimate: Option<f64>,
    pub k_used: Option<usize>,
    pub matched_index: Option<usize>,
    pub ks_statistic: Option<f64>,
    pub local: Option<LocalError>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub method: Method,
    /// Resolved k search bound (`None` for fixed k).
    pub k_max: Option<usize>,
    pub statistic: Statistic,
    pub outcomes: Vec<ProjectOutcome>,
    /// Local errors of the projects that were estimated, in project order.
    pub locals: LocalErrors,
    pub globals: GlobalMeasures,
    pub failed: usize,
    pub wall_time: Duration,
    pub ops: OpCounts,
}

impl Evaluation {
    pub fn predictions(&self) -> usize {
        self.outcomes.len() - self.failed
    }
}

/// Estimate every project from the other n - 1 (ranges refit per fold) and
/// aggregate the errors.
pub fn loo_evaluate(dataset: &Dataset, config: &EstimationConfig) -> Result<Evaluation> {
    let n = dataset.len();
    if n < 3 {
        return Err(Error::TooFewRecords { required: 3, found: n });
    }
    let fold_size = n - 1;
    let mut fold_config = *config;
    let k_max = match config.method {
        Method::FixedK(k) => {
            if k == 0 || k > fold_size {
                return Err(Error::InvalidConfig(format!(
                    "k = {k} is outside 1..={fold_size} for leave-one-out on {n} projects"
                )));
            }
            None
        }
        method => {
            let k_max = config.resolve_k_max(fold_size, method)?;
            fold_config.k_max = Some(k_max);
            Some(k_max)
        }
    };

    let started = Instant::now();
    let folds: Vec<(ProjectOutcome, OpCounts)> = map_indices(n, config.execution, |i| {
        let actual = dataset.efforts()[i];
        let mut outcome = ProjectOutcome {
            index: i,
            actual,
            estimate: None,
            k_used: None,
            matched_index: None,
            ks_statistic: None,
            local: None,
            failure: None,
        };
        let result = dataset.without(i).and_then(|training| {
            // indices reported against the full dataset
            let remap = |j: usize| if j >= i { j + 1 } else { j };
            predict(&training, &dataset.records()[i], &fold_config).map(|p| (p, remap))
        });
        match result {
            Ok((prediction, remap)) => {
                outcome.estimate = Some(prediction.estimate);
                outcome.k_used = Some(prediction.k_used);
                outcome.matched_index = prediction.matched_index.map(remap);
                outcome.ks_statistic = prediction.ks_statistic;
                outcome.local = Some(LocalError::new(actual, prediction.estimate));
                (outcome, prediction.ops)
            }
            Err(err) => {
                outcome.failure = Some(err.to_string());
                (outcome, OpCounts::default())
            }
        }
    });
    let wall_time = started.elapsed();

    let ops = folds.iter().map(|(_, ops)| *ops).sum();
    let outcomes: Vec<ProjectOutcome> = folds.into_iter().map(|(o, _)| o).collect();
    let locals = LocalErrors {
        entries: outcomes.iter().filter_map(|o| o.local).collect(),
    };
    let failed = outcomes.iter().filter(|o| o.failure.is_some()).count();
    let globals = global_measures(&locals)?;
    Ok(Evaluation {
        method: config.method,
        k_max,
        statistic: config.statistic,
        outcomes,
        locals,
        globals,
        failed,
        wall_time,
        ops,
    })
}

#[derive(Debug, Clone)]
pub struct MethodComparison {
    pub loocv: Evaluation,
    pub dd: Evaluation,
    /// Paired on projects estimated by both methods; `a` is LOOCV, `b` is DD.
    pub wilcoxon: ComparisonResult,
}

/// Leave-one-out evaluation of both k-selection methods with shared settings,
/// plus a signed-rank test on their paired absolute errors.
pub fn compare_methods(
    dataset: &Dataset,
    k_max: Option<usize>,
    statistic: Statistic,
    execution: Execution,
) -> Result<MethodComparison> {
    let config = |method| EstimationConfig {
        method,
        k_max,
        statistic,
        execution,
    };
    let loocv = loo_evaluate(dataset, &config(Method::Loocv))?;
    let dd = loo_evaluate(dataset, &config(Method::Dd))?;
    let (ae_a, ae_b): (Vec<f64>, Vec<f64>) = loocv
        .outcomes
        .iter()
        .zip(&dd.outcomes)
        .filter_map(|(a, b)| Some((a.local?.ae, b.local?.ae)))
        .unzip();
    let wilcoxon = wilcoxon_signed_rank(&ae_a, &ae_b)?;
    Ok(MethodComparison { loocv, dd, wilcoxon })
}
