//! k-nearest-neighbor effort estimation and the two ways of choosing k:
//! a single global k by leave-one-out over the training set, or a per-query
//! k borrowed from the historical project whose distance distribution best
//! matches the query's.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ProjectRecord};
use crate::dissimilarity::{distance_matrix_with, distances_to_query, DistanceMatrix};
use crate::distributions::{nearest_distribution_with, DistanceDistribution};
use crate::error::{Error, Result};
use crate::ops::OpCounts;
use crate::par::{map_indices, Execution};
use crate::stats;

/// Upper bound of the default k search range.
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
    Median,
}

impl Statistic {
    pub fn apply(&self, values: &[f64]) -> Option<f64> {
        match self {
            Statistic::Mean => stats::mean(values),
            Statistic::Median => stats::median(values),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "median" => Ok(Statistic::Median),
            other => Err(Error::InvalidConfig(format!("unknown statistic `{other}`"))),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FixedK(usize),
    Loocv,
    Dd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::FixedK(_) => "fixed-k",
            Method::Loocv => "loocv",
            Method::Dd => "dd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::FixedK(k) => write!(f, "fixed-k({k})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimationConfig {
    pub method: Method,
    /// `None` selects `min(10, n - 2)` for the training set at hand.
    pub k_max: Option<usize>,
    pub statistic: Statistic,
    pub execution: Execution,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            method: Method::Dd,
            k_max: None,
            statistic: Statistic::Mean,
            execution: Execution::default(),
        }
    }
}

impl EstimationConfig {
    pub fn new(method: Method) -> Self {
        EstimationConfig {
            method,
            ..Default::default()
        }
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = Some(k_max);
        self
    }

    pub fn with_statistic(mut self, statistic: Statistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Effective k_max for a training set of `n` projects under `method`:
    /// at most `n - 1` for LOOCV and `n - 2` for the distribution matcher.
    pub fn resolve_k_max(&self, n: usize, method: Method) -> Result<usize> {
        let limit = match method {
            Method::Loocv => n.saturating_sub(1),
            _ => n.saturating_sub(2),
        };
        let k_max = self.k_max.unwrap_or_else(|| DEFAULT_K_MAX.min(n.saturating_sub(2)));
        if k_max == 0 || k_max > limit {
            return Err(Error::InvalidConfig(format!(
                "k_max = {k_max} is outside 1..={limit} for {method} on {n} projects"
            )));
        }
        Ok(k_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Candidates sorted by ascending distance, equal distances by ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborRanking {
    entries: Vec<Neighbor>,
}

impl NeighborRanking {
    pub fn entries(&self) -> &[Neighbor] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Rank every index except `exclude` and those at infinite distance.
pub fn rank_neighbors(distances: &[f64], exclude: Option<usize>) -> Result<NeighborRanking> {
    if let Some(x) = exclude {
        if x >= distances.len() {
            return Err(Error::IndexOutOfBounds {
                index: x,
                len: distances.len(),
            });
        }
    }
    let mut entries: Vec<Neighbor> = distances
        .iter()
        .enumerate()
        .filter(|&(i, d)| Some(i) != exclude && d.is_finite())
        .map(|(index, &distance)| Neighbor { index, distance })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyRanking);
    }
    entries.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
    Ok(NeighborRanking { entries })
}

/// Statistic of the efforts of the first `k` ranked neighbors.
pub fn eba_estimate(ranking: &NeighborRanking, efforts: &[f64], k: usize, statistic: Statistic) -> Result<f64> {
    if k == 0 || k > ranking.len() {
        return Err(Error::KOutOfRange {
            k,
            available: ranking.len(),
        });
    }
    let chosen: Vec<f64> = ranking.entries[..k].iter().map(|n| efforts[n.index]).collect();
    Ok(statistic.apply(&chosen).expect("k >= 1"))
}

/// Absolute error of estimating `actual` from its first 1..=k_max neighbors.
fn errors_by_k(
    ranking: &NeighborRanking,
    efforts: &[f64],
    actual: f64,
    k_max: usize,
    statistic: Statistic,
) -> Result<Vec<f64>> {
    (1..=k_max)
        .map(|k| eba_estimate(ranking, efforts, k, statistic).map(|e| (actual - e).abs()))
        .collect()
}

/// 1-based position of the smallest value; the first wins ties.
fn argmin_k(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best + 1
}

fn check_matrix(dataset: &Dataset, matrix: &DistanceMatrix) -> Result<()> {
    if matrix.n() != dataset.len() {
        return Err(Error::LengthMismatch {
            left: matrix.n(),
            right: dataset.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoocvSelection {
    pub k_star: usize,
    /// MdAE for k = 1..=k_max.
    pub mdae_per_k: Vec<f64>,
    pub ops: OpCounts,
}

/// Choose one k for the whole training set: hold out each project in turn,
/// estimate it from the rest for every k, and keep the k with the smallest
/// median absolute error.
pub fn loocv_select_k(dataset: &Dataset, matrix: &DistanceMatrix, config: &EstimationConfig) -> Result<LoocvSelection> {
    check_matrix(dataset, matrix)?;
    let n = dataset.len();
    let k_max = config.resolve_k_max(n, Method::Loocv)?;
    let efforts = dataset.efforts();

    let per_project: Vec<Result<Vec<f64>>> = map_indices(n, config.execution, |i| {
        let ranking = rank_neighbors(matrix.row(i), Some(i))?;
        errors_by_k(&ranking, efforts, efforts[i], k_max, config.statistic)
    });
    let per_project = per_project.into_iter().collect::<Result<Vec<_>>>()?;

    let mdae_per_k: Vec<f64> = (0..k_max)
        .map(|k| {
            let column: Vec<f64> = per_project.iter().map(|errs| errs[k]).collect();
            stats::median(&column).expect("n >= 2")
        })
        .collect();
    let ops = OpCounts {
        neighbor_rankings: n as u64,
        eba_estimates: (n * k_max) as u64,
        ..OpCounts::default()
    };
    Ok(LoocvSelection {
        k_star: argmin_k(&mdae_per_k),
        mdae_per_k,
        ops,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdSelection {
    pub k_star: usize,
    pub matched_index: usize,
    pub ks_statistic: f64,
    /// Absolute error of the matched project's estimate for k = 1..=k_max.
    pub errors_per_k: Vec<f64>,
    pub ops: OpCounts,
}

/// Choose k for one query: find the historical project whose distances to
/// the others are distributed most like the query's distances, then take the
/// k that best estimates that project from the remaining ones.
pub fn dd_select_k(
    dataset: &Dataset,
    matrix: &DistanceMatrix,
    query_distances: &[f64],
    config: &EstimationConfig,
) -> Result<DdSelection> {
    check_matrix(dataset, matrix)?;
    if query_distances.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            left: query_distances.len(),
            right: dataset.len(),
        });
    }
    let n = dataset.len();
    let k_max = config.resolve_k_max(n, Method::Dd)?;
    let efforts = dataset.efforts();

    let query = DistanceDistribution::from_query(query_distances);
    let matched = nearest_distribution_with(matrix, &query, config.execution)?;
    let ranking = rank_neighbors(matrix.row(matched.index), Some(matched.index))?;
    let errors_per_k = errors_by_k(&ranking, efforts, efforts[matched.index], k_max, config.statistic)?;

    let ops = OpCounts {
        ks_comparisons: n as u64,
        neighbor_rankings: 1,
        eba_estimates: k_max as u64,
        ..OpCounts::default()
    };
    Ok(DdSelection {
        k_star: argmin_k(&errors_per_k),
        matched_index: matched.index,
        ks_statistic: matched.statistic,
        errors_per_k,
        ops,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub estimate: f64,
    pub k_used: usize,
    pub neighbors: Vec<Neighbor>,
    pub matched_index: Option<usize>,
    pub ks_statistic: Option<f64>,
    pub ops: OpCounts,
}

impl Prediction {
    pub fn neighbor_indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.index).collect()
    }
}

pub fn predict(dataset: &Dataset, query: &ProjectRecord, config: &EstimationConfig) -> Result<Prediction> {
    let n = dataset.len() as u64;
    let (matrix, mut ops) = match config.method {
        Method::FixedK(_) => (None, OpCounts::default()),
        _ => (
            Some(distance_matrix_with(dataset, config.execution)?),
            OpCounts {
                gower_evaluations: n * (n - 1) / 2,
                ..OpCounts::default()
            },
        ),
    };
    let mut prediction = predict_with_matrix(dataset, matrix.as_ref(), query, config)?;
    ops += prediction.ops;
    prediction.ops = ops;
    Ok(prediction)
}

/// Like [`predict`] but reuses a precomputed matrix (required unless the
/// method is `FixedK`).
pub fn predict_with_matrix(
    dataset: &Dataset,
    matrix: Option<&DistanceMatrix>,
    query: &ProjectRecord,
    config: &EstimationConfig,
) -> Result<Prediction> {
    let query_distances = distances_to_query(query, dataset)?;
    let mut ops = OpCounts {
        gower_evaluations: dataset.len() as u64,
        ..OpCounts::default()
    };
    let need_matrix =
        || matrix.ok_or_else(|| Error::InvalidConfig(format!("{} needs a distance matrix", config.method)));

    let (k, matched_index, ks_statistic) = match config.method {
        Method::FixedK(k) => (k, None, None),
        Method::Loocv => {
            let selection = loocv_select_k(dataset, need_matrix()?, config)?;
            ops += selection.ops;
            (selection.k_star, None, None)
        }
        Method::Dd => {
            let selection = dd_select_k(dataset, need_matrix()?, &query_distances, config)?;
            ops += selection.ops;
            (
                selection.k_star,
                Some(selection.matched_index),
                Some(selection.ks_statistic),
            )
        }
    };

    let ranking = rank_neighbors(&query_distances, None)?;
    let estimate = eba_estimate(&ranking, dataset.efforts(), k, config.statistic)?;
    ops.neighbor_rankings += 1;
    ops.eba_estimates += 1;
    Ok(Prediction {
        estimate,
        k_used: k,
        neighbors: ranking.entries[..k].to_vec(),
        matched_index,
        ks_statistic,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(d: &[f64], exclude: Option<usize>) -> Vec<(usize, f64)> {
        rank_neighbors(d, exclude)
            .unwrap()
            .entries()
            .iter()
            .map(|n| (n.index, n.distance))
            .collect()
    }

    #[test]
    fn ranks_by_distance_then_index() {
        assert_eq!(ranking(&[0.3, 0.1, 0.2], None), vec![(1, 0.1), (2, 0.2), (0, 0.3)]);
        assert_eq!(ranking(&[0.3, 0.1, 0.2], Some(1)), vec![(2, 0.2), (0, 0.3)]);
        assert_eq!(ranking(&[0.2, 0.2], None), vec![(0, 0.2), (1, 0.2)]);
        assert_eq!(ranking(&[f64::INFINITY, 0.5], None), vec![(1, 0.5)]);
    }

    #[test]
    fn ranking_errors() {
        assert!(matches!(rank_neighbors(&[0.1], Some(0)), Err(Error::EmptyRanking)));
        assert!(matches!(
            rank_neighbors(&[f64::INFINITY], None),
            Err(Error::EmptyRanking)
        ));
        assert!(matches!(
            rank_neighbors(&[0.1], Some(4)),
            Err(Error::IndexOutOfBounds { .. })
        ));
    }

    #[test]
    fn estimates_mean_and_median() {
        let r = rank_neighbors(&[0.1, 0.2, 0.3, 0.9], None).unwrap();
        let efforts = [100.0, 200.0, 600.0, 50.0];
        assert_eq!(eba_estimate(&r, &efforts, 1, Statistic::Mean).unwrap(), 100.0);
        assert_eq!(eba_estimate(&r, &efforts, 3, Statistic::Mean).unwrap(), 300.0);
        assert_eq!(eba_estimate(&r, &efforts, 3, Statistic::Median).unwrap(), 200.0);
        assert_eq!(eba_estimate(&r, &efforts, 4, Statistic::Mean).unwrap(), 237.5);
        assert!(matches!(
            eba_estimate(&r, &efforts, 5, Statistic::Mean),
            Err(Error::KOutOfRange { k: 5, available: 4 })
        ));
        assert!(eba_estimate(&r, &efforts, 0, Statistic::Mean).is_err());
    }

    #[test]
    fn argmin_prefers_smallest_k() {
        assert_eq!(argmin_k(&[3.0, 1.0, 1.0, 2.0]), 2);
        assert_eq!(argmin_k(&[0.0, 0.0]), 1);
    }

    #[test]
    fn k_max_resolution() {
        let cfg = EstimationConfig::default();
        assert_eq!(cfg.resolve_k_max(81, Method::Dd).unwrap(), 10);
        assert_eq!(cfg.resolve_k_max(6, Method::Dd).unwrap(), 4);
        assert!(cfg.resolve_k_max(2, Method::Dd).is_err());
        let cfg = cfg.with_k_max(5);
        assert!(cfg.resolve_k_max(6, Method::Loocv).is_ok());
        assert!(cfg.resolve_k_max(6, Method::Dd).is_err());
        assert!(EstimationConfig::default()
            .with_k_max(0)
            .resolve_k_max(6, Method::Loocv)
            .is_err());
    }

    #[test]
    fn parses_statistic() {
        assert_eq!("median".parse::<Statistic>().unwrap(), Statistic::Median);
        assert!("mode".parse::<Statistic>().is_err());
    }
}
