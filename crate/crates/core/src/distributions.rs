//! Distance-matrix rows as empirical distributions, compared with the
//! two-sample Kolmogorov–Smirnov statistic.

use std::cmp::Ordering;

use crate::dissimilarity::DistanceMatrix;
use crate::error::{Error, Result};
use crate::par::{map_indices, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Row(usize),
    Query,
}

/// An empirical sample of distances. Non-finite distances are dropped and
/// counted in `excluded_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution {
    pub source: Source,
    samples: Vec<f64>,
    pub excluded_count: usize,
}

impl DistanceDistribution {
    pub fn new(source: Source, distances: &[f64]) -> Self {
        let samples: Vec<f64> = distances.iter().copied().filter(|d| d.is_finite()).collect();
        DistanceDistribution {
            source,
            excluded_count: distances.len() - samples.len(),
            samples,
        }
    }

    pub fn from_query(distances: &[f64]) -> Self {
        Self::new(Source::Query, distances)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Row `i` of the matrix with its self-distance removed (n - 1 samples).
pub fn row_distribution(matrix: &DistanceMatrix, i: usize) -> Result<DistanceDistribution> {
    if i >= matrix.n() {
        return Err(Error::IndexOutOfBounds {
            index: i,
            len: matrix.n(),
        });
    }
    let off_diagonal: Vec<f64> = matrix
        .row(i)
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, d)| *d)
        .collect();
    Ok(DistanceDistribution::new(Source::Row(i), &off_diagonal))
}

/// The KS statistic held exactly as `gap / (len_a * len_b)`, where `gap` is
/// the largest `|count_a(x) * len_b - count_b(x) * len_a|` over pooled points.
#[derive(Debug, Clone, Copy)]
pub struct KsStatistic {
    gap: u64,
    len_a: u64,
    len_b: u64,
}

impl KsStatistic {
    pub fn value(&self) -> f64 {
        self.gap as f64 / (self.len_a * self.len_b) as f64
    }

    /// Numerator and denominator of the exact value.
    pub fn as_ratio(&self) -> (u64, u64) {
        (self.gap, self.len_a * self.len_b)
    }
}

impl PartialEq for KsStatistic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for KsStatistic {}

impl PartialOrd for KsStatistic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KsStatistic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, qa) = self.as_ratio();
        let (pb, qb) = other.as_ratio();
        (u128::from(pa) * u128::from(qb)).cmp(&(u128::from(pb) * u128::from(qa)))
    }
}

/// Largest ECDF gap between two ascending samples, walking the pooled points.
fn ks_sorted(a: &[f64], b: &[f64]) -> KsStatistic {
    let (len_a, len_b) = (a.len() as u64, b.len() as u64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut gap = 0u64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        gap = gap.max((i as u64 * len_b).abs_diff(j as u64 * len_a));
    }
    KsStatistic { gap, len_a, len_b }
}

pub fn ks_exact(a: &DistanceDistribution, b: &DistanceDistribution) -> Result<KsStatistic> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(ks_sorted(&a.sorted(), &b.sorted()))
}

/// `sup |F_a - F_b|` of the right-continuous empirical CDFs, in [0, 1].
pub fn ks_statistic(a: &DistanceDistribution, b: &DistanceDistribution) -> Result<f64> {
    ks_exact(a, b).map(|s| s.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionMatch {
    pub index: usize,
    pub statistic: f64,
}

/// KS statistic of every matrix row against the query; `None` for rows with
/// no finite samples.
pub fn ks_profile(
    matrix: &DistanceMatrix,
    query: &DistanceDistribution,
    execution: Execution,
) -> Result<Vec<Option<KsStatistic>>> {
    if query.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted_query = query.sorted();
    let rows = map_indices(matrix.n(), execution, |i| {
        let row = row_distribution(matrix, i).expect("index within matrix");
        (!row.is_empty()).then(|| ks_sorted(&row.sorted(), &sorted_query))
    });
    Ok(rows)
}

/// The row whose distance distribution is closest to the query's; ties go
/// to the smallest index.
pub fn nearest_distribution(matrix: &DistanceMatrix, query: &DistanceDistribution) -> Result<DistributionMatch> {
    nearest_distribution_with(matrix, query, Execution::default())
}

pub fn nearest_distribution_with(
    matrix: &DistanceMatrix,
    query: &DistanceDistribution,
    execution: Execution,
) -> Result<DistributionMatch> {
    let profile = ks_profile(matrix, query, execution)?;
    let mut best: Option<(usize, KsStatistic)> = None;
    for (i, stat) in profile.into_iter().enumerate() {
        if let Some(stat) = stat {
            if best.is_none_or(|(_, b)| stat < b) {
                best = Some((i, stat));
            }
        }
    }
    let (index, stat) = best.ok_or(Error::EmptySample)?;
    Ok(DistributionMatch {
        index,
        statistic: stat.value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(samples: &[f64]) -> DistanceDistribution {
        DistanceDistribution::new(Source::Query, samples)
    }

    #[test]
    fn identical_samples_have_zero_statistic() {
        let a = dist(&[0.3, 0.1, 0.1, 0.7]);
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn shifted_samples() {
        let s = ks_statistic(&dist(&[1.0, 2.0, 3.0]), &dist(&[2.0, 3.0, 4.0])).unwrap();
        assert_eq!(s, 1.0 / 3.0);
    }

    #[test]
    fn disjoint_supports() {
        assert_eq!(ks_statistic(&dist(&[0.0, 0.0]), &dist(&[5.0, 5.0])).unwrap(), 1.0);
    }

    #[test]
    fn unequal_sizes() {
        // F_a jumps to 1 at 1; F_b is 1/2 there.
        let s = ks_exact(&dist(&[1.0]), &dist(&[1.0, 2.0])).unwrap();
        assert_eq!(s.as_ratio(), (1, 2));
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(matches!(
            ks_statistic(&dist(&[]), &dist(&[1.0])),
            Err(Error::EmptySample)
        ));
        let only_inf = dist(&[f64::INFINITY]);
        assert_eq!(only_inf.excluded_count, 1);
        assert!(ks_statistic(&only_inf, &dist(&[1.0])).is_err());
    }

    fn three_by_three() -> DistanceMatrix {
        let (a, b, c) = (0.1, 0.4, 0.9);
        DistanceMatrix::from_rows(vec![vec![0.0, a, b], vec![a, 0.0, c], vec![b, c, 0.0]]).unwrap()
    }

    #[test]
    fn row_drops_self_entry() {
        let m = three_by_three();
        assert_eq!(row_distribution(&m, 1).unwrap().samples(), &[0.1, 0.9]);
        assert!(row_distribution(&m, 3).is_err());
        let two = DistanceMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(row_distribution(&two, 0).unwrap().samples(), &[0.5]);
    }

    #[test]
    fn nearest_picks_exact_row_match() {
        let m = three_by_three();
        let query = dist(&[0.9, 0.4]);
        let hit = nearest_distribution(&m, &query).unwrap();
        assert_eq!(
            hit,
            DistributionMatch {
                index: 2,
                statistic: 0.0
            }
        );
    }

    #[test]
    fn nearest_breaks_ties_by_index() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let hit = nearest_distribution(&m, &dist(&[0.5, 0.7])).unwrap();
        assert_eq!(hit.index, 0);
    }
}
