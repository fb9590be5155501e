//! Kaufman–Rousseeuw mixed-type dissimilarity.
//!
//! Each feature contributes a term in [0, 1] (nominal mismatch, range-scaled
//! absolute difference for interval features, unit-interval rank difference
//! for ordinal features). A feature missing in either record is skipped, and
//! the coefficient is the mean over the features observed in both.

use std::io::Write;

use crate::dataset::{rank_to_unit, Cell, Dataset, FeatureScale, FeatureSpec, ProjectRecord};
use crate::error::{Error, Result};
use crate::par::{map_indices, Execution};

/// One feature's contribution: `delta` is 0 when either value is missing, in
/// which case `d` is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureTerm {
    pub delta: u8,
    pub d: f64,
}

impl FeatureTerm {
    const SKIPPED: FeatureTerm = FeatureTerm { delta: 0, d: 0.0 };

    fn observed(d: f64) -> Self {
        FeatureTerm { delta: 1, d }
    }
}

pub fn per_feature_dissimilarity(
    feature: &FeatureSpec,
    scale: FeatureScale,
    a: &Cell,
    b: &Cell,
) -> Result<FeatureTerm> {
    match (scale, a, b) {
        (_, Cell::Missing, _) | (_, _, Cell::Missing) => Ok(FeatureTerm::SKIPPED),
        (FeatureScale::Nominal, Cell::Nominal(x), Cell::Nominal(y)) => {
            Ok(FeatureTerm::observed(if x == y { 0.0 } else { 1.0 }))
        }
        (FeatureScale::Interval { range }, Cell::Interval(x), Cell::Interval(y)) => {
            let diff = (x - y).abs();
            if diff == 0.0 {
                return Ok(FeatureTerm::observed(0.0));
            }
            match range.map(|r| r.width()) {
                Some(width) if width > 0.0 => Ok(FeatureTerm::observed(diff / width)),
                _ => Err(Error::DegenerateRange {
                    feature: feature.name.clone(),
                    a: *x,
                    b: *y,
                }),
            }
        }
        (FeatureScale::Ordinal { levels }, Cell::Ordinal(x), Cell::Ordinal(y)) => {
            let (zx, zy) = (rank_to_unit(*x, levels), rank_to_unit(*y, levels));
            Ok(FeatureTerm::observed((zx - zy).abs()))
        }
        _ => Err(Error::InvalidCell {
            row: 0,
            column: feature.name.clone(),
            reason: format!("cells {a:?} / {b:?} do not match the feature kind {}", feature.kind),
        }),
    }
}

/// Mixed-type dissimilarity of two records under the dataset's frozen scales.
///
/// Fails with [`Error::UndefinedDistance`] when no feature is observed in both.
pub fn gower_distance(x: &ProjectRecord, y: &ProjectRecord, dataset: &Dataset) -> Result<f64> {
    let features = dataset.schema().features();
    let mut weighted = 0.0;
    let mut observed = 0u32;
    for (m, feature) in features.iter().enumerate() {
        let term = per_feature_dissimilarity(feature, dataset.scale(m), &x.values[m], &y.values[m])?;
        weighted += f64::from(term.delta) * term.d;
        observed += u32::from(term.delta);
    }
    if observed == 0 {
        return Err(Error::UndefinedDistance);
    }
    Ok(weighted / f64::from(observed))
}

/// Symmetric n×n dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Build from a full row-major matrix, checking the invariants.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: n,
                });
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidConfig(format!("diagonal entry ({i},{i}) is not zero")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !(v.is_finite() && v >= 0.0) || v != entries[j * n + i] {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({i},{j}) = {v} breaks symmetry, finiteness or non-negativity"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Full row `i`, including the zero self-distance.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Dump entries as CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn distance_matrix(dataset: &Dataset) -> Result<DistanceMatrix> {
    distance_matrix_with(dataset, Execution::default())
}

/// Each unordered pair is computed once (upper triangle) and mirrored.
pub fn distance_matrix_with(dataset: &Dataset, execution: Execution) -> Result<DistanceMatrix> {
    let n = dataset.len();
    let records = dataset.records();
    let upper: Vec<Result<Vec<f64>>> = map_indices(n, execution, |i| {
        (i + 1..n)
            .map(|j| {
                gower_distance(&records[i], &records[j], dataset).map_err(|e| match e {
                    Error::UndefinedDistance => Error::UndefinedPair { i, j },
                    other => other,
                })
            })
            .collect()
    });
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, d) in row?.into_iter().enumerate() {
            let j = i + 1 + offset;
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

/// Distances from a query to every historical record. Pairs with no shared
/// observed feature come back as `+inf`.
pub fn distances_to_query(query: &ProjectRecord, dataset: &Dataset) -> Result<Vec<f64>> {
    dataset.check_query(query)?;
    dataset
        .records()
        .iter()
        .map(|r| match gower_distance(query, r, dataset) {
            Err(Error::UndefinedDistance) => Ok(f64::INFINITY),
            other => other,
        })
        .collect()
}
