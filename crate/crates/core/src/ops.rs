use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::Serialize;

/// Deterministic counts of the primitive operations performed by an
/// estimation run. Counts are summed per work item, so they do not depend on
/// how work was scheduled across threads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    /// Pairwise dissimilarity evaluations (matrix entries and query distances).
    pub gower_evaluations: u64,
    /// Two-sample KS statistic evaluations.
    pub ks_comparisons: u64,
    /// Neighbor rankings built (one sort each).
    pub neighbor_rankings: u64,
    /// Calls to the k-neighbor estimator.
    pub eba_estimates: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.gower_evaluations + self.ks_comparisons + self.neighbor_rankings + self.eba_estimates
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            gower_evaluations: self.gower_evaluations + rhs.gower_evaluations,
            ks_comparisons: self.ks_comparisons + rhs.ks_comparisons,
            neighbor_rankings: self.neighbor_rankings + rhs.neighbor_rankings,
            eba_estimates: self.eba_estimates + rhs.eba_estimates,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        *self = *self + rhs;
    }
}

impl Sum for OpCounts {
    fn sum<I: Iterator<Item = OpCounts>>(iter: I) -> OpCounts {
        iter.fold(OpCounts::default(), Add::add)
    }
}
