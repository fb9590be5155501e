//! Paired Wilcoxon signed-rank test on absolute errors.
//!
//! Zero differences are dropped and tied magnitudes share their average
//! rank. Up to [`EXACT_LIMIT`] nonzero differences the two-sided p-value is
//! exact: the null distribution of the positive rank sum is counted over all
//! 2^n sign assignments (ranks are doubled so half-ranks stay integral).
//! Beyond that a tie-corrected normal approximation with continuity
//! correction is used.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub ae_a: Vec<f64>,
    pub ae_b: Vec<f64>,
    /// W = min(W+, W-).
    pub wilcoxon_statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub exact: bool,
    /// Every paired difference was zero.
    pub degenerate: bool,
}

/// Average ranks of `values` (1-based), doubled so they are integers.
fn doubled_average_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share rank (start + 1 + end) / 2
        let doubled = (start + 1 + end) as u64;
        for &idx in &order[start..end] {
            ranks[idx] = doubled;
        }
        start = end;
    }
    ranks
}

/// Number of sign assignments whose doubled positive rank sum is `s`, for every `s`.
fn signed_rank_counts(doubled_ranks: &[u64]) -> Vec<u64> {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

fn normal_p_value(w: f64, n: usize, tie_groups: &[usize]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = tie_groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<ComparisonResult> {
    wilcoxon_with_limit(a, b, EXACT_LIMIT)
}

/// Same test with the normal approximation forced for every sample size.
pub fn wilcoxon_signed_rank_normal(a: &[f64], b: &[f64]) -> Result<ComparisonResult> {
    wilcoxon_with_limit(a, b, 0)
}

fn wilcoxon_with_limit(a: &[f64], b: &[f64], exact_limit: usize) -> Result<ComparisonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("Wilcoxon signed-rank test"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    let mut result = ComparisonResult {
        ae_a: a.to_vec(),
        ae_b: b.to_vec(),
        wilcoxon_statistic: 0.0,
        w_plus: 0.0,
        w_minus: 0.0,
        p_value: 1.0,
        n_effective: n,
        exact: true,
        degenerate: n == 0,
    };
    if n == 0 {
        return Ok(result);
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_average_ranks(&magnitudes);
    let plus2: u64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total2: u64 = ranks.iter().sum();
    let minus2 = total2 - plus2;
    let w2 = plus2.min(minus2);

    result.w_plus = plus2 as f64 / 2.0;
    result.w_minus = minus2 as f64 / 2.0;
    result.wilcoxon_statistic = w2 as f64 / 2.0;

    if n <= exact_limit {
        let counts = signed_rank_counts(&ranks);
        let lower: u64 = counts[..=w2 as usize].iter().sum();
        result.p_value = (2.0 * lower as f64 / 2f64.powi(n as i32)).min(1.0);
    } else {
        let mut sorted = magnitudes.clone();
        sorted.sort_by(f64::total_cmp);
        let mut ties = Vec::new();
        let mut run = 1;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                ties.push(run);
                run = 1;
            }
        }
        ties.push(run);
        result.exact = false;
        result.p_value = normal_p_value(result.wilcoxon_statistic, n, &ties);
    }
    Ok(result)
}
