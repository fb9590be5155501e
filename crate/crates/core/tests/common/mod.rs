//! Brute-force oracles and random fixture generators shared by the
//! integration tests. Nothing here calls into the estimator, the KS code or
//! the dissimilarity code of the crate under test.

#![allow(dead_code)]

use eba_core::{Cell, Dataset, FeatureKind, FeatureSpec, ProjectRecord, Schema, Statistic};
use rand::rngs::StdRng;
use rand::Rng;

pub mod oracle {
    use super::*;

    /// Mixed-type dissimilarity evaluated term by term, with ranges taken
    /// from `training`. `None` when no feature is observed in both records.
    pub fn gower(schema: &Schema, training: &[ProjectRecord], x: &ProjectRecord, y: &ProjectRecord) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0u32;
        for (m, feature) in schema.features().iter().enumerate() {
            let term = match (&x.values[m], &y.values[m]) {
                (Cell::Missing, _) | (_, Cell::Missing) => continue,
                (Cell::Nominal(a), Cell::Nominal(b)) => {
                    if a == b {
                        0.0
                    } else {
                        1.0
                    }
                }
                (Cell::Interval(a), Cell::Interval(b)) => {
                    let observed: Vec<f64> = training
                        .iter()
                        .filter_map(|r| match r.values[m] {
                            Cell::Interval(v) => Some(v),
                            _ => None,
                        })
                        .collect();
                    let hi = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = observed.iter().cloned().fold(f64::INFINITY, f64::min);
                    if a == b {
                        0.0
                    } else {
                        (a - b).abs() / (hi - lo)
                    }
                }
                (Cell::Ordinal(a), Cell::Ordinal(b)) => {
                    let levels = feature.levels().len();
                    let z = |r: usize| {
                        if levels == 1 {
                            0.0
                        } else {
                            (r - 1) as f64 / (levels - 1) as f64
                        }
                    };
                    (z(*a) - z(*b)).abs()
                }
                _ => panic!("cell kind mismatch"),
            };
            sum += term;
            count += 1;
        }
        (count > 0).then(|| sum / f64::from(count))
    }

    pub fn matrix(dataset: &Dataset) -> Vec<Vec<f64>> {
        let recs = dataset.records();
        let n = recs.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i][j] = gower(dataset.schema(), recs, &recs[i], &recs[j]).expect("defined pair");
                }
            }
        }
        m
    }

    pub fn query_distances(dataset: &Dataset, query: &ProjectRecord) -> Vec<f64> {
        dataset
            .records()
            .iter()
            .map(|r| gower(dataset.schema(), dataset.records(), query, r).unwrap_or(f64::INFINITY))
            .collect()
    }

    fn ecdf(sample: &[f64], x: f64) -> u64 {
        sample.iter().filter(|&&v| v <= x).count() as u64
    }

    /// KS statistic as an exact ratio: evaluate both ECDFs at every pooled
    /// point and keep the largest cross-multiplied gap.
    pub fn ks_ratio(a: &[f64], b: &[f64]) -> (u64, u64) {
        let (na, nb) = (a.len() as u64, b.len() as u64);
        let gap = a
            .iter()
            .chain(b)
            .map(|&x| (ecdf(a, x) * nb).abs_diff(ecdf(b, x) * na))
            .max()
            .unwrap();
        (gap, na * nb)
    }

    /// Same supremum computed directly on float ECDF values.
    pub fn ks_float(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .chain(b)
            .map(|&x| (ecdf(a, x) as f64 / a.len() as f64 - ecdf(b, x) as f64 / b.len() as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Indices of the k nearest candidates by repeated minimum extraction
    /// (smaller index wins equal distances).
    pub fn nearest(dist: &[f64], exclude: Option<usize>, k: usize) -> Vec<usize> {
        let mut taken = vec![false; dist.len()];
        if let Some(x) = exclude {
            taken[x] = true;
        }
        let mut out = Vec::new();
        for _ in 0..k {
            let mut best: Option<usize> = None;
            for j in 0..dist.len() {
                if taken[j] || !dist[j].is_finite() {
                    continue;
                }
                if best.is_none_or(|b| dist[j] < dist[b]) {
                    best = Some(j);
                }
            }
            let b = best.expect("enough candidates");
            taken[b] = true;
            out.push(b);
        }
        out
    }

    pub fn estimate(dist: &[f64], exclude: Option<usize>, efforts: &[f64], k: usize, stat: Statistic) -> f64 {
        let idx = nearest(dist, exclude, k);
        let mut vals: Vec<f64> = idx.iter().map(|&i| efforts[i]).collect();
        match stat {
            Statistic::Mean => {
                let mut s = 0.0;
                for v in &vals {
                    s += v;
                }
                s / k as f64
            }
            Statistic::Median => {
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if k % 2 == 1 {
                    vals[k / 2]
                } else {
                    (vals[k / 2 - 1] + vals[k / 2]) / 2.0
                }
            }
        }
    }

    pub fn median(values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    }

    fn first_min(values: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..values.len() {
            if values[i] < values[best] {
                best = i;
            }
        }
        best
    }

    /// Every held-out project, every k: returns (k_star, MdAE per k).
    pub fn loocv(matrix: &[Vec<f64>], efforts: &[f64], k_max: usize, stat: Statistic) -> (usize, Vec<f64>) {
        let n = matrix.len();
        let mdae: Vec<f64> = (1..=k_max)
            .map(|k| {
                let aes: Vec<f64> = (0..n)
                    .map(|i| (efforts[i] - estimate(&matrix[i], Some(i), efforts, k, stat)).abs())
                    .collect();
                median(&aes)
            })
            .collect();
        (first_min(&mdae) + 1, mdae)
    }

    /// Every row's KS statistic against the query, then every k's error on
    /// the matched row: returns (matched_index, k_star).
    pub fn dd(matrix: &[Vec<f64>], query: &[f64], efforts: &[f64], k_max: usize, stat: Statistic) -> (usize, usize) {
        let n = matrix.len();
        let q: Vec<f64> = query.iter().copied().filter(|d| d.is_finite()).collect();
        let stats: Vec<(u64, u64)> = (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| matrix[i][j]).collect();
                ks_ratio(&row, &q)
            })
            .collect();
        let mut matched = 0;
        for i in 1..n {
            let (p, d) = stats[i];
            let (bp, bd) = stats[matched];
            if (p as u128) * (bd as u128) < (bp as u128) * (d as u128) {
                matched = i;
            }
        }
        let errors: Vec<f64> = (1..=k_max)
            .map(|k| (efforts[matched] - estimate(&matrix[matched], Some(matched), efforts, k, stat)).abs())
            .collect();
        (matched, first_min(&errors) + 1)
    }

    /// Two-sided signed-rank p-value by listing all 2^n sign vectors.
    pub fn wilcoxon_p(a: &[f64], b: &[f64]) -> (usize, f64) {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
        let n = d.len();
        if n == 0 {
            return (0, 1.0);
        }
        let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        // average ranks, doubled to stay integral
        let ranks: Vec<u64> = mags
            .iter()
            .map(|&m| {
                let below = mags.iter().filter(|&&o| o < m).count() as u64;
                let equal = mags.iter().filter(|&&o| o == m).count() as u64;
                2 * below + equal + 1
            })
            .collect();
        let plus: u64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
        let total: u64 = ranks.iter().sum();
        let w = plus.min(total - plus);
        let mut at_most = 0u64;
        for mask in 0u64..(1 << n) {
            let s: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s <= w {
                at_most += 1;
            }
        }
        (n, (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0))
    }
}

pub mod gen {
    use super::*;

    pub const LEVELS: [&str; 4] = ["vl", "l", "n", "h"];
    pub const LANGS: [&str; 3] = ["c", "java", "cobol"];

    /// Random schema with an always-present interval feature first, so every
    /// pair of records shares at least one observed feature.
    pub fn schema(rng: &mut StdRng) -> Schema {
        let mut features = vec![FeatureSpec::interval("f0")];
        for m in 1..rng.random_range(1..=4) {
            let spec = match rng.random_range(0..3) {
                0 => FeatureSpec::interval(format!("f{m}")),
                1 => FeatureSpec::nominal(format!("f{m}")),
                _ => FeatureSpec::ordinal(format!("f{m}"), LEVELS).unwrap(),
            };
            features.push(spec);
        }
        Schema::new(features, "effort").unwrap()
    }

    pub fn cell(rng: &mut StdRng, kind: FeatureKind, required: bool, missing_rate: f64) -> Cell {
        if !required && rng.random_bool(missing_rate) {
            return Cell::Missing;
        }
        match kind {
            // quarter steps: exact in binary and tie-prone
            FeatureKind::Interval => Cell::Interval(rng.random_range(0..40) as f64 * 0.25),
            FeatureKind::Nominal => Cell::Nominal(LANGS[rng.random_range(0..LANGS.len())].to_string()),
            FeatureKind::Ordinal => Cell::Ordinal(rng.random_range(1..=LEVELS.len())),
        }
    }

    pub fn record(rng: &mut StdRng, schema: &Schema, effort: Option<f64>) -> ProjectRecord {
        let values = schema
            .features()
            .iter()
            .enumerate()
            .map(|(m, f)| cell(rng, f.kind, m == 0, 0.2))
            .collect();
        ProjectRecord::new(values, effort)
    }

    pub fn dataset(rng: &mut StdRng, n: usize) -> Dataset {
        let schema = schema(rng);
        loop {
            let records: Vec<ProjectRecord> = (0..n)
                .map(|_| {
                    let effort = rng.random_range(1..=60) as f64 * 10.0;
                    record(rng, &schema, Some(effort))
                })
                .collect();
            let ds = Dataset::new(schema.clone(), records).unwrap();
            // f0 must vary or a query could hit a zero-range column
            if ds.range(0).is_some_and(|r| r.width() > 0.0) {
                return ds;
            }
        }
    }

    /// A query whose interval values stay inside the dataset's ranges.
    pub fn query(rng: &mut StdRng, dataset: &Dataset) -> ProjectRecord {
        let mut q = record(rng, dataset.schema(), None);
        for (m, cell) in q.values.iter_mut().enumerate() {
            if let (Cell::Interval(v), Some(r)) = (&*cell, dataset.range(m)) {
                *cell = Cell::Interval(v.clamp(r.min, r.max));
            } else if let (Cell::Interval(_), None) = (&*cell, dataset.range(m)) {
                *cell = Cell::Missing;
            }
        }
        q
    }
}

pub mod fixture {
    use super::*;

    /// Six projects: size (interval), lang (nominal), cplx (ordinal low/med/high).
    pub fn six_projects() -> Dataset {
        let schema = Schema::new(
            vec![
                FeatureSpec::interval("size"),
                FeatureSpec::nominal("lang"),
                FeatureSpec::ordinal("cplx", ["low", "med", "high"]).unwrap(),
            ],
            "effort",
        )
        .unwrap();
        let rows = [
            (10.0, "java", 1, 100.0),
            (12.0, "java", 1, 120.0),
            (30.0, "c", 2, 400.0),
            (35.0, "c", 3, 520.0),
            (50.0, "cobol", 3, 900.0),
            (20.0, "java", 2, 260.0),
        ];
        let records = rows
            .iter()
            .map(|&(size, lang, rank, effort)| {
                ProjectRecord::new(
                    vec![Cell::Interval(size), Cell::Nominal(lang.into()), Cell::Ordinal(rank)],
                    Some(effort),
                )
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    pub fn query(size: f64, lang: &str, rank: usize) -> ProjectRecord {
        ProjectRecord::new(
            vec![Cell::Interval(size), Cell::Nominal(lang.into()), Cell::Ordinal(rank)],
            None,
        )
    }

    pub const SIX_PROJECTS_CSV: &str = "size,lang,cplx,effort\n\
        10,java,low,100\n12,java,low,120\n30,c,med,400\n35,c,high,520\n50,cobol,high,900\n20,java,med,260\n";

    pub const SIX_PROJECTS_SCHEMA: &str = "size,interval\nlang,nominal\ncplx,ordinal,low|med|high\neffort,effort\n";
}
