//! Report types (serialized as JSON) and their aligned-column text form.

use std::fmt::Write as _;

use eba_core::estimator::Neighbor;
use eba_core::evaluation::{ComparisonResult, Evaluation, GlobalMeasures};
use eba_core::OpCounts;
use serde::Serialize;

use crate::reference::{Reference, ReferenceMeasures};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub dataset: String,
    pub schema: String,
    pub method: String,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub statistic: String,
    pub missing_token: String,
    pub format: String,
    pub out: Option<String>,
    pub timestamp: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborRow {
    pub index: usize,
    pub distance: f64,
    pub effort: f64,
}

impl NeighborRow {
    pub fn new(n: &Neighbor, efforts: &[f64]) -> Self {
        NeighborRow {
            index: n.index,
            distance: n.distance,
            effort: efforts[n.index],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionRow {
    /// 1-based row of the query input.
    pub query: usize,
    pub estimate: f64,
    pub k_used: usize,
    pub neighbors: Vec<NeighborRow>,
    pub matched_index: Option<usize>,
    pub ks_statistic: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub manifest: RunManifest,
    pub n_projects: usize,
    pub predictions: Vec<PredictionRow>,
    pub op_counts: OpCounts,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectRow {
    pub index: usize,
    pub actual: f64,
    pub estimate: Option<f64>,
    pub mre: Option<f64>,
    pub mer: Option<f64>,
    pub ae: Option<f64>,
    pub k_used: Option<usize>,
    pub matched_index: Option<usize>,
    pub ks_statistic: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpCountsBlock {
    #[serde(flatten)]
    pub counts: OpCounts,
    pub total: u64,
}

impl From<OpCounts> for OpCountsBlock {
    fn from(counts: OpCounts) -> Self {
        OpCountsBlock {
            counts,
            total: counts.total(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationBlock {
    pub method: String,
    pub k_max: Option<usize>,
    pub statistic: String,
    pub n: usize,
    pub predictions: usize,
    pub failed: usize,
    pub global: GlobalMeasures,
    pub projects: Vec<ProjectRow>,
    pub op_counts: OpCountsBlock,
    pub wall_time_ms: f64,
}

impl From<&Evaluation> for EvaluationBlock {
    fn from(eval: &Evaluation) -> Self {
        let projects = eval
            .outcomes
            .iter()
            .map(|o| ProjectRow {
                index: o.index,
                actual: o.actual,
                estimate: o.estimate,
                mre: o.local.and_then(|l| l.mre),
                mer: o.local.and_then(|l| l.mer),
                ae: o.local.map(|l| l.ae),
                k_used: o.k_used,
                matched_index: o.matched_index,
                ks_statistic: o.ks_statistic,
                error: o.failure.clone(),
            })
            .collect();
        EvaluationBlock {
            method: eval.method.to_string(),
            k_max: eval.k_max,
            statistic: eval.statistic.to_string(),
            n: eval.outcomes.len(),
            predictions: eval.predictions(),
            failed: eval.failed,
            global: eval.globals,
            projects,
            op_counts: eval.ops.into(),
            wall_time_ms: eval.wall_time.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub manifest: RunManifest,
    pub evaluation: EvaluationBlock,
}

#[derive(Debug, Clone, Serialize)]
pub struct WilcoxonBlock {
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub n_pairs: usize,
    pub n_effective: usize,
    pub exact: bool,
    pub degenerate: bool,
}

impl From<&ComparisonResult> for WilcoxonBlock {
    fn from(r: &ComparisonResult) -> Self {
        WilcoxonBlock {
            statistic: r.wilcoxon_statistic,
            w_plus: r.w_plus,
            w_minus: r.w_minus,
            p_value: r.p_value,
            n_pairs: r.ae_a.len(),
            n_effective: r.n_effective,
            exact: r.exact,
            degenerate: r.degenerate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceBlock {
    pub published: Reference,
    /// Obtained MdAE divided by the published MdAE.
    pub mdae_ratio_loocv: f64,
    pub mdae_ratio_dd: f64,
    pub expected_rows: Option<usize>,
}

impl ReferenceBlock {
    /// Whether an obtained MdAE lies within a factor of two of the published one.
    pub fn within_factor_two(ratio: f64) -> bool {
        (0.5..=2.0).contains(&ratio)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub manifest: RunManifest,
    pub loocv: EvaluationBlock,
    pub dd: EvaluationBlock,
    pub wilcoxon: WilcoxonBlock,
    pub reference: Option<ReferenceBlock>,
}

const HEADER: [&str; 7] = ["MMRE", "MdMRE", "MMER", "MdMER", "MAE", "MdAE", "Sig."];

fn measure_cells(m: [f64; 6]) -> Vec<String> {
    m.iter().map(|v| format!("{v:.4}")).collect()
}

fn obtained(g: &GlobalMeasures) -> [f64; 6] {
    [g.mmre, g.mdmre, g.mmer, g.mdmer, g.mae, g.mdae]
}

fn published(m: &ReferenceMeasures) -> [f64; 6] {
    [m.mmre, m.mdmre, m.mmer, m.mdmer, m.mae, m.mdae]
}

/// Left-aligned first column, right-aligned numeric columns.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate().take(cols) {
            if c == 0 {
                let _ = write!(s, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(s, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        line(row);
    }
    out
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn render_estimate(r: &EstimateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset: {} ({} projects), method {}, statistic {}",
        r.manifest.dataset, r.n_projects, r.manifest.method, r.manifest.statistic
    );
    for p in &r.predictions {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "query {}: estimate {:.4} with k = {}",
            p.query, p.estimate, p.k_used
        );
        if let (Some(m), Some(ks)) = (p.matched_index, p.ks_statistic) {
            let _ = writeln!(out, "  matched project {m} (KS = {ks:.4})");
        }
        let rows: Vec<Vec<String>> = p
            .neighbors
            .iter()
            .map(|n| {
                vec![
                    n.index.to_string(),
                    format!("{:.6}", n.distance),
                    format!("{}", n.effort),
                ]
            })
            .collect();
        for l in table(&["neighbor", "distance", "effort"], &rows).lines() {
            let _ = writeln!(out, "  {l}");
        }
    }
    out
}

fn evaluation_text(b: &EvaluationBlock, label: &str) -> String {
    let mut out = String::new();
    let mut row = vec![label.to_string()];
    row.extend(measure_cells(obtained(&b.global)));
    out.push_str(&table(
        &["method", "MMRE", "MdMRE", "MMER", "MdMER", "MAE", "MdAE"],
        &[row],
    ));
    let _ = writeln!(
        out,
        "predictions {} of {} (failed {}), MRE undefined {}, MER undefined {}",
        b.predictions, b.n, b.failed, b.global.mre_undefined, b.global.mer_undefined
    );
    out
}

pub fn render_evaluation(r: &EvaluationReport) -> String {
    let b = &r.evaluation;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset: {} ({} projects), method {}, k_max {}, statistic {}",
        r.manifest.dataset,
        b.n,
        b.method,
        opt(b.k_max),
        b.statistic
    );
    let _ = writeln!(out);
    out.push_str(&evaluation_text(b, &b.method));
    let _ = writeln!(out);
    let rows: Vec<Vec<String>> = b
        .projects
        .iter()
        .map(|p| {
            vec![
                p.index.to_string(),
                format!("{}", p.actual),
                p.estimate.map_or("-".into(), |v| format!("{v:.4}")),
                p.ae.map_or("-".into(), |v| format!("{v:.4}")),
                opt(p.k_used),
                opt(p.matched_index),
            ]
        })
        .collect();
    out.push_str(&table(&["project", "actual", "estimate", "AE", "k", "matched"], &rows));
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "op count {}, wall time {:.1} ms",
        b.op_counts.total, b.wall_time_ms
    );
    out
}

pub fn render_compare(r: &CompareReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset: {} ({} projects), k_max {}, statistic {}",
        r.manifest.dataset,
        r.loocv.n,
        opt(r.loocv.k_max),
        r.loocv.statistic
    );
    let _ = writeln!(out);

    let mut rows = Vec::new();
    let mut first = vec!["LOOCV-EbA".to_string()];
    first.extend(measure_cells(obtained(&r.loocv.global)));
    first.push(format!("{:.4}", r.wilcoxon.p_value));
    rows.push(first);
    let mut second = vec!["DD-EbA".to_string()];
    second.extend(measure_cells(obtained(&r.dd.global)));
    second.push(String::new());
    rows.push(second);
    if let Some(reference) = &r.reference {
        let p = &reference.published;
        let mut a = vec![format!("LOOCV-EbA ({} published)", p.dataset)];
        a.extend(measure_cells(published(&p.loocv)));
        a.push(format!("{:.2}", p.sig));
        let mut b = vec![format!("DD-EbA ({} published)", p.dataset)];
        b.extend(measure_cells(published(&p.dd)));
        b.push(String::new());
        rows.push(a);
        rows.push(b);
    }
    let mut header = vec!["method"];
    header.extend(HEADER);
    out.push_str(&table(&header, &rows));
    let _ = writeln!(out);

    let w = &r.wilcoxon;
    let _ = writeln!(
        out,
        "Wilcoxon signed-rank on AE: W = {}, p = {:.4} ({}), {} pairs, {} nonzero",
        w.statistic,
        w.p_value,
        if w.exact { "exact" } else { "normal approximation" },
        w.n_pairs,
        w.n_effective
    );
    if let Some(reference) = &r.reference {
        let _ = writeln!(
            out,
            "MdAE obtained / published: LOOCV {:.3}, DD {:.3}",
            reference.mdae_ratio_loocv, reference.mdae_ratio_dd
        );
        if let Some(expected) = reference.expected_rows {
            if expected != r.loocv.n {
                let _ = writeln!(
                    out,
                    "note: the public {} distribution has {} projects, this file has {}",
                    reference.published.dataset, expected, r.loocv.n
                );
            }
        }
    }
    let k_used: Vec<usize> = r.dd.projects.iter().filter_map(|p| p.k_used).collect();
    let distinct: std::collections::BTreeSet<usize> = k_used.iter().copied().collect();
    let _ = writeln!(out, "DD distinct k values: {distinct:?}");
    let _ = writeln!(out);
    let rows = vec![
        vec![
            "LOOCV-EbA".to_string(),
            r.loocv.op_counts.total.to_string(),
            format!("{:.1}", r.loocv.wall_time_ms),
        ],
        vec![
            "DD-EbA".to_string(),
            r.dd.op_counts.total.to_string(),
            format!("{:.1}", r.dd.wall_time_ms),
        ],
    ];
    out.push_str(&table(&["method", "op count", "wall time (ms)"], &rows));
    out
}
