//! Command implementations behind the `eba` binary.

pub mod args;
pub mod reference;
pub mod report;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use eba_core::dataset::parse_query_csv;
use eba_core::dissimilarity::distance_matrix_with;
use eba_core::distributions::{ks_profile, DistanceDistribution};
use eba_core::estimator::predict_with_matrix;
use eba_core::evaluation::{compare_methods, loo_evaluate};
use eba_core::{
    distances_to_query, parse_csv, Dataset, EstimationConfig, Execution, Method, OpCounts, ProjectRecord, Schema,
    Statistic,
};

use args::{
    Cli, Command, CompareArgs, DataArgs, EstimateArgs, EvaluateArgs, Format, MethodArg, MethodArgs, OutputArgs,
};
use reference::{bundled, reference, reference_for_path};
use report::{
    CompareReport, EstimateReport, EvaluationBlock, EvaluationReport, NeighborRow, PredictionRow, ReferenceBlock,
    RunManifest, WilcoxonBlock,
};

/// Exit code for bad input (arguments, files, schema, data).
pub const EXIT_INPUT: i32 = 2;
/// Exit code for failures during computation.
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_COMPUTE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<eba_core::Error> for CliError {
    fn from(e: eba_core::Error) -> Self {
        if e.is_input_error() {
            CliError::input(e.to_string())
        } else {
            CliError::compute(e.to_string())
        }
    }
}

fn execution(output: &OutputArgs) -> Execution {
    if output.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn load(data: &DataArgs) -> Result<Dataset, CliError> {
    let schema = Schema::from_file(&data.schema)?;
    Ok(parse_csv(&data.dataset, schema, &data.missing_token)?)
}

fn method(m: &MethodArgs) -> Result<Method, CliError> {
    match (m.method, m.k) {
        (MethodArg::FixedK, Some(0)) => Err(CliError::input("--k must be at least 1")),
        (MethodArg::FixedK, Some(k)) => Ok(Method::FixedK(k)),
        (MethodArg::FixedK, None) => Err(CliError::input("--method fixed-k requires --k")),
        (_, Some(_)) => Err(CliError::input("--k only applies to --method fixed-k")),
        (MethodArg::Loocv, None) => Ok(Method::Loocv),
        (MethodArg::Dd, None) => Ok(Method::Dd),
    }
}

fn config(m: &MethodArgs, output: &OutputArgs) -> Result<EstimationConfig, CliError> {
    let mut cfg = EstimationConfig::new(method(m)?)
        .with_statistic(m.statistic.into())
        .with_execution(execution(output));
    if let Some(k_max) = m.kmax {
        cfg = cfg.with_k_max(k_max);
    }
    Ok(cfg)
}

fn manifest(
    command: &str,
    data: &DataArgs,
    method: &str,
    k: Option<usize>,
    k_max: Option<usize>,
    statistic: Statistic,
    output: &OutputArgs,
) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        dataset: data.dataset.display().to_string(),
        schema: data.schema.display().to_string(),
        method: method.to_string(),
        k,
        k_max,
        statistic: statistic.to_string(),
        missing_token: data.missing_token.clone(),
        format: output.format.as_str().to_string(),
        out: output.out.as_ref().map(|p| p.display().to_string()),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::compute(format!("writing {}: {e}", path.display()))
}

fn queries(args: &EstimateArgs, schema: &Schema) -> Result<Vec<ProjectRecord>, CliError> {
    if let Some(path) = &args.query {
        let file = File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
        let records = parse_query_csv(file, schema, &args.data.missing_token)?;
        if records.is_empty() {
            return Err(CliError::input(format!("{} holds no query rows", path.display())));
        }
        return Ok(records);
    }
    if args.set.is_empty() {
        return Err(CliError::input(
            "give the new project with --query FILE or --set NAME=VALUE",
        ));
    }
    let pairs = args
        .set
        .iter()
        .map(|s| {
            s.split_once('=')
                .ok_or_else(|| CliError::input(format!("--set expects NAME=VALUE, got {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![schema.record_from_pairs(&pairs, &args.data.missing_token)?])
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateReport, CliError> {
    let dataset = load(&args.data)?;
    let cfg = config(&args.method, &args.output)?;
    let queries = queries(args, dataset.schema())?;

    let n = dataset.len() as u64;
    let need_matrix = !matches!(cfg.method, Method::FixedK(_)) || args.dump_matrix.is_some() || args.dump_ks.is_some();
    let matrix = need_matrix
        .then(|| distance_matrix_with(&dataset, cfg.execution))
        .transpose()?;
    let mut ops = OpCounts::default();
    if matrix.is_some() {
        ops.gower_evaluations += n * (n - 1) / 2;
    }
    if let (Some(path), Some(m)) = (&args.dump_matrix, &matrix) {
        let mut w = create(path)?;
        m.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_error(path))?;
    }
    if let (Some(path), Some(m)) = (&args.dump_ks, &matrix) {
        let qd = distances_to_query(&queries[0], &dataset)?;
        let profile = ks_profile(m, &DistanceDistribution::from_query(&qd), cfg.execution)?;
        let mut w = create(path)?;
        let mut body = String::from("row,ks\n");
        for (i, ks) in profile.iter().enumerate() {
            match ks {
                Some(ks) => body.push_str(&format!("{i},{:.16e}\n", ks.value())),
                None => body.push_str(&format!("{i},\n")),
            }
        }
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(io_error(path))?;
    }

    let mut predictions = Vec::with_capacity(queries.len());
    for (i, q) in queries.iter().enumerate() {
        let p = predict_with_matrix(&dataset, matrix.as_ref(), q, &cfg)?;
        ops += p.ops;
        predictions.push(PredictionRow {
            query: i + 1,
            estimate: p.estimate,
            k_used: p.k_used,
            neighbors: p
                .neighbors
                .iter()
                .map(|nb| NeighborRow::new(nb, dataset.efforts()))
                .collect(),
            matched_index: p.matched_index,
            ks_statistic: p.ks_statistic,
        });
    }

    let k = match cfg.method {
        Method::FixedK(k) => Some(k),
        _ => None,
    };
    let k_max = match cfg.method {
        Method::FixedK(_) => None,
        m => Some(cfg.resolve_k_max(dataset.len(), m)?),
    };
    Ok(EstimateReport {
        manifest: manifest(
            "estimate",
            &args.data,
            cfg.method.name(),
            k,
            k_max,
            cfg.statistic,
            &args.output,
        ),
        n_projects: dataset.len(),
        predictions,
        op_counts: ops,
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvaluationReport, CliError> {
    let dataset = load(&args.data)?;
    let cfg = config(&args.method, &args.output)?;
    let eval = loo_evaluate(&dataset, &cfg)?;
    let k = match cfg.method {
        Method::FixedK(k) => Some(k),
        _ => None,
    };
    Ok(EvaluationReport {
        manifest: manifest(
            "evaluate",
            &args.data,
            cfg.method.name(),
            k,
            eval.k_max,
            cfg.statistic,
            &args.output,
        ),
        evaluation: EvaluationBlock::from(&eval),
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareReport, CliError> {
    let dataset = load(&args.data)?;
    let published = match &args.reference {
        Some(name) => Some(reference(name).ok_or_else(|| {
            CliError::input(format!(
                "no published results for {name:?} (desharnais, maxwell, cocomo-nasa)"
            ))
        })?),
        None => reference_for_path(&args.data.dataset),
    };
    let statistic: Statistic = args.statistic.into();
    let cmp = compare_methods(&dataset, args.kmax, statistic, execution(&args.output))?;
    let loocv = EvaluationBlock::from(&cmp.loocv);
    let dd = EvaluationBlock::from(&cmp.dd);
    let reference = published.map(|p| ReferenceBlock {
        published: *p,
        mdae_ratio_loocv: loocv.global.mdae / p.loocv.mdae,
        mdae_ratio_dd: dd.global.mdae / p.dd.mdae,
        expected_rows: bundled(p.dataset).map(|b| b.expected_rows),
    });
    Ok(CompareReport {
        manifest: manifest(
            "compare",
            &args.data,
            "loocv+dd",
            None,
            cmp.dd.k_max,
            statistic,
            &args.output,
        ),
        wilcoxon: WilcoxonBlock::from(&cmp.wilcoxon),
        loocv,
        dd,
        reference,
    })
}

fn render<T: serde::Serialize>(
    format: Format,
    report: &T,
    text: impl FnOnce(&T) -> String,
) -> Result<String, CliError> {
    match format {
        Format::Text => Ok(text(report)),
        Format::Json => serde_json::to_string_pretty(report)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::compute(e.to_string())),
    }
}

/// Run a parsed command line and return the rendered report.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Estimate(a) => render(a.output.format, &cmd_estimate(a)?, report::render_estimate),
        Command::Evaluate(a) => render(a.output.format, &cmd_evaluate(a)?, report::render_evaluation),
        Command::Compare(a) => render(a.output.format, &cmd_compare(a)?, report::render_compare),
    }
}

/// Where the rendered report goes.
pub fn output_path(cli: &Cli) -> Option<&Path> {
    let output = match &cli.command {
        Command::Estimate(a) => &a.output,
        Command::Evaluate(a) => &a.output,
        Command::Compare(a) => &a.output,
    };
    output.out.as_deref()
}
