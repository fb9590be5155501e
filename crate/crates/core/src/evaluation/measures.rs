use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

/// Errors for one project. `mre` is `None` when the actual effort is not
/// positive, `mer` when the estimate is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalError {
    pub actual: f64,
    pub estimate: f64,
    pub mre: Option<f64>,
    pub mer: Option<f64>,
    pub ae: f64,
}

impl LocalError {
    pub fn new(actual: f64, estimate: f64) -> Self {
        let ae = (actual - estimate).abs();
        LocalError {
            actual,
            estimate,
            mre: (actual > 0.0).then(|| ae / actual),
            mer: (estimate > 0.0).then(|| ae / estimate),
            ae,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalErrors {
    pub entries: Vec<LocalError>,
}

impl LocalErrors {
    pub fn ae(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.ae).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn local_errors(actuals: &[f64], estimates: &[f64]) -> Result<LocalErrors> {
    if actuals.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            left: actuals.len(),
            right: estimates.len(),
        });
    }
    Ok(LocalErrors {
        entries: actuals
            .iter()
            .zip(estimates)
            .map(|(&a, &e)| LocalError::new(a, e))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalMeasures {
    pub mmre: f64,
    pub mdmre: f64,
    pub mmer: f64,
    pub mdmer: f64,
    pub mae: f64,
    pub mdae: f64,
    /// Projects contributing to the AE aggregates.
    pub count: usize,
    /// Projects left out of MRE aggregates (actual not positive).
    pub mre_undefined: usize,
    /// Projects left out of MER aggregates (estimate not positive).
    pub mer_undefined: usize,
}

pub fn global_measures(locals: &LocalErrors) -> Result<GlobalMeasures> {
    if locals.is_empty() {
        return Err(Error::EmptyInput("global measures"));
    }
    let ae = locals.ae();
    let mre: Vec<f64> = locals.entries.iter().filter_map(|e| e.mre).collect();
    let mer: Vec<f64> = locals.entries.iter().filter_map(|e| e.mer).collect();
    let summarize = |values: &[f64], what| -> Result<(f64, f64)> {
        match (stats::mean(values), stats::median(values)) {
            (Some(m), Some(md)) => Ok((m, md)),
            _ => Err(Error::EmptyInput(what)),
        }
    };
    let (mmre, mdmre) = summarize(&mre, "MRE")?;
    let (mmer, mdmer) = summarize(&mer, "MER")?;
    let (mae, mdae) = summarize(&ae, "AE")?;
    Ok(GlobalMeasures {
        mmre,
        mdmre,
        mmer,
        mdmer,
        mae,
        mdae,
        count: ae.len(),
        mre_undefined: locals.len() - mre.len(),
        mer_undefined: locals.len() - mer.len(),
    })
}
