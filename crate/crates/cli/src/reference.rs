//! Bundled datasets and the published accuracy figures reported for them.

use std::path::{Path, PathBuf};

use eba_core::{parse_csv, Dataset, Schema};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceMeasures {
    pub mmre: f64,
    pub mdmre: f64,
    pub mmer: f64,
    pub mdmer: f64,
    pub mae: f64,
    pub mdae: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub dataset: &'static str,
    pub loocv: ReferenceMeasures,
    pub dd: ReferenceMeasures,
    /// Two-sided Wilcoxon p-value between the two methods' absolute errors.
    pub sig: f64,
}

const fn measures(mmre: f64, mdmre: f64, mmer: f64, mdmer: f64, mae: f64, mdae: f64) -> ReferenceMeasures {
    ReferenceMeasures {
        mmre,
        mdmre,
        mmer,
        mdmer,
        mae,
        mdae,
    }
}

pub const REFERENCES: [Reference; 3] = [
    Reference {
        dataset: "maxwell",
        loocv: measures(1.3429, 0.4983, 0.6519, 0.45539, 5042.4, 2537.4),
        dd: measures(1.2059, 0.5315, 0.6932, 0.6198, 4765.3, 3363.3),
        sig: 0.99,
    },
    Reference {
        dataset: "desharnais",
        loocv: measures(0.5708, 0.4535, 0.4685, 0.3837, 2398.5, 1356.8),
        dd: measures(0.6480, 0.3708, 0.5075, 0.3693, 2342.9, 1556.8),
        sig: 0.60,
    },
    Reference {
        dataset: "cocomo-nasa",
        loocv: measures(0.6758, 0.3688, 1.0851, 0.4044, 264.31, 53.4),
        dd: measures(0.5493, 0.3504, 0.8741, 0.375, 241.14, 49.479),
        sig: 0.72,
    },
];

pub fn reference(name: &str) -> Option<&'static Reference> {
    let name = name.to_ascii_lowercase().replace('_', "-");
    REFERENCES.iter().find(|r| r.dataset == name)
}

/// Reference entry whose name matches the file stem of `path`.
pub fn reference_for_path(path: &Path) -> Option<&'static Reference> {
    path.file_stem().and_then(|s| s.to_str()).and_then(reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundledDataset {
    pub name: &'static str,
    /// Row count of the public distribution, checked on load.
    pub expected_rows: usize,
    pub synthetic: bool,
}

pub const BUNDLED: [BundledDataset; 4] = [
    BundledDataset {
        name: "desharnais",
        expected_rows: 81,
        synthetic: false,
    },
    BundledDataset {
        name: "maxwell",
        expected_rows: 62,
        synthetic: false,
    },
    BundledDataset {
        name: "cocomo-nasa",
        expected_rows: 60,
        synthetic: false,
    },
    BundledDataset {
        name: "demo",
        expected_rows: 24,
        synthetic: true,
    },
];

impl BundledDataset {
    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.name))
    }

    pub fn schema_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.schema", self.name))
    }

    pub fn reference(&self) -> Option<&'static Reference> {
        reference(self.name)
    }

    /// Load from `dir`, failing if the row count differs from the public
    /// distribution.
    pub fn load(&self, dir: &Path) -> Result<Dataset, CliError> {
        let schema = Schema::from_file(self.schema_path(dir))?;
        let dataset = parse_csv(self.csv_path(dir), schema, "?")?;
        if dataset.len() != self.expected_rows {
            return Err(CliError::input(format!(
                "{} has {} projects, expected {}",
                self.csv_path(dir).display(),
                dataset.len(),
                self.expected_rows
            )));
        }
        Ok(dataset)
    }
}

pub fn bundled(name: &str) -> Option<&'static BundledDataset> {
    BUNDLED.iter().find(|b| b.name == name)
}
