//! Typed project tables: schema sidecar, CSV ingest and per-feature scale
//! bookkeeping (interval ranges, ordinal rank tables).
//!
//! Ranges are computed from the historical records only and frozen at
//! construction. A query record may fall outside them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default token marking a missing cell. Empty cells are always missing.
pub const DEFAULT_MISSING_TOKEN: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Interval,
    /// Also used for binary features (two levels).
    Nominal,
    Ordinal,
}

impl FeatureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureKind::Interval => "interval",
            FeatureKind::Nominal => "nominal",
            FeatureKind::Ordinal => "ordinal",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interval" | "ratio" | "numeric" => Ok(FeatureKind::Interval),
            "nominal" | "binary" | "categorical" => Ok(FeatureKind::Nominal),
            "ordinal" => Ok(FeatureKind::Ordinal),
            other => Err(Error::Schema(format!("unknown feature kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    levels: Vec<String>,
    ranks: HashMap<String, usize>,
}

impl FeatureSpec {
    pub fn interval(name: impl Into<String>) -> Self {
        Self::plain(name, FeatureKind::Interval)
    }

    pub fn nominal(name: impl Into<String>) -> Self {
        Self::plain(name, FeatureKind::Nominal)
    }

    /// Ordinal feature; ranks follow the declared level order (first level = rank 1).
    pub fn ordinal<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Result<Self> {
        let name = name.into();
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        if levels.is_empty() {
            return Err(Error::Schema(format!("ordinal feature `{name}` declares no levels")));
        }
        let mut ranks = HashMap::with_capacity(levels.len());
        for (i, level) in levels.iter().enumerate() {
            if ranks.insert(level.clone(), i + 1).is_some() {
                return Err(Error::Schema(format!(
                    "ordinal feature `{name}` repeats level `{level}`"
                )));
            }
        }
        Ok(FeatureSpec {
            name,
            kind: FeatureKind::Ordinal,
            levels,
            ranks,
        })
    }

    fn plain(name: impl Into<String>, kind: FeatureKind) -> Self {
        FeatureSpec {
            name: name.into(),
            kind,
            levels: Vec::new(),
            ranks: HashMap::new(),
        }
    }

    /// Declared ordinal levels, empty for other kinds.
    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    /// Rank in 1..=M of an ordinal level.
    pub fn rank_of(&self, level: &str) -> Option<usize> {
        self.ranks.get(level).copied()
    }

    /// Parse one raw cell. Empty text and `missing_token` become [`Cell::Missing`].
    pub fn parse_cell(&self, raw: &str, missing_token: &str) -> std::result::Result<Cell, String> {
        let raw = raw.trim();
        if raw.is_empty() || raw == missing_token {
            return Ok(Cell::Missing);
        }
        match self.kind {
            FeatureKind::Interval => {
                let value: f64 = raw.parse().map_err(|_| format!("`{raw}` is not a number"))?;
                if !value.is_finite() {
                    return Err(format!("`{raw}` is not finite"));
                }
                Ok(Cell::Interval(value))
            }
            FeatureKind::Nominal => Ok(Cell::Nominal(raw.to_string())),
            FeatureKind::Ordinal => self
                .rank_of(raw)
                .map(Cell::Ordinal)
                .ok_or_else(|| format!("`{raw}` is not one of the declared levels {:?}", self.levels)),
        }
    }

    fn check_cell(&self, cell: &Cell) -> std::result::Result<(), String> {
        match (self.kind, cell) {
            (_, Cell::Missing) => Ok(()),
            (FeatureKind::Interval, Cell::Interval(v)) if v.is_finite() => Ok(()),
            (FeatureKind::Interval, Cell::Interval(v)) => Err(format!("{v} is not finite")),
            (FeatureKind::Nominal, Cell::Nominal(_)) => Ok(()),
            (FeatureKind::Ordinal, Cell::Ordinal(r)) if (1..=self.levels.len()).contains(r) => Ok(()),
            (FeatureKind::Ordinal, Cell::Ordinal(r)) => Err(format!("rank {r} outside 1..={}", self.levels.len())),
            (kind, cell) => Err(format!("{cell:?} does not match kind {kind}")),
        }
    }

    fn format_cell(&self, cell: &Cell, missing_token: &str) -> String {
        match cell {
            Cell::Missing => missing_token.to_string(),
            Cell::Interval(v) => v.to_string(),
            Cell::Nominal(s) => s.clone(),
            Cell::Ordinal(r) => self.levels[r - 1].clone(),
        }
    }
}

/// Ordered feature declarations plus the effort column.
///
/// Sidecar text format, one declaration per line (`#` starts a comment):
///
/// ```text
/// size,interval
/// lang,nominal
/// complexity,ordinal,low|med|high
/// effort,Effort
/// ignore,ProjectId
/// ```
///
/// `ignore,<name>` lists data columns that are read but dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    features: Vec<FeatureSpec>,
    effort_column: String,
    ignored: Vec<String>,
}

impl Schema {
    pub fn new(features: Vec<FeatureSpec>, effort_column: impl Into<String>) -> Result<Self> {
        Self::with_ignored(features, effort_column, Vec::new())
    }

    pub fn with_ignored(
        features: Vec<FeatureSpec>,
        effort_column: impl Into<String>,
        ignored: Vec<String>,
    ) -> Result<Self> {
        let effort_column = effort_column.into();
        if features.is_empty() {
            return Err(Error::Schema("no features declared".into()));
        }
        let mut seen = HashSet::new();
        for name in features.iter().map(|f| &f.name).chain(&ignored) {
            if name.trim().is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column `{name}` declared twice")));
            }
        }
        if seen.contains(effort_column.as_str()) {
            return Err(Error::Schema(format!(
                "effort column `{effort_column}` is also declared as a feature or ignored column"
            )));
        }
        Ok(Schema {
            features,
            effort_column,
            ignored,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut features = Vec::new();
        let mut effort = None;
        let mut ignored = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |msg: &str| Error::Schema(format!("line {}: {msg}: `{line}`", lineno + 1));
            let second_is_kind = fields.get(1).is_some_and(|s| s.parse::<FeatureKind>().is_ok());
            match fields.as_slice() {
                ["effort", name] if !second_is_kind => {
                    if effort.replace(name.to_string()).is_some() {
                        return Err(bad("effort column declared twice"));
                    }
                }
                ["ignore", name] if !second_is_kind => ignored.push(name.to_string()),
                [name, kind] => {
                    let kind: FeatureKind = kind.parse().map_err(|_| bad("unknown kind"))?;
                    match kind {
                        FeatureKind::Ordinal => return Err(bad("ordinal feature needs a level list")),
                        _ => features.push(FeatureSpec::plain(*name, kind)),
                    }
                }
                [name, kind, levels] => {
                    let kind: FeatureKind = kind.parse().map_err(|_| bad("unknown kind"))?;
                    if kind != FeatureKind::Ordinal {
                        return Err(bad("only ordinal features take a level list"));
                    }
                    let levels = levels.split('|').map(str::trim).filter(|l| !l.is_empty());
                    features.push(FeatureSpec::ordinal(*name, levels)?);
                }
                _ => return Err(bad("expected `name,kind[,levels]`")),
            }
        }
        let effort = effort.ok_or_else(|| Error::Schema("no `effort,<column>` line".into()))?;
        Schema::with_ignored(features, effort, ignored)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.features {
            out.push_str(&f.name);
            out.push(',');
            out.push_str(f.kind.as_str());
            if f.kind == FeatureKind::Ordinal {
                out.push(',');
                out.push_str(&f.levels.join("|"));
            }
            out.push('\n');
        }
        for name in &self.ignored {
            out.push_str(&format!("ignore,{name}\n"));
        }
        out.push_str(&format!("effort,{}\n", self.effort_column));
        out
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn effort_column(&self) -> &str {
        &self.effort_column
    }

    pub fn ignored(&self) -> &[String] {
        &self.ignored
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, name: &str) -> Result<&FeatureSpec> {
        self.feature_index(name)
            .map(|i| &self.features[i])
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    /// Build a query record from `name=value` style pairs. Unnamed features
    /// are missing; the effort column may be given or omitted.
    pub fn record_from_pairs<K, V>(&self, pairs: &[(K, V)], missing_token: &str) -> Result<ProjectRecord>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut values = vec![Cell::Missing; self.features.len()];
        let mut effort = None;
        for (name, raw) in pairs {
            let (name, raw) = (name.as_ref().trim(), raw.as_ref());
            if name == self.effort_column {
                effort = parse_effort(raw, missing_token).map_err(|reason| Error::InvalidCell {
                    row: 1,
                    column: name.to_string(),
                    reason,
                })?;
                continue;
            }
            let m = self
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
            values[m] = self.features[m]
                .parse_cell(raw, missing_token)
                .map_err(|reason| Error::InvalidCell {
                    row: 1,
                    column: name.to_string(),
                    reason,
                })?;
        }
        Ok(ProjectRecord { values, effort })
    }

    /// Check a record's shape and cell kinds against this schema.
    pub fn check_record(&self, record: &ProjectRecord, row: usize) -> Result<()> {
        if record.values.len() != self.features.len() {
            return Err(Error::InvalidCell {
                row,
                column: "*".into(),
                reason: format!(
                    "record has {} cells, schema has {} features",
                    record.values.len(),
                    self.features.len()
                ),
            });
        }
        for (feature, cell) in self.features.iter().zip(&record.values) {
            feature.check_cell(cell).map_err(|reason| Error::InvalidCell {
                row,
                column: feature.name.clone(),
                reason,
            })?;
        }
        if let Some(e) = record.effort {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidCell {
                    row,
                    column: self.effort_column.clone(),
                    reason: format!("effort {e} is not a positive finite number"),
                });
            }
        }
        Ok(())
    }
}

fn parse_effort(raw: &str, missing_token: &str) -> std::result::Result<Option<f64>, String> {
    let raw = raw.trim();
    if raw.is_empty() || raw == missing_token {
        return Ok(None);
    }
    let value: f64 = raw.parse().map_err(|_| format!("`{raw}` is not a number"))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("effort `{raw}` is not a positive finite number"));
    }
    Ok(Some(value))
}

/// One feature value. Ordinal cells hold the 1-based rank of their level.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Interval(f64),
    Nominal(String),
    Ordinal(usize),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectRecord {
    pub values: Vec<Cell>,
    /// Known effort; `None` only for a query still to be estimated.
    pub effort: Option<f64>,
}

impl ProjectRecord {
    pub fn new(values: Vec<Cell>, effort: Option<f64>) -> Self {
        ProjectRecord { values, effort }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Per-feature scale information consumed by the dissimilarity coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureScale {
    /// `None` when the column has no observed value in the historical records.
    Interval {
        range: Option<Range>,
    },
    Nominal,
    Ordinal {
        levels: usize,
    },
}

/// Validated historical projects with frozen interval ranges.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<Schema>,
    records: Vec<ProjectRecord>,
    efforts: Vec<f64>,
    ranges: Vec<Option<Range>>,
}

impl Dataset {
    pub fn new(schema: Schema, records: Vec<ProjectRecord>) -> Result<Self> {
        Self::from_shared(Arc::new(schema), records)
    }

    fn from_shared(schema: Arc<Schema>, records: Vec<ProjectRecord>) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::TooFewRecords {
                required: 2,
                found: records.len(),
            });
        }
        let mut efforts = Vec::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            schema.check_record(record, i + 1)?;
            efforts.push(record.effort.ok_or(Error::MissingEffort { row: i + 1 })?);
        }
        let ranges = schema
            .features
            .iter()
            .enumerate()
            .map(|(m, f)| match f.kind {
                FeatureKind::Interval => interval_range(&records, m),
                _ => None,
            })
            .collect();
        Ok(Dataset {
            schema,
            records,
            efforts,
            ranges,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[ProjectRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> Result<&ProjectRecord> {
        self.records.get(i).ok_or(Error::IndexOutOfBounds {
            index: i,
            len: self.records.len(),
        })
    }

    pub fn efforts(&self) -> &[f64] {
        &self.efforts
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Frozen (min, max) of an interval feature; `None` for other kinds or an
    /// all-missing column.
    pub fn range(&self, m: usize) -> Option<Range> {
        self.ranges.get(m).copied().flatten()
    }

    pub fn feature_range(&self, name: &str) -> Result<Option<Range>> {
        let m = self
            .schema
            .feature_index(name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        Ok(self.range(m))
    }

    pub fn scale(&self, m: usize) -> FeatureScale {
        let feature = &self.schema.features[m];
        match feature.kind {
            FeatureKind::Interval => FeatureScale::Interval { range: self.ranges[m] },
            FeatureKind::Nominal => FeatureScale::Nominal,
            FeatureKind::Ordinal => FeatureScale::Ordinal {
                levels: feature.levels.len(),
            },
        }
    }

    /// The dataset with record `i` removed. Ranges are recomputed from the
    /// remaining records.
    pub fn without(&self, i: usize) -> Result<Dataset> {
        if i >= self.len() {
            return Err(Error::IndexOutOfBounds {
                index: i,
                len: self.len(),
            });
        }
        let records = self
            .records
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        Dataset::from_shared(Arc::clone(&self.schema), records)
    }

    pub fn check_query(&self, query: &ProjectRecord) -> Result<()> {
        self.schema.check_record(query, 1)
    }

    /// Serialize as CSV with features in schema order followed by the effort column.
    pub fn write_csv<W: Write>(&self, writer: W, missing_token: &str) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.schema.features.iter().map(|f| f.name.as_str()).collect();
        header.push(&self.schema.effort_column);
        out.write_record(&header)?;
        for (record, effort) in self.records.iter().zip(&self.efforts) {
            let mut row: Vec<String> = self
                .schema
                .features
                .iter()
                .zip(&record.values)
                .map(|(f, c)| f.format_cell(c, missing_token))
                .collect();
            row.push(effort.to_string());
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

fn interval_range(records: &[ProjectRecord], m: usize) -> Option<Range> {
    records.iter().fold(None, |acc, r| match (&r.values[m], acc) {
        (Cell::Interval(v), None) => Some(Range { min: *v, max: *v }),
        (Cell::Interval(v), Some(range)) => Some(Range {
            min: range.min.min(*v),
            max: range.max.max(*v),
        }),
        (_, acc) => acc,
    })
}

/// Map an ordinal level to `(r - 1) / (M - 1)`; a single-level feature maps to 0.
pub fn ordinal_to_unit_interval(dataset: &Dataset, feature: &str, level: &str) -> Result<f64> {
    let spec = dataset.schema().feature(feature)?;
    if spec.kind != FeatureKind::Ordinal {
        return Err(Error::NotOrdinal(feature.to_string()));
    }
    let rank = spec.rank_of(level).ok_or_else(|| Error::UnknownLevel {
        feature: feature.to_string(),
        level: level.to_string(),
    })?;
    Ok(rank_to_unit(rank, spec.levels.len()))
}

pub(crate) fn rank_to_unit(rank: usize, levels: usize) -> f64 {
    if levels <= 1 {
        0.0
    } else {
        (rank - 1) as f64 / (levels - 1) as f64
    }
}

/// Read a dataset from CSV. Columns are matched to the schema by name, in any
/// order; columns listed as ignored are dropped.
pub fn parse_csv(path: impl AsRef<Path>, schema: Schema, missing_token: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_reader(file, schema, missing_token)
}

pub fn parse_csv_reader<R: Read>(reader: R, schema: Schema, missing_token: &str) -> Result<Dataset> {
    let records = read_records(reader, &schema, missing_token, true)?;
    Dataset::new(schema, records)
}

/// Read query records (effort optional) from CSV in the dataset's schema.
pub fn parse_query_csv<R: Read>(reader: R, schema: &Schema, missing_token: &str) -> Result<Vec<ProjectRecord>> {
    read_records(reader, schema, missing_token, false)
}

enum Column {
    Feature(usize),
    Effort,
    Ignored,
}

fn read_records<R: Read>(
    reader: R,
    schema: &Schema,
    missing_token: &str,
    historical: bool,
) -> Result<Vec<ProjectRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();

    let mut columns = Vec::with_capacity(header.len());
    let mut seen = HashSet::new();
    for name in header.iter() {
        if !seen.insert(name.to_string()) {
            return Err(Error::Csv(format!("header repeats column `{name}`")));
        }
        let column = if name == schema.effort_column {
            Column::Effort
        } else if let Some(m) = schema.feature_index(name) {
            Column::Feature(m)
        } else if schema.ignored.iter().any(|i| i == name) {
            Column::Ignored
        } else {
            return Err(Error::UnknownColumn(name.to_string()));
        };
        columns.push(column);
    }
    for f in &schema.features {
        if !seen.contains(&f.name) {
            return Err(Error::MissingColumn(f.name.clone()));
        }
    }
    if historical && !seen.contains(&schema.effort_column) {
        return Err(Error::MissingColumn(schema.effort_column.clone()));
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 1;
        let mut values = vec![Cell::Missing; schema.features.len()];
        let mut effort = None;
        for (column, raw) in columns.iter().zip(row.iter()) {
            match *column {
                Column::Feature(m) => {
                    values[m] =
                        schema.features[m]
                            .parse_cell(raw, missing_token)
                            .map_err(|reason| Error::InvalidCell {
                                row: line,
                                column: schema.features[m].name.clone(),
                                reason,
                            })?;
                }
                Column::Effort => {
                    effort = parse_effort(raw, missing_token).map_err(|reason| Error::InvalidCell {
                        row: line,
                        column: schema.effort_column.clone(),
                        reason,
                    })?;
                }
                Column::Ignored => {}
            }
        }
        if historical && effort.is_none() {
            return Err(Error::MissingEffort { row: line });
        }
        records.push(ProjectRecord { values, effort });
    }
    Ok(records)
}
