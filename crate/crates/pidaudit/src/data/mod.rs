//! Data ingestion: CSV loading with optional discretization, column-role
//! schemas, and empirical joint estimation.

pub mod synth;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{JointDistribution, Variable};
use crate::error::{AuditError, Result};

/// Column-role assignment for an audit: protected attribute, decision, and
/// the ordered feature set, plus discretization directives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSchema {
    pub protected: String,
    pub decision: String,
    pub features: Vec<String>,
    /// Per-column bin count for numeric columns that need discretization.
    pub bins: HashMap<String, usize>,
    pub binning: BinningStrategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningStrategy {
    Quantile,
    EqualWidth,
}

impl AuditSchema {
    pub fn new(
        protected: impl Into<String>,
        decision: impl Into<String>,
        features: Vec<String>,
    ) -> Result<Self> {
        let schema = AuditSchema {
            protected: protected.into(),
            decision: decision.into(),
            features,
            bins: HashMap::new(),
            binning: BinningStrategy::Quantile,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(AuditError::InvalidSchema(
                "at least one feature is required".into(),
            ));
        }
        let mut names = vec![self.protected.as_str(), self.decision.as_str()];
        names.extend(self.features.iter().map(String::as_str));
        let mut seen = std::collections::HashSet::new();
        for n in names {
            if !seen.insert(n) {
                return Err(AuditError::InvalidSchema(format!(
                    "column {n:?} assigned more than one role"
                )));
            }
        }
        Ok(())
    }

    /// All schema columns in estimation order: protected, features, decision.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = vec![self.protected.as_str()];
        out.extend(self.features.iter().map(String::as_str));
        out.push(self.decision.as_str());
        out
    }
}

/// A rectangular block of symbol-valued records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| AuditError::MissingColumn(name.to_string()))
    }
}

/// A column after loading: its observed (or binned) alphabet, and the bin
/// edges when discretization was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedColumn {
    pub name: String,
    pub alphabet: Vec<String>,
    pub bin_edges: Option<Vec<f64>>,
}

/// Sorts symbols numerically when every symbol parses as a number,
/// lexicographically otherwise.
pub fn sorted_alphabet(mut symbols: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = symbols
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    match numeric {
        Some(values) => {
            let mut pairs: Vec<(f64, String)> = values.into_iter().zip(symbols).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            pairs.into_iter().map(|(_, s)| s).collect()
        }
        None => {
            symbols.sort();
            symbols
        }
    }
}

/// Loads a CSV with a header row, restricted to the schema's columns.
/// Numeric columns with a bins directive are discretized; the returned
/// table contains bin indices for those columns. Resolved alphabets (and
/// bin edges) are reported for reproducibility.
pub fn load_csv(path: impl AsRef<Path>, schema: &AuditSchema) -> Result<(Table, Vec<ResolvedColumn>)> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        records.push(rec.iter().map(str::to_string).collect::<Vec<String>>());
    }
    if records.is_empty() {
        return Err(AuditError::EmptyDataset);
    }

    let wanted = schema.columns();
    let mut col_idx = Vec::with_capacity(wanted.len());
    for name in &wanted {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AuditError::MissingColumn(name.to_string()))?;
        col_idx.push(idx);
    }

    let mut columns: Vec<Vec<String>> = vec![Vec::with_capacity(records.len()); wanted.len()];
    for (row_idx, rec) in records.iter().enumerate() {
        for (k, &idx) in col_idx.iter().enumerate() {
            let cell = rec.get(idx).ok_or_else(|| AuditError::BadCell {
                row: row_idx,
                column: wanted[k].to_string(),
                message: "row is shorter than the header".into(),
            })?;
            columns[k].push(cell.clone());
        }
    }

    let mut resolved = Vec::with_capacity(wanted.len());
    for (k, name) in wanted.iter().enumerate() {
        if let Some(&bins) = schema.bins.get(*name) {
            let (binned, edges) = discretize(&columns[k], bins, schema.binning, name)?;
            columns[k] = binned;
            let alphabet = sorted_alphabet(
                columns[k]
                    .iter()
                    .cloned()
                    .collect::<std::collections::HashSet<_>>()
                    .into_iter()
                    .collect(),
            );
            resolved.push(ResolvedColumn {
                name: name.to_string(),
                alphabet,
                bin_edges: Some(edges),
            });
        } else {
            let alphabet = sorted_alphabet(
                columns[k]
                    .iter()
                    .cloned()
                    .collect::<std::collections::HashSet<_>>()
                    .into_iter()
                    .collect(),
            );
            resolved.push(ResolvedColumn {
                name: name.to_string(),
                alphabet,
                bin_edges: None,
            });
        }
    }

    let rows: Vec<Vec<String>> = (0..records.len())
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect();
    Ok((
        Table {
            columns: wanted.iter().map(|s| s.to_string()).collect(),
            rows,
        },
        resolved,
    ))
}

/// Discretizes a numeric column into `bins` bins, returning bin-index
/// symbols and the interior thresholds. A value lands in bin
/// `#(thresholds <= value)`, so equal values always share a bin.
fn discretize(
    values: &[String],
    bins: usize,
    strategy: BinningStrategy,
    column: &str,
) -> Result<(Vec<String>, Vec<f64>)> {
    if bins == 0 {
        return Err(AuditError::InvalidSchema(format!(
            "column {column:?}: bin count must be positive"
        )));
    }
    let mut parsed = Vec::with_capacity(values.len());
    for (row, v) in values.iter().enumerate() {
        let x: f64 = v.parse().map_err(|_| AuditError::BadCell {
            row,
            column: column.to_string(),
            message: format!("cannot parse {v:?} as a number for binning"),
        })?;
        if !x.is_finite() {
            return Err(AuditError::BadCell {
                row,
                column: column.to_string(),
                message: "non-finite value".into(),
            });
        }
        parsed.push(x);
    }
    let thresholds = match strategy {
        BinningStrategy::Quantile => {
            let mut sorted = parsed.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = sorted.len();
            (1..bins)
                .map(|j| sorted[(j * n / bins).min(n - 1)])
                .collect::<Vec<f64>>()
        }
        BinningStrategy::EqualWidth => {
            let lo = parsed.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = parsed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / bins as f64;
            (1..bins).map(|j| lo + width * j as f64).collect()
        }
    };
    let binned = parsed
        .iter()
        .map(|&x| thresholds.iter().filter(|&&t| t <= x).count().to_string())
        .collect();
    Ok((binned, thresholds))
}

/// Plug-in empirical joint over the schema's columns (order: protected,
/// features, decision), with optional add-epsilon smoothing.
pub fn estimate_joint(table: &Table, schema: &AuditSchema, smoothing: f64) -> Result<JointDistribution> {
    schema.validate()?;
    if table.rows.is_empty() {
        return Err(AuditError::EmptyDataset);
    }
    let wanted = schema.columns();
    let mut col_idx = Vec::with_capacity(wanted.len());
    for name in &wanted {
        col_idx.push(table.column_index(name)?);
    }
    let mut variables = Vec::with_capacity(wanted.len());
    for (k, name) in wanted.iter().enumerate() {
        let alphabet = sorted_alphabet(
            table
                .rows
                .iter()
                .map(|r| r[col_idx[k]].clone())
                .collect::<std::collections::HashSet<_>>()
                .into_iter()
                .collect(),
        );
        variables.push(Variable::new(*name, alphabet)?);
    }
    let projected: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| col_idx.iter().map(|&i| r[i].clone()).collect())
        .collect();
    JointDistribution::from_rows(variables, &projected, smoothing)
}

/// Writes a table as CSV (header row first).
pub fn write_csv(path: impl AsRef<Path>, table: &Table) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}
