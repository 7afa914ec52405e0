//! Uniform evaluation interface over decision models: built-in lookup and
//! expression backends, plus a line-delimited JSON protocol for external
//! subprocess models.
//!
//! External protocol, one JSON object per line on the child's stdin and
//! stdout:
//!
//! ```text
//! request:  {"id": 0, "features": {"x1": 1, "x2": 0.5}}
//! response: {"id": 0, "decision": 0.5}
//! ```
//!
//! Responses may arrive in any order; ids must match the requests.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::error::{AuditError, Result};

pub const DEFAULT_BATCH_TIMEOUT: Duration = Duration::from_secs(30);

/// A feature assignment handed to a model. Imputed baselines for numeric
/// features may be off-alphabet reals (e.g. 0.5 for a binary feature), so
/// numbers travel as numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Symbol(String),
    Number(f64),
}

impl FeatureValue {
    pub fn as_number(&self) -> Result<f64> {
        match self {
            FeatureValue::Number(v) => Ok(*v),
            FeatureValue::Symbol(s) => s.parse::<f64>().map_err(|_| {
                AuditError::Oracle(format!("feature value {s:?} is not numeric"))
            }),
        }
    }

    /// The canonical symbol form: numbers use the shortest round-trip
    /// decimal rendering, so `1.0` and the symbol `"1"` coincide.
    pub fn canonical(&self) -> String {
        match self {
            FeatureValue::Symbol(s) => s.clone(),
            FeatureValue::Number(v) => canonical_number(*v),
        }
    }
}

/// Shortest round-trip rendering with -0 folded into 0.
pub fn canonical_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone)]
pub enum OracleBackend {
    /// Full (or defaulted) lookup over canonical feature symbols.
    LookupTable {
        entries: HashMap<Vec<String>, String>,
        default: Option<String>,
    },
    /// intercept + sum(coeffs * features), on numeric feature values.
    Linear { coeffs: Vec<f64>, intercept: f64 },
    /// The value of one feature, passed through.
    SelectFeature { index: usize },
    /// Sum of numeric feature values, modulo 2.
    XorMod2,
    /// Child process speaking the line protocol; spawned once per batch.
    External {
        command: Vec<String>,
        timeout: Duration,
    },
}

/// An evaluable decision model over a fixed feature order.
#[derive(Debug, Clone)]
pub struct ModelOracle {
    pub feature_order: Vec<String>,
    pub backend: OracleBackend,
}

/// One batch evaluation: decisions row-for-row, and the determinism-check
/// outcome when the check ran.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub decisions: Vec<String>,
    pub deterministic: Option<bool>,
}

impl ModelOracle {
    /// Built-in models: `first` (decision = first feature), `diff`
    /// (first minus second), `xor` (sum of features mod 2).
    pub fn builtin(name: &str, feature_order: Vec<String>) -> Result<Self> {
        let backend = match name {
            "first" => OracleBackend::SelectFeature { index: 0 },
            "diff" => {
                if feature_order.len() < 2 {
                    return Err(AuditError::Oracle(
                        "builtin:diff needs at least two features".into(),
                    ));
                }
                let mut coeffs = vec![0.0; feature_order.len()];
                coeffs[0] = 1.0;
                coeffs[1] = -1.0;
                OracleBackend::Linear {
                    coeffs,
                    intercept: 0.0,
                }
            }
            "xor" => OracleBackend::XorMod2,
            other => {
                return Err(AuditError::Oracle(format!(
                    "unknown builtin oracle {other:?} (expected first|diff|xor)"
                )))
            }
        };
        if feature_order.is_empty() {
            return Err(AuditError::Oracle("oracle needs at least one feature".into()));
        }
        Ok(ModelOracle {
            feature_order,
            backend,
        })
    }

    pub fn external(command: Vec<String>, feature_order: Vec<String>, timeout: Duration) -> Result<Self> {
        if command.is_empty() {
            return Err(AuditError::Oracle("empty external oracle command".into()));
        }
        Ok(ModelOracle {
            feature_order,
            backend: OracleBackend::External { command, timeout },
        })
    }

    /// Loads a lookup-table model from a CSV whose columns are the features
    /// (any order) plus a decision column.
    pub fn from_table_csv(
        path: &std::path::Path,
        feature_order: Vec<String>,
        decision_column: &str,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut idx = Vec::new();
        for f in &feature_order {
            idx.push(
                headers
                    .iter()
                    .position(|h| h == f)
                    .ok_or_else(|| AuditError::MissingColumn(f.clone()))?,
            );
        }
        let decision_idx = headers
            .iter()
            .position(|h| h == decision_column)
            .ok_or_else(|| AuditError::MissingColumn(decision_column.to_string()))?;
        let mut entries = HashMap::new();
        for rec in reader.records() {
            let rec = rec?;
            let key: Vec<String> = idx
                .iter()
                .map(|&i| canonicalize_symbol(rec.get(i).unwrap_or("")))
                .collect();
            entries.insert(key, rec.get(decision_idx).unwrap_or("").to_string());
        }
        if entries.is_empty() {
            return Err(AuditError::EmptyDataset);
        }
        Ok(ModelOracle {
            feature_order,
            backend: OracleBackend::LookupTable {
                entries,
                default: None,
            },
        })
    }

    /// Evaluates a batch of complete feature rows, order-preserving. With
    /// `check_determinism`, every 20th row is re-submitted and compared.
    pub fn evaluate_batch(
        &self,
        rows: &[Vec<FeatureValue>],
        check_determinism: bool,
    ) -> Result<BatchOutcome> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != self.feature_order.len() {
                return Err(AuditError::OracleBatch {
                    row_start: i,
                    row_end: i,
                    message: format!(
                        "row has {} values, oracle expects {}",
                        row.len(),
                        self.feature_order.len()
                    ),
                });
            }
        }
        let resample: Vec<usize> = if check_determinism && !rows.is_empty() {
            (0..rows.len()).step_by(20).collect()
        } else {
            Vec::new()
        };
        let mut work: Vec<&Vec<FeatureValue>> = rows.iter().collect();
        work.extend(resample.iter().map(|&i| &rows[i]));

        let all = match &self.backend {
            OracleBackend::External { command, timeout } => {
                self.evaluate_external(&work, command, *timeout)?
            }
            _ => {
                let mut out = Vec::with_capacity(work.len());
                for (i, row) in work.iter().enumerate() {
                    out.push(self.evaluate_builtin(row).map_err(|e| {
                        AuditError::OracleBatch {
                            row_start: i.min(rows.len().saturating_sub(1)),
                            row_end: i.min(rows.len().saturating_sub(1)),
                            message: e.to_string(),
                        }
                    })?);
                }
                out
            }
        };
        let decisions = all[..rows.len()].to_vec();
        let deterministic = if resample.is_empty() {
            None
        } else {
            Some(
                resample
                    .iter()
                    .enumerate()
                    .all(|(k, &i)| all[rows.len() + k] == decisions[i]),
            )
        };
        Ok(BatchOutcome {
            decisions,
            deterministic,
        })
    }

    fn evaluate_builtin(&self, row: &[FeatureValue]) -> Result<String> {
        match &self.backend {
            OracleBackend::SelectFeature { index } => Ok(row[*index].canonical()),
            OracleBackend::Linear { coeffs, intercept } => {
                let mut acc = *intercept;
                for (c, v) in coeffs.iter().zip(row) {
                    if *c != 0.0 {
                        acc += c * v.as_number()?;
                    }
                }
                Ok(canonical_number(acc))
            }
            OracleBackend::XorMod2 => {
                let mut acc = 0.0;
                for v in row {
                    acc += v.as_number()?;
                }
                Ok(canonical_number(acc.rem_euclid(2.0)))
            }
            OracleBackend::LookupTable { entries, default } => {
                let key: Vec<String> = row.iter().map(FeatureValue::canonical).collect();
                match entries.get(&key).or(default.as_ref()) {
                    Some(d) => Ok(d.clone()),
                    None => Err(AuditError::Oracle(format!(
                        "no table entry for ({})",
                        key.join(", ")
                    ))),
                }
            }
            OracleBackend::External { .. } => unreachable!("handled by evaluate_external"),
        }
    }

    fn evaluate_external(
        &self,
        rows: &[&Vec<FeatureValue>],
        command: &[String],
        timeout: Duration,
    ) -> Result<Vec<String>> {
        let mut requests = String::new();
        for (id, row) in rows.iter().enumerate() {
            let mut features = serde_json::Map::new();
            for (name, value) in self.feature_order.iter().zip(row.iter()) {
                let v = match value {
                    FeatureValue::Number(x) => serde_json::json!(x),
                    FeatureValue::Symbol(s) => serde_json::json!(s),
                };
                features.insert(name.clone(), v);
            }
            let line = serde_json::json!({ "id": id, "features": features });
            requests.push_str(&line.to_string());
            requests.push('\n');
        }

        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AuditError::Oracle(format!("cannot spawn {:?}: {e}", command[0])))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        let writer = std::thread::spawn(move || -> std::io::Result<()> {
            stdin.write_all(requests.as_bytes())?;
            stdin.flush()
            // Dropping stdin closes the pipe so line-oriented models see EOF.
        });

        let (tx, rx) = mpsc::channel::<std::io::Result<String>>();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let deadline = Instant::now() + timeout;
        let mut responses: HashMap<usize, String> = HashMap::with_capacity(rows.len());
        while responses.len() < rows.len() {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = match rx.recv_timeout(remaining) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => {
                    let _ = child.kill();
                    return Err(self.batch_error(rows.len(), &responses, format!("read error: {e}")));
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    let _ = child.kill();
                    return Err(self.batch_error(
                        rows.len(),
                        &responses,
                        format!("timeout after {timeout:?}"),
                    ));
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => {
                    let _ = child.kill();
                    return Err(self.batch_error(
                        rows.len(),
                        &responses,
                        "model exited before answering every request".to_string(),
                    ));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let parsed: serde_json::Value = serde_json::from_str(&line).map_err(|e| {
                let _ = child.kill();
                AuditError::Oracle(format!("malformed response line {line:?}: {e}"))
            })?;
            let id = parsed
                .get("id")
                .and_then(serde_json::Value::as_u64)
                .ok_or_else(|| AuditError::Oracle(format!("response without id: {line:?}")))?
                as usize;
            if id >= rows.len() {
                return Err(AuditError::Oracle(format!("response id {id} out of range")));
            }
            let decision = match parsed.get("decision") {
                Some(serde_json::Value::Number(n)) => canonical_number(
                    n.as_f64()
                        .ok_or_else(|| AuditError::Oracle(format!("bad decision in {line:?}")))?,
                ),
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(serde_json::Value::Bool(b)) => b.to_string(),
                _ => {
                    return Err(AuditError::Oracle(format!(
                        "response without decision: {line:?}"
                    )))
                }
            };
            if responses.insert(id, decision).is_some() {
                return Err(AuditError::Oracle(format!("duplicate response id {id}")));
            }
        }
        let _ = writer.join();
        let status = child.wait()?;
        if !status.success() {
            return Err(AuditError::Oracle(format!(
                "external oracle exited with {status}"
            )));
        }
        Ok((0..rows.len()).map(|i| responses[&i].clone()).collect())
    }

    fn batch_error(
        &self,
        total: usize,
        responses: &HashMap<usize, String>,
        message: String,
    ) -> AuditError {
        let first_missing = (0..total).find(|i| !responses.contains_key(i)).unwrap_or(0);
        let last_missing = (0..total).rev().find(|i| !responses.contains_key(i)).unwrap_or(0);
        AuditError::OracleBatch {
            row_start: first_missing,
            row_end: last_missing,
            message,
        }
    }
}

/// Canonical form used for table keys: numeric symbols are normalized
/// through their f64 value so "1.0" and "1" collide.
fn canonicalize_symbol(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => canonical_number(v),
        _ => s.to_string(),
    }
}
