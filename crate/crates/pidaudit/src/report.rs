//! Machine- and human-readable audit reports: a versioned JSON envelope,
//! a plain-text contribution table, and plot-ready CSV tables for the
//! subset lattice and the per-feature bars.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attribution::{AttributionReport, TableKind};
use crate::data::Table;
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContribution {
    pub feature: String,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetEntry {
    pub features: Vec<String>,
    pub bits: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetTableReport {
    pub kind: String,
    pub epsilon: f64,
    pub entries: Vec<SubsetEntry>,
}

/// The full audit report. Serializes losslessly: parsing the serialized
/// form reproduces the value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub mode: String,
    /// Echo of every effective setting, for reproducible audits.
    pub config: BTreeMap<String, String>,
    pub disparity_bits: f64,
    pub per_feature: Vec<FeatureContribution>,
    pub explained_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unexplained_bits: Option<f64>,
    pub subset_table: SubsetTableReport,
    pub warnings: Vec<String>,
    pub solves_performed: usize,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ReportEnvelope {
    pub fn from_attribution(
        report: &AttributionReport,
        config: BTreeMap<String, String>,
        timings_ms: BTreeMap<String, f64>,
    ) -> Self {
        let mut warnings = Vec::new();
        for &mask in &report.nonconverged {
            warnings.push(format!(
                "solver did not converge on subset {}",
                report.subset_table.label(mask)
            ));
        }
        if report.determinism_warning {
            warnings.push(
                "oracle returned different outputs for repeated inputs; \
                 contributions reflect the observed outputs"
                    .to_string(),
            );
        }
        if !report.subset_table.truncated.is_empty() {
            warnings.push(format!(
                "early truncation assigned {} subset(s) the disparity ceiling \
                 (epsilon = {} bits)",
                report.subset_table.truncated.len(),
                report.subset_table.epsilon
            ));
        }
        let entries = report
            .subset_table
            .entries
            .iter()
            .map(|(&mask, &bits)| SubsetEntry {
                features: report.subset_table.members(mask),
                bits,
                truncated: report.subset_table.truncated.contains(&mask),
            })
            .collect();
        ReportEnvelope {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            mode: report.mode.to_string(),
            config,
            disparity_bits: report.total_disparity.bits(),
            per_feature: report
                .feature_names
                .iter()
                .zip(&report.per_feature)
                .map(|(feature, &bits)| FeatureContribution {
                    feature: feature.clone(),
                    bits,
                })
                .collect(),
            explained_bits: report.explained,
            unexplained_bits: report.unexplained,
            subset_table: SubsetTableReport {
                kind: match report.subset_table.kind {
                    TableKind::Redundant => "redundant".to_string(),
                    TableKind::InterventionalMi => "interventional_mi".to_string(),
                },
                epsilon: report.subset_table.epsilon,
                entries,
            },
            warnings,
            solves_performed: report.solves_performed,
            timings_ms,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("report serializes"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| crate::error::AuditError::InvalidArgument(format!("bad report JSON: {e}")))
    }

    /// Plain-text summary: per-feature contributions sorted descending,
    /// bits to four decimals. Numbers match the JSON values to the
    /// displayed precision.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mode: {}\n", self.mode));
        out.push_str(&format!("disparity I(Z;Yhat): {:.4} bits\n", self.disparity_bits));
        let width = self
            .per_feature
            .iter()
            .map(|c| c.feature.len())
            .chain(["feature".len()])
            .max()
            .unwrap_or(7);
        out.push_str(&format!("{:<width$}  contribution_bits\n", "feature"));
        let mut sorted: Vec<&FeatureContribution> = self.per_feature.iter().collect();
        sorted.sort_by(|a, b| b.bits.partial_cmp(&a.bits).unwrap());
        for c in sorted {
            out.push_str(&format!("{:<width$}  {:.4}\n", c.feature, c.bits));
        }
        out.push_str(&format!("explained: {:.4} bits\n", self.explained_bits));
        if let Some(u) = self.unexplained_bits {
            out.push_str(&format!("unexplained: {:.4} bits\n", u));
        }
        if self.warnings.is_empty() {
            out.push_str("warnings: none\n");
        } else {
            for w in &self.warnings {
                out.push_str(&format!("warning: {w}\n"));
            }
        }
        out
    }

    /// Subset-level values, one row per subset (plot-ready).
    pub fn subsets_plot_table(&self) -> Table {
        Table {
            columns: vec![
                "subset".to_string(),
                "cardinality".to_string(),
                "bits".to_string(),
                "truncated".to_string(),
            ],
            rows: self
                .subset_table
                .entries
                .iter()
                .map(|e| {
                    vec![
                        if e.features.is_empty() {
                            "(none)".to_string()
                        } else {
                            e.features.join("+")
                        },
                        e.features.len().to_string(),
                        format!("{}", e.bits),
                        e.truncated.to_string(),
                    ]
                })
                .collect(),
        }
    }

    /// Per-feature contributions (plot-ready bars).
    pub fn features_plot_table(&self) -> Table {
        Table {
            columns: vec!["feature".to_string(), "contribution_bits".to_string()],
            rows: self
                .per_feature
                .iter()
                .map(|c| vec![c.feature.clone(), format!("{}", c.bits)])
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::{potential_contributions, AuditConfig};
    use crate::data::synth::{generate, GeneratedData, GeneratorName, SampleMode, SyntheticSpec};

    fn sample_envelope() -> ReportEnvelope {
        let g = generate(&SyntheticSpec {
            name: GeneratorName::Canonical1,
            mode: SampleMode::Analytic,
            seed: 0,
        })
        .unwrap();
        let d = match g.data {
            GeneratedData::Analytic(d) => d,
            _ => unreachable!(),
        };
        let report =
            potential_contributions(&d, &g.schema.as_ref().unwrap(), &AuditConfig::default())
                .unwrap();
        let mut config = BTreeMap::new();
        config.insert("mode".to_string(), "distributional".to_string());
        let mut timings = BTreeMap::new();
        timings.insert("total".to_string(), 12.5);
        ReportEnvelope::from_attribution(&report, config, timings)
    }

    #[test]
    fn report_round_trips_through_json() {
        let env = sample_envelope();
        let json = env.to_json().unwrap();
        let back = ReportEnvelope::from_json(&json).unwrap();
        assert_eq!(env, back);
    }

    #[test]
    fn text_matches_json_at_displayed_precision() {
        let env = sample_envelope();
        let text = env.render_text();
        for c in &env.per_feature {
            let rendered = format!("{:.4}", c.bits);
            assert!(
                text.contains(&rendered),
                "text missing {rendered} for {}: {text}",
                c.feature
            );
        }
        assert!(text.contains(&format!("{:.4}", env.disparity_bits)));
        assert!(text.contains("warnings: none"));
    }

    #[test]
    fn plot_tables_cover_all_subsets_and_features() {
        let env = sample_envelope();
        let subsets = env.subsets_plot_table();
        assert_eq!(subsets.rows.len(), 4); // {}, {x1}, {x2}, {x1,x2}
        let features = env.features_plot_table();
        assert_eq!(features.rows.len(), 2);
    }
}
