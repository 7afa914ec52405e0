//! Shapley attribution of disparity to features.
//!
//! Distributional mode plays the game v(S) = Red(Z:(Yhat, X_S)) over the
//! feature-subset lattice; interventional mode plays
//! v(S) = I(Z; Yhat(X_S)) where features outside S are imputed with
//! baseline constants and the model oracle is re-evaluated.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::dist::{InfoValue, JointDistribution, Variable};
use crate::error::{AuditError, Result};
use crate::oracle::{FeatureValue, ModelOracle};
use crate::pid::{self, SolverConfig};
use crate::shapley::{self, subsets_by_level};

/// Hard cap on feature count: the lattice has 2^n subsets.
pub const MAX_FEATURES: usize = 16;
/// Default cap on the (Z, Yhat, grouped X) joint table size.
pub const DEFAULT_MAX_JOINT_CELLS: usize = 500_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Redundant,
    InterventionalMi,
}

/// Subset-level values of the audit game, keyed by feature bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTable {
    pub kind: TableKind,
    pub feature_names: Vec<String>,
    pub entries: BTreeMap<u32, f64>,
    /// Subsets whose value was assigned by truncation rather than solved.
    pub truncated: BTreeSet<u32>,
    /// Truncation threshold in bits (0 disables truncation).
    pub epsilon: f64,
}

impl SubsetTable {
    pub fn label(&self, mask: u32) -> String {
        if mask == 0 {
            return "{}".to_string();
        }
        let names: Vec<&str> = self
            .feature_names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, n)| n.as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn members(&self, mask: u32) -> Vec<String> {
        self.feature_names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditMode {
    Distributional,
    Interventional,
}

impl std::fmt::Display for AuditMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AuditMode::Distributional => "distributional",
            AuditMode::Interventional => "interventional",
        })
    }
}

/// A subtree pruned by early truncation: every strict superset of `by`
/// including `pruned` was assigned the disparity ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationEvent {
    pub pruned: u32,
    pub by: u32,
}

#[derive(Debug, Clone)]
pub struct AttributionReport {
    pub mode: AuditMode,
    pub feature_names: Vec<String>,
    /// Contribution in bits per feature, aligned with `feature_names`.
    pub per_feature: Vec<f64>,
    /// I(Z;Yhat).
    pub total_disparity: InfoValue,
    /// Sum of the per-feature contributions.
    pub explained: f64,
    /// total_disparity - explained = Uni(Z:Yhat|X); distributional only.
    pub unexplained: Option<f64>,
    pub subset_table: SubsetTable,
    pub truncation_log: Vec<TruncationEvent>,
    /// Subsets whose solve hit the iteration budget.
    pub nonconverged: Vec<u32>,
    /// Set when an enabled determinism check caught the oracle returning
    /// different outputs for repeated inputs.
    pub determinism_warning: bool,
    /// PID solves (or oracle batches) actually performed.
    pub solves_performed: usize,
}

impl AttributionReport {
    pub fn has_warnings(&self) -> bool {
        !self.nonconverged.is_empty() || self.determinism_warning
    }
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub solver: SolverConfig,
    /// Early-truncation threshold in bits; 0 disables truncation.
    pub epsilon: f64,
    /// Worker threads for subset-level computations (1 = sequential).
    pub jobs: usize,
    pub max_joint_cells: usize,
    pub check_determinism: bool,
    /// Per-feature imputation overrides for interventional mode.
    pub impute_overrides: HashMap<String, String>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            solver: SolverConfig::default(),
            epsilon: 0.0,
            jobs: 1,
            max_joint_cells: DEFAULT_MAX_JOINT_CELLS,
            check_determinism: true,
            impute_overrides: HashMap::new(),
        }
    }
}

fn feature_cells_cap_check(
    dist: &JointDistribution,
    features: &[String],
    fixed: &[&str],
    cap: usize,
) -> Result<()> {
    if features.len() > MAX_FEATURES {
        return Err(AuditError::TooManyFeatures {
            n: features.len(),
            cap: MAX_FEATURES,
        });
    }
    let mut cells: usize = 1;
    for name in fixed {
        cells = cells.saturating_mul(dist.variable(name)?.cardinality());
    }
    for name in features {
        cells = cells.saturating_mul(dist.variable(name)?.cardinality());
    }
    if cells > cap {
        return Err(AuditError::JointTooLarge { cells, cap });
    }
    Ok(())
}

fn run_level<T, F>(masks: &[u32], jobs: usize, f: F) -> Vec<(u32, Result<T>)>
where
    T: Send,
    F: Fn(u32) -> Result<T> + Sync,
{
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| masks.par_iter().map(|&m| (m, f(m))).collect())
    } else {
        masks.iter().map(|&m| (m, f(m))).collect()
    }
}

/// Distributional audit: Shapley attribution over the redundant-information
/// game, with early truncation of the subset lattice.
///
/// `dist` must contain the schema's protected, decision, and feature
/// variables (as produced by `data::estimate_joint` or a generator).
pub fn potential_contributions(
    dist: &JointDistribution,
    schema: &crate::data::AuditSchema,
    cfg: &AuditConfig,
) -> Result<AttributionReport> {
    schema.validate()?;
    if cfg.epsilon < 0.0 {
        return Err(AuditError::InvalidArgument(
            "truncation epsilon must be nonnegative".into(),
        ));
    }
    let z = schema.protected.as_str();
    let yhat = schema.decision.as_str();
    let features = schema.features.clone();
    let n = features.len();
    feature_cells_cap_check(dist, &features, &[z, yhat], cfg.max_joint_cells)?;

    let total = dist.mutual_info(z, yhat)?;
    let total_bits = total.bits();

    let mut entries: BTreeMap<u32, f64> = BTreeMap::new();
    entries.insert(0, 0.0);
    let mut truncated: BTreeSet<u32> = BTreeSet::new();
    let mut truncation_log = Vec::new();
    let mut nonconverged = Vec::new();
    let mut saturated: Vec<u32> = Vec::new();
    let mut solves = 0usize;

    let solve_red = |mask: u32| -> Result<(f64, bool)> {
        let members: Vec<&str> = features
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, f)| f.as_str())
            .collect();
        let (scoped, b_name): (JointDistribution, String) = if members.len() == 1 {
            (
                dist.marginalize(&[z, yhat, members[0]])?,
                members[0].to_string(),
            )
        } else {
            let grouped = dist.group(&members, "__xs")?;
            (grouped.marginalize(&[z, yhat, "__xs"])?, "__xs".to_string())
        };
        let sol = pid::unique_info(&scoped, z, yhat, &b_name, &cfg.solver)?;
        let red = total_bits - sol.value.bits();
        if red < -pid::COMPONENT_NEG_TOL {
            return Err(AuditError::SolverQuality(format!(
                "Red for subset mask {mask:#b} came out {red} bits"
            )));
        }
        Ok((red.max(0.0), sol.converged))
    };

    for level in subsets_by_level(n).iter().skip(1) {
        let mut to_solve = Vec::new();
        for &mask in level {
            match saturated.iter().find(|&&s| s & mask == s && s != mask) {
                Some(&by) => {
                    entries.insert(mask, total_bits);
                    truncated.insert(mask);
                    truncation_log.push(TruncationEvent { pruned: mask, by });
                }
                None => to_solve.push(mask),
            }
        }
        for (mask, outcome) in run_level(&to_solve, cfg.jobs, solve_red) {
            let (red, converged) = outcome?;
            solves += 1;
            entries.insert(mask, red);
            if !converged {
                nonconverged.push(mask);
            }
            if cfg.epsilon > 0.0 && (red - total_bits).abs() <= cfg.epsilon {
                saturated.push(mask);
            }
        }
    }

    let table = SubsetTable {
        kind: TableKind::Redundant,
        feature_names: features.clone(),
        entries,
        truncated,
        epsilon: cfg.epsilon,
    };
    let phi = shapley::shapley_values(&table.entries, n)?;
    let per_feature: Vec<f64> = phi.iter().map(|&p| p.max(0.0)).collect();
    let explained: f64 = per_feature.iter().sum();
    let full = (1u32 << n) - 1;
    let unexplained = (total_bits - table.entries[&full]).max(0.0);

    Ok(AttributionReport {
        mode: AuditMode::Distributional,
        feature_names: features,
        per_feature,
        total_disparity: total,
        explained,
        unexplained: Some(unexplained),
        subset_table: table,
        truncation_log,
        nonconverged,
        determinism_warning: false,
        solves_performed: solves,
    })
}

/// Interventional audit: Shapley attribution over I(Z; Yhat(X_S)), where
/// Yhat(X_S) evaluates the oracle with features outside S pinned to
/// baseline constants (mean for numeric features, mode otherwise,
/// overridable per feature).
///
/// `dist` is the joint over (Z, X); a decision variable, if present, is
/// ignored — decisions come from the oracle.
pub fn interventional_contributions(
    dist: &JointDistribution,
    oracle: &ModelOracle,
    schema: &crate::data::AuditSchema,
    cfg: &AuditConfig,
) -> Result<AttributionReport> {
    schema.validate()?;
    let z = schema.protected.as_str();
    let features = schema.features.clone();
    let n = features.len();
    if oracle.feature_order != features {
        return Err(AuditError::Oracle(format!(
            "oracle feature order {:?} does not match schema features {:?}",
            oracle.feature_order, features
        )));
    }
    feature_cells_cap_check(dist, &features, &[z], cfg.max_joint_cells)?;

    // Support of the (Z, X) joint: one oracle row per cell of positive
    // probability, weighted by it.
    let feature_refs: Vec<&str> = features.iter().map(String::as_str).collect();
    let mut keep = vec![z];
    keep.extend(&feature_refs);
    let zx = dist.marginalize(&keep)?;
    let z_var = zx.variables()[0].clone();
    let numeric: Vec<bool> = (0..n).map(|i| zx.variables()[i + 1].is_numeric()).collect();

    let mut support: Vec<(usize, Vec<usize>, f64)> = Vec::new();
    for (flat, &p) in zx.pmf().iter().enumerate() {
        if p > 0.0 {
            let idx = zx.decode(flat);
            support.push((idx[0], idx[1..].to_vec(), p));
        }
    }

    let baselines = resolve_baselines(&zx, &features, &numeric, &cfg.impute_overrides)?;

    let feature_value = |fi: usize, sym_idx: usize| -> FeatureValue {
        let sym = &zx.variables()[fi + 1].alphabet()[sym_idx];
        if numeric[fi] {
            FeatureValue::Number(sym.parse().expect("numeric alphabet"))
        } else {
            FeatureValue::Symbol(sym.clone())
        }
    };

    let eval_subset = |mask: u32| -> Result<(f64, Option<bool>)> {
        let rows: Vec<Vec<FeatureValue>> = support
            .iter()
            .map(|(_, feat_idx, _)| {
                (0..n)
                    .map(|fi| {
                        if mask >> fi & 1 == 1 {
                            feature_value(fi, feat_idx[fi])
                        } else {
                            baselines[fi].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let outcome = oracle
            .evaluate_batch(&rows, cfg.check_determinism)
            .map_err(|e| AuditError::Oracle(format!("subset mask {mask:#b}: {e}")))?;
        // Pushforward joint of (Z, decision) under the support weights.
        let mut decision_syms: Vec<String> = outcome.decisions.clone();
        decision_syms.sort();
        decision_syms.dedup();
        let dvar = Variable::new("__decision", decision_syms.clone())?;
        let mut pmf = vec![0.0; z_var.cardinality() * dvar.cardinality()];
        for ((zi, _, p), d) in support.iter().zip(&outcome.decisions) {
            let di = dvar.symbol_index(d).expect("decision in alphabet");
            pmf[zi * dvar.cardinality() + di] += p;
        }
        let joint = JointDistribution::new(vec![z_var.clone(), dvar], pmf, None)?;
        let mi = joint.mutual_info(z, "__decision")?;
        Ok((mi.bits(), outcome.deterministic))
    };

    let mut entries: BTreeMap<u32, f64> = BTreeMap::new();
    entries.insert(0, 0.0); // Yhat(empty set) is a constant.
    let mut determinism_warning = false;
    let mut batches = 0usize;
    for level in subsets_by_level(n).iter().skip(1) {
        for (mask, outcome) in run_level(level, cfg.jobs, eval_subset) {
            let (mi, deterministic) = outcome?;
            batches += 1;
            entries.insert(mask, mi);
            if deterministic == Some(false) {
                determinism_warning = true;
            }
        }
    }

    let table = SubsetTable {
        kind: TableKind::InterventionalMi,
        feature_names: features.clone(),
        entries,
        truncated: BTreeSet::new(),
        epsilon: 0.0,
    };
    let per_feature = shapley::shapley_values(&table.entries, n)?;
    let explained: f64 = per_feature.iter().sum();
    let full = (1u32 << n) - 1;
    let total = InfoValue::from_raw(table.entries[&full]);

    Ok(AttributionReport {
        mode: AuditMode::Interventional,
        feature_names: features,
        per_feature,
        total_disparity: total,
        explained,
        unexplained: None,
        subset_table: table,
        truncation_log: Vec::new(),
        nonconverged: Vec::new(),
        determinism_warning,
        solves_performed: batches,
    })
}

/// Baseline constants for imputation: configured override first, then
/// mean for numeric alphabets, mode (ties to the first symbol) otherwise.
fn resolve_baselines(
    zx: &JointDistribution,
    features: &[String],
    numeric: &[bool],
    overrides: &HashMap<String, String>,
) -> Result<Vec<FeatureValue>> {
    let mut out = Vec::with_capacity(features.len());
    for (fi, name) in features.iter().enumerate() {
        if let Some(raw) = overrides.get(name) {
            if numeric[fi] {
                let v: f64 = raw.parse().map_err(|_| {
                    AuditError::InvalidArgument(format!(
                        "imputation override for {name:?} must be numeric, got {raw:?}"
                    ))
                })?;
                out.push(FeatureValue::Number(v));
            } else {
                out.push(FeatureValue::Symbol(raw.clone()));
            }
            continue;
        }
        let marg = zx.marginalize(&[name])?;
        let var = &marg.variables()[0];
        if numeric[fi] {
            let mean: f64 = marg
                .pmf()
                .iter()
                .zip(var.alphabet())
                .map(|(&p, s)| p * s.parse::<f64>().expect("numeric alphabet"))
                .sum();
            out.push(FeatureValue::Number(mean));
        } else {
            let mode_idx = marg
                .pmf()
                .iter()
                .enumerate()
                .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            out.push(FeatureValue::Symbol(var.alphabet()[mode_idx].clone()));
        }
    }
    Ok(out)
}

/// Completes a partial redundant-information table by assigning the
/// disparity ceiling to every strict superset of a saturated subset
/// (one whose value sits within epsilon of the ceiling).
pub fn truncate_subsets(
    table: &SubsetTable,
    total_disparity: InfoValue,
    epsilon: f64,
) -> Result<SubsetTable> {
    if epsilon < 0.0 {
        return Err(AuditError::InvalidArgument(
            "truncation epsilon must be nonnegative".into(),
        ));
    }
    if table.kind != TableKind::Redundant {
        return Err(AuditError::InvalidArgument(
            "truncation applies to redundant-information tables only".into(),
        ));
    }
    let mut out = table.clone();
    out.epsilon = epsilon;
    if epsilon == 0.0 {
        return Ok(out);
    }
    let total = total_disparity.bits();
    let n = table.feature_names.len();
    let saturated: Vec<u32> = table
        .entries
        .iter()
        .filter(|(_, &v)| (v - total).abs() <= epsilon)
        .map(|(&m, _)| m)
        .collect();
    for mask in 0..(1u32 << n) {
        if out.entries.contains_key(&mask) {
            continue;
        }
        if saturated.iter().any(|&s| s & mask == s && s != mask) {
            out.entries.insert(mask, total);
            out.truncated.insert(mask);
        }
    }
    Ok(out)
}

/// Uni(Z:Yhat|X): the disparity that cannot be attributed to any observed
/// feature.
pub fn diagnose_unexplained(
    dist: &JointDistribution,
    schema: &crate::data::AuditSchema,
    cfg: &AuditConfig,
) -> Result<InfoValue> {
    schema.validate()?;
    let z = schema.protected.as_str();
    let yhat = schema.decision.as_str();
    let features: Vec<&str> = schema.features.iter().map(String::as_str).collect();
    feature_cells_cap_check(dist, &schema.features, &[z, yhat], cfg.max_joint_cells)?;
    let (scoped, b): (JointDistribution, String) = if features.len() == 1 {
        (
            dist.marginalize(&[z, yhat, features[0]])?,
            features[0].to_string(),
        )
    } else {
        let grouped = dist.group(&features, "__x")?;
        (grouped.marginalize(&[z, yhat, "__x"])?, "__x".to_string())
    };
    Ok(pid::unique_info(&scoped, z, yhat, &b, &cfg.solver)?.value)
}
