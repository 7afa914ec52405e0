//! Shapley allocation over characteristic functions given on the subset
//! lattice of features, with subsets encoded as bitmasks.

use std::collections::BTreeMap;

use crate::error::{AuditError, Result};

/// Renders a bitmask subset as `{i, j, ...}` over 0-based player indices.
pub fn mask_label(mask: u32) -> String {
    let members: Vec<String> = (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i.to_string())
        .collect();
    format!("{{{}}}", members.join(", "))
}

/// All subsets of `{0..n}` in increasing cardinality, lexicographic within
/// each cardinality (as sorted index lists).
pub fn subsets_by_level(n: usize) -> Vec<Vec<u32>> {
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0u32..(1u32 << n) {
        levels[mask.count_ones() as usize].push(mask);
    }
    // Within a level, lexicographic order of the sorted index lists is the
    // colex-reversed numeric order; sort by the index sequence explicitly.
    for level in &mut levels {
        level.sort_by_key(|&mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>());
    }
    levels
}

/// The Shapley value of every player for a game given by `values`, which
/// must contain one entry per subset of `{0..n}` with `values[&0] = 0`.
///
/// phi_i = sum over S not containing i of
///         |S|! (n-|S|-1)! / n! * (v(S u {i}) - v(S)).
pub fn shapley_values(values: &BTreeMap<u32, f64>, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > 32 {
        return Err(AuditError::InvalidArgument(format!(
            "player count {n} out of range"
        )));
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for mask in 0..=full {
        if !values.contains_key(&mask) {
            return Err(AuditError::MissingSubset(mask_label(mask)));
        }
    }
    // n <= 32 keeps n! well inside exact f64 territory only for n <= 20;
    // feature counts are capped far below that upstream.
    let mut factorial = vec![1.0f64; n + 1];
    for k in 1..=n {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let mut phi = vec![0.0; n];
    for (&mask, &v_s) in values {
        if mask == full {
            continue;
        }
        let s = mask.count_ones() as usize;
        let weight = factorial[s] * factorial[n - s - 1] / factorial[n];
        for i in 0..n {
            if mask >> i & 1 == 0 {
                let with = values[&(mask | 1 << i)];
                phi[i] += weight * (with - v_s);
            }
        }
    }
    Ok(phi)
}
