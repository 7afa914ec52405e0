//! Exact discrete probability machinery: joint pmf tables over named
//! variables, marginalization, variable grouping, empirical estimation, and
//! Shannon information measures in bits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Probabilities below this are treated as exact zeros in information sums.
pub const PROB_ZERO_TOL: f64 = 1e-15;
/// A pmf must sum to 1 within this before construction succeeds.
pub const PMF_SUM_TOL: f64 = 1e-12;
/// Round-off tolerance for information quantities that are provably >= 0.
pub const NEG_INFO_TOL: f64 = 1e-9;

/// An information quantity in base-2 units. Small negative round-off is
/// clamped to zero at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfoValue {
    bits: f64,
}

impl InfoValue {
    pub const ZERO: InfoValue = InfoValue { bits: 0.0 };

    /// Wraps a raw value, clamping negatives to 0. Callers that need a
    /// stricter negativity check (e.g. the PID solver's -1e-6 rule) must
    /// apply it before wrapping.
    pub fn from_raw(raw: f64) -> Self {
        InfoValue {
            bits: if raw < 0.0 { 0.0 } else { raw },
        }
    }

    pub fn bits(self) -> f64 {
        self.bits
    }
}

impl std::fmt::Display for InfoValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4}", self.bits)
    }
}

/// A named discrete random variable with an ordered alphabet of symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    name: String,
    alphabet: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, alphabet: Vec<String>) -> Result<Self> {
        let name = name.into();
        if alphabet.is_empty() {
            return Err(AuditError::InvalidDistribution(format!(
                "variable {name:?} has an empty alphabet"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &alphabet {
            if !seen.insert(s) {
                return Err(AuditError::InvalidDistribution(format!(
                    "variable {name:?} repeats symbol {s:?}"
                )));
            }
        }
        Ok(Variable { name, alphabet })
    }

    /// Convenience constructor for symbols `0..card` rendered in decimal.
    pub fn numbered(name: impl Into<String>, cardinality: usize) -> Self {
        Variable {
            name: name.into(),
            alphabet: (0..cardinality).map(|i| i.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn cardinality(&self) -> usize {
        self.alphabet.len()
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == symbol)
    }

    /// True when every symbol parses as a finite number.
    pub fn is_numeric(&self) -> bool {
        self.alphabet
            .iter()
            .all(|s| s.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false))
    }
}

/// `p * log2(p)` with the `0 log 0 := 0` convention.
fn xlog2(p: f64) -> f64 {
    if p < PROB_ZERO_TOL {
        0.0
    } else {
        p * p.log2()
    }
}

/// A joint probability mass table over an ordered list of variables.
///
/// Storage is dense, mixed-radix indexed with the last variable fastest.
/// Values are immutable after construction; every operation returns a new
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    variables: Vec<Variable>,
    pmf: Vec<f64>,
    sample_count: Option<u64>,
}

impl JointDistribution {
    pub fn new(variables: Vec<Variable>, pmf: Vec<f64>, sample_count: Option<u64>) -> Result<Self> {
        let expected: usize = variables.iter().map(Variable::cardinality).product();
        if variables.is_empty() {
            return Err(AuditError::InvalidDistribution(
                "a joint distribution needs at least one variable".into(),
            ));
        }
        if pmf.len() != expected {
            return Err(AuditError::InvalidDistribution(format!(
                "pmf has {} entries, expected {}",
                pmf.len(),
                expected
            )));
        }
        let mut sum = 0.0;
        for &p in &pmf {
            if !p.is_finite() || p < 0.0 {
                return Err(AuditError::InvalidDistribution(format!(
                    "pmf entry {p} is negative or non-finite"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(AuditError::InvalidDistribution(format!(
                "pmf sums to {sum}, not 1"
            )));
        }
        // Renormalize to kill residual round-off.
        let pmf = pmf.into_iter().map(|p| p / sum).collect();
        Ok(JointDistribution {
            variables,
            pmf,
            sample_count,
        })
    }

    /// Builds the empirical joint pmf of `rows`, which must align with
    /// `variables` column-for-column. Optional add-epsilon smoothing is
    /// applied to every cell before normalization.
    pub fn from_rows(
        variables: Vec<Variable>,
        rows: &[Vec<String>],
        smoothing: f64,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(AuditError::EmptyDataset);
        }
        if smoothing < 0.0 {
            return Err(AuditError::InvalidArgument(
                "smoothing must be nonnegative".into(),
            ));
        }
        let lookups: Vec<HashMap<&str, usize>> = variables
            .iter()
            .map(|v| {
                v.alphabet()
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.as_str(), i))
                    .collect()
            })
            .collect();
        let size: usize = variables.iter().map(Variable::cardinality).product();
        let strides = strides_of(&variables);
        let mut counts = vec![smoothing; size];
        for (row_idx, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(AuditError::InvalidDistribution(format!(
                    "row {row_idx} has {} fields, expected {}",
                    row.len(),
                    variables.len()
                )));
            }
            let mut flat = 0usize;
            for (k, symbol) in row.iter().enumerate() {
                let idx = lookups[k].get(symbol.as_str()).ok_or_else(|| {
                    AuditError::UnknownSymbol {
                        row: row_idx,
                        column: variables[k].name().to_string(),
                        symbol: symbol.clone(),
                    }
                })?;
                flat += idx * strides[k];
            }
            counts[flat] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        let pmf = counts.into_iter().map(|c| c / total).collect();
        Ok(JointDistribution {
            variables,
            pmf,
            sample_count: Some(rows.len() as u64),
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn sample_count(&self) -> Option<u64> {
        self.sample_count
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name() == name)
            .ok_or_else(|| AuditError::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.var_index(name)?])
    }

    fn strides(&self) -> Vec<usize> {
        strides_of(&self.variables)
    }

    /// Decodes a flat index into one symbol index per variable.
    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.variables.len()];
        for (k, var) in self.variables.iter().enumerate().rev() {
            let card = var.cardinality();
            out[k] = flat % card;
            flat /= card;
        }
        out
    }

    /// Sums out every variable not named in `keep`. The result's variables
    /// follow the order given in `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDistribution> {
        if keep.is_empty() {
            return Err(AuditError::InvalidArgument(
                "marginalize needs at least one variable to keep".into(),
            ));
        }
        let keep_idx: Vec<usize> = keep
            .iter()
            .map(|name| self.var_index(name))
            .collect::<Result<_>>()?;
        {
            let mut seen = std::collections::HashSet::new();
            for &i in &keep_idx {
                if !seen.insert(i) {
                    return Err(AuditError::InvalidArgument(format!(
                        "variable {:?} listed twice",
                        self.variables[i].name()
                    )));
                }
            }
        }
        let new_vars: Vec<Variable> = keep_idx.iter().map(|&i| self.variables[i].clone()).collect();
        let new_strides = strides_of(&new_vars);
        let size: usize = new_vars.iter().map(Variable::cardinality).product();
        let mut out = vec![0.0; size];
        let src_strides = self.strides();
        for (flat, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut target = 0usize;
            for (pos, &src) in keep_idx.iter().enumerate() {
                let sym = (flat / src_strides[src]) % self.variables[src].cardinality();
                target += sym * new_strides[pos];
            }
            out[target] += p;
        }
        JointDistribution::new(new_vars, out, self.sample_count)
    }

    /// Fuses `members` into a single composite variable whose alphabet is
    /// the Cartesian product of the member alphabets (member symbols joined
    /// by commas). The composite takes the position of the first member;
    /// probabilities are preserved cell-for-cell.
    pub fn group(&self, members: &[&str], new_name: &str) -> Result<JointDistribution> {
        if members.is_empty() {
            return Err(AuditError::InvalidArgument(
                "group needs a nonempty member set".into(),
            ));
        }
        let member_idx: Vec<usize> = members
            .iter()
            .map(|name| self.var_index(name))
            .collect::<Result<_>>()?;
        let member_set: std::collections::HashSet<usize> = member_idx.iter().copied().collect();
        if member_set.len() != member_idx.len() {
            return Err(AuditError::InvalidArgument(
                "group members must be distinct".into(),
            ));
        }

        // Composite alphabet in row-major order over members.
        let mut labels = vec![String::new()];
        for &mi in &member_idx {
            let mut next = Vec::with_capacity(labels.len() * self.variables[mi].cardinality());
            for prefix in &labels {
                for sym in self.variables[mi].alphabet() {
                    next.push(if prefix.is_empty() {
                        sym.clone()
                    } else {
                        format!("{prefix},{sym}")
                    });
                }
            }
            labels = next;
        }
        let composite = Variable::new(new_name, labels)?;

        let mut new_vars = Vec::new();
        for (i, v) in self.variables.iter().enumerate() {
            if i == member_idx[0] {
                new_vars.push(composite.clone());
            } else if !member_set.contains(&i) {
                new_vars.push(v.clone());
            }
        }
        let new_strides = strides_of(&new_vars);
        let composite_pos = new_vars
            .iter()
            .position(|v| v.name() == new_name)
            .expect("composite variable present");

        let size: usize = new_vars.iter().map(Variable::cardinality).product();
        let mut out = vec![0.0; size];
        let src_strides = self.strides();
        for (flat, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut composite_sym = 0usize;
            for &mi in &member_idx {
                let sym = (flat / src_strides[mi]) % self.variables[mi].cardinality();
                composite_sym = composite_sym * self.variables[mi].cardinality() + sym;
            }
            let mut target = composite_sym * new_strides[composite_pos];
            let mut pos = 0usize;
            for (i, v) in self.variables.iter().enumerate() {
                if member_set.contains(&i) {
                    continue;
                }
                if pos == composite_pos {
                    pos += 1;
                }
                let sym = (flat / src_strides[i]) % v.cardinality();
                target += sym * new_strides[pos];
                pos += 1;
            }
            out[target] += p;
        }
        JointDistribution::new(new_vars, out, self.sample_count)
    }

    /// Shannon entropy of the joint law of `names`, in bits.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let marg = self.marginalize(names)?;
        Ok(-marg.pmf.iter().map(|&p| xlog2(p)).sum::<f64>())
    }

    /// Mutual information I(a;b) in bits.
    pub fn mutual_info(&self, a: &str, b: &str) -> Result<InfoValue> {
        if a == b {
            return Err(AuditError::InvalidArgument(
                "mutual_info needs two distinct variables".into(),
            ));
        }
        let joint = self.marginalize(&[a, b])?;
        let na = joint.variables[0].cardinality();
        let nb = joint.variables[1].cardinality();
        let mut pa = vec![0.0; na];
        let mut pb = vec![0.0; nb];
        for i in 0..na {
            for j in 0..nb {
                let p = joint.pmf[i * nb + j];
                pa[i] += p;
                pb[j] += p;
            }
        }
        let mut mi = 0.0;
        for i in 0..na {
            for j in 0..nb {
                let p = joint.pmf[i * nb + j];
                if p >= PROB_ZERO_TOL {
                    mi += p * (p / (pa[i] * pb[j])).log2();
                }
            }
        }
        debug_assert!(mi > -NEG_INFO_TOL, "mutual information {mi} < -tol");
        Ok(InfoValue::from_raw(mi))
    }

    /// Conditional mutual information I(a;b|given) in bits.
    pub fn conditional_mutual_info(&self, a: &str, b: &str, given: &str) -> Result<InfoValue> {
        if a == b || a == given || b == given {
            return Err(AuditError::InvalidArgument(
                "conditional_mutual_info needs three distinct variables".into(),
            ));
        }
        let joint = self.marginalize(&[a, b, given])?;
        let na = joint.variables[0].cardinality();
        let nb = joint.variables[1].cardinality();
        let nc = joint.variables[2].cardinality();
        let mut pac = vec![0.0; na * nc];
        let mut pbc = vec![0.0; nb * nc];
        let mut pc = vec![0.0; nc];
        for i in 0..na {
            for j in 0..nb {
                for k in 0..nc {
                    let p = joint.pmf[(i * nb + j) * nc + k];
                    pac[i * nc + k] += p;
                    pbc[j * nc + k] += p;
                    pc[k] += p;
                }
            }
        }
        let mut cmi = 0.0;
        for i in 0..na {
            for j in 0..nb {
                for k in 0..nc {
                    let p = joint.pmf[(i * nb + j) * nc + k];
                    if p >= PROB_ZERO_TOL {
                        cmi += p * (p * pc[k] / (pac[i * nc + k] * pbc[j * nc + k])).log2();
                    }
                }
            }
        }
        debug_assert!(cmi > -NEG_INFO_TOL, "conditional MI {cmi} < -tol");
        Ok(InfoValue::from_raw(cmi))
    }

    /// Total-variation distance to another distribution over the same
    /// variables (same order and alphabets).
    pub fn total_variation(&self, other: &JointDistribution) -> Result<f64> {
        if self.variables != other.variables {
            return Err(AuditError::InvalidArgument(
                "total_variation needs identical variable layouts".into(),
            ));
        }
        Ok(self
            .pmf
            .iter()
            .zip(&other.pmf)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
            / 2.0)
    }
}

fn strides_of(vars: &[Variable]) -> Vec<usize> {
    let mut strides = vec![1usize; vars.len()];
    for k in (0..vars.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * vars[k + 1].cardinality();
    }
    strides
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary(name: &str) -> Variable {
        Variable::numbered(name, 2)
    }

    /// Random distribution over the given variables: Exp(1) weights
    /// normalized onto the simplex.
    pub(crate) fn random_joint(vars: Vec<Variable>, rng: &mut ChaCha8Rng) -> JointDistribution {
        let size: usize = vars.iter().map(Variable::cardinality).product();
        let weights: Vec<f64> = (0..size)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        JointDistribution::new(vars, weights.iter().map(|w| w / total).collect(), None).unwrap()
    }

    #[test]
    fn uniform_counts_give_uniform_pmf() {
        let rows: Vec<Vec<String>> = [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
            .iter()
            .map(|(z, y)| vec![z.to_string(), y.to_string()])
            .collect();
        let d =
            JointDistribution::from_rows(vec![binary("z"), binary("yhat")], &rows, 0.0).unwrap();
        assert_eq!(d.sample_count(), Some(4));
        for &p in d.pmf() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        let err = JointDistribution::from_rows(vec![binary("z")], &[], 0.0).unwrap_err();
        assert!(matches!(err, AuditError::EmptyDataset));
    }

    #[test]
    fn unknown_symbol_names_row_and_column() {
        let rows = vec![
            vec!["0".to_string(), "1".to_string()],
            vec!["1".to_string(), "3".to_string()],
        ];
        let err = JointDistribution::from_rows(vec![binary("z"), binary("x")], &rows, 0.0)
            .unwrap_err();
        match err {
            AuditError::UnknownSymbol { row, column, symbol } => {
                assert_eq!(row, 1);
                assert_eq!(column, "x");
                assert_eq!(symbol, "3");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn marginalize_uniform_to_bernoulli_half() {
        let d = JointDistribution::new(
            vec![binary("z"), binary("y")],
            vec![0.25; 4],
            None,
        )
        .unwrap();
        let m = d.marginalize(&["z"]).unwrap();
        assert_eq!(m.pmf(), &[0.5, 0.5]);
    }

    #[test]
    fn marginalize_all_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_joint(vec![binary("a"), Variable::numbered("b", 3)], &mut rng);
        let m = d.marginalize(&["a", "b"]).unwrap();
        for (p, q) in d.pmf().iter().zip(m.pmf()) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn marginalize_reorders_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_joint(vec![binary("a"), Variable::numbered("b", 3)], &mut rng);
        let m = d.marginalize(&["b", "a"]).unwrap();
        assert_eq!(m.variables()[0].name(), "b");
        for i in 0..2 {
            for j in 0..3 {
                assert!((d.pmf()[i * 3 + j] - m.pmf()[j * 2 + i]).abs() < 1e-15);
            }
        }
    }

    /// Joint over (z, x1, yhat) for the highly-dependent-features setup
    /// x1 = z + u, yhat = x1, enumerated over (z, u) in {0,1}^2.
    fn dependent_features_joint() -> JointDistribution {
        let vars = vec![
            binary("z"),
            Variable::numbered("x1", 3),
            Variable::numbered("yhat", 3),
        ];
        let mut pmf = vec![0.0; 2 * 3 * 3];
        for z in 0..2usize {
            for u in 0..2usize {
                let x1 = z + u;
                let yhat = x1;
                pmf[(z * 3 + x1) * 3 + yhat] += 0.25;
            }
        }
        JointDistribution::new(vars, pmf, None).unwrap()
    }

    #[test]
    fn dependent_features_zy_marginal_is_quarter_cells() {
        let d = dependent_features_joint();
        let m = d.marginalize(&["z", "yhat"]).unwrap();
        // (0,0), (0,1), (1,1), (1,2) each carry 1/4.
        let expect = [(0, 0), (0, 1), (1, 1), (1, 2)];
        for (zi, yi) in expect {
            assert!((m.pmf()[zi * 3 + yi] - 0.25).abs() < 1e-15);
        }
        assert!((m.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn group_two_binary_gives_cardinality_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_joint(vec![binary("a"), binary("b"), binary("c")], &mut rng);
        let g = d.group(&["a", "b"], "ab").unwrap();
        assert_eq!(g.variable("ab").unwrap().cardinality(), 4);
        assert!((g.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_invariant_under_grouping() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let d = random_joint(
                vec![binary("z"), binary("a"), Variable::numbered("b", 3)],
                &mut rng,
            );
            let grouped = d.group(&["a", "b"], "ab").unwrap();
            let direct = grouped.mutual_info("z", "ab").unwrap().bits();
            // Same quantity via entropies on the ungrouped pair.
            let h_z = d.entropy(&["z"]).unwrap();
            let h_ab = d.entropy(&["a", "b"]).unwrap();
            let h_zab = d.entropy(&["z", "a", "b"]).unwrap();
            assert!((direct - (h_z + h_ab - h_zab)).abs() < 1e-10);
        }
    }

    /// The three-bit secret example: z = (z1,z2,z3), a = (z1,z2,z3^n),
    /// b = (z2,n), enumerated over 16 latent outcomes.
    pub(crate) fn three_bit_secret_joint() -> JointDistribution {
        let z = Variable::new(
            "z",
            (0..8).map(|i| format!("{i:03b}")).collect(),
        )
        .unwrap();
        let a = Variable::new(
            "a",
            (0..8).map(|i| format!("{i:03b}")).collect(),
        )
        .unwrap();
        let b = Variable::new("b", (0..4).map(|i| format!("{i:02b}")).collect()).unwrap();
        let mut pmf = vec![0.0; 8 * 8 * 4];
        for bits in 0..16usize {
            let (z1, z2, z3, n) = (bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1);
            let zi = z1 << 2 | z2 << 1 | z3;
            let ai = z1 << 2 | z2 << 1 | (z3 ^ n);
            let bi = z2 << 1 | n;
            pmf[(zi * 8 + ai) * 4 + bi] += 1.0 / 16.0;
        }
        JointDistribution::new(vec![z, a, b], pmf, None).unwrap()
    }

    #[test]
    fn three_bit_secret_information_profile() {
        let d = three_bit_secret_joint();
        assert!((d.mutual_info("z", "a").unwrap().bits() - 2.0).abs() < 1e-10);
        assert!((d.mutual_info("z", "b").unwrap().bits() - 1.0).abs() < 1e-10);
        let g = d.group(&["a", "b"], "ab").unwrap();
        assert!((g.mutual_info("z", "ab").unwrap().bits() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn cmi_zero_for_independent_triple() {
        let d = JointDistribution::new(
            vec![binary("a"), binary("b"), binary("c")],
            vec![0.125; 8],
            None,
        )
        .unwrap();
        assert!(d.conditional_mutual_info("a", "b", "c").unwrap().bits() < 1e-12);
    }

    #[test]
    fn cmi_of_xor_given_input_is_one_bit() {
        // yhat = z ^ u over 4 equally likely outcomes.
        let mut pmf = vec![0.0; 8];
        for z in 0..2usize {
            for u in 0..2usize {
                let y = z ^ u;
                pmf[(z * 2 + u) * 2 + y] += 0.25;
            }
        }
        let d = JointDistribution::new(
            vec![binary("z"), binary("u"), binary("yhat")],
            pmf,
            None,
        )
        .unwrap();
        let v = d.conditional_mutual_info("z", "yhat", "u").unwrap();
        assert!((v.bits() - 1.0).abs() < 1e-10);
        // And marginally yhat carries nothing about z.
        assert!(d.mutual_info("z", "yhat").unwrap().bits() < 1e-12);
    }

    #[test]
    fn chain_rule_holds_on_random_joints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = random_joint(
                vec![
                    binary("z"),
                    Variable::numbered("a", 3),
                    Variable::numbered("b", 2),
                ],
                &mut rng,
            );
            let lhs = d
                .group(&["a", "b"], "ab")
                .unwrap()
                .mutual_info("z", "ab")
                .unwrap()
                .bits();
            let rhs = d.mutual_info("z", "b").unwrap().bits()
                + d.conditional_mutual_info("z", "a", "b").unwrap().bits();
            assert!((lhs - rhs).abs() < 1e-10, "chain rule residual {}", lhs - rhs);
        }
    }

    #[test]
    fn marginalize_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = random_joint(
            vec![
                binary("a"),
                Variable::numbered("b", 3),
                binary("c"),
                binary("d"),
            ],
            &mut rng,
        );
        let two_step = d
            .marginalize(&["a", "b", "c"])
            .unwrap()
            .marginalize(&["a", "c"])
            .unwrap();
        let one_step = d.marginalize(&["a", "c"]).unwrap();
        for (p, q) in two_step.pmf().iter().zip(one_step.pmf()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn empirical_pmf_converges_in_total_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..5 {
            let vars = vec![binary("a"), Variable::numbered("b", 3)];
            let target = random_joint(vars.clone(), &mut rng);
            let n = 20_000usize;
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let mut u: f64 = rng.gen();
                let mut flat = target.len() - 1;
                for (i, &p) in target.pmf().iter().enumerate() {
                    if u < p {
                        flat = i;
                        break;
                    }
                    u -= p;
                }
                let idx = target.decode(flat);
                rows.push(vec![
                    vars[0].alphabet()[idx[0]].clone(),
                    vars[1].alphabet()[idx[1]].clone(),
                ]);
            }
            let est = JointDistribution::from_rows(vars, &rows, 0.0).unwrap();
            let tv = est.total_variation(&target).unwrap();
            let bound = 3.0 * ((target.len() as f64) / n as f64).sqrt();
            assert!(tv < bound, "trial {trial}: tv {tv} >= bound {bound}");
        }
    }

    #[test]
    fn smoothing_fills_zero_cells() {
        let rows = vec![vec!["0".to_string(), "0".to_string()]; 3];
        let d =
            JointDistribution::from_rows(vec![binary("z"), binary("y")], &rows, 0.5).unwrap();
        assert!(d.pmf().iter().all(|&p| p > 0.0));
        assert!((d.pmf()[0] - 3.5 / 5.0).abs() < 1e-12);
    }
}
