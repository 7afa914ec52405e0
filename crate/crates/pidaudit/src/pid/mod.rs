//! Bivariate partial information decomposition of I(Z;(A,B)) into unique,
//! redundant, and synergistic components, built on the unique-information
//! convex program: Uni(Z:A|B) is the minimum of I_Q(Z;A|B) over joints Q
//! preserving the (Z,A) and (Z,B) marginals, and the remaining components
//! follow from the decomposition identities.

mod brute;
pub(crate) mod solver;

pub use brute::{brute_force_unique_info, BRUTE_FORCE_CELL_CAP};
pub use solver::{SolverBackend, SolverConfig, StartPoint};

use serde::Serialize;

use crate::dist::{InfoValue, JointDistribution};
use crate::error::{AuditError, Result};
use solver::UniqueProblem;

/// Components more negative than this indicate a bad solve; values in
/// `[-COMPONENT_NEG_TOL, 0)` are round-off and clamp to zero.
pub const COMPONENT_NEG_TOL: f64 = 1e-6;

/// A point of the marginal polytope, as produced by the solver.
#[derive(Debug, Clone)]
pub struct MarginalPolytopePoint {
    /// Joint distribution over (z, a, b) with the original alphabets.
    pub q: JointDistribution,
    /// Max absolute deviation of q's (Z,A) and (Z,B) marginals from the
    /// targets; at most 1e-9 for any point reported as feasible.
    pub feasibility_residual: f64,
}

impl MarginalPolytopePoint {
    pub fn is_feasible(&self) -> bool {
        self.feasibility_residual <= 1e-9
    }
}

/// Result of one unique-information solve.
#[derive(Debug, Clone)]
pub struct UniqueInfoSolution {
    pub value: InfoValue,
    pub point: MarginalPolytopePoint,
    pub iterations: usize,
    /// Norm of the unit-step projected-gradient displacement at the final
    /// iterate; small when the iterate is near-optimal.
    pub objective_gap_estimate: f64,
    pub converged: bool,
}

/// The four-way decomposition of I(Z;(A,B)) for one (z, a, b) triple.
#[derive(Debug, Clone, Serialize)]
pub struct PidResult {
    pub uni_a_given_b: InfoValue,
    pub uni_b_given_a: InfoValue,
    pub red: InfoValue,
    pub syn: InfoValue,
    /// I(Z;(A,B)).
    pub total: InfoValue,
    pub solver_iterations: usize,
    pub objective_gap_estimate: f64,
    pub converged: bool,
}

impl PidResult {
    /// |uni_a + uni_b + red + syn - total|, in bits.
    pub fn identity_residual(&self) -> f64 {
        (self.uni_a_given_b.bits() + self.uni_b_given_a.bits() + self.red.bits()
            + self.syn.bits()
            - self.total.bits())
        .abs()
    }
}

/// Uni(Z:A|B): minimizes I_Q(Z;A|B) over the marginal polytope. `a` and
/// `b` may be composite variables produced by grouping. Non-convergence
/// within the iteration budget is reported through `converged`, with the
/// best value so far.
pub fn unique_info(
    dist: &JointDistribution,
    z: &str,
    a: &str,
    b: &str,
    cfg: &SolverConfig,
) -> Result<UniqueInfoSolution> {
    let problem = UniqueProblem::from_dist(dist, z, a, b)?;
    let raw = problem.solve(cfg)?;
    let q = problem.wrap_point(dist, z, a, b, raw.q_full)?;
    Ok(UniqueInfoSolution {
        value: clamp_component(raw.value_bits, "Uni")?,
        point: MarginalPolytopePoint {
            q,
            feasibility_residual: raw.feasibility_residual,
        },
        iterations: raw.iterations,
        objective_gap_estimate: raw.gap_estimate,
        converged: raw.converged,
    })
}

fn clamp_component(raw: f64, label: &str) -> Result<InfoValue> {
    if raw < -COMPONENT_NEG_TOL {
        return Err(AuditError::SolverQuality(format!(
            "{label} = {raw} bits is more negative than the {COMPONENT_NEG_TOL} round-off tolerance"
        )));
    }
    Ok(InfoValue::from_raw(raw))
}

/// Full PID of I(Z;(A,B)). One convex solve yields Uni(Z:A|B); the other
/// three components follow from the decomposition identities
/// red = I(Z;A) - uni_a, syn = I(Z;A|B) - uni_a, uni_b = I(Z;B) - red.
pub fn decompose(
    dist: &JointDistribution,
    z: &str,
    a: &str,
    b: &str,
    cfg: &SolverConfig,
) -> Result<PidResult> {
    let joint = dist.marginalize(&[z, a, b])?;
    let sol = unique_info(&joint, z, a, b, cfg)?;
    let uni_a = sol.value.bits();
    let i_za = joint.mutual_info(z, a)?.bits();
    let i_zb = joint.mutual_info(z, b)?.bits();
    let i_za_given_b = joint.conditional_mutual_info(z, a, b)?.bits();
    let total = joint
        .group(&[a, b], "__ab")?
        .mutual_info(z, "__ab")?;

    let red = clamp_component(i_za - uni_a, "Red")?;
    let syn = clamp_component(i_za_given_b - uni_a, "Syn")?;
    let uni_b = clamp_component(i_zb - red.bits(), "Uni(Z:B|A)")?;
    Ok(PidResult {
        uni_a_given_b: sol.value,
        uni_b_given_a: uni_b,
        red,
        syn,
        total,
        solver_iterations: sol.iterations,
        objective_gap_estimate: sol.objective_gap_estimate,
        converged: sol.converged,
    })
}

/// Red(Z:(A,B)) = I(Z;A) - Uni(Z:A|B).
pub fn redundant_info(
    dist: &JointDistribution,
    z: &str,
    a: &str,
    b: &str,
    cfg: &SolverConfig,
) -> Result<InfoValue> {
    Ok(decompose(dist, z, a, b, cfg)?.red)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{generate, GeneratedData, GeneratorName, SampleMode, SyntheticSpec};
    use crate::dist::Variable;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn analytic(name: GeneratorName) -> JointDistribution {
        match generate(&SyntheticSpec {
            name,
            mode: SampleMode::Analytic,
            seed: 0,
        })
        .unwrap()
        .data
        {
            GeneratedData::Analytic(d) => d,
            _ => unreachable!(),
        }
    }

    fn random_joint(cards: &[usize], rng: &mut ChaCha8Rng) -> JointDistribution {
        let vars: Vec<Variable> = cards
            .iter()
            .enumerate()
            .map(|(i, &c)| Variable::numbered(format!("v{i}"), c))
            .collect();
        let size: usize = cards.iter().product();
        let w: Vec<f64> = (0..size).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        JointDistribution::new(vars, w.iter().map(|x| x / total).collect(), None).unwrap()
    }

    /// Z = A AND B over iid uniform bits, as a joint over (z, a, b).
    fn and_gate() -> JointDistribution {
        let vars = vec![
            Variable::numbered("z", 2),
            Variable::numbered("a", 2),
            Variable::numbered("b", 2),
        ];
        let mut pmf = vec![0.0; 8];
        for a in 0..2usize {
            for b in 0..2usize {
                let z = a & b;
                pmf[(z * 2 + a) * 2 + b] += 0.25;
            }
        }
        JointDistribution::new(vars, pmf, None).unwrap()
    }

    #[test]
    fn three_bit_secret_unique_info_both_directions() {
        let d = analytic(GeneratorName::PidExample);
        let cfg = SolverConfig::default();
        let uni_a = unique_info(&d, "z", "a", "b", &cfg).unwrap();
        assert!(uni_a.converged);
        assert!(
            (uni_a.value.bits() - 1.0).abs() < 1e-4,
            "Uni(Z:A|B) = {}",
            uni_a.value.bits()
        );
        let uni_b = unique_info(&d, "z", "b", "a", &cfg).unwrap();
        assert!(uni_b.value.bits() < 1e-4, "Uni(Z:B|A) = {}", uni_b.value.bits());
    }

    #[test]
    fn three_bit_secret_decomposition() {
        let d = analytic(GeneratorName::PidExample);
        let r = decompose(&d, "z", "a", "b", &SolverConfig::default()).unwrap();
        assert!((r.uni_a_given_b.bits() - 1.0).abs() < 1e-3);
        assert!(r.uni_b_given_a.bits() < 1e-3);
        assert!((r.red.bits() - 1.0).abs() < 1e-3);
        assert!((r.syn.bits() - 1.0).abs() < 1e-3);
        assert!((r.total.bits() - 3.0).abs() < 1e-9);
        assert!(r.identity_residual() < 1e-6);
    }

    #[test]
    fn independent_source_has_no_unique_info() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // Z independent of (A,B): product of a random Z marginal with a
        // random (A,B) joint.
        let ab = random_joint(&[2, 3], &mut rng);
        let pz = [0.3, 0.7];
        let vars = vec![
            Variable::numbered("z", 2),
            Variable::numbered("a", 2),
            Variable::numbered("b", 3),
        ];
        let mut pmf = vec![0.0; 12];
        for z in 0..2 {
            for a in 0..2 {
                for b in 0..3 {
                    pmf[(z * 2 + a) * 3 + b] = pz[z] * ab.pmf()[a * 3 + b];
                }
            }
        }
        let d = JointDistribution::new(vars, pmf, None).unwrap();
        let r = decompose(&d, "z", "a", "b", &SolverConfig::default()).unwrap();
        assert!(r.uni_a_given_b.bits() < 1e-6);
        assert!(r.uni_b_given_a.bits() < 1e-6);
        assert!(r.red.bits() < 1e-6);
        assert!(r.syn.bits() < 1e-6);
    }

    #[test]
    fn copy_case_is_fully_redundant() {
        // A = B = Z uniform bit.
        let vars = vec![
            Variable::numbered("z", 2),
            Variable::numbered("a", 2),
            Variable::numbered("b", 2),
        ];
        let mut pmf = vec![0.0; 8];
        pmf[0] = 0.5; // (0,0,0)
        pmf[7] = 0.5; // (1,1,1)
        let d = JointDistribution::new(vars, pmf, None).unwrap();
        let r = decompose(&d, "z", "a", "b", &SolverConfig::default()).unwrap();
        assert!((r.red.bits() - 1.0).abs() < 1e-6);
        assert!(r.uni_a_given_b.bits() < 1e-6);
        assert!(r.uni_b_given_a.bits() < 1e-6);
        assert!(r.syn.bits() < 1e-6);
    }

    #[test]
    fn and_gate_matches_analytic_values() {
        let d = and_gate();
        let cfg = SolverConfig::default();
        let r = decompose(&d, "z", "a", "b", &cfg).unwrap();
        // Uni vanishes because the (Z,A) and (Z,B) marginals coincide and
        // the minimizing coupling realizes the conditional independence.
        assert!(r.uni_a_given_b.bits() < 1e-4, "uni_a = {}", r.uni_a_given_b.bits());
        // Red = I(Z;A) = 3/2 - (3/4) log2 3.
        let red_expect = 1.5 - 0.75 * 3.0f64.log2();
        assert!((r.red.bits() - red_expect).abs() < 1e-4, "red = {}", r.red.bits());
        assert!((r.syn.bits() - 0.5).abs() < 1e-4, "syn = {}", r.syn.bits());

        let oracle = brute_force_unique_info(&d, "z", "a", "b", 0.01).unwrap();
        assert!((oracle.bits() - r.uni_a_given_b.bits()).abs() < 1e-3);
    }

    #[test]
    fn dependent_features_redundancy_is_half_bit() {
        // Red(Z:(Yhat,X1)) and Red(Z:(Yhat,X2)) in the correlated-features
        // setup both equal I(Z;Yhat) = 1/2.
        let d = analytic(GeneratorName::Canonical1);
        let cfg = SolverConfig::default();
        for x in ["x1", "x2"] {
            let red = redundant_info(&d, "z", "yhat", x, &cfg).unwrap();
            assert!((red.bits() - 0.5).abs() < 1e-5, "Red with {x} = {}", red.bits());
        }
    }

    #[test]
    fn masked_decision_has_zero_redundancy() {
        // yhat = z XOR u: I(Z;Yhat) = 0 forces Red to 0.
        let d = analytic(GeneratorName::Canonical3);
        let red = redundant_info(&d, "z", "yhat", "x1", &SolverConfig::default()).unwrap();
        assert!(red.bits() < 1e-6);
    }

    #[test]
    fn constant_side_variable_gives_zero_redundancy() {
        // B constant: Uni(Z:A|B) = I(Z;A), so Red = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let za = random_joint(&[2, 3], &mut rng);
        let vars = vec![
            Variable::numbered("z", 2),
            Variable::numbered("a", 3),
            Variable::new("b", vec!["const".into()]).unwrap(),
        ];
        let d = JointDistribution::new(vars, za.pmf().to_vec(), None).unwrap();
        let r = decompose(&d, "z", "a", "b", &SolverConfig::default()).unwrap();
        let i_za = d.mutual_info("z", "a").unwrap().bits();
        assert!((r.uni_a_given_b.bits() - i_za).abs() < 1e-6);
        assert!(r.red.bits() < 1e-6);
        assert!(r.syn.bits() < 1e-6);
    }

    #[test]
    fn solver_matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let cfg = SolverConfig::default();
        for trial in 0..25 {
            let cards = if trial % 2 == 0 {
                [2usize, 2, 2]
            } else {
                [2usize, 2, 3]
            };
            let d = random_joint(&cards, &mut rng);
            let sol = unique_info(&d, "v0", "v1", "v2", &cfg).unwrap();
            let resolution = if cards[2] == 2 { 0.01 } else { 0.04 };
            let oracle = brute_force_unique_info(&d, "v0", "v1", "v2", resolution).unwrap();
            assert!(
                (sol.value.bits() - oracle.bits()).abs() < 1e-3,
                "trial {trial}: solver {} vs oracle {}",
                sol.value.bits(),
                oracle.bits()
            );
        }
    }

    #[test]
    fn backends_and_starts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..10 {
            let d = random_joint(&[2, 3, 2], &mut rng);
            let pg = unique_info(&d, "v0", "v1", "v2", &SolverConfig::default()).unwrap();
            let am = unique_info(
                &d,
                "v0",
                "v1",
                "v2",
                &SolverConfig {
                    backend: SolverBackend::AlternatingMin,
                    ..SolverConfig::default()
                },
            )
            .unwrap();
            let perturbed = unique_info(
                &d,
                "v0",
                "v1",
                "v2",
                &SolverConfig {
                    start: StartPoint::Perturbed(1000 + trial),
                    ..SolverConfig::default()
                },
            )
            .unwrap();
            assert!((pg.value.bits() - am.value.bits()).abs() < 1e-5);
            assert!((pg.value.bits() - perturbed.value.bits()).abs() < 1e-5);
        }
    }

    #[test]
    fn redundancy_is_symmetric_in_the_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cfg = SolverConfig::default();
        for _ in 0..10 {
            let d = random_joint(&[2, 2, 3], &mut rng);
            // Red via Uni(Z:A|B) and via Uni(Z:B|A), solved independently.
            let red_ab = redundant_info(&d, "v0", "v1", "v2", &cfg).unwrap();
            let red_ba = redundant_info(&d, "v0", "v2", "v1", &cfg).unwrap();
            assert!(
                (red_ab.bits() - red_ba.bits()).abs() < 1e-6,
                "red {} vs {}",
                red_ab.bits(),
                red_ba.bits()
            );
        }
    }

    #[test]
    fn minimizer_point_is_feasible_and_no_worse_than_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let d = random_joint(&[2, 3, 3], &mut rng);
            let sol = unique_info(&d, "v0", "v1", "v2", &SolverConfig::default()).unwrap();
            assert!(sol.point.is_feasible(), "residual {}", sol.point.feasibility_residual);
            // The reported value is the objective at the reported point.
            let cmi = sol
                .point
                .q
                .conditional_mutual_info("v0", "v1", "v2")
                .unwrap()
                .bits();
            assert!((cmi - sol.value.bits()).abs() < 1e-6);
            // And it does not exceed the value at the feasible start.
            let start = d.conditional_mutual_info("v0", "v1", "v2").unwrap().bits();
            assert!(sol.value.bits() <= start + 1e-9);
        }
    }

    #[test]
    fn markov_chain_has_zero_unique_info() {
        // Z - X - Yhat: decision generated from X through a random channel.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let zx = random_joint(&[2, 3], &mut rng);
            let channel: Vec<f64> = (0..3)
                .flat_map(|_| {
                    let p: f64 = rng.gen();
                    [p, 1.0 - p]
                })
                .collect();
            let vars = vec![
                Variable::numbered("z", 2),
                Variable::numbered("x", 3),
                Variable::numbered("yhat", 2),
            ];
            let mut pmf = vec![0.0; 12];
            for z in 0..2 {
                for x in 0..3 {
                    for y in 0..2 {
                        pmf[(z * 3 + x) * 2 + y] = zx.pmf()[z * 3 + x] * channel[x * 2 + y];
                    }
                }
            }
            let d = JointDistribution::new(vars, pmf, None).unwrap();
            let sol = unique_info(&d, "z", "yhat", "x", &SolverConfig::default()).unwrap();
            assert!(sol.value.bits() <= 1e-5, "Uni = {}", sol.value.bits());
        }
    }

    #[test]
    fn oracle_rejects_large_alphabets() {
        let d = analytic(GeneratorName::PidExample);
        let err = brute_force_unique_info(&d, "z", "a", "b", 0.1).unwrap_err();
        assert!(matches!(err, AuditError::JointTooLarge { cells: 256, cap: 24 }));
    }

    #[test]
    fn unique_info_monotone_in_the_conditioning_set() {
        // Uni(Z:Yhat|XC u XC') <= Uni(Z:Yhat|XC).
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = SolverConfig::default();
        for _ in 0..8 {
            let d = random_joint(&[2, 2, 2, 2], &mut rng);
            // v1 = yhat; condition on v2, then on (v2,v3).
            let small = unique_info(&d, "v0", "v1", "v2", &cfg).unwrap();
            let grouped = d.group(&["v2", "v3"], "v23").unwrap();
            let large = unique_info(&grouped, "v0", "v1", "v23", &cfg).unwrap();
            assert!(
                large.value.bits() <= small.value.bits() + 1e-5,
                "monotonicity violated: {} > {}",
                large.value.bits(),
                small.value.bits()
            );
        }
    }

    #[test]
    fn redundant_info_monotone_in_the_source_set() {
        // Red(Z:(Yhat, XC u XC')) >= Red(Z:(Yhat, XC)).
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let cfg = SolverConfig::default();
        for _ in 0..8 {
            let d = random_joint(&[2, 2, 2, 2], &mut rng);
            let small = redundant_info(&d, "v0", "v1", "v2", &cfg).unwrap();
            let grouped = d.group(&["v2", "v3"], "v23").unwrap();
            let large = redundant_info(&grouped, "v0", "v1", "v23", &cfg).unwrap();
            assert!(
                large.bits() >= small.bits() - 1e-5,
                "monotonicity violated: {} < {}",
                large.bits(),
                small.bits()
            );
        }
    }
}
