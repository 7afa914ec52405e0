//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line (visible with `cargo test --test acceptance --
//! --nocapture`). Tolerances are pinned in the assertions.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pidaudit::attribution::{
    interventional_contributions, potential_contributions, diagnose_unexplained, AuditConfig,
};
use pidaudit::data::synth::{generate, GeneratedData, GeneratorName, SampleMode, SyntheticSpec};
use pidaudit::data::{estimate_joint, AuditSchema};
use pidaudit::dist::{JointDistribution, Variable};
use pidaudit::oracle::ModelOracle;
use pidaudit::pid::{brute_force_unique_info, decompose, unique_info, SolverConfig};
use pidaudit::shapley::shapley_values;

fn criterion<F>(number: u32, description: &str, body: F)
where
    F: FnOnce() + std::panic::UnwindSafe,
{
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("criterion {number}: PASS - {description}"),
        Err(cause) => {
            println!("criterion {number}: FAIL - {description}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn analytic(name: GeneratorName) -> (JointDistribution, AuditSchema) {
    let g = generate(&SyntheticSpec {
        name,
        mode: SampleMode::Analytic,
        seed: 0,
    })
    .unwrap();
    let dist = match g.data {
        GeneratedData::Analytic(d) => d,
        _ => unreachable!(),
    };
    (dist, g.schema.unwrap())
}

fn sampled(name: GeneratorName, samples: u64, seed: u64) -> (JointDistribution, AuditSchema) {
    let g = generate(&SyntheticSpec {
        name,
        mode: SampleMode::Samples(samples),
        seed,
    })
    .unwrap();
    let schema = g.schema.unwrap();
    let table = match g.data {
        GeneratedData::Rows(t) => t,
        _ => unreachable!(),
    };
    (estimate_joint(&table, &schema, 0.0).unwrap(), schema)
}

fn builtin_for(name: GeneratorName, schema: &AuditSchema) -> ModelOracle {
    let truth = generate(&SyntheticSpec {
        name,
        mode: SampleMode::Analytic,
        seed: 0,
    })
    .unwrap()
    .truth;
    ModelOracle::builtin(truth.builtin_oracle.unwrap(), schema.features.clone()).unwrap()
}

fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: {actual} vs expected {expected} (tol {tol})"
    );
}

/// Checks one canonical example in both modes against its reference
/// values at 1e-4 and enforces the per-example runtime budget.
fn check_canonical(number: u32, name: GeneratorName, disparity: f64, potent: [f64; 2], contri: [f64; 2]) {
    let started = Instant::now();
    let (dist, schema) = analytic(name);
    let cfg = AuditConfig::default();

    assert_close(
        dist.mutual_info(&schema.protected, &schema.decision).unwrap().bits(),
        disparity,
        1e-4,
        "I(Z;Yhat)",
    );
    let distributional = potential_contributions(&dist, &schema, &cfg).unwrap();
    for (i, expect) in potent.iter().enumerate() {
        assert_close(
            distributional.per_feature[i],
            *expect,
            1e-4,
            &format!("PotentContri({})", schema.features[i]),
        );
    }
    let oracle = builtin_for(name, &schema);
    let interventional = interventional_contributions(&dist, &oracle, &schema, &cfg).unwrap();
    for (i, expect) in contri.iter().enumerate() {
        assert_close(
            interventional.per_feature[i],
            *expect,
            1e-4,
            &format!("Contri({})", schema.features[i]),
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(1),
        "criterion {number} took {elapsed:?}, budget 1 s"
    );
}

#[test]
fn criterion_1_highly_dependent_features() {
    criterion(
        1,
        "correlated features: I=0.5, PotentContri=(0.25,0.25), Contri=(0.5,0) within 1e-4, <1s",
        || check_canonical(1, GeneratorName::Canonical1, 0.5, [0.25, 0.25], [0.5, 0.0]),
    );
}

#[test]
fn criterion_2_disparity_amplification() {
    criterion(
        2,
        "amplification: Contri=(0.75,0.25) and PotentContri=(0.75,0.25) within 1e-4, <1s",
        || check_canonical(2, GeneratorName::Canonical2, 1.0, [0.75, 0.25], [0.75, 0.25]),
    );
}

#[test]
fn criterion_3_disparity_masking() {
    criterion(
        3,
        "masking: Contri=(0.5,-0.5), PotentContri=(0,0), I=0 within 1e-4, <1s",
        || check_canonical(3, GeneratorName::Canonical3, 0.0, [0.0, 0.0], [0.5, -0.5]),
    );
}

#[test]
fn criterion_4_three_bit_decomposition() {
    criterion(
        4,
        "three-bit example decomposes to (uni_a, uni_b, red, syn) = (1,0,1,1) within 1e-3, <10s",
        || {
            let started = Instant::now();
            let (dist, _) = {
                let g = generate(&SyntheticSpec {
                    name: GeneratorName::PidExample,
                    mode: SampleMode::Analytic,
                    seed: 0,
                })
                .unwrap();
                match g.data {
                    GeneratedData::Analytic(d) => (d, ()),
                    _ => unreachable!(),
                }
            };
            let r = decompose(&dist, "z", "a", "b", &SolverConfig::default()).unwrap();
            assert_close(r.uni_a_given_b.bits(), 1.0, 1e-3, "uni_a");
            assert_close(r.uni_b_given_a.bits(), 0.0, 1e-3, "uni_b");
            assert_close(r.red.bits(), 1.0, 1e-3, "red");
            assert_close(r.syn.bits(), 1.0, 1e-3, "syn");
            assert_close(r.total.bits(), 3.0, 1e-9, "total");
            let elapsed = started.elapsed();
            assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10 s");
        },
    );
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

#[test]
fn criterion_5_solver_matches_brute_force() {
    criterion(
        5,
        "unique_info matches the brute-force oracle within 1e-3 on 200 random triples, <5min",
        || {
            let started = Instant::now();
            let cfg = SolverConfig::default();
            let mut worst: f64 = 0.0;
            for i in 0..200u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(5_000 + i);
                let (cards, resolution) = if i % 2 == 0 {
                    ([2usize, 2, 2], 0.02)
                } else {
                    ([2usize, 2, 3], 0.04)
                };
                let d = random_joint(&cards, &mut rng);
                let solved = unique_info(&d, "v0", "v1", "v2", &cfg).unwrap();
                let oracle = brute_force_unique_info(&d, "v0", "v1", "v2", resolution).unwrap();
                let gap = (solved.value.bits() - oracle.bits()).abs();
                worst = worst.max(gap);
                assert!(
                    gap <= 1e-3,
                    "instance {i}: solver {} vs oracle {} (gap {gap})",
                    solved.value.bits(),
                    oracle.bits()
                );
            }
            let elapsed = started.elapsed();
            println!("  worst solver-oracle gap: {worst:.2e}; elapsed {elapsed:?}");
            assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}, budget 5 min");
        },
    );
}

/// A random audit instance: joint over (z, x_1..x_n) pushed through a
/// decision channel. `measurable` makes yhat a function of x alone;
/// `markov` keeps the channel x-only but stochastic; otherwise the
/// channel may read z too.
fn random_audit_instance(
    n: usize,
    rng: &mut ChaCha8Rng,
    markov: bool,
    measurable: bool,
) -> (JointDistribution, AuditSchema) {
    let x_cells = 1usize << n;
    let zx_cards: Vec<usize> = std::iter::once(2).chain(std::iter::repeat(2).take(n)).collect();
    let zx = random_joint(&zx_cards, rng);
    // Channel over two decision symbols.
    let rows = if markov { x_cells } else { 2 * x_cells };
    let channel: Vec<f64> = (0..rows)
        .map(|_| {
            if measurable {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    0.0
                }
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();

    let mut vars: Vec<Variable> = vec![Variable::numbered("z", 2)];
    for i in 0..n {
        vars.push(Variable::numbered(format!("x{}", i + 1), 2));
    }
    vars.push(Variable::numbered("yhat", 2));
    let mut pmf = vec![0.0; 2 * x_cells * 2];
    for z in 0..2usize {
        for x in 0..x_cells {
            let p_zx = zx.pmf()[z * x_cells + x];
            let p1 = if markov { channel[x] } else { channel[z * x_cells + x] };
            pmf[(z * x_cells + x) * 2 + 1] += p_zx * p1;
            pmf[(z * x_cells + x) * 2] += p_zx * (1.0 - p1);
        }
    }
    let dist = JointDistribution::new(vars, pmf, None).unwrap();
    let schema = AuditSchema::new(
        "z",
        "yhat",
        (1..=n).map(|i| format!("x{i}")).collect(),
    )
    .unwrap();
    (dist, schema)
}

#[test]
fn criterion_6_theorem_suites() {
    criterion(
        6,
        "500 random instances: bounds, efficiency, monotonicity, and Markov-zero within 1e-5",
        || {
            let cfg = AuditConfig::default();
            for i in 0..500u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(60_000 + i);
                let n = 1 + (i as usize % 3);
                let markov = i % 2 == 0;
                let measurable = i % 4 == 0;
                let (dist, schema) = random_audit_instance(n, &mut rng, markov, measurable);
                let report = potential_contributions(&dist, &schema, &cfg).unwrap();
                let total = report.total_disparity.bits();
                let table = &report.subset_table;
                let full = (1u32 << n) - 1;

                // Theorem 2 bounds on the raw Shapley values.
                let raw = shapley_values(&table.entries, n).unwrap();
                for (k, phi) in raw.iter().enumerate() {
                    assert!(
                        *phi >= -1e-5 && *phi <= total + 1e-5,
                        "instance {i}: phi[{k}] = {phi} outside [0, {total}]"
                    );
                }
                // Efficiency: the contributions sum to Red(Z:(Yhat,X)).
                let red_full = table.entries[&full];
                assert_close(
                    report.per_feature.iter().sum::<f64>(),
                    red_full,
                    1e-5,
                    &format!("instance {i}: efficiency"),
                );
                // Monotonicity along every inclusion pair: redundancy
                // non-decreasing, unique information non-increasing.
                for (&s, &red_s) in &table.entries {
                    for (&t, &red_t) in &table.entries {
                        if s & t == s && s != t {
                            assert!(
                                red_s <= red_t + 1e-5,
                                "instance {i}: Red not monotone {s:#b}->{t:#b}: {red_s} > {red_t}"
                            );
                            let (uni_s, uni_t) = (total - red_s, total - red_t);
                            assert!(
                                uni_t <= uni_s + 1e-5,
                                "instance {i}: Uni not monotone {s:#b}->{t:#b}"
                            );
                        }
                    }
                }
                // Markov chain Z - X - Yhat forces zero unexplained
                // disparity.
                if markov {
                    let uni = diagnose_unexplained(&dist, &schema, &cfg).unwrap();
                    assert!(
                        uni.bits() <= 1e-5,
                        "instance {i}: Uni(Z:Yhat|X) = {} on a Markov instance",
                        uni.bits()
                    );
                }
            }
        },
    );
}

fn case_study_dist() -> (JointDistribution, AuditSchema) {
    sampled(GeneratorName::CaseStudy, 10_000, 11)
}

#[test]
fn criterion_7_case_study_structure() {
    criterion(
        7,
        "case study (10K samples): monotone subsets, joint pair dominance, ranking, efficiency",
        || {
            let started = Instant::now();
            let (dist, schema) = case_study_dist();
            let report = potential_contributions(&dist, &schema, &AuditConfig::default()).unwrap();
            let table = &report.subset_table;
            let idx = |name: &str| {
                schema
                    .features
                    .iter()
                    .position(|f| f == name)
                    .unwrap_or_else(|| panic!("feature {name}"))
            };
            let mask = |names: &[&str]| -> u32 {
                names.iter().map(|n| 1u32 << idx(n)).sum()
            };

            // (a) Redundant information is non-decreasing along inclusion.
            for (&s, &red_s) in &table.entries {
                for (&t, &red_t) in &table.entries {
                    if s & t == s && s != t {
                        assert!(red_s <= red_t + 1e-5, "subset values not monotone");
                    }
                }
            }
            // (b) GRE and Reco jointly exceed either alone by > 0.01 bits.
            let pair = table.entries[&mask(&["gre", "reco"])];
            let gre = table.entries[&mask(&["gre"])];
            let reco = table.entries[&mask(&["reco"])];
            assert!(
                pair > gre.max(reco) + 0.01,
                "joint pair {pair} does not dominate ({gre}, {reco})"
            );
            // (c) GRE is the top-ranked feature and Reco gets > 0.01 bits.
            let contributions = &report.per_feature;
            let gre_c = contributions[idx("gre")];
            assert!(
                contributions.iter().all(|&c| c <= gre_c),
                "gre is not ranked first: {contributions:?}"
            );
            assert!(
                contributions[idx("reco")] > 0.01,
                "reco contribution {} too small",
                contributions[idx("reco")]
            );
            // (d) Contributions add up to the full disparity: the
            // protected attribute is feature-measurable here, so the
            // unexplained remainder vanishes.
            assert_close(
                report.explained,
                report.total_disparity.bits(),
                1e-3,
                "efficiency vs disparity",
            );
            let uni = diagnose_unexplained(&dist, &schema, &AuditConfig::default()).unwrap();
            assert!(uni.bits() <= 1e-3, "unexplained disparity {}", uni.bits());
            let elapsed = started.elapsed();
            assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}, budget 2 min");
        },
    );
}

#[test]
fn criterion_8_early_truncation() {
    criterion(
        8,
        "case-study truncation at eps=0.01: fewer solves, per-feature drift within 0.03 bits",
        || {
            let started = Instant::now();
            let (dist, schema) = case_study_dist();
            let full = potential_contributions(&dist, &schema, &AuditConfig::default()).unwrap();
            let truncated = potential_contributions(
                &dist,
                &schema,
                &AuditConfig {
                    epsilon: 0.01,
                    ..AuditConfig::default()
                },
            )
            .unwrap();
            assert!(
                truncated.solves_performed < full.solves_performed,
                "truncation did not save solves: {} vs {}",
                truncated.solves_performed,
                full.solves_performed
            );
            assert!(!truncated.subset_table.truncated.is_empty());
            for (i, (a, b)) in full
                .per_feature
                .iter()
                .zip(&truncated.per_feature)
                .enumerate()
            {
                assert!(
                    (a - b).abs() <= 0.03,
                    "feature {i} drifted {} vs {}",
                    a,
                    b
                );
            }
            let elapsed = started.elapsed();
            assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}, budget 2 min");
        },
    );
}

const PROTOCOL_MODEL: &str = r#"
import json, sys
mode = sys.argv[1]
names = sys.argv[2:]
for line in sys.stdin:
    if not line.strip():
        continue
    req = json.loads(line)
    f = req["features"]
    if mode == "first":
        d = f[names[0]]
    elif mode == "diff":
        d = float(f[names[0]]) - float(f[names[1]])
    elif mode == "xor":
        d = (float(f[names[0]]) + float(f[names[1]])) % 2.0
    else:
        raise SystemExit(f"unknown mode {mode}")
    print(json.dumps({"id": req["id"], "decision": d}), flush=True)
"#;

#[test]
fn criterion_9_external_oracle_parity() {
    criterion(
        9,
        "external subprocess model reproduces builtin Contri bit-for-bit on all canonicals",
        || {
            let dir = tempfile::tempdir().unwrap();
            let script = dir.path().join("model.py");
            std::fs::write(&script, PROTOCOL_MODEL).unwrap();
            let cases = [
                (GeneratorName::Canonical1, "first"),
                (GeneratorName::Canonical2, "diff"),
                (GeneratorName::Canonical3, "xor"),
            ];
            for (name, mode) in cases {
                let (dist, schema) = analytic(name);
                let cfg = AuditConfig::default();
                let builtin = builtin_for(name, &schema);
                let via_builtin =
                    interventional_contributions(&dist, &builtin, &schema, &cfg).unwrap();

                let mut command = vec![
                    "python3".to_string(),
                    script.to_string_lossy().to_string(),
                    mode.to_string(),
                ];
                command.extend(schema.features.clone());
                let external = ModelOracle::external(
                    command,
                    schema.features.clone(),
                    Duration::from_secs(30),
                )
                .unwrap();
                let via_external =
                    interventional_contributions(&dist, &external, &schema, &cfg).unwrap();

                for (i, (a, b)) in via_builtin
                    .per_feature
                    .iter()
                    .zip(&via_external.per_feature)
                    .enumerate()
                {
                    assert_eq!(
                        a.to_bits(),
                        b.to_bits(),
                        "{mode}: feature {i} differs: builtin {a} vs external {b}"
                    );
                }
                for (mask, v) in &via_builtin.subset_table.entries {
                    assert_eq!(
                        v.to_bits(),
                        via_external.subset_table.entries[mask].to_bits(),
                        "{mode}: subset {mask:#b} differs"
                    );
                }
            }
        },
    );
}
