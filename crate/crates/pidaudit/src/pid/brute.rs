//! Exhaustive verification oracle for the unique-information program.
//!
//! Parametrizes the polytope by its free coordinates (for each z-slice,
//! the (|A|-1)x(|B|-1) upper-left block of the transportation matrix),
//! scans a regular grid over the feasible box, and refines the best grid
//! point with a shrinking compass search. Deliberately independent of the
//! iterative solver: no gradients, no projections.

use crate::dist::{InfoValue, JointDistribution};
use crate::error::{AuditError, Result};
use crate::pid::solver::UniqueProblem;

/// The oracle is exponential in the polytope's free dimensions.
pub const BRUTE_FORCE_CELL_CAP: usize = 24;
const MAX_GRID_POINTS: usize = 20_000_000;

struct FreeParam {
    z: usize,
    a: usize,
    b: usize,
    upper: f64,
}

struct Parametrization<'p> {
    problem: &'p UniqueProblem,
    params: Vec<FreeParam>,
}

impl<'p> Parametrization<'p> {
    fn new(problem: &'p UniqueProblem) -> Self {
        let mut params = Vec::new();
        for z in 0..problem.nz {
            for a in 0..problem.na.saturating_sub(1) {
                for b in 0..problem.nb.saturating_sub(1) {
                    let upper = problem.p_za[z * problem.na + a]
                        .min(problem.p_zb[z * problem.nb + b]);
                    params.push(FreeParam { z, a, b, upper });
                }
            }
        }
        Parametrization { problem, params }
    }

    /// Builds the full table from free coordinates; `None` when any
    /// induced cell would be negative.
    fn build(&self, values: &[f64], q: &mut [f64]) -> bool {
        let (nz, na, nb) = (self.problem.nz, self.problem.na, self.problem.nb);
        q.iter_mut().for_each(|v| *v = 0.0);
        for (param, &v) in self.params.iter().zip(values) {
            q[(param.z * na + param.a) * nb + param.b] = v;
        }
        for z in 0..nz {
            // Last column from the row marginals.
            for a in 0..na - 1 {
                let mut rest = 0.0;
                for b in 0..nb - 1 {
                    rest += q[(z * na + a) * nb + b];
                }
                let v = self.problem.p_za[z * na + a] - rest;
                if v < -1e-12 {
                    return false;
                }
                q[(z * na + a) * nb + (nb - 1)] = v.max(0.0);
            }
            // Last row from the column marginals.
            for b in 0..nb {
                let mut rest = 0.0;
                for a in 0..na - 1 {
                    rest += q[(z * na + a) * nb + b];
                }
                let v = self.problem.p_zb[z * nb + b] - rest;
                if v < -1e-12 {
                    return false;
                }
                q[(z * na + (na - 1)) * nb + b] = v.max(0.0);
            }
        }
        true
    }

    fn extract(&self, q: &[f64]) -> Vec<f64> {
        let (na, nb) = (self.problem.na, self.problem.nb);
        self.params
            .iter()
            .map(|p| q[(p.z * na + p.a) * nb + p.b])
            .collect()
    }
}

/// Minimizes I_Q(Z;A|B) by exhaustive grid search over the polytope's
/// free coordinates, refined locally; the result is within
/// O(grid_resolution) of the optimum even without the refinement.
pub fn brute_force_unique_info(
    dist: &JointDistribution,
    z: &str,
    a: &str,
    b: &str,
    grid_resolution: f64,
) -> Result<InfoValue> {
    if !(grid_resolution > 0.0) {
        return Err(AuditError::InvalidArgument(
            "grid resolution must be positive".into(),
        ));
    }
    let cells = dist.variable(z)?.cardinality()
        * dist.variable(a)?.cardinality()
        * dist.variable(b)?.cardinality();
    if cells > BRUTE_FORCE_CELL_CAP {
        return Err(AuditError::JointTooLarge {
            cells,
            cap: BRUTE_FORCE_CELL_CAP,
        });
    }

    let problem = UniqueProblem::from_dist(dist, z, a, b)?;
    let par = Parametrization::new(&problem);
    let mut q = vec![0.0; problem.cells()];

    // Seed with the product point, which is always feasible.
    let q0 = problem.product_start();
    let mut best_values = par.extract(&q0);
    par.build(&best_values, &mut q);
    let mut best = problem.objective_bits(&q);
    let mut starts: Vec<(f64, Vec<f64>)> = vec![(best, best_values.clone())];

    if !par.params.is_empty() {
        let steps: Vec<usize> = par
            .params
            .iter()
            .map(|p| (p.upper / grid_resolution).ceil() as usize + 1)
            .collect();
        let total: usize = steps.iter().try_fold(1usize, |acc, &s| {
            acc.checked_mul(s).filter(|&t| t <= MAX_GRID_POINTS)
        })
        .ok_or_else(|| {
            AuditError::InvalidArgument(format!(
                "grid of more than {MAX_GRID_POINTS} points; use a coarser resolution"
            ))
        })?;

        let mut counter = vec![0usize; par.params.len()];
        let mut values = vec![0.0; par.params.len()];
        for _ in 0..total {
            for (i, &c) in counter.iter().enumerate() {
                values[i] = (c as f64 * grid_resolution).min(par.params[i].upper);
            }
            if par.build(&values, &mut q) {
                let f = problem.objective_bits(&q);
                starts.push((f, values.clone()));
                starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                starts.truncate(4);
                if f < best {
                    best = f;
                    best_values.copy_from_slice(&values);
                }
            }
            for i in 0..counter.len() {
                counter[i] += 1;
                if counter[i] < steps[i] {
                    break;
                }
                counter[i] = 0;
            }
        }

        // Local refinement by nested zoom grids: re-grid a shrinking box
        // around the incumbent. Fixed-direction descent is not enough
        // here — leaving a face of the polytope can require entering
        // several zero cells at once in specific proportions, and the
        // zoom grid approximates arbitrary proportions ever more finely
        // as the box shrinks.
        let d = par.params.len();
        // Widest odd stencil whose box still fits the per-round budget.
        let offsets_per_dim = [9usize, 7, 5, 3]
            .into_iter()
            .find(|m| (*m as f64).powi(d as i32) <= 250_000.0);
        if let Some(offsets_per_dim) = offsets_per_dim {
            let half_width = (offsets_per_dim / 2) as f64;
            let box_points = offsets_per_dim.pow(d as u32);
            let mut evals = 0usize;
            for (start_value, start) in starts {
                let mut center = start;
                let mut current = start_value;
                let mut radius = grid_resolution;
                while radius > 1e-10 && evals < 4_000_000 {
                    let step = radius / half_width;
                    let mut improvement: Option<(f64, Vec<f64>)> = None;
                    let mut counter = vec![0usize; d];
                    for _ in 0..box_points {
                        let trial: Vec<f64> = (0..d)
                            .map(|k| {
                                let off = counter[k] as f64 - half_width;
                                (center[k] + off * step).clamp(0.0, par.params[k].upper)
                            })
                            .collect();
                        if trial != center {
                            evals += 1;
                            if par.build(&trial, &mut q) {
                                let f = problem.objective_bits(&q);
                                let target =
                                    improvement.as_ref().map_or(current, |(fb, _)| *fb);
                                if f < target - 1e-15 {
                                    improvement = Some((f, trial));
                                }
                            }
                        }
                        for k in 0..d {
                            counter[k] += 1;
                            if counter[k] < offsets_per_dim {
                                break;
                            }
                            counter[k] = 0;
                        }
                    }
                    match improvement {
                        Some((f, trial)) => {
                            // An improvement on the box edge means the
                            // optimum may lie further out: keep the radius
                            // and keep walking. Interior improvements let
                            // the box shrink.
                            let at_edge = (0..d)
                                .any(|k| (trial[k] - center[k]).abs() >= (half_width - 0.5) * step);
                            center = trial;
                            current = f;
                            if !at_edge {
                                radius *= 0.5;
                            }
                        }
                        None => radius *= 0.5,
                    }
                }
                if current < best {
                    best = current;
                }
            }
        }
    }

    Ok(InfoValue::from_raw(best))
}
