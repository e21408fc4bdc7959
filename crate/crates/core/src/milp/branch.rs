use super::model::{LinearModel, VarKind};
use super::simplex::{Outcome, Simplex};
use super::{MipResult, MipStatus, FEASIBILITY_TOL, INTEGRALITY_TOL};

/// Slack used when comparing a bound to the incumbent on models without an
/// integral objective.
const BOUND_TOL: f64 = 1e-9;

struct Node {
    /// `(lower, upper)` per binary, in the order of `binaries`.
    bounds: Vec<(f64, f64)>,
}

/// Depth-first branch-and-bound. Branches on the most fractional binary and
/// explores the 0-child first. The LP is warm started from whatever basis
/// the previous node left behind.
pub(super) fn branch_and_bound(
    model: &LinearModel,
    cutoff: Option<f64>,
    node_limit: usize,
) -> MipResult {
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let integral = model.integral_objective();
    let offset = model.offset();
    let mut lp = Simplex::from_model(model);

    let mut best_value = f64::INFINITY;
    let mut best: Option<Vec<f64>> = None;
    let limit = cutoff.unwrap_or(f64::INFINITY);
    let mut nodes = 0usize;
    let mut root_infeasible = false;

    let root = Node {
        bounds: binaries
            .iter()
            .map(|&j| {
                let v = model.variable(super::VarId(j));
                (v.lower, v.upper)
            })
            .collect(),
    };
    let mut stack = vec![root];

    while let Some(node) = stack.pop() {
        if nodes >= node_limit {
            return finish(MipStatus::ResourceExhausted, best, best_value, model, nodes);
        }
        nodes += 1;
        for (k, &j) in binaries.iter().enumerate() {
            if lp.bounds(j) != node.bounds[k] {
                lp.set_bounds(j, node.bounds[k].0, node.bounds[k].1);
            }
        }
        match lp.solve() {
            Outcome::Optimal => {}
            Outcome::Infeasible => {
                if nodes == 1 {
                    root_infeasible = true;
                }
                continue;
            }
            Outcome::Unbounded => {
                return finish(MipStatus::Unbounded, None, f64::NAN, model, nodes);
            }
            Outcome::NumericalFailure => {
                return finish(MipStatus::NumericalFailure, None, f64::NAN, model, nodes);
            }
        }
        let obj = lp.objective() + offset;
        let bound = if integral {
            (obj - INTEGRALITY_TOL).ceil()
        } else {
            obj
        };
        let threshold = best_value.min(limit);
        let pruned = if integral {
            bound >= threshold
        } else {
            bound >= threshold - BOUND_TOL
        };
        if pruned {
            continue;
        }

        let values = lp.values();
        let branch_var = binaries
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, (values[j] - values[j].round()).abs()))
            .filter(|&(_, frac)| frac > INTEGRALITY_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));

        match branch_var {
            None => {
                let mut candidate = values.to_vec();
                for &j in &binaries {
                    candidate[j] = candidate[j].round();
                }
                if !model.is_feasible(&candidate, 10.0 * FEASIBILITY_TOL) {
                    // Rounding broke a row; let the LP settle the continuous
                    // part with the binaries pinned.
                    let mut pinned = lp.clone();
                    for &j in &binaries {
                        pinned.set_bounds(j, candidate[j], candidate[j]);
                    }
                    if pinned.solve() != Outcome::Optimal {
                        continue;
                    }
                    candidate = pinned.values().to_vec();
                    for &j in &binaries {
                        candidate[j] = candidate[j].round();
                    }
                }
                let mut value = model.evaluate(&candidate);
                if integral {
                    value = value.round();
                }
                if value < threshold {
                    best_value = value;
                    best = Some(candidate);
                }
            }
            Some((k, _)) => {
                let mut one = node.bounds.clone();
                one[k] = (1.0, 1.0);
                let mut zero = node.bounds;
                zero[k] = (0.0, 0.0);
                stack.push(Node { bounds: one });
                stack.push(Node { bounds: zero });
            }
        }
    }

    let status = if best.is_some() {
        MipStatus::Optimal
    } else if root_infeasible || cutoff.is_none() {
        MipStatus::Infeasible
    } else {
        MipStatus::Cutoff
    };
    finish(status, best, best_value, model, nodes)
}

fn finish(
    status: MipStatus,
    best: Option<Vec<f64>>,
    value: f64,
    model: &LinearModel,
    nodes: usize,
) -> MipResult {
    match best {
        Some(values) => MipResult {
            status,
            objective: value,
            values,
            nodes,
        },
        None => MipResult {
            status,
            objective: f64::NAN,
            values: vec![0.0; model.num_vars()],
            nodes,
        },
    }
}
