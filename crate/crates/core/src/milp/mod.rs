//! A small 0-1 MILP layer: model building, LP relaxations with reduced
//! costs, and depth-first branch-and-bound.
//!
//! Solvers are reached through [`MilpBackend`] so that another engine can be
//! plugged in; [`DenseEngine`] is the bundled implementation.

mod branch;
mod model;
mod simplex;

pub use model::{LinearModel, Relation, Row, VarId, VarKind, Variable};

use simplex::{Outcome, Simplex};

/// Feasibility tolerance on rows and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Distance from 0/1 under which a binary counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Minimization convention: nonbasic at lower `≥ 0`, at upper `≤ 0`,
    /// basic `= 0`.
    pub reduced_costs: Vec<f64>,
    pub basis: Vec<BasisStatus>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_solution(status: LpStatus, n: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: vec![0.0; n],
            reduced_costs: vec![0.0; n],
            basis: vec![BasisStatus::Basic; n],
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    /// No solution strictly better than the cutoff exists.
    Cutoff,
    Unbounded,
    /// Node limit hit; `values` holds the best incumbent if any.
    ResourceExhausted,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    pub objective: f64,
    /// Binaries are exactly 0.0 or 1.0.
    pub values: Vec<f64>,
    pub nodes: usize,
}

impl MipResult {
    pub fn is_optimal(&self) -> bool {
        self.status == MipStatus::Optimal
    }

    /// Binary values of the given variables.
    pub fn binary(&self, vars: impl IntoIterator<Item = VarId>) -> Vec<bool> {
        vars.into_iter().map(|v| self.values[v.0] > 0.5).collect()
    }
}

/// Contract every MILP engine fulfils.
///
/// * LP reduced costs follow the minimization sign convention of
///   [`LpSolution::reduced_costs`].
/// * `solve_mip` returns an exact optimum. With a cutoff, only solutions
///   strictly below it are sought and [`MipStatus::Cutoff`] reports that none
///   exists.
pub trait MilpBackend: Sync {
    fn solve_lp(&self, model: &LinearModel) -> LpSolution;
    fn solve_mip(&self, model: &LinearModel, cutoff: Option<f64>) -> MipResult;
}

/// Dense bounded dual simplex plus depth-first branch-and-bound.
#[derive(Debug, Clone)]
pub struct DenseEngine {
    pub node_limit: usize,
}

impl Default for DenseEngine {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
        }
    }
}

impl MilpBackend for DenseEngine {
    fn solve_lp(&self, model: &LinearModel) -> LpSolution {
        let n = model.num_vars();
        let mut lp = Simplex::from_model(model);
        let status = match lp.solve() {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => return LpSolution::without_solution(LpStatus::Infeasible, n),
            Outcome::Unbounded => return LpSolution::without_solution(LpStatus::Unbounded, n),
            Outcome::NumericalFailure => {
                return LpSolution::without_solution(LpStatus::NumericalFailure, n)
            }
        };
        let values = lp.values().to_vec();
        let reduced_costs = (0..n).map(|j| lp.reduced_cost(j)).collect();
        let basis = (0..n)
            .map(|j| {
                if lp.is_basic(j) {
                    BasisStatus::Basic
                } else {
                    let (lo, hi) = lp.bounds(j);
                    if lo == hi {
                        if lp.reduced_cost(j) < 0.0 {
                            BasisStatus::AtUpper
                        } else {
                            BasisStatus::AtLower
                        }
                    } else if values[j] == hi {
                        BasisStatus::AtUpper
                    } else {
                        BasisStatus::AtLower
                    }
                }
            })
            .collect();
        LpSolution {
            status,
            objective: lp.objective() + model.offset(),
            values,
            reduced_costs,
            basis,
            iterations: lp.iterations,
        }
    }

    fn solve_mip(&self, model: &LinearModel, cutoff: Option<f64>) -> MipResult {
        branch::branch_and_bound(model, cutoff, self.node_limit)
    }
}

#[cfg(test)]
mod tests;
