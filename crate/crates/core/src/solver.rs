//! The two-step exact algorithm.
//!
//! Step 1 seeds an incumbent from the no-critical-item model, builds one
//! tuple-strengthened critical-item model per candidate critical item and
//! ranks them by LP bound. Step 2 walks that ranking and closes each
//! subproblem with integer solves and cuts until its bound reaches the
//! incumbent.
//!
//! Everything inside runs on the instance in efficiency order; solutions are
//! mapped back to the caller's item order on the way out.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BkpError, Result};
use crate::instance::{sort_by_efficiency, Instance};
use crate::knapsack::{follower_set, solve_kp, ItemSet};
use crate::milp::{
    BasisStatus, DenseEngine, LinearModel, LpSolution, LpStatus, MilpBackend, MipStatus, Relation,
    Row, VarId,
};
use crate::models::{
    build_crit2, build_lw, build_ncr, compute_tuples, critical_range, CritModel, TupleGenParams,
};

/// Slack when turning an LP bound into an integer one.
const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub tuples: TupleGenParams,
    /// Subproblems integer-solved by the heuristic pass of Step 1.
    pub gamma: usize,
    pub time_limit: Option<Duration>,
    pub fix_by_reduced_costs: bool,
    /// Build and rank the critical-item models on the rayon pool.
    pub parallel: bool,
}

impl SolverParams {
    pub fn small() -> Self {
        Self {
            tuples: TupleGenParams {
                alpha: 100,
                beta: 100,
                delta: 10,
                mu: 150,
            },
            gamma: 2,
            time_limit: None,
            fix_by_reduced_costs: true,
            parallel: false,
        }
    }

    pub fn large() -> Self {
        Self {
            tuples: TupleGenParams {
                alpha: 500,
                beta: 500,
                delta: 20,
                mu: 1000,
            },
            gamma: 5,
            ..Self::small()
        }
    }
}

impl Default for SolverParams {
    fn default() -> Self {
        Self::small()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Candidate critical items `[l, r]`, 0-based in efficiency order.
    pub critical_range: Option<(usize, usize)>,
    /// Subproblems Step 2 had to open.
    pub step2_subproblems: usize,
    /// Integer solves of critical-item models, both steps.
    pub crit2_solves: usize,
    /// Cut rounds over all subproblems.
    pub cut_iterations: usize,
    /// Longest cut loop of a single subproblem.
    pub max_cut_loop: usize,
    pub fixed_variables: usize,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilevelSolution {
    /// Leader decision, in the item order of the input instance.
    pub x: Vec<bool>,
    /// Follower response, same order.
    pub y: Vec<bool>,
    pub value: i64,
    /// False when the time limit stopped the search.
    pub optimal: bool,
    pub stats: SolveStats,
}

impl BilevelSolution {
    /// Checks leader capacity, follower capacity, interdiction and the
    /// reported value against `inst`.
    pub fn is_consistent(&self, inst: &Instance) -> bool {
        let n = inst.len();
        if self.x.len() != n || self.y.len() != n {
            return false;
        }
        let pick =
            |v: &[bool], data: &[i64]| -> i64 { (0..n).filter(|&i| v[i]).map(|i| data[i]).sum() };
        pick(&self.x, &inst.leader_weights) <= inst.leader_capacity
            && pick(&self.y, &inst.weights) <= inst.follower_capacity
            && (0..n).all(|i| !(self.x[i] && self.y[i]))
            && pick(&self.y, &inst.profits) == self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubproblemStatus {
    Open,
    /// Closed by its bound without an integer solve in Step 2.
    Pruned,
    /// Closed by integer solves and cuts.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct SubproblemRecord {
    pub crit: CritModel,
    pub lp: LpSolution,
    /// LP bound, `+∞` when the relaxation is infeasible.
    pub lp_value: f64,
    pub status: SubproblemStatus,
}

impl SubproblemRecord {
    pub fn critical(&self) -> usize {
        self.crit.critical
    }

    /// Smallest integer objective the subproblem can reach.
    pub fn integer_bound(&self) -> f64 {
        (self.lp_value - BOUND_SLACK).ceil()
    }
}

/// Leader and follower vectors in efficiency order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incumbent {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    pub value: i64,
}

/// Fixes every nonbasic `x` or `k` variable whose reduced cost is at least
/// the gap `z* - lp_value`, at its LP value. Returns how many were fixed.
pub fn fix_by_reduced_costs(record: &mut SubproblemRecord, z_star: i64) -> usize {
    if record.lp.status != LpStatus::Optimal {
        return 0;
    }
    let gap = z_star as f64 - record.lp_value;
    let vars: Vec<VarId> = record.crit.binaries().collect();
    let mut fixed = 0;
    for v in vars {
        if record.lp.basis[v.0] == BasisStatus::Basic || record.crit.model.variable(v).is_fixed() {
            continue;
        }
        if record.lp.reduced_costs[v.0].abs() >= gap - BOUND_SLACK {
            let value = record.lp.values[v.0].round();
            record
                .crit
                .model
                .fix_variable(v, value)
                .expect("binary fixed at 0 or 1");
            fixed += 1;
        }
    }
    fixed
}

/// Adds the no-good cut on `x_bar` and the cut that interdicts at least one
/// item of `y_bar`.
pub fn add_cuts(model: &mut LinearModel, x: &[VarId], x_bar: &[bool], y_bar: &[bool]) {
    let ones = x_bar.iter().filter(|&&b| b).count();
    let no_good = x
        .iter()
        .zip(x_bar)
        .map(|(&v, &b)| (v, if b { -1.0 } else { 1.0 }))
        .collect();
    let chosen = x
        .iter()
        .zip(y_bar)
        .filter(|(_, &b)| b)
        .map(|(&v, _)| (v, 1.0))
        .collect();
    model
        .add_rows([
            Row::new(no_good, Relation::Ge, 1.0 - ones as f64),
            Row::new(chosen, Relation::Ge, 1.0),
        ])
        .expect("cut variables belong to the model");
}

/// State of one run on an instance in efficiency order.
pub struct Solver<'a> {
    inst: &'a Instance,
    params: &'a SolverParams,
    backend: &'a dyn MilpBackend,
    incumbent: Option<Incumbent>,
    stats: SolveStats,
    started: Instant,
    timed_out: bool,
}

impl<'a> Solver<'a> {
    pub fn new(
        inst: &'a Instance,
        params: &'a SolverParams,
        backend: &'a dyn MilpBackend,
    ) -> Result<Self> {
        check_well_posed(inst)?;
        if !inst.is_efficiency_sorted() {
            return Err(BkpError::Argument(
                "instance must be in efficiency order".into(),
            ));
        }
        Ok(Self {
            inst,
            params,
            backend,
            incumbent: None,
            stats: SolveStats::default(),
            started: Instant::now(),
            timed_out: false,
        })
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    pub fn z_star(&self) -> Option<i64> {
        self.incumbent.as_ref().map(|i| i.value)
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn timed_out(&self) -> bool {
        self.timed_out
    }

    /// True when the incumbent is strictly below `bound`, treating a missing
    /// incumbent as `+∞`.
    fn beats(&self, bound: f64) -> bool {
        self.z_star().is_some_and(|z| bound >= z as f64)
    }

    fn out_of_time(&mut self) -> bool {
        if let Some(limit) = self.params.time_limit {
            if self.started.elapsed() >= limit {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    /// Evaluates `x` with an optimal follower answer and keeps it on strict
    /// improvement. Returns the follower response.
    pub fn offer(&mut self, x: Vec<bool>) -> Vec<bool> {
        let kp = solve_kp(&follower_set(self.inst, &x), self.inst.follower_capacity);
        let y = kp.indicator(self.inst.len());
        if self.z_star().is_none_or(|z| kp.value < z) {
            self.incumbent = Some(Incumbent {
                x,
                y: y.clone(),
                value: kp.value,
            });
        }
        y
    }

    /// Step 1. Returns the open subproblems in ascending bound order, or an
    /// empty list when the incumbent is already certified.
    pub fn step1(&mut self) -> Result<Vec<SubproblemRecord>> {
        let inst = self.inst;
        if self.out_of_time() {
            return Ok(Vec::new());
        }
        let ncr = build_ncr(inst);
        let res = self.backend.solve_mip(&ncr, None);
        match res.status {
            MipStatus::Optimal => {
                let x: Vec<bool> = (0..inst.len()).map(|i| res.values[i] > 0.5).collect();
                let y: Vec<bool> = x.iter().map(|&b| !b).collect();
                let value = (0..inst.len())
                    .filter(|&i| y[i])
                    .map(|i| inst.profits[i])
                    .sum();
                self.incumbent = Some(Incumbent { x, y, value });
            }
            MipStatus::Infeasible => {}
            s => {
                return Err(BkpError::Engine(format!(
                    "no-critical-item model ended with {s:?}"
                )))
            }
        }
        if self.z_star() == Some(0) {
            return Ok(Vec::new());
        }

        let z_lw = max_interdicted_weight(inst);
        let Some((l, r)) = critical_range(inst, z_lw) else {
            return Ok(Vec::new());
        };
        self.stats.critical_range = Some((l, r));
        if self.out_of_time() {
            return Ok(Vec::new());
        }

        let build = |c: usize| {
            let tuples = compute_tuples(inst, c, &self.params.tuples);
            let crit = build_crit2(inst, c, tuples);
            let lp = self.backend.solve_lp(&crit.model);
            let (lp_value, status) = match lp.status {
                LpStatus::Optimal => (lp.objective, SubproblemStatus::Open),
                LpStatus::Infeasible => (f64::INFINITY, SubproblemStatus::Pruned),
                // Without a trustworthy bound the subproblem must be searched.
                _ => (f64::NEG_INFINITY, SubproblemStatus::Open),
            };
            SubproblemRecord {
                crit,
                lp,
                lp_value,
                status,
            }
        };
        let mut records: Vec<SubproblemRecord> = if self.params.parallel {
            (l..=r).into_par_iter().map(build).collect()
        } else {
            (l..=r).map(build).collect()
        };
        records.sort_by(|a, b| a.lp_value.total_cmp(&b.lp_value));
        records.retain(|r| r.status == SubproblemStatus::Open);

        if records
            .first()
            .is_none_or(|r| self.beats(r.integer_bound()))
        {
            return Ok(Vec::new());
        }

        for record in records.iter_mut().take(self.params.gamma) {
            if self.beats(record.integer_bound()) {
                break;
            }
            if self.out_of_time() {
                break;
            }
            let cutoff = self.z_star().map(|z| z as f64);
            self.integer_round(record, cutoff)?;
        }
        Ok(records)
    }

    /// One integer solve of `record`, then evaluation and cuts. Returns
    /// false once the subproblem holds nothing below the incumbent.
    fn integer_round(
        &mut self,
        record: &mut SubproblemRecord,
        cutoff: Option<f64>,
    ) -> Result<bool> {
        let res = self.backend.solve_mip(&record.crit.model, cutoff);
        self.stats.crit2_solves += 1;
        match res.status {
            MipStatus::Optimal => {}
            MipStatus::Infeasible | MipStatus::Cutoff => {
                record.status = SubproblemStatus::Exhausted;
                return Ok(false);
            }
            s => {
                return Err(BkpError::Engine(format!(
                    "critical-item model ended with {s:?}"
                )))
            }
        }
        if self.beats(res.objective.round()) {
            record.status = SubproblemStatus::Exhausted;
            return Ok(false);
        }
        let x_bar = res.binary(record.crit.x.iter().copied());
        let y_bar = self.offer(x_bar.clone());
        add_cuts(&mut record.crit.model, &record.crit.x, &x_bar, &y_bar);
        Ok(true)
    }

    /// Runs the cut loop on one subproblem until it cannot beat the
    /// incumbent.
    pub fn solve_subproblem(&mut self, record: &mut SubproblemRecord) -> Result<()> {
        if self.beats(record.integer_bound()) {
            record.status = SubproblemStatus::Pruned;
            return Ok(());
        }
        if self.params.fix_by_reduced_costs {
            if let Some(z) = self.z_star() {
                self.stats.fixed_variables += fix_by_reduced_costs(record, z);
            }
        }
        let mut rounds = 0;
        loop {
            if self.out_of_time() {
                break;
            }
            rounds += 1;
            self.stats.cut_iterations += 1;
            let cutoff = self.z_star().map(|z| z as f64);
            if !self.integer_round(record, cutoff)? {
                break;
            }
        }
        self.stats.max_cut_loop = self.stats.max_cut_loop.max(rounds);
        Ok(())
    }

    /// Step 2 over the ranked subproblems.
    pub fn step2(&mut self, records: &mut [SubproblemRecord]) -> Result<()> {
        for i in 0..records.len() {
            if self.beats(records[i].integer_bound()) {
                for rest in &mut records[i..] {
                    rest.status = SubproblemStatus::Pruned;
                }
                break;
            }
            if records[i].status != SubproblemStatus::Open {
                continue;
            }
            if self.out_of_time() {
                break;
            }
            self.stats.step2_subproblems += 1;
            self.solve_subproblem(&mut records[i])?;
            if self.timed_out {
                break;
            }
        }
        Ok(())
    }
}

/// Solves `inst` with the bundled engine.
pub fn solve(inst: &Instance, params: &SolverParams) -> Result<BilevelSolution> {
    solve_with(inst, params, &DenseEngine::default())
}

/// Solves `inst` with any engine; the instance may be in any item order.
pub fn solve_with(
    inst: &Instance,
    params: &SolverParams,
    backend: &dyn MilpBackend,
) -> Result<BilevelSolution> {
    check_well_posed(inst)?;
    let started = Instant::now();
    let (sorted, perm) = sort_by_efficiency(inst);
    let n = inst.len();

    let (incumbent, mut stats, timed_out) = if sorted.follower_capacity == 0 || n == 0 {
        // The follower can take nothing whatever the leader does.
        let inc = Incumbent {
            x: vec![false; n],
            y: vec![false; n],
            value: 0,
        };
        (inc, SolveStats::default(), false)
    } else {
        let mut solver = Solver::new(&sorted, params, backend)?;
        solver.started = started;
        let mut records = solver.step1()?;
        solver.step2(&mut records)?;
        let timed_out = solver.timed_out;
        if solver.incumbent.is_none() {
            if !timed_out {
                return Err(BkpError::Engine(
                    "search ended without a leader strategy".into(),
                ));
            }
            solver.offer(vec![false; n]);
        }
        (
            solver.incumbent.expect("incumbent set above"),
            solver.stats,
            timed_out,
        )
    };
    stats.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(BilevelSolution {
        x: perm.to_original(&incumbent.x),
        y: perm.to_original(&incumbent.y),
        value: incumbent.value,
        optimal: !timed_out,
        stats,
    })
}

/// Largest follower weight the leader can interdict, by knapsack DP with the
/// follower weights as profits and the leader weights as weights.
pub fn max_interdicted_weight(inst: &Instance) -> i64 {
    let swapped = Instance {
        profits: inst.weights.clone(),
        weights: inst.leader_weights.clone(),
        leader_weights: inst.leader_weights.clone(),
        leader_capacity: inst.leader_capacity,
        follower_capacity: inst.leader_capacity,
    };
    solve_kp(&ItemSet::all(&swapped), inst.leader_capacity).value
}

/// Solves the leader-weight model with the MILP engine instead of DP.
pub fn max_interdicted_weight_milp(inst: &Instance, backend: &dyn MilpBackend) -> Option<i64> {
    let res = backend.solve_mip(&build_lw(inst), None);
    res.is_optimal().then(|| -res.objective.round() as i64)
}

fn check_well_posed(inst: &Instance) -> Result<()> {
    if inst.is_well_posed() {
        Ok(())
    } else {
        Err(BkpError::IllPosed(
            "capacities must be non-negative and item data positive".into(),
        ))
    }
}
