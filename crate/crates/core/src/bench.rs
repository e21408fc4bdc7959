//! Batch runs and their CSV tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BkpError, Result};
use crate::instance::Instance;
use crate::solver::{solve, SolverParams};

/// One instance of a batch. `ins` and `seed` are 0 when unknown.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub n: usize,
    pub ins: u32,
    pub seed: u64,
    /// Name used to order cases that share `(n, ins, seed)`.
    pub label: String,
    /// Load errors are carried into the report instead of aborting the run.
    pub instance: std::result::Result<Instance, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub ins: u32,
    pub seed: u64,
    pub value: Option<i64>,
    pub wall_time_secs: f64,
    pub step2_subproblems: usize,
    pub crit2_solves: usize,
    pub optimal: bool,
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(case: &BenchCase, error: String) -> Self {
        Self {
            n: case.n,
            ins: case.ins,
            seed: case.seed,
            value: None,
            wall_time_secs: 0.0,
            step2_subproblems: 0,
            crit2_solves: 0,
            optimal: false,
            error: Some(error),
        }
    }
}

/// Solves every case on a pool of `jobs` threads. Rows come back sorted by
/// `(n, ins, seed, label)` whatever the completion order.
pub fn run_bench(
    mut cases: Vec<BenchCase>,
    params: &SolverParams,
    jobs: usize,
) -> Result<Vec<BenchRow>> {
    cases.sort_by(|a, b| (a.n, a.ins, a.seed, &a.label).cmp(&(b.n, b.ins, b.seed, &b.label)));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BkpError::Argument(format!("cannot start {jobs} workers: {e}")))?;
    let run = |case: &BenchCase| match &case.instance {
        Err(e) => BenchRow::failed(case, e.clone()),
        Ok(inst) => match solve(inst, params) {
            Ok(s) => BenchRow {
                n: case.n,
                ins: case.ins,
                seed: case.seed,
                value: Some(s.value),
                wall_time_secs: s.stats.wall_time_secs,
                step2_subproblems: s.stats.step2_subproblems,
                crit2_solves: s.stats.crit2_solves,
                optimal: s.optimal,
                error: None,
            },
            Err(e) => BenchRow::failed(case, e.to_string()),
        },
    };
    Ok(pool.install(|| cases.par_iter().map(run).collect()))
}

/// Per-`(n, ins)` summary over the rows that produced a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub ins: u32,
    pub count: usize,
    pub count_optimal: usize,
    pub avg_time_secs: f64,
    pub max_time_secs: f64,
    pub avg_step2: f64,
    pub max_step2: usize,
    pub avg_crit2: f64,
    pub max_crit2: usize,
}

/// Groups consecutive rows with equal `(n, ins)`; expects sorted rows.
pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for group in rows.chunk_by(|a, b| (a.n, a.ins) == (b.n, b.ins)) {
        let solved: Vec<&BenchRow> = group.iter().filter(|r| r.value.is_some()).collect();
        let count = solved.len();
        let avg = |f: &dyn Fn(&BenchRow) -> f64| {
            if count == 0 {
                0.0
            } else {
                solved.iter().map(|r| f(r)).sum::<f64>() / count as f64
            }
        };
        out.push(Aggregate {
            n: group[0].n,
            ins: group[0].ins,
            count,
            count_optimal: solved.iter().filter(|r| r.optimal).count(),
            avg_time_secs: avg(&|r| r.wall_time_secs),
            max_time_secs: solved.iter().map(|r| r.wall_time_secs).fold(0.0, f64::max),
            avg_step2: avg(&|r| r.step2_subproblems as f64),
            max_step2: solved
                .iter()
                .map(|r| r.step2_subproblems)
                .max()
                .unwrap_or(0),
            avg_crit2: avg(&|r| r.crit2_solves as f64),
            max_crit2: solved.iter().map(|r| r.crit2_solves).max().unwrap_or(0),
        });
    }
    out
}

pub const CSV_HEADER: &str =
    "kind,n,ins,seed,value,optimal,time_secs,step2_subproblems,crit2_solves,\
count,count_optimal,avg_time_secs,max_time_secs,avg_step2,max_step2,avg_crit2,max_crit2";

/// The report table. `kind` is `instance`, `failed` or `aggregate`; each
/// group of instance rows is followed by its aggregate row. Failure
/// messages are not part of the table.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let aggregates = aggregate(rows);
    for (group, a) in rows
        .chunk_by(|a, b| (a.n, a.ins) == (b.n, b.ins))
        .zip(&aggregates)
    {
        for r in group {
            let kind = if r.error.is_some() {
                "failed"
            } else {
                "instance"
            };
            let value = r.value.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{kind},{},{},{},{value},{},{:.6},{},{},,,,,,,,",
                r.n,
                r.ins,
                r.seed,
                r.optimal as u8,
                r.wall_time_secs,
                r.step2_subproblems,
                r.crit2_solves
            )
            .unwrap();
        }
        writeln!(
            out,
            "aggregate,{},{},,,,,,,{},{},{:.6},{:.6},{:.3},{},{:.3},{}",
            a.n,
            a.ins,
            a.count,
            a.count_optimal,
            a.avg_time_secs,
            a.max_time_secs,
            a.avg_step2,
            a.max_step2,
            a.avg_crit2,
            a.max_crit2
        )
        .unwrap();
    }
    out
}
