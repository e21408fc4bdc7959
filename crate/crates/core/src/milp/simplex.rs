//! Bounded dual simplex on a dense condensed tableau.
//!
//! Every row `i` of the model gets a logical variable `r_i = a_i · x` whose
//! bounds encode the relation, so the system is homogeneous:
//! `basic = T · nonbasic`. Only the `m × n` block over nonbasic columns is
//! stored. All structural variables are boxed; a continuous variable without
//! an upper bound gets an artificial one and the LP is reported unbounded if
//! the optimum sits on it.

use super::model::{LinearModel, Relation};

pub(crate) const PRIMAL_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const ARTIFICIAL_UPPER: f64 = 1e7;
const REFACTOR_EVERY: usize = 100;
/// Iterations without objective progress before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    Nonbasic(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    n: usize,
    m: usize,
    /// Original constraint matrix, dense row-major `m × n`.
    a: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    artificial: Vec<bool>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    pos: Vec<Pos>,
    /// `m × n` row-major.
    t: Vec<f64>,
    d: Vec<f64>,
    value: Vec<f64>,
    pivots_since_refactor: usize,
    pub(crate) iterations: usize,
}

impl Simplex {
    pub(crate) fn from_model(model: &LinearModel) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut a = vec![0.0; m * n];
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut artificial = vec![false; n];
        for (j, var) in model.variables().iter().enumerate() {
            lower.push(var.lower);
            if var.upper.is_finite() {
                upper.push(var.upper);
            } else {
                artificial[j] = true;
                upper.push(ARTIFICIAL_UPPER.max(var.lower + ARTIFICIAL_UPPER));
            }
        }
        for (i, row) in model.rows().iter().enumerate() {
            for &(var, coef) in &row.coeffs {
                a[i * n + var.0] += coef;
            }
            let (lo, hi) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let cost = model.objective().to_vec();

        let mut s = Self {
            n,
            m,
            t: a.clone(),
            a,
            cost,
            lower,
            upper,
            artificial,
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
            pos: (0..n)
                .map(Pos::Nonbasic)
                .chain((0..m).map(Pos::Basic))
                .collect(),
            d: Vec::new(),
            value: vec![0.0; n + m],
            pivots_since_refactor: 0,
            iterations: 0,
        };
        s.compute_reduced_costs();
        for j in 0..n {
            s.value[j] = s.dual_feasible_bound(j, s.d[j]);
        }
        s.compute_basic_values();
        s
    }

    fn var_cost(&self, var: usize) -> f64 {
        if var < self.n {
            self.cost[var]
        } else {
            0.0
        }
    }

    fn is_fixed(&self, var: usize) -> bool {
        self.lower[var] == self.upper[var]
    }

    /// Bound a nonbasic variable should sit at for reduced cost `d`.
    fn dual_feasible_bound(&self, var: usize, d: f64) -> f64 {
        let (lo, hi) = (self.lower[var], self.upper[var]);
        if !lo.is_finite() {
            return hi;
        }
        if !hi.is_finite() {
            return lo;
        }
        if d < 0.0 {
            hi
        } else if d > 0.0 {
            lo
        } else if (self.value[var] - hi).abs() < (self.value[var] - lo).abs() {
            hi
        } else {
            lo
        }
    }

    fn compute_reduced_costs(&mut self) {
        let n = self.n;
        let mut d: Vec<f64> = self.nonbasic.iter().map(|&v| self.var_cost(v)).collect();
        for (i, &b) in self.basic.iter().enumerate() {
            let c = self.var_cost(b);
            if c != 0.0 {
                let row = &self.t[i * n..(i + 1) * n];
                for (dj, &tij) in d.iter_mut().zip(row) {
                    *dj += c * tij;
                }
            }
        }
        self.d = d;
    }

    fn compute_basic_values(&mut self) {
        let n = self.n;
        let nz: Vec<(usize, f64)> = self
            .nonbasic
            .iter()
            .enumerate()
            .map(|(j, &v)| (j, self.value[v]))
            .filter(|&(_, x)| x != 0.0)
            .collect();
        for i in 0..self.m {
            let row = &self.t[i * n..(i + 1) * n];
            let x: f64 = nz.iter().map(|&(j, v)| row[j] * v).sum();
            self.value[self.basic[i]] = x;
        }
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.value[j]).sum()
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.value[..self.n]
    }

    pub(crate) fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    /// Reduced cost of a structural variable; zero when basic.
    pub(crate) fn reduced_cost(&self, var: usize) -> f64 {
        match self.pos[var] {
            Pos::Basic(_) => 0.0,
            Pos::Nonbasic(j) => self.d[j],
        }
    }

    pub(crate) fn is_basic(&self, var: usize) -> bool {
        matches!(self.pos[var], Pos::Basic(_))
    }

    pub(crate) fn at_artificial_bound(&self) -> bool {
        (0..self.n).any(|j| self.artificial[j] && self.value[j] >= self.upper[j] - 1.0)
    }

    /// Changes the bounds of a structural variable, keeping the basis dual
    /// feasible. Basic values are refreshed by the next solve.
    pub(crate) fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self.artificial[var] = false;
        if let Pos::Nonbasic(j) = self.pos[var] {
            self.value[var] = if lower == upper {
                lower
            } else {
                self.dual_feasible_bound(var, self.d[j])
            };
        }
    }

    fn primal_violation(&self, var: usize) -> f64 {
        let x = self.value[var];
        if x < self.lower[var] - PRIMAL_TOL {
            self.lower[var] - x
        } else if x > self.upper[var] + PRIMAL_TOL {
            x - self.upper[var]
        } else {
            0.0
        }
    }

    /// Runs the dual simplex from the current (dual feasible) basis.
    pub(crate) fn solve(&mut self) -> Outcome {
        self.compute_basic_values();
        let limit = 50 * (self.m + self.n) + 1000;
        let mut bland = false;
        let mut stall = 0;
        let mut last_obj = f64::NEG_INFINITY;
        let mut refactored_at_end = false;
        for _ in 0..limit {
            let Some(row) = self.choose_leaving(bland) else {
                if self.residual_ok() {
                    return if self.at_artificial_bound() {
                        Outcome::Unbounded
                    } else {
                        Outcome::Optimal
                    };
                }
                if refactored_at_end || !self.refactor() {
                    return Outcome::NumericalFailure;
                }
                refactored_at_end = true;
                continue;
            };
            let leaving = self.basic[row];
            let increase = self.value[leaving] < self.lower[leaving];
            let Some(col) = self.choose_entering(row, increase, bland) else {
                // Confirm infeasibility on a fresh factorization.
                if self.pivots_since_refactor > 0 {
                    if !self.refactor() {
                        return Outcome::NumericalFailure;
                    }
                    continue;
                }
                return Outcome::Infeasible;
            };
            let target = if increase {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };
            self.pivot(row, col);
            self.value[leaving] = target;
            self.iterations += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return Outcome::NumericalFailure;
                }
            } else {
                self.compute_reduced_costs();
                self.compute_basic_values();
            }

            let obj = self.objective();
            if obj > last_obj + 1e-9 {
                last_obj = obj;
                stall = 0;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
        }
        Outcome::NumericalFailure
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &b) in self.basic.iter().enumerate() {
            let viol = self.primal_violation(b);
            if viol <= 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bv)) => {
                    if bland {
                        b < self.basic[bi]
                    } else {
                        viol > bv
                    }
                }
            };
            if better {
                best = Some((i, viol));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Dual ratio test with a Harris-style second pass preferring large
    /// pivots.
    fn choose_entering(&self, row: usize, increase: bool, bland: bool) -> Option<usize> {
        let n = self.n;
        let trow = &self.t[row * n..(row + 1) * n];
        let mut candidates = Vec::new();
        for (j, &tij) in trow.iter().enumerate() {
            if tij.abs() <= PIVOT_TOL {
                continue;
            }
            let var = self.nonbasic[j];
            if self.is_fixed(var) {
                continue;
            }
            let at_upper = self.value[var] == self.upper[var] && self.value[var] != self.lower[var];
            // Moving var away from its bound must push the leaving variable
            // in the required direction.
            let helps = if at_upper { tij < 0.0 } else { tij > 0.0 };
            if helps != increase {
                continue;
            }
            let dj = if at_upper {
                (-self.d[j]).max(0.0)
            } else {
                self.d[j].max(0.0)
            };
            candidates.push((j, dj, tij.abs()));
        }
        if candidates.is_empty() {
            return None;
        }
        if bland {
            let min_ratio = candidates
                .iter()
                .map(|&(_, dj, t)| dj / t)
                .fold(f64::INFINITY, f64::min);
            return candidates
                .iter()
                .filter(|&&(_, dj, t)| dj / t <= min_ratio + 1e-12)
                .min_by_key(|&&(j, _, _)| self.nonbasic[j])
                .map(|&(j, _, _)| j);
        }
        let bound = candidates
            .iter()
            .map(|&(_, dj, t)| (dj + DUAL_TOL) / t)
            .fold(f64::INFINITY, f64::min);
        candidates
            .iter()
            .filter(|&&(_, dj, t)| dj / t <= bound)
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .map(|&(j, _, _)| j)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let n = self.n;
        let piv = self.t[row * n + col];
        let mut new_row: Vec<f64> = self.t[row * n..(row + 1) * n]
            .iter()
            .map(|&x| -x / piv)
            .collect();
        new_row[col] = 1.0 / piv;
        let nz: Vec<usize> = (0..n).filter(|&j| new_row[j] != 0.0).collect();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let tiq = self.t[i * n + col];
            if tiq == 0.0 {
                continue;
            }
            let ti = &mut self.t[i * n..(i + 1) * n];
            for &j in &nz {
                if j != col {
                    ti[j] += tiq * new_row[j];
                }
            }
            ti[col] = tiq * new_row[col];
        }
        self.t[row * n..(row + 1) * n].copy_from_slice(&new_row);

        let entering = self.nonbasic[col];
        let leaving = self.basic[row];
        self.basic[row] = entering;
        self.nonbasic[col] = leaving;
        self.pos[entering] = Pos::Basic(row);
        self.pos[leaving] = Pos::Nonbasic(col);
        self.pivots_since_refactor += 1;
    }

    fn residual_ok(&self) -> bool {
        for i in 0..self.m {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            let activity: f64 = row
                .iter()
                .zip(&self.value[..self.n])
                .map(|(a, x)| a * x)
                .sum();
            let scale = 1.0 + row.iter().map(|a| a.abs()).fold(0.0, f64::max);
            if (activity - self.value[self.n + i]).abs() > PRIMAL_TOL * scale {
                return false;
            }
        }
        (0..self.n + self.m).all(|v| self.primal_violation(v) == 0.0)
    }

    /// Rebuilds the tableau for the current basis from the original data.
    /// Returns false when the basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        // Basic structurals S, rows whose logical is nonbasic Q.
        let s: Vec<usize> = self.basic.iter().copied().filter(|&v| v < n).collect();
        let q: Vec<usize> = self
            .nonbasic
            .iter()
            .copied()
            .filter(|&v| v >= n)
            .map(|v| v - n)
            .collect();
        debug_assert_eq!(s.len(), q.len());
        let k = s.len();

        // Inverse of A[Q, S] by Gauss-Jordan with partial pivoting.
        let mut aug = vec![0.0; k * 2 * k];
        for (qi, &qr) in q.iter().enumerate() {
            for (si, &sv) in s.iter().enumerate() {
                aug[qi * 2 * k + si] = self.a[qr * n + sv];
            }
            aug[qi * 2 * k + k + qi] = 1.0;
        }
        for c in 0..k {
            let p = (c..k)
                .max_by(|&x, &y| {
                    aug[x * 2 * k + c]
                        .abs()
                        .total_cmp(&aug[y * 2 * k + c].abs())
                })
                .unwrap();
            if aug[p * 2 * k + c].abs() < 1e-11 {
                return false;
            }
            if p != c {
                for j in 0..2 * k {
                    aug.swap(p * 2 * k + j, c * 2 * k + j);
                }
            }
            let inv = 1.0 / aug[c * 2 * k + c];
            for j in 0..2 * k {
                aug[c * 2 * k + j] *= inv;
            }
            for r in 0..k {
                if r == c {
                    continue;
                }
                let f = aug[r * 2 * k + c];
                if f == 0.0 {
                    continue;
                }
                for j in 0..2 * k {
                    aug[r * 2 * k + j] -= f * aug[c * 2 * k + j];
                }
            }
        }
        // inv(A_QS)[si][qi] = aug[si * 2k + k + qi]: row si of the inverse
        // corresponds to structural s[si].
        let inv = |si: usize, qi: usize| aug[si * 2 * k + k + qi];
        let q_index: Vec<Option<usize>> = {
            let mut idx = vec![None; m];
            for (qi, &qr) in q.iter().enumerate() {
                idx[qr] = Some(qi);
            }
            idx
        };

        // Rows for basic structurals, as dense vectors over nonbasic columns.
        let mut srow = vec![0.0; k * n];
        for si in 0..k {
            for (j, &v) in self.nonbasic.iter().enumerate() {
                srow[si * n + j] = if v >= n {
                    inv(si, q_index[v - n].expect("nonbasic logical row"))
                } else {
                    -(0..k)
                        .map(|qi| inv(si, qi) * self.a[q[qi] * n + v])
                        .sum::<f64>()
                };
            }
        }
        let s_index: Vec<Option<usize>> = {
            let mut idx = vec![None; n];
            for (si, &sv) in s.iter().enumerate() {
                idx[sv] = Some(si);
            }
            idx
        };

        let mut t = vec![0.0; m * n];
        for (i, &b) in self.basic.iter().enumerate() {
            let out = &mut t[i * n..(i + 1) * n];
            if b < n {
                let si = s_index[b].unwrap();
                out.copy_from_slice(&srow[si * n..(si + 1) * n]);
            } else {
                let r = b - n;
                for (si, &sv) in s.iter().enumerate() {
                    let coef = self.a[r * n + sv];
                    if coef != 0.0 {
                        for j in 0..n {
                            out[j] += coef * srow[si * n + j];
                        }
                    }
                }
                for (j, &v) in self.nonbasic.iter().enumerate() {
                    if v < n {
                        out[j] += self.a[r * n + v];
                    }
                }
            }
        }
        self.t = t;
        self.pivots_since_refactor = 0;
        self.compute_reduced_costs();
        // Drift may have left nonbasic variables on the wrong bound.
        for (j, &v) in self.nonbasic.iter().enumerate() {
            if self.is_fixed(v) {
                continue;
            }
            let want = self.dual_feasible_bound(v, self.d[j]);
            if self.d[j].abs() > DUAL_TOL {
                self.value[v] = want;
            }
        }
        self.compute_basic_values();
        true
    }
}
