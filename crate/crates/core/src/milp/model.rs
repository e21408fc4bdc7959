use std::fmt::Write as _;

use crate::error::{BkpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    /// Continuous, non-negative.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(VarId, f64)>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => lhs <= self.rhs + tol,
            Relation::Ge => lhs >= self.rhs - tol,
            Relation::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// A minimization model over binary and non-negative continuous variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    vars: Vec<Variable>,
    objective: Vec<f64>,
    offset: f64,
    rows: Vec<Row>,
    integral_objective: bool,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        })
    }

    /// Continuous variable in `[0, upper]`; `upper` may be infinite.
    pub fn add_continuous(&mut self, name: impl Into<String>, upper: f64) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper,
        })
    }

    fn push_var(&mut self, var: Variable) -> VarId {
        self.vars.push(var);
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    fn check(&self, var: VarId) -> Result<()> {
        if var.0 < self.vars.len() {
            Ok(())
        } else {
            Err(BkpError::UnknownVariable(var.0))
        }
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) -> Result<()> {
        self.check(var)?;
        self.objective[var.0] = coef;
        Ok(())
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Declares that every integer-feasible point has an integral objective,
    /// which lets branch-and-bound round bounds up.
    pub fn set_integral_objective(&mut self, integral: bool) {
        self.integral_objective = integral;
    }

    pub fn integral_objective(&self) -> bool {
        self.integral_objective
    }

    pub fn add_row(&mut self, row: Row) -> Result<usize> {
        for &(v, _) in &row.coeffs {
            self.check(v)?;
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    pub fn add_rows(&mut self, rows: impl IntoIterator<Item = Row>) -> Result<()> {
        for row in rows {
            self.add_row(row)?;
        }
        Ok(())
    }

    pub fn fix_variable(&mut self, var: VarId, value: f64) -> Result<()> {
        self.check(var)?;
        let v = &mut self.vars[var.0];
        let ok = match v.kind {
            VarKind::Binary => value == 0.0 || value == 1.0,
            VarKind::Continuous => value >= 0.0 && value <= v.upper,
        };
        if !ok {
            return Err(BkpError::Argument(format!(
                "cannot fix {} to {value}",
                v.name
            )));
        }
        v.lower = value;
        v.upper = value;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.vars[var.0]
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        self.vars
            .iter()
            .zip(values)
            .all(|(v, &x)| x >= v.lower - tol && x <= v.upper + tol)
            && self.rows.iter().all(|r| r.is_satisfied(values, tol))
    }

    /// CPLEX LP text format, for cross-checking against external solvers.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("\\ generated by bkp-core\nMinimize\n obj:");
        let mut any = false;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                push_term(&mut out, c, &self.vars[j].name, !any);
                any = true;
            }
        }
        if self.offset != 0.0 || !any {
            let _ = write!(
                out,
                " {} {}",
                if self.offset < 0.0 { "-" } else { "+" },
                self.offset.abs()
            );
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            if row.coeffs.is_empty() {
                // LP format needs a variable on every row.
                let _ = write!(
                    out,
                    " 0 {}",
                    self.vars.first().map_or("x", |v| v.name.as_str())
                );
            }
            for (k, &(v, c)) in row.coeffs.iter().enumerate() {
                push_term(&mut out, c, &self.vars[v.0].name, k == 0);
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            if v.is_fixed() {
                let _ = writeln!(out, " {} = {}", v.name, v.lower);
            } else if v.kind == VarKind::Continuous {
                if v.upper.is_finite() {
                    let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
                } else {
                    let _ = writeln!(out, " {} >= {}", v.name, v.lower);
                }
            }
        }
        let binaries: Vec<&str> = self
            .vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary && !v.is_fixed())
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in binaries.chunks(10) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn push_term(out: &mut String, c: f64, name: &str, first: bool) {
    let sign = if c < 0.0 { "-" } else { "+" };
    if first && c >= 0.0 {
        let _ = write!(out, " {} {name}", c.abs());
    } else {
        let _ = write!(out, " {sign} {} {name}", c.abs());
    }
}
