//! Dense linear-program representation and a two-phase tableau simplex solver.
//!
//! The solver standardizes the problem (lower bounds shifted to zero, finite
//! upper bounds appended as rows, rows and columns equilibrated by max-abs
//! scaling), runs phase 1 with artificial variables, then phase 2 on the
//! caller's objective. Pivoting starts with Dantzig's rule and permanently
//! switches to Bland's rule after a fixed number of pivots, so degenerate
//! problems cannot cycle. Everything is deterministic: the same program
//! always takes the same pivot path and returns bitwise-identical values.
//!
//! `infeasible` and `unbounded` are ordinary solve outcomes reported in
//! [`LpStatus`]; exceeding the iteration budget is a fault ([`LpError`]).

pub mod oracle;

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => write!(f, "<="),
            Relation::Ge => write!(f, ">="),
            Relation::Eq => write!(f, "=="),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A dense linear program over variables `x[j]` with per-variable bounds
/// `lower[j] <= x[j] <= upper[j]` (upper may be `f64::INFINITY`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constant added to the objective value (does not affect the argmax).
    pub objective_constant: f64,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
    pub names: Vec<String>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            objective_constant: 0.0,
            sense,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
            names: (0..n).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn set_name(&mut self, var: usize, name: impl Into<String>) {
        self.names[var] = name.into();
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Objective value of a candidate point, in the caller's orientation.
    pub fn objective_value_at(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.objective_constant
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if n == 0 {
            return Err(LpError::Malformed("program has no variables".into()));
        }
        if self.bounds.len() != n || self.names.len() != n {
            return Err(LpError::Malformed(format!(
                "objective has {n} variables but bounds has {} and names has {}",
                self.bounds.len(),
                self.names.len()
            )));
        }
        if !self.objective.iter().all(|c| c.is_finite()) || !self.objective_constant.is_finite() {
            return Err(LpError::Malformed("objective must be finite".into()));
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if con.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    con.coeffs.len()
                )));
            }
            if !con.coeffs.iter().all(|c| c.is_finite()) || !con.rhs.is_finite() {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has non-finite entries"
                )));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() {
                return Err(LpError::Malformed(format!(
                    "variable {} needs a finite lower bound, got {lo}",
                    self.names[j]
                )));
            }
            if hi.is_nan() || hi < lo {
                return Err(LpError::Malformed(format!(
                    "variable {} has empty bound range [{lo}, {hi}]",
                    self.names[j]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        write!(f, "{sense} ")?;
        let mut first = true;
        for (c, name) in self.objective.iter().zip(&self.names) {
            if *c == 0.0 {
                continue;
            }
            if first {
                write!(f, "{c} {name}")?;
                first = false;
            } else {
                write!(f, " {} {} {name}", if *c < 0.0 { "-" } else { "+" }, c.abs())?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.objective_constant != 0.0 {
            write!(f, " + {}", self.objective_constant)?;
        }
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for con in &self.constraints {
            write!(f, " ")?;
            let mut any = false;
            for (c, name) in con.coeffs.iter().zip(&self.names) {
                if *c == 0.0 {
                    continue;
                }
                if any {
                    write!(f, " {} {} {name}", if *c < 0.0 { "-" } else { "+" }, c.abs())?;
                } else {
                    write!(f, " {c} {name}")?;
                    any = true;
                }
            }
            if !any {
                write!(f, " 0")?;
            }
            writeln!(f, " {} {}", con.relation, con.rhs)?;
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            writeln!(f, " {lo} <= {} <= {hi}", self.names[j])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `values` and `objective_value` are meaningful only when
/// `status == Optimal`; an unbounded maximization reports `+inf` (and a
/// minimization `-inf`) as its objective.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("simplex stalled: iteration budget of {limit} exhausted")]
    IterationLimit { limit: usize },
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Feasibility and optimality tolerance, applied to the scaled problem.
    pub feasibility_tol: f64,
    /// Pivot budget; `None` uses 50 x (columns + rows) of the working tableau.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            max_iterations: None,
        }
    }
}

/// Solve with default options.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

/// Solve with explicit options.
pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let tol = opts.feasibility_tol;

    // --- Shift lower bounds to zero and append finite upper bounds as rows.
    let n = lp.n_vars();
    let lower: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for con in &lp.constraints {
        let shift: f64 = con.coeffs.iter().zip(&lower).map(|(a, l)| a * l).sum();
        rows.push((con.coeffs.clone(), con.relation, con.rhs - shift));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push((coeffs, Relation::Le, hi - lo));
        }
    }

    // Constant rows (no variables left) are decided immediately and dropped.
    let mut contradiction = false;
    rows.retain(|(coeffs, rel, rhs)| {
        if coeffs.iter().any(|a| *a != 0.0) {
            return true;
        }
        let slack = tol * (1.0 + rhs.abs());
        let ok = match rel {
            Relation::Le => *rhs >= -slack,
            Relation::Ge => *rhs <= slack,
            Relation::Eq => rhs.abs() <= slack,
        };
        contradiction |= !ok;
        false
    });
    if contradiction {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: f64::NAN,
            iterations: 0,
        });
    }

    // --- Equilibrate: rows then columns by max-abs.
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    let mut rel: Vec<Relation> = Vec::with_capacity(m);
    for (coeffs, r, rhs) in &rows {
        let row_scale = coeffs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let inv = 1.0 / row_scale;
        a.push(coeffs.iter().map(|v| v * inv).collect());
        b.push(rhs * inv);
        rel.push(*r);
    }
    let mut col_scale = vec![1.0f64; n];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let col_max = a.iter().fold(0.0f64, |acc, row| acc.max(row[j].abs()));
        if col_max > 0.0 {
            *scale = 1.0 / col_max;
        }
    }
    for row in &mut a {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= col_scale[j];
        }
    }
    // Objective in minimize orientation over the scaled variables.
    let min_sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let c_min: Vec<f64> = lp
        .objective
        .iter()
        .zip(&col_scale)
        .map(|(c, s)| min_sign * c * s)
        .collect();

    // --- Orient rows so every right-hand side is nonnegative.
    for i in 0..m {
        if b[i] < 0.0 {
            for v in &mut a[i] {
                *v = -*v;
            }
            b[i] = -b[i];
            rel[i] = match rel[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // --- Tableau: structural | slack/surplus | artificial | rhs.
    let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let ncols = n + n_slack + n_art;
    let rhs_col = ncols;
    let mut t = vec![vec![0.0f64; ncols + 1]; m + 1];
    let mut basis = vec![usize::MAX; m];
    let art_start = n + n_slack;
    {
        let mut slack_at = n;
        let mut art_at = art_start;
        for i in 0..m {
            t[i][..n].copy_from_slice(&a[i]);
            t[i][rhs_col] = b[i];
            match rel[i] {
                Relation::Le => {
                    t[i][slack_at] = 1.0;
                    basis[i] = slack_at;
                    slack_at += 1;
                }
                Relation::Ge => {
                    t[i][slack_at] = -1.0;
                    slack_at += 1;
                    t[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                }
                Relation::Eq => {
                    t[i][art_at] = 1.0;
                    basis[i] = art_at;
                    art_at += 1;
                }
            }
        }
    }

    let iteration_cap = opts
        .max_iterations
        .unwrap_or_else(|| 50 * (ncols + m).max(1));
    let dantzig_budget = 5 * (ncols + m).max(1);
    let mut iterations = 0usize;

    // Pivot until no reduced cost is attractive. `allowed` masks columns that
    // may enter. Returns false when the objective is unbounded below.
    let run_phase = |t: &mut Vec<Vec<f64>>,
                         basis: &mut Vec<usize>,
                         allowed_end: usize,
                         iterations: &mut usize|
     -> Result<bool, LpError> {
        loop {
            // Entering column: Dantzig early, Bland once the budget is spent.
            let cost_row = &t[m];
            let mut entering = None;
            if *iterations < dantzig_budget {
                let mut best = -tol;
                for (j, &rc) in cost_row.iter().enumerate().take(allowed_end) {
                    if rc < best {
                        best = rc;
                        entering = Some(j);
                    }
                }
            } else {
                for (j, &rc) in cost_row.iter().enumerate().take(allowed_end) {
                    if rc < -tol {
                        entering = Some(j);
                        break;
                    }
                }
            }
            let Some(enter) = entering else {
                return Ok(true);
            };

            // Leaving row: minimum ratio, ties broken by smallest basis index.
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let aij = t[i][enter];
                if aij > tol {
                    let ratio = t[i][rhs_col].max(0.0) / aij;
                    let better = match leave {
                        None => true,
                        Some(cur) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && basis[i] < basis[cur])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(leave) = leave else {
                return Ok(false); // unbounded in this phase
            };

            *iterations += 1;
            if *iterations > iteration_cap {
                return Err(LpError::IterationLimit { limit: iteration_cap });
            }

            // Gauss-Jordan pivot on (leave, enter).
            let pivot = t[leave][enter];
            let inv = 1.0 / pivot;
            for v in &mut t[leave] {
                *v *= inv;
            }
            let pivot_row = t[leave].clone();
            for (i, row) in t.iter_mut().enumerate() {
                if i == leave {
                    continue;
                }
                let factor = row[enter];
                if factor != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * pv;
                    }
                    row[enter] = 0.0; // keep the eliminated entry exactly zero
                }
            }
            basis[leave] = enter;
        }
    };

    // --- Phase 1: minimize the sum of artificial variables.
    if n_art > 0 {
        for j in 0..ncols {
            t[m][j] = if j >= art_start { 1.0 } else { 0.0 };
        }
        t[m][rhs_col] = 0.0;
        for i in 0..m {
            if basis[i] >= art_start {
                let row = t[i].clone();
                for (v, rv) in t[m].iter_mut().zip(&row) {
                    *v -= rv;
                }
            }
        }
        if !run_phase(&mut t, &mut basis, ncols, &mut iterations)? {
            // The artificial sum is bounded below by zero, so a descent ray
            // here can only mean the arithmetic has gone off the rails.
            return Err(LpError::Numerical("phase-1 objective diverged".into()));
        }
        let infeasibility = -t[m][rhs_col];
        let b_mass: f64 = b.iter().map(|v| v.abs()).sum();
        if infeasibility > tol * (1.0 + b_mass) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective_value: f64::NAN,
                iterations,
            });
        }
        // Pivot leftover artificials out of the basis where possible;
        // rows that offer no pivot are redundant and stay parked at zero.
        for i in 0..m {
            if basis[i] >= art_start {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..art_start {
                    let mag = t[i][j].abs();
                    if mag > 1e-7 && best.map(|(_, bm)| mag > bm).unwrap_or(true) {
                        best = Some((j, mag));
                    }
                }
                if let Some((j, _)) = best {
                    let pivot = t[i][j];
                    let inv = 1.0 / pivot;
                    for v in &mut t[i] {
                        *v *= inv;
                    }
                    let pivot_row = t[i].clone();
                    for (k, row) in t.iter_mut().enumerate() {
                        if k == i {
                            continue;
                        }
                        let factor = row[j];
                        if factor != 0.0 {
                            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                                *v -= factor * pv;
                            }
                            row[j] = 0.0;
                        }
                    }
                    basis[i] = j;
                }
            }
        }
    }

    // --- Phase 2: the real objective, artificial columns barred from entry.
    for j in 0..ncols {
        t[m][j] = if j < n { c_min[j] } else { 0.0 };
    }
    t[m][rhs_col] = 0.0;
    for i in 0..m {
        let cb = if basis[i] < n { c_min[basis[i]] } else { 0.0 };
        if cb != 0.0 {
            let row = t[i].clone();
            for (v, rv) in t[m].iter_mut().zip(&row) {
                *v -= cb * rv;
            }
        }
    }
    let bounded = run_phase(&mut t, &mut basis, art_start, &mut iterations)?;
    if !bounded {
        let objective_value = match lp.sense {
            Sense::Minimize => f64::NEG_INFINITY,
            Sense::Maximize => f64::INFINITY,
        };
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value,
            iterations,
        });
    }

    // --- Recover user-space values and sanity-check feasibility.
    let mut z = vec![0.0f64; ncols];
    for i in 0..m {
        z[basis[i]] = t[i][rhs_col].max(0.0);
    }
    let values: Vec<f64> = (0..n).map(|j| lower[j] + col_scale[j] * z[j]).collect();

    for (i, con) in lp.constraints.iter().enumerate() {
        let lhs: f64 = con.coeffs.iter().zip(&values).map(|(c, v)| c * v).sum();
        let slack = lhs - con.rhs;
        let budget = 1e-6 * (1.0 + con.rhs.abs() + lhs.abs());
        let violated = match con.relation {
            Relation::Le => slack > budget,
            Relation::Ge => slack < -budget,
            Relation::Eq => slack.abs() > budget,
        };
        if violated {
            return Err(LpError::Numerical(format!(
                "constraint {i} violated by {slack:.3e} after solve"
            )));
        }
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_value_at(&values),
        values,
        iterations,
    })
}
