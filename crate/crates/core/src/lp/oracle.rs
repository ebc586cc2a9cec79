//! Exhaustive vertex enumeration for cross-checking the simplex solver on
//! small programs. Every n-subset of the constraint/bound hyperplanes is
//! solved as a square linear system by Gaussian elimination; feasible
//! solutions are scored and the best kept. Deliberately shares no code with
//! the simplex path.

use super::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use thiserror::Error;

const MAX_VARS: usize = 8;
const MAX_CONSTRAINTS: usize = 10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("program too large for exhaustive search: {vars} vars / {constraints} constraints (caps {MAX_VARS}/{MAX_CONSTRAINTS})")]
    TooLarge { vars: usize, constraints: usize },
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// Find the optimum of a small, bounded program by enumerating candidate
/// vertices. Assumes the feasible region is pointed (true whenever every
/// variable has a finite lower bound, as here). Returns `Infeasible` when no
/// vertex passes the feasibility check.
pub fn brute_force_vertex(lp: &LinearProgram) -> Result<LpSolution, OracleError> {
    let n = lp.n_vars();
    if n == 0 || lp.bounds.len() != n {
        return Err(OracleError::Malformed(
            "program needs at least one variable with bounds".into(),
        ));
    }
    if n > MAX_VARS || lp.constraints.len() > MAX_CONSTRAINTS {
        return Err(OracleError::TooLarge {
            vars: n,
            constraints: lp.constraints.len(),
        });
    }

    // Hyperplane pool: every constraint taken at equality, plus both bound
    // faces of every variable.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for con in &lp.constraints {
        if con.coeffs.len() != n {
            return Err(OracleError::Malformed(format!(
                "constraint has {} coefficients, expected {n}",
                con.coeffs.len()
            )));
        }
        planes.push((con.coeffs.clone(), con.rhs));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        planes.push((row.clone(), lo));
        if hi.is_finite() {
            planes.push((row, hi));
        }
    }
    if planes.len() < n {
        return Err(OracleError::Malformed(
            "fewer hyperplanes than variables: region has no vertex".into(),
        ));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut examined = 0usize;
    let mut pick = (0..n).collect::<Vec<usize>>();
    loop {
        examined += 1;
        if let Some(x) = solve_square(&pick, &planes, n) {
            if is_feasible(lp, &x) {
                let value = lp.objective_value_at(&x);
                let improves = match &best {
                    None => true,
                    Some((incumbent, _)) => match lp.sense {
                        Sense::Maximize => value > *incumbent + 1e-12 * incumbent.abs().max(1.0),
                        Sense::Minimize => value < *incumbent - 1e-12 * incumbent.abs().max(1.0),
                    },
                };
                if improves {
                    best = Some((value, x));
                }
            }
        }
        if !advance(&mut pick, planes.len()) {
            break;
        }
    }

    Ok(match best {
        Some((value, x)) => LpSolution {
            status: LpStatus::Optimal,
            values: x,
            objective_value: value,
            iterations: examined,
        },
        None => LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: f64::NAN,
            iterations: examined,
        },
    })
}

/// Next n-combination of indices in lexicographic order; false when done.
fn advance(pick: &mut [usize], pool: usize) -> bool {
    let n = pick.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if pick[i] < pool - (n - i) {
            pick[i] += 1;
            for k in i + 1..n {
                pick[k] = pick[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solve the square system formed by the chosen hyperplanes with partial
/// pivoting; None when (numerically) singular.
fn solve_square(pick: &[usize], planes: &[(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
    let mut b: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pivot_mag < 1e-10 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn is_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let tol_for = |scale: f64| 1e-7 * (1.0 + scale.abs());
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if x[j] < lo - tol_for(lo) || x[j] > hi + tol_for(hi) {
            return false;
        }
    }
    for con in &lp.constraints {
        let lhs: f64 = con.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
        let tol = tol_for(con.rhs.abs().max(lhs.abs()));
        let ok = match con.relation {
            Relation::Le => lhs <= con.rhs + tol,
            Relation::Ge => lhs >= con.rhs - tol,
            Relation::Eq => (lhs - con.rhs).abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    true
}
