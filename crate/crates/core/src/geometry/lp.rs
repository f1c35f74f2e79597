//! Dense two-phase simplex for the small linear programs behind
//! bounding boxes and Chebyshev balls.
//!
//! maximise c·x  subject to  a_i·x ≤ b_i,  x free.
//!
//! Free variables are split as x = u − v with u, v ≥ 0 and a slack is
//! added per row; phase 1 drives artificial variables out of rows with
//! negative right-hand side. Bland's rule keeps the iteration finite.
//! Every reported optimum is re-verified against the original data by
//! a primal feasibility check plus a dual certificate.

use crate::error::{Error, Result};

/// Maximise `objective`·x over the intersection of half-spaces
/// a·x ≤ b listed in `constraints`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, f64)>,
}

/// Typed solver outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const CERT_TOL: f64 = 1e-7;

struct Tableau {
    rows: usize,
    cols: usize, // total columns excluding the rhs
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        for j in 0..self.cols {
            self.a[row][j] /= piv;
        }
        self.rhs[row] /= piv;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// One simplex phase on the given objective (maximisation), using
    /// Bland's rule over the allowed columns. Returns false on
    /// unboundedness.
    ///
    /// Bland's rule cannot cycle in exact arithmetic; the iteration cap
    /// only guards against float-induced stalls and trips the
    /// certificate error path.
    fn run(&mut self, obj: &[f64], allowed: &[bool]) -> bool {
        let max_pivots = 200 * (self.rows + self.cols).max(64);
        let mut pivots = 0usize;
        loop {
            pivots += 1;
            if pivots > max_pivots {
                // Leave the tableau as-is; the caller's certificate
                // check rejects a non-optimal point.
                return true;
            }
            // Reduced costs: c_j - c_B B^{-1} A_j, computed against the
            // current tableau (rows are already B^{-1} A).
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut red = obj[j];
                for (i, &bi) in self.basis.iter().enumerate() {
                    red -= obj[bi] * self.a[i][j];
                }
                if red > PIVOT_TOL {
                    entering = Some(j);
                    break; // Bland: lowest index
                }
            }
            let Some(col) = entering else {
                return true;
            };
            // Ratio test, Bland tie-break on basis variable index.
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                if self.a[i][col] > PIVOT_TOL {
                    let ratio = self.rhs[i] / self.a[i][col];
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || ((ratio - br).abs() <= 1e-12
                                    && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, col);
        }
    }
}

/// Solve the LP; `Optimal` results carry a certificate-checked point.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let dim = lp.objective.len();
    for (i, (a, _)) in lp.constraints.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "constraint {i} has {} coefficients, expected {dim}",
                a.len()
            )));
        }
    }
    let m = lp.constraints.len();
    // Columns: u (dim), v (dim), slack (m), artificial (flipped rows).
    let flipped: Vec<bool> = lp.constraints.iter().map(|(_, b)| *b < 0.0).collect();
    let n_art = flipped.iter().filter(|&&f| f).count();
    let cols = 2 * dim + m + n_art;
    let mut a = vec![vec![0.0; cols]; m];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut art_idx = 0;
    for (i, (row, b)) in lp.constraints.iter().enumerate() {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        for (j, &v) in row.iter().enumerate() {
            a[i][j] = sign * v;
            a[i][dim + j] = -sign * v;
        }
        a[i][2 * dim + i] = sign; // slack
        rhs[i] = sign * b;
        if flipped[i] {
            let col = 2 * dim + m + art_idx;
            a[i][col] = 1.0;
            basis[i] = col;
            art_idx += 1;
        } else {
            basis[i] = 2 * dim + i;
        }
    }
    let mut t = Tableau {
        rows: m,
        cols,
        a,
        rhs,
        basis,
    };

    if n_art > 0 {
        // Phase 1: maximise −Σ artificials.
        let mut obj1 = vec![0.0; cols];
        for slot in obj1.iter_mut().skip(2 * dim + m) {
            *slot = -1.0;
        }
        let allowed = vec![true; cols];
        if !t.run(&obj1, &allowed) {
            return Err(Error::LpCertificate("phase 1 unbounded".into()));
        }
        let infeas: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bj)| bj >= 2 * dim + m)
            .map(|(i, _)| t.rhs[i])
            .sum();
        if infeas > 1e-8 {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot any zero-level artificials out where possible.
        for i in 0..t.rows {
            if t.basis[i] >= 2 * dim + m {
                if let Some(col) = (0..2 * dim + m).find(|&j| t.a[i][j].abs() > PIVOT_TOL) {
                    t.pivot(i, col);
                }
            }
        }
    }

    // Phase 2: original objective on u/v columns, artificials barred.
    let mut obj2 = vec![0.0; cols];
    obj2[..dim].copy_from_slice(&lp.objective);
    for (slot, c) in obj2[dim..2 * dim].iter_mut().zip(&lp.objective) {
        *slot = -c;
    }
    let mut allowed = vec![true; cols];
    for flag in allowed.iter_mut().skip(2 * dim + m) {
        *flag = false;
    }
    if !t.run(&obj2, &allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; dim];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < dim {
            x[bj] += t.rhs[i];
        } else if bj < 2 * dim {
            x[bj - dim] -= t.rhs[i];
        }
    }
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    verify_certificate(lp, &t, &obj2, &x, value)?;
    Ok(LpOutcome::Optimal { x, value })
}

/// Primal feasibility plus dual certificate against the original data:
/// duals y ≥ 0 from the slack reduced costs must satisfy Aᵀy = c and
/// bᵀy = c·x*.
fn verify_certificate(
    lp: &LinearProgram,
    t: &Tableau,
    obj: &[f64],
    x: &[f64],
    value: f64,
) -> Result<()> {
    let dim = lp.objective.len();
    let m = lp.constraints.len();
    let scale = 1.0
        + lp.constraints
            .iter()
            .flat_map(|(a, _)| a.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
        + x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for (i, (a, b)) in lp.constraints.iter().enumerate() {
        let lhs: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
        if lhs > b + CERT_TOL * scale {
            return Err(Error::LpCertificate(format!(
                "primal violation at constraint {i}: {lhs} > {b}"
            )));
        }
    }
    // y_i = −(reduced cost of slack i). Row flips negate both the
    // slack column and the row dual, so the two signs cancel.
    let mut y = vec![0.0; m];
    for (i, yi) in y.iter_mut().enumerate() {
        let col = 2 * dim + i;
        let mut red = obj[col];
        for (r, &bj) in t.basis.iter().enumerate() {
            red -= obj[bj] * t.a[r][col];
        }
        *yi = -red;
        if *yi < -CERT_TOL * scale {
            return Err(Error::LpCertificate(format!("negative dual {i}: {yi}")));
        }
        *yi = yi.max(0.0);
    }
    for j in 0..dim {
        let aty: f64 = lp.constraints.iter().zip(&y).map(|((a, _), yi)| a[j] * yi).sum();
        if (aty - lp.objective[j]).abs() > CERT_TOL * scale * (1.0 + m as f64).sqrt() {
            return Err(Error::LpCertificate(format!(
                "dual equation off at coordinate {j}: {aty} vs {}",
                lp.objective[j]
            )));
        }
    }
    let by: f64 = lp.constraints.iter().zip(&y).map(|((_, b), yi)| b * yi).sum();
    if (by - value).abs() > CERT_TOL * scale * (1.0 + m as f64) {
        return Err(Error::LpCertificate(format!(
            "duality gap: dual {by} vs primal {value}"
        )));
    }
    Ok(())
}
