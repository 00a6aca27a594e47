//! Minimal dense two-phase simplex solver for the tiny feasibility
//! programs in this crate (tens of variables). Bland's rule throughout,
//! so pivoting is deterministic and cannot cycle.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cmp {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, thiserror::Error)]
pub(crate) enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("pivot limit reached")]
    PivotLimit,
}

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 20_000;

/// Minimizes `objective`·x subject to the constraints and x ≥ 0.
pub(crate) fn solve(objective: &[f64], constraints: &[Constraint]) -> Result<LpSolution, LpError> {
    let n = objective.len();
    let m = constraints.len();

    // Normalize to equality form with nonnegative right-hand sides.
    // Each row gets a slack (for ≤) and, when needed, an artificial.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut needs_surplus: Vec<bool> = Vec::with_capacity(m);
    let mut is_eq: Vec<bool> = Vec::with_capacity(m);
    for c in constraints {
        assert_eq!(c.coeffs.len(), n, "constraint arity");
        let flip = c.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        rows.push(c.coeffs.iter().map(|&v| sign * v).collect());
        rhs.push(sign * c.rhs);
        match c.cmp {
            Cmp::Eq => {
                needs_surplus.push(false);
                is_eq.push(true);
            }
            Cmp::Le => {
                // a ≤ b with b < 0 flips into a surplus row
                needs_surplus.push(flip);
                is_eq.push(false);
            }
        }
    }

    // Column layout: structural | slack/surplus | artificial | rhs.
    let mut slack_cols = 0usize;
    for i in 0..m {
        if !is_eq[i] {
            slack_cols += 1;
        }
    }
    let mut artificial_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if is_eq[i] || needs_surplus[i] {
            artificial_rows.push(i);
        }
    }
    let art_cols = artificial_rows.len();
    let total = n + slack_cols + art_cols;

    let mut tableau = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![usize::MAX; m];
    let mut slack_at = n;
    let mut art_at = n + slack_cols;
    for i in 0..m {
        tableau[i][..n].copy_from_slice(&rows[i]);
        tableau[i][total] = rhs[i];
        if !is_eq[i] {
            // slack for plain ≤, surplus (−1) for flipped rows
            tableau[i][slack_at] = if needs_surplus[i] { -1.0 } else { 1.0 };
            if !needs_surplus[i] {
                basis[i] = slack_at;
            }
            slack_at += 1;
        }
        if is_eq[i] || needs_surplus[i] {
            tableau[i][art_at] = 1.0;
            basis[i] = art_at;
            art_at += 1;
        }
    }

    // Phase 1: drive the artificials to zero.
    if art_cols > 0 {
        let mut cost = vec![0.0; total + 1];
        for col in (n + slack_cols)..total {
            cost[col] = 1.0;
        }
        reduce_cost(&mut cost, &tableau, &basis);
        run_simplex(&mut tableau, &mut basis, &mut cost, total, usize::MAX)?;
        if cost[total].abs() > 1e-7 {
            return Err(LpError::Infeasible);
        }
        // pivot any artificial still basic out of the basis if possible
        for i in 0..m {
            if basis[i] >= n + slack_cols {
                if let Some(col) = (0..n + slack_cols)
                    .find(|&c| tableau[i][c].abs() > PIVOT_EPS)
                {
                    pivot(&mut tableau, &mut basis, i, col, &mut cost);
                }
            }
        }
    }

    // Phase 2: original objective, artificials barred from entering.
    let mut cost = vec![0.0; total + 1];
    cost[..n].copy_from_slice(objective);
    reduce_cost(&mut cost, &tableau, &basis);
    run_simplex(&mut tableau, &mut basis, &mut cost, total, n + slack_cols)?;

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = tableau[i][total];
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, value })
}

/// Makes the cost row consistent with the current basis (zero reduced
/// cost on basic columns).
fn reduce_cost(cost: &mut [f64], tableau: &[Vec<f64>], basis: &[usize]) {
    for (i, &b) in basis.iter().enumerate() {
        if b != usize::MAX && cost[b].abs() > 0.0 {
            let factor = cost[b];
            for (c, t) in cost.iter_mut().zip(&tableau[i]) {
                *c -= factor * t;
            }
        }
    }
}

fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &mut [f64],
    total: usize,
    barred_from: usize,
) -> Result<(), LpError> {
    for _ in 0..MAX_PIVOTS {
        // Bland: entering column is the smallest index with negative
        // reduced cost
        let entering = (0..total)
            .filter(|&c| c < barred_from || barred_from == usize::MAX)
            .find(|&c| cost[c] < -PIVOT_EPS);
        let Some(col) = entering else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (i, row) in tableau.iter().enumerate() {
            if row[col] > PIVOT_EPS {
                let ratio = row[total] / row[col];
                if ratio < best_ratio - PIVOT_EPS
                    || (ratio < best_ratio + PIVOT_EPS
                        && leave.map_or(true, |l| basis[i] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot(tableau, basis, row, col, cost);
    }
    Err(LpError::PivotLimit)
}

fn pivot(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    row: usize,
    col: usize,
    cost: &mut [f64],
) {
    let piv = tableau[row][col];
    for v in tableau[row].iter_mut() {
        *v /= piv;
    }
    let pivot_row = tableau[row].clone();
    for (i, r) in tableau.iter_mut().enumerate() {
        if i != row && r[col].abs() > 0.0 {
            let factor = r[col];
            for (v, &p) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
    }
    if cost[col].abs() > 0.0 {
        let factor = cost[col];
        for (c, &p) in cost.iter_mut().zip(&pivot_row) {
            *c -= factor * p;
        }
    }
    basis[row] = col;
}
