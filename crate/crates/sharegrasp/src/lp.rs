//! Small dense linear programs.
//!
//! Everything in this crate that asks a feasibility or optimality question
//! about a polyhedral set funnels through this module: cone membership,
//! kinematic filtering of contact modes, velocity-feasibility of a commanded
//! action, and the brute-force force-balance oracle. The systems are tiny
//! (tens of variables and rows), so a dense two-phase primal simplex with
//! Bland's anti-cycling rule is simple, deterministic and fast. Determinism
//! matters: report bytes must not depend on iteration order, so pivots are
//! chosen by lowest index, never by steepest edge.
//!
//! The solved form is
//!
//! ```text
//! minimize    c . x
//! subject to  A x  = b      (equality rows)
//!             C x <= d      (inequality rows)
//!             x_i >= 0      (for variables marked non-negative; free otherwise)
//! ```
//!
//! Free variables are split into positive and negative parts internally.

use crate::tol;

/// Outcome of solving a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// An optimal solution was found.
    Optimal { x: Vec<f64>, objective: f64 },
    /// The constraint set is empty (phase 1 could not reach zero).
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
}

impl LpOutcome {
    /// The solution vector, if one exists.
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

/// A small dense linear program under construction.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    nonneg: Vec<bool>,
    eq_rows: Vec<(Vec<f64>, f64)>,
    le_rows: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    /// A program over `num_vars` free variables with a zero objective
    /// (pure feasibility until an objective is set).
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            nonneg: vec![false; num_vars],
            eq_rows: Vec::new(),
            le_rows: Vec::new(),
        }
    }

    /// Number of decision variables.
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Set the objective to minimize `c . x`.
    pub fn minimize(&mut self, c: &[f64]) {
        assert_eq!(c.len(), self.num_vars, "objective length mismatch");
        self.objective.copy_from_slice(c);
    }

    /// Constrain variable `i` to be non-negative.
    pub fn require_nonneg(&mut self, i: usize) {
        self.nonneg[i] = true;
    }

    /// Add an equality row `a . x = b`.
    pub fn add_eq(&mut self, a: &[f64], b: f64) {
        assert_eq!(a.len(), self.num_vars, "row length mismatch");
        self.eq_rows.push((a.to_vec(), b));
    }

    /// Add an inequality row `a . x <= b`.
    pub fn add_le(&mut self, a: &[f64], b: f64) {
        assert_eq!(a.len(), self.num_vars, "row length mismatch");
        self.le_rows.push((a.to_vec(), b));
    }

    /// Add an inequality row `a . x >= b` (stored negated).
    pub fn add_ge(&mut self, a: &[f64], b: f64) {
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        self.add_le(&neg, -b);
    }

    /// Whether the constraint set is non-empty (objective ignored).
    pub fn is_feasible(&self) -> bool {
        let mut probe = self.clone();
        probe.objective = vec![0.0; probe.num_vars];
        !matches!(probe.solve(), LpOutcome::Infeasible)
    }

    /// Solve the program with a two-phase dense simplex.
    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve()
    }
}

/// Dense simplex tableau in standard form.
///
/// Columns are laid out as: standard variables (free variables split into
/// `x+` / `x-` pairs), one slack per inequality row, one artificial per row
/// that needs one. The last column is the right-hand side. Row 0 holds the
/// active objective (phase 1: sum of artificials; phase 2: the user
/// objective expressed over standard columns).
struct Tableau {
    /// rows x cols, constraint rows only (objective handled separately).
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// basic variable (column index) of each constraint row.
    basis: Vec<usize>,
    /// map from standard column to (user variable, sign).
    col_map: Vec<(usize, f64)>,
    n_std: usize,
    n_slack: usize,
    n_art: usize,
    user_vars: usize,
    objective: Vec<f64>,
}

/// Pivot magnitudes below this are treated as zero when selecting rows.
const PIVOT_EPS: f64 = 1e-11;

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        // Standard columns: one per non-negative variable, two per free one.
        let mut col_map = Vec::new();
        for (i, &nn) in lp.nonneg.iter().enumerate() {
            col_map.push((i, 1.0));
            if !nn {
                col_map.push((i, -1.0));
            }
        }
        let n_std = col_map.len();
        let n_slack = lp.le_rows.len();
        let n_rows = lp.eq_rows.len() + lp.le_rows.len();

        let mut a = vec![vec![0.0; n_std + n_slack]; n_rows];
        let mut rhs = vec![0.0; n_rows];

        for (r, (row, b)) in lp.eq_rows.iter().chain(lp.le_rows.iter()).enumerate() {
            for (c, &(var, sign)) in col_map.iter().enumerate() {
                a[r][c] = row[var] * sign;
            }
            rhs[r] = *b;
        }
        for (k, r) in (lp.eq_rows.len()..n_rows).enumerate() {
            a[r][n_std + k] = 1.0;
        }

        // Normalize to rhs >= 0 so artificials can start basic at rhs.
        for r in 0..n_rows {
            if rhs[r] < 0.0 {
                rhs[r] = -rhs[r];
                for v in a[r].iter_mut() {
                    *v = -*v;
                }
            }
        }

        // Rows whose slack still has +1 after normalization can use it as the
        // initial basic variable; everything else gets an artificial.
        let mut basis = vec![usize::MAX; n_rows];
        let mut n_art = 0;
        for r in 0..n_rows {
            let slack_col = (n_std..n_std + n_slack).find(|&c| a[r][c] == 1.0);
            if let Some(c) = slack_col {
                basis[r] = c;
            } else {
                n_art += 1;
            }
        }
        for row in a.iter_mut() {
            row.reserve(n_art);
        }
        let mut art_cols = 0;
        for r in 0..n_rows {
            if basis[r] == usize::MAX {
                let col = n_std + n_slack + art_cols;
                for (rr, row) in a.iter_mut().enumerate() {
                    row.push(if rr == r { 1.0 } else { 0.0 });
                }
                basis[r] = col;
                art_cols += 1;
            }
        }
        debug_assert_eq!(art_cols, n_art);

        let mut objective = vec![0.0; n_std];
        for (c, &(var, sign)) in col_map.iter().enumerate() {
            objective[c] = lp.objective[var] * sign;
        }

        Tableau {
            a,
            rhs,
            basis,
            col_map,
            n_std,
            n_slack,
            n_art,
            user_vars: lp.num_vars,
            objective,
        }
    }

    fn n_cols(&self) -> usize {
        self.n_std + self.n_slack + self.n_art
    }

    /// Reduced-cost row for a cost vector over all columns.
    fn reduced_costs(&self, cost: &[f64]) -> (Vec<f64>, f64) {
        let n = self.n_cols();
        let mut red = cost.to_vec();
        let mut obj = 0.0;
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                obj += cb * self.rhs[r];
                for c in 0..n {
                    red[c] -= cb * self.a[r][c];
                }
            }
        }
        (red, obj)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        let inv = 1.0 / piv;
        for v in self.a[row].iter_mut() {
            *v *= inv;
        }
        self.rhs[row] *= inv;
        self.a[row][col] = 1.0; // exact after scaling
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            let factor = self.a[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..pivot_row.len() {
                self.a[r][c] -= factor * pivot_row[c];
            }
            self.a[r][col] = 0.0;
            self.rhs[r] -= factor * pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Run simplex iterations for `cost`, restricted to columns `< col_limit`
    /// entering the basis. Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], col_limit: usize) -> bool {
        // Bland's rule terminates in finitely many steps; the cap is a
        // belt-and-braces guard against numerical stalls.
        let max_iters = 50 * (self.a.len() + self.n_cols() + 10);
        for _ in 0..max_iters {
            let (red, _) = self.reduced_costs(cost);
            // Bland: entering column = lowest index with negative reduced cost.
            let entering = (0..col_limit).find(|&c| red[c] < -tol::MEMBERSHIP);
            let Some(col) = entering else {
                return true; // optimal
            };
            // Ratio test; ties broken by lowest basic variable index (Bland).
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                let coef = self.a[r][col];
                if coef > PIVOT_EPS {
                    let ratio = self.rhs[r] / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio < lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false, // unbounded in this column
            }
        }
        // Numerical stall: treat the incumbent as optimal. The systems here
        // are tiny; this path is not expected to be reached.
        true
    }

    fn solve(mut self) -> LpOutcome {
        let n = self.n_cols();

        // Phase 1: minimize the sum of artificial variables.
        if self.n_art > 0 {
            let mut cost = vec![0.0; n];
            for c in self.n_std + self.n_slack..n {
                cost[c] = 1.0;
            }
            self.optimize(&cost, n);
            let infeas: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &bv)| bv >= self.n_std + self.n_slack)
                .map(|(r, _)| self.rhs[r])
                .sum();
            if infeas > tol::MEMBERSHIP * 10.0 {
                return LpOutcome::Infeasible;
            }
            // Drive remaining artificials (basic at zero) out of the basis.
            for r in 0..self.a.len() {
                if self.basis[r] >= self.n_std + self.n_slack {
                    let col = (0..self.n_std + self.n_slack)
                        .find(|&c| self.a[r][c].abs() > PIVOT_EPS);
                    if let Some(c) = col {
                        self.pivot(r, c);
                    }
                    // A fully zero row is redundant; its artificial stays
                    // basic at level zero and never affects phase 2.
                }
            }
        }

        // Phase 2: the user objective over standard columns only.
        let mut cost = vec![0.0; n];
        cost[..self.n_std].copy_from_slice(&self.objective);
        if !self.optimize(&cost, self.n_std + self.n_slack) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![0.0; self.user_vars];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n_std {
                let (var, sign) = self.col_map[bv];
                x[var] += sign * self.rhs[r];
            }
        }
        let objective = x
            .iter()
            .zip(self.user_objective().iter())
            .map(|(xi, ci)| xi * ci)
            .sum::<f64>();
        LpOutcome::Optimal { x, objective }
    }

    fn user_objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.user_vars];
        for (col, &(var, sign)) in self.col_map.iter().enumerate() {
            // Each user variable's coefficient appears on its positive part.
            if sign > 0.0 {
                c[var] = self.objective[col];
            }
        }
        c
    }
}
