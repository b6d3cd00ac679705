//! Dense two-phase simplex with Bland's rule.
//!
//! Every linear program in this crate is tiny (tens of rows, at most a few
//! tens of thousands of columns), so a plain dense tableau wins on
//! robustness and debuggability. Bland's rule makes cycling impossible at
//! the cost of a few extra pivots, which is irrelevant at these sizes.

use crate::error::{Error, Result};

/// Pivoting / feasibility threshold for the simplex tableau.
const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

#[derive(Clone, Debug)]
pub enum Objective {
    Minimize(Vec<f64>),
    Maximize(Vec<f64>),
}

impl Objective {
    fn costs(&self) -> &[f64] {
        match self {
            Objective::Minimize(c) | Objective::Maximize(c) => c,
        }
    }

    fn is_max(&self) -> bool {
        matches!(self, Objective::Maximize(_))
    }
}

/// A finite linear program over nonnegative variables in inequality form.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: f64,
    /// Primal optimizer, one entry per structural variable.
    pub x: Vec<f64>,
    /// One multiplier per constraint: the sensitivity of the optimal value
    /// to that constraint's right-hand side. For `max c.x : Ax <= b` these
    /// are the usual nonnegative dual variables of `min b.y : A'y >= c`.
    pub duals: Vec<f64>,
}

/// Infeasible and unbounded are ordinary outcomes, not panics.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.costs().len();
    if n == 0 {
        return Err(Error::invalid("linear program has no variables"));
    }
    if !lp.objective.costs().iter().all(|c| c.is_finite()) {
        return Err(Error::invalid("objective has non-finite coefficients"));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(Error::invalid(format!(
                "constraint {i} has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if !c.coeffs.iter().all(|v| v.is_finite()) || !c.rhs.is_finite() {
            return Err(Error::invalid(format!("constraint {i} has non-finite data")));
        }
    }

    let minimize: Vec<f64> = if lp.objective.is_max() {
        lp.objective.costs().iter().map(|c| -c).collect()
    } else {
        lp.objective.costs().to_vec()
    };

    let mut tab = Tableau::build(n, &lp.constraints);
    if !tab.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    let mut phase2 = vec![0.0; tab.ncols];
    phase2[..n].copy_from_slice(&minimize);
    tab.set_objective(&phase2);
    if !tab.iterate()? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[r][tab.ncols];
        }
    }
    let mut value: f64 = x.iter().zip(&minimize).map(|(xi, ci)| xi * ci).sum();

    // Multipliers read off the reduced costs of each row's unit column.
    let mut duals = Vec::with_capacity(lp.constraints.len());
    for (&(col, coef), &flip) in tab.unit_col.iter().zip(&tab.flipped) {
        let mut y = -tab.obj[col] * coef;
        if flip {
            y = -y;
        }
        duals.push(y);
    }

    if lp.objective.is_max() {
        value = -value;
        for d in duals.iter_mut() {
            *d = -*d;
        }
    }

    Ok(LpOutcome::Optimal(LpSolution { value, x, duals }))
}

struct Tableau {
    /// m rows of length ncols + 1; the trailing entry is the rhs.
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    n_structural: usize,
    /// Columns barred from entering the basis (artificials in phase 2).
    barred: Vec<bool>,
    artificial: Vec<bool>,
    /// Per original constraint: (column with a +-1 unit coefficient, that
    /// coefficient) in the row as built, used for dual extraction.
    unit_col: Vec<(usize, f64)>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn build(n: usize, constraints: &[Constraint]) -> Tableau {
        let m = constraints.len();
        let mut n_slack = 0usize;
        let mut n_art = 0usize;
        let mut rels = Vec::with_capacity(m);
        let mut flipped = vec![false; m];
        for (i, c) in constraints.iter().enumerate() {
            let mut rel = c.relation;
            if c.rhs < 0.0 {
                flipped[i] = true;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            match rel {
                Relation::Le => n_slack += 1,
                Relation::Ge => {
                    n_slack += 1;
                    n_art += 1;
                }
                Relation::Eq => n_art += 1,
            }
            rels.push(rel);
        }
        let ncols = n + n_slack + n_art;
        let mut rows = vec![vec![0.0; ncols + 1]; m];
        let mut basis = vec![0usize; m];
        let mut artificial = vec![false; ncols];
        let mut unit_col = vec![(0usize, 0.0); m];

        let mut slack_at = n;
        let mut art_at = n + n_slack;
        for (i, c) in constraints.iter().enumerate() {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            for (j, &a) in c.coeffs.iter().enumerate() {
                rows[i][j] = sign * a;
            }
            rows[i][ncols] = sign * c.rhs;
            match rels[i] {
                Relation::Le => {
                    rows[i][slack_at] = 1.0;
                    basis[i] = slack_at;
                    unit_col[i] = (slack_at, 1.0);
                    slack_at += 1;
                }
                Relation::Ge => {
                    rows[i][slack_at] = -1.0;
                    unit_col[i] = (slack_at, -1.0);
                    slack_at += 1;
                    rows[i][art_at] = 1.0;
                    artificial[art_at] = true;
                    basis[i] = art_at;
                    art_at += 1;
                }
                Relation::Eq => {
                    rows[i][art_at] = 1.0;
                    artificial[art_at] = true;
                    basis[i] = art_at;
                    unit_col[i] = (art_at, 1.0);
                    art_at += 1;
                }
            }
        }

        Tableau {
            rows,
            obj: vec![0.0; ncols + 1],
            basis,
            ncols,
            n_structural: n,
            barred: vec![false; ncols],
            artificial,
            unit_col,
            flipped,
        }
    }

    fn set_objective(&mut self, costs: &[f64]) {
        debug_assert_eq!(costs.len(), self.ncols);
        self.obj[..self.ncols].copy_from_slice(costs);
        self.obj[self.ncols] = 0.0;
        for r in 0..self.rows.len() {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = self.rows[r].clone();
                for (o, v) in self.obj.iter_mut().zip(&row) {
                    *o -= cb * v;
                }
            }
        }
    }

    /// Returns false when the LP is unbounded in the current objective.
    fn iterate(&mut self) -> Result<bool> {
        let m = self.rows.len();
        let max_iters = 2000 + 50 * (self.ncols + m);
        for _ in 0..max_iters {
            // Bland: entering column is the lowest-index improving one.
            let mut enter = None;
            for j in 0..self.ncols {
                if !self.barred[j] && self.obj[j] < -EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return Ok(true) };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][j];
                if a > EPS {
                    let ratio = self.rows[r][self.ncols] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - EPS
                                || (ratio < lratio + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Ok(false) };
            self.pivot(r, j);
        }
        Err(Error::numerical("simplex exceeded its iteration budget"))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Returns false when no feasible point exists.
    fn phase_one(&mut self) -> Result<bool> {
        if !self.artificial.iter().any(|&a| a) {
            return Ok(true);
        }
        let costs: Vec<f64> = (0..self.ncols)
            .map(|j| if self.artificial[j] { 1.0 } else { 0.0 })
            .collect();
        self.set_objective(&costs);
        if !self.iterate()? {
            return Err(Error::numerical("phase-1 objective unbounded"));
        }
        let infeas: f64 = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| self.artificial[b])
            .map(|(r, _)| self.rows[r][self.ncols])
            .sum();
        if infeas > 1e-7 {
            return Ok(false);
        }
        // Drive zero-level artificials out of the basis where a pivot
        // exists; rows without one are redundant and stay inert.
        for r in 0..self.rows.len() {
            if self.artificial[self.basis[r]] {
                let col = (0..self.ncols)
                    .find(|&j| !self.artificial[j] && self.rows[r][j].abs() > EPS);
                if let Some(j) = col {
                    self.pivot(r, j);
                }
            }
        }
        for j in 0..self.ncols {
            if self.artificial[j] {
                self.barred[j] = true;
            }
        }
        let _ = self.n_structural;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> LpSolution {
        match solve_lp(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn bounded_maximum_of_single_variable() {
        // maximize v subject to v <= 1, v <= 2
        let lp = LinearProgram {
            objective: Objective::Maximize(vec![1.0]),
            constraints: vec![
                Constraint::new(vec![1.0], Relation::Le, 1.0),
                Constraint::new(vec![1.0], Relation::Le, 2.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_constraints() {
        // minimize x0 + 2 x1 subject to x0 + x1 = 1, x0 >= 0.25
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![1.0, 2.0]),
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0),
                Constraint::new(vec![1.0, 0.0], Relation::Ge, 0.25),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 1.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert!(s.x[1].abs() < 1e-9);
    }

    #[test]
    fn infeasible_is_reported_not_panicked() {
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![1.0]),
            constraints: vec![
                Constraint::new(vec![1.0], Relation::Le, 1.0),
                Constraint::new(vec![1.0], Relation::Ge, 2.0),
            ],
        };
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn unbounded_is_reported_not_panicked() {
        let lp = LinearProgram {
            objective: Objective::Maximize(vec![1.0]),
            constraints: vec![Constraint::new(vec![-1.0], Relation::Le, 1.0)],
        };
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn duals_of_max_problem_are_nonnegative_multipliers() {
        // max y1 + y2 s.t. 3y1 + y2 <= 1, y1 + 3y2 <= 1 (shifted pennies).
        let lp = LinearProgram {
            objective: Objective::Maximize(vec![1.0, 1.0]),
            constraints: vec![
                Constraint::new(vec![3.0, 1.0], Relation::Le, 1.0),
                Constraint::new(vec![1.0, 3.0], Relation::Le, 1.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 0.5).abs() < 1e-9);
        assert!((s.x[0] - 0.25).abs() < 1e-9);
        assert!((s.duals[0] - 0.25).abs() < 1e-9);
        assert!((s.duals[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn duals_report_rhs_sensitivity_for_ge_and_eq_rows() {
        // min 2x0 + x1  s.t.  x0 + x1 >= 4, x0 = 1.
        // Optimum (1, 3), value 5. Raising the >= rhs by one adds one
        // unit of x1 (cost 1); raising the = rhs swaps x1 for x0 (net 1).
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![2.0, 1.0]),
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], Relation::Ge, 4.0),
                Constraint::new(vec![1.0, 0.0], Relation::Eq, 1.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 5.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9 && (s.x[1] - 3.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9, "duals {:?}", s.duals);
        assert!((s.duals[1] - 1.0).abs() < 1e-9, "duals {:?}", s.duals);

        // Same feasible set written with a negative rhs (flipped row):
        // -x0 - x1 <= -4 has sensitivity -1 to its own rhs.
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![2.0, 1.0]),
            constraints: vec![
                Constraint::new(vec![-1.0, -1.0], Relation::Le, -4.0),
                Constraint::new(vec![1.0, 0.0], Relation::Eq, 1.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 5.0).abs() < 1e-9);
        assert!((s.duals[0] + 1.0).abs() < 1e-9, "duals {:?}", s.duals);
    }

    #[test]
    fn redundant_equality_rows_are_tolerated() {
        // x0 + x1 = 1 stated twice.
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![1.0, 3.0]),
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0),
                Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0),
            ],
        };
        let s = optimal(&lp);
        assert!((s.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_invalid_input() {
        let lp = LinearProgram {
            objective: Objective::Minimize(vec![1.0, 1.0]),
            constraints: vec![Constraint::new(vec![1.0], Relation::Le, 1.0)],
        };
        assert!(matches!(solve_lp(&lp), Err(Error::InvalidInput(_))));
    }
}
