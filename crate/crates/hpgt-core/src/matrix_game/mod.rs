//! Exact solving of finite two-player zero-sum matrix games.
//!
//! The row player ("Alice") maximizes, the column player ("Bob") minimizes.
//! Values and optimal mixed strategies come from the classical LP
//! formulation: entries are shifted positive, Bob's normalized program
//! `max 1.y : G y <= 1, y >= 0` is solved, and Alice's strategy is read
//! off the constraint multipliers.

mod lp;

pub use lp::{solve_lp, Constraint, LinearProgram, LpOutcome, LpSolution, Objective, Relation};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which side of a zero-sum game a strategy or query refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    Alice,
    Bob,
}

/// Payoff to the row player for every (row, column) action pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("payoff matrix must have at least one row and column"));
        }
        let cols = rows[0].len();
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            if !r.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite entry")));
            }
            entries.extend(r);
        }
        Ok(PayoffMatrix { rows: nrows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("payoff matrix must have at least one row and column"));
        }
        Ok(PayoffMatrix { rows, cols, entries: vec![0.0; rows * cols] })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.entries[row * self.cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Upper bound `M` on the magnitude of payoffs.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn transpose_negated(&self) -> PayoffMatrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = -self.get(i, j);
            }
        }
        PayoffMatrix { rows: self.cols, cols: self.rows, entries }
    }
}

/// A probability vector over one player's actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    weights: Vec<f64>,
}

impl MixedStrategy {
    /// Weights must be nonnegative and sum to 1 within 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("mixed strategy must have at least one action"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("mixed strategy weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixed strategy weights sum to {sum}, expected 1"
            )));
        }
        Ok(MixedStrategy { weights })
    }

    /// Clamps tiny negatives to zero and rescales to an exact unit sum.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let mut w = raw;
        for v in w.iter_mut() {
            if !v.is_finite() {
                return Err(Error::numerical("non-finite strategy weight"));
            }
            if *v < 0.0 {
                if *v < -1e-7 {
                    return Err(Error::numerical(format!("strategy weight {v} is negative")));
                }
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(Error::numerical("strategy weights sum to zero"));
        }
        for v in w.iter_mut() {
            *v /= sum;
        }
        // Guard against residual rounding in the sum.
        let sum: f64 = w.iter().sum();
        let imax = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
        w[imax] += 1.0 - sum;
        MixedStrategy::new(w)
    }

    pub fn uniform(n: usize) -> Self {
        let mut w = vec![1.0 / n as f64; n];
        let sum: f64 = w.iter().sum();
        w[0] += 1.0 - sum;
        MixedStrategy { weights: w }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        MixedStrategy { weights: w }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Value and a pair of optimal mixed strategies for a matrix game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameSolution {
    pub value: f64,
    pub alice: MixedStrategy,
    pub bob: MixedStrategy,
}

/// Solves a zero-sum matrix game exactly (up to LP tolerances).
///
/// The returned strategies satisfy the saddle inequalities: Alice's mix
/// earns at least `value` against every Bob column and Bob's mix concedes
/// at most `value` against every Alice row, within 1e-9.
pub fn solve(matrix: &PayoffMatrix) -> Result<GameSolution> {
    // Single-line games have closed forms; skipping the LP also keeps the
    // AVC grids (hundreds of rows, one column) fast.
    if matrix.cols == 1 {
        let mut best = 0usize;
        for i in 1..matrix.rows {
            if matrix.get(i, 0) > matrix.get(best, 0) {
                best = i;
            }
        }
        return Ok(GameSolution {
            value: matrix.get(best, 0),
            alice: MixedStrategy::point_mass(matrix.rows, best),
            bob: MixedStrategy::point_mass(1, 0),
        });
    }
    if matrix.rows == 1 {
        let mut best = 0usize;
        for j in 1..matrix.cols {
            if matrix.get(0, j) < matrix.get(0, best) {
                best = j;
            }
        }
        return Ok(GameSolution {
            value: matrix.get(0, best),
            alice: MixedStrategy::point_mass(1, 0),
            bob: MixedStrategy::point_mass(matrix.cols, best),
        });
    }

    // Shift entries to be >= 1 so the normalized value 1/sum(y) is
    // positive and the LP is bounded and feasible.
    let shift = 1.0 + matrix.min_entry().abs();
    let objective = Objective::Maximize(vec![1.0; matrix.cols]);
    let constraints = (0..matrix.rows)
        .map(|i| {
            let coeffs = matrix.row(i).iter().map(|&g| g + shift).collect();
            Constraint::new(coeffs, Relation::Le, 1.0)
        })
        .collect();
    let outcome = solve_lp(&LinearProgram { objective, constraints })?;
    let sol = match outcome {
        LpOutcome::Optimal(s) => s,
        other => return Err(Error::numerical(format!("game LP was not optimal: {other:?}"))),
    };

    let sum_y: f64 = sol.x.iter().sum();
    if sum_y <= 0.0 {
        return Err(Error::numerical("game LP returned a zero strategy"));
    }
    let value = 1.0 / sum_y - shift;
    let bob = MixedStrategy::normalized(sol.x)?;
    let alice = MixedStrategy::normalized(sol.duals)?;
    Ok(GameSolution { value, alice, bob })
}

/// Best pure response for `responder` against a fixed opponent mix.
///
/// Returns the optimal expected payoff (to Alice) together with the
/// achieving action index; ties break to the lowest index.
pub fn best_response_value(
    matrix: &PayoffMatrix,
    opponent: &MixedStrategy,
    responder: Player,
) -> Result<(f64, usize)> {
    match responder {
        Player::Alice => {
            if opponent.len() != matrix.cols {
                return Err(Error::invalid(format!(
                    "opponent strategy has {} weights, expected {} columns",
                    opponent.len(),
                    matrix.cols
                )));
            }
            let mut best = (f64::NEG_INFINITY, 0usize);
            for i in 0..matrix.rows {
                let v: f64 = matrix
                    .row(i)
                    .iter()
                    .zip(opponent.weights())
                    .map(|(g, w)| g * w)
                    .sum();
                if v > best.0 {
                    best = (v, i);
                }
            }
            Ok(best)
        }
        Player::Bob => {
            if opponent.len() != matrix.rows {
                return Err(Error::invalid(format!(
                    "opponent strategy has {} weights, expected {} rows",
                    opponent.len(),
                    matrix.rows
                )));
            }
            let mut best = (f64::INFINITY, 0usize);
            for j in 0..matrix.cols {
                let v: f64 = (0..matrix.rows)
                    .map(|i| matrix.get(i, j) * opponent.weights()[i])
                    .sum();
                if v < best.0 {
                    best = (v, j);
                }
            }
            Ok(best)
        }
    }
}

/// Expected payoff to Alice under a pair of mixed strategies.
pub fn expected_payoff(matrix: &PayoffMatrix, alice: &MixedStrategy, bob: &MixedStrategy) -> f64 {
    let mut total = 0.0;
    for i in 0..matrix.rows {
        if alice.weights()[i] == 0.0 {
            continue;
        }
        let row: f64 = matrix
            .row(i)
            .iter()
            .zip(bob.weights())
            .map(|(g, w)| g * w)
            .sum();
        total += alice.weights()[i] * row;
    }
    total
}
