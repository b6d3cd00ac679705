//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here recomputes expected values by brute force, without
//! touching the LP path it is used to check.

#![allow(dead_code)]

use hpgt_core::belief::{Belief, Partition, StageGame};
use hpgt_core::matrix_game::PayoffMatrix;
use hpgt_core::simulator::TrialRng;

/// Two-state 2x2 trap game: one -1 entry whose position depends on the
/// state; u(p) = -p(1-p). Maximizer uninformed, minimizer informed.
pub fn minefield() -> StageGame {
    let t0 = PayoffMatrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let t1 = PayoffMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.0, -1.0]]).unwrap();
    StageGame::new(
        vec![t0, t1],
        Belief::uniform(2),
        Partition::trivial(2),
        Partition::discrete(2),
    )
    .unwrap()
}

/// Safe row pays (1, 2) in both states; the risky row pays (-4, -6) or
/// (8, 8). Neither player sees the state.
pub fn safe_risky() -> StageGame {
    let t0 = PayoffMatrix::from_rows(vec![vec![1.0, 2.0], vec![-4.0, -6.0]]).unwrap();
    let t1 = PayoffMatrix::from_rows(vec![vec![1.0, 2.0], vec![8.0, 8.0]]).unwrap();
    StageGame::new(
        vec![t0, t1],
        Belief::uniform(2),
        Partition::trivial(2),
        Partition::trivial(2),
    )
    .unwrap()
}

/// Positive mirror of the trap game: u(p) = p(1-p), concave.
pub fn treasure() -> StageGame {
    let t0 = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let t1 = PayoffMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
    StageGame::new(
        vec![t0, t1],
        Belief::uniform(2),
        Partition::trivial(2),
        Partition::discrete(2),
    )
    .unwrap()
}

/// Uniformly random matrix with integer entries in [lo, hi] and
/// dimensions in [1, max_dim] on each side.
pub fn random_int_matrix(rng: &mut TrialRng, max_dim: usize, lo: i64, hi: i64) -> PayoffMatrix {
    let rows = 1 + rng.sample_uniform_index(max_dim);
    let cols = 1 + rng.sample_uniform_index(max_dim);
    let span = (hi - lo + 1) as usize;
    let data = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| (lo + rng.sample_uniform_index(span) as i64) as f64)
                .collect()
        })
        .collect();
    PayoffMatrix::from_rows(data).unwrap()
}

/// Random two-state 2x2 game with entries on the half-integer lattice in
/// [-1, 1], uninformed maximizer, informed minimizer, random interior
/// prior.
pub fn random_two_state_game(rng: &mut TrialRng) -> StageGame {
    let entry = |rng: &mut TrialRng| (rng.sample_uniform_index(5) as f64 - 2.0) / 2.0;
    let table = |rng: &mut TrialRng| {
        PayoffMatrix::from_rows(vec![
            vec![entry(rng), entry(rng)],
            vec![entry(rng), entry(rng)],
        ])
        .unwrap()
    };
    let p = 0.05 + 0.9 * rng.next_f64();
    StageGame::new(
        vec![table(rng), table(rng)],
        Belief::new(vec![p, 1.0 - p]).unwrap(),
        Partition::trivial(2),
        Partition::discrete(2),
    )
    .unwrap()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (cell, pv) in a[row][col..n].iter_mut().zip(&pivot_row[col..n]) {
                    *cell -= f * pv;
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|&i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Game value by support enumeration: for every pair of equal-size
/// supports, solve the equalization systems for both players and accept
/// the first candidate that passes the global saddle check. Existence of
/// such a square pair is classical, so this always produces the value on
/// well-posed inputs.
pub fn oracle_game_value(matrix: &PayoffMatrix) -> Option<f64> {
    let m = matrix.rows();
    let k = matrix.cols();
    let tol = 1e-8;
    for size in 1..=m.min(k) {
        for rows in subsets_of_size(m, size) {
            for cols in subsets_of_size(k, size) {
                // Unknowns: weights over `rows` plus the value.
                let mut a = vec![vec![0.0; size + 1]; size + 1];
                let mut b = vec![0.0; size + 1];
                for (eq, &j) in cols.iter().enumerate() {
                    for (v, &i) in rows.iter().enumerate() {
                        a[eq][v] = matrix.get(i, j);
                    }
                    a[eq][size] = -1.0;
                }
                for cell in a[size][..size].iter_mut() {
                    *cell = 1.0;
                }
                b[size] = 1.0;
                let Some(xv) = solve_linear(a, b) else { continue };
                let (x, value) = (&xv[..size], xv[size]);
                if x.iter().any(|&w| w < -tol) {
                    continue;
                }

                let mut a = vec![vec![0.0; size + 1]; size + 1];
                let mut b = vec![0.0; size + 1];
                for (eq, &i) in rows.iter().enumerate() {
                    for (v, &j) in cols.iter().enumerate() {
                        a[eq][v] = matrix.get(i, j);
                    }
                    a[eq][size] = -1.0;
                }
                for cell in a[size][..size].iter_mut() {
                    *cell = 1.0;
                }
                b[size] = 1.0;
                let Some(yv) = solve_linear(a, b) else { continue };
                let (y, value_b) = (&yv[..size], yv[size]);
                if y.iter().any(|&w| w < -tol) || (value - value_b).abs() > tol {
                    continue;
                }

                // Global saddle: x guarantees >= value on every column,
                // y concedes <= value on every row.
                let x_ok = (0..k).all(|j| {
                    let e: f64 = rows.iter().zip(x).map(|(&i, &w)| w * matrix.get(i, j)).sum();
                    e >= value - tol
                });
                let y_ok = (0..m).all(|i| {
                    let e: f64 = cols.iter().zip(y).map(|(&j, &w)| w * matrix.get(i, j)).sum();
                    e <= value + tol
                });
                if x_ok && y_ok {
                    return Some(value);
                }
            }
        }
    }
    None
}

/// Lower convex hull of sampled points by monotone chain, returned as an
/// evaluator over the sampled x-range.
pub struct HullOracle {
    hull: Vec<(f64, f64)>,
}

impl HullOracle {
    pub fn from_samples(mut points: Vec<(f64, f64)>) -> HullOracle {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for p in points {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        HullOracle { hull }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = &self.hull;
        if x <= h[0].0 {
            return h[0].1;
        }
        for w in h.windows(2) {
            if x <= w[1].0 {
                let t = (x - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        h[h.len() - 1].1
    }
}

/// Dense 1-D sweep of u over two-state beliefs; the independent global
/// minimization oracle.
pub fn sweep_min_u(game: &StageGame, steps: usize) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=steps {
        let p = k as f64 / steps as f64;
        let b = Belief::new(vec![p, 1.0 - p]).unwrap();
        let v = hpgt_core::belief::u(game, &b).unwrap();
        if v < best.0 {
            best = (v, p);
        }
    }
    best
}

pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    h(p) + h(1.0 - p)
}
