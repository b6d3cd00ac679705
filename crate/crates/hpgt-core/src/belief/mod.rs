//! The one-stage value as a function on the belief simplex.
//!
//! A [`StageGame`] bundles the per-state payoff tables with a prior and
//! with each player's knowledge partition. For a belief `p` over states,
//! `u(p)` is the value of the matrix game with the `p`-averaged table.
//! The guarantee level [`v_sup`] is the minimum of `u` over beliefs
//! supported inside one of the maximizer's knowledge cells, minimized
//! across cells. It deliberately never reads the prior's masses or the
//! minimizer's partition: only the support structure matters, and the
//! implementation enforces that by construction.
//!
//! Global minimization of `u` has no special structure to exploit
//! (`u` is neither convex nor concave), so the search is an exhaustive
//! lattice scan followed by deterministic pairwise-transfer descent.
//! Results report the resolution they were computed at; no certified
//! global bound is claimed.

mod envelope;

pub use envelope::{cav_envelope, vex_decomposition, vex_envelope, Envelope, VexDecomposition};

use crate::error::{Error, Result};
use crate::grid::simplex_grid;
use crate::matrix_game::{self, PayoffMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A probability vector over the state set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Entries must be nonnegative and sum to 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("belief must cover at least one state"));
        }
        for (i, p) in probs.iter().enumerate() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::invalid(format!("belief entry {i} is {p}")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("belief sums to {sum}, expected 1")));
        }
        let probs = probs.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Belief { probs })
    }

    pub fn uniform(n: usize) -> Self {
        let mut probs = vec![1.0 / n as f64; n];
        let sum: f64 = probs.iter().sum();
        probs[0] += 1.0 - sum;
        Belief { probs }
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Belief { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices carrying mass above 1e-12.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 1e-12)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A partition of the state set into knowledge cells.
///
/// `cell_of[s]` is the cell a player is told when the state is `s`. Cell
/// ids are dense in `0..num_cells`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    cell_of: Vec<usize>,
    num_cells: usize,
}

impl Partition {
    pub fn from_cells(cell_of: Vec<usize>) -> Result<Self> {
        if cell_of.is_empty() {
            return Err(Error::invalid("partition must cover at least one state"));
        }
        let num_cells = cell_of.iter().max().unwrap() + 1;
        for c in 0..num_cells {
            if !cell_of.contains(&c) {
                return Err(Error::invalid(format!("partition cell {c} is empty")));
            }
        }
        Ok(Partition { cell_of, num_cells })
    }

    /// Every state in a single cell: no information.
    pub fn trivial(num_states: usize) -> Self {
        Partition { cell_of: vec![0; num_states], num_cells: 1 }
    }

    /// Singleton cells: full information.
    pub fn discrete(num_states: usize) -> Self {
        Partition { cell_of: (0..num_states).collect(), num_cells: num_states }
    }

    pub fn cell_of(&self, state: usize) -> usize {
        self.cell_of[state]
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_states(&self) -> usize {
        self.cell_of.len()
    }

    pub fn members(&self, cell: usize) -> Vec<usize> {
        (0..self.cell_of.len()).filter(|&s| self.cell_of[s] == cell).collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.num_cells == self.cell_of.len()
    }
}

/// A finite-state zero-sum stage game with a prior and side information.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageGame {
    tables: Vec<PayoffMatrix>,
    prior: Belief,
    alice_info: Partition,
    bob_info: Partition,
}

impl StageGame {
    /// Tables must share dimensions, every state must carry positive prior
    /// mass, and the partitions must cover the state set. Zero-mass states
    /// are rejected outright; normalize to the support before building.
    pub fn new(
        tables: Vec<PayoffMatrix>,
        prior: Belief,
        alice_info: Partition,
        bob_info: Partition,
    ) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::invalid("stage game needs at least one state"));
        }
        let (rows, cols) = (tables[0].rows(), tables[0].cols());
        for (s, t) in tables.iter().enumerate() {
            if t.rows() != rows || t.cols() != cols {
                return Err(Error::invalid(format!(
                    "table for state {s} is {}x{}, expected {rows}x{cols}",
                    t.rows(),
                    t.cols()
                )));
            }
        }
        if prior.len() != tables.len() {
            return Err(Error::invalid(format!(
                "prior covers {} states, expected {}",
                prior.len(),
                tables.len()
            )));
        }
        for (s, &p) in prior.probs().iter().enumerate() {
            if p <= 1e-12 {
                return Err(Error::invalid(format!(
                    "state {s} has prior mass {p}; every state must have positive mass"
                )));
            }
        }
        for (name, part) in [("alice", &alice_info), ("bob", &bob_info)] {
            if part.num_states() != tables.len() {
                return Err(Error::invalid(format!(
                    "{name} partition covers {} states, expected {}",
                    part.num_states(),
                    tables.len()
                )));
            }
        }
        Ok(StageGame { tables, prior, alice_info, bob_info })
    }

    pub fn num_states(&self) -> usize {
        self.tables.len()
    }

    pub fn num_alice_actions(&self) -> usize {
        self.tables[0].rows()
    }

    pub fn num_bob_actions(&self) -> usize {
        self.tables[0].cols()
    }

    pub fn table(&self, state: usize) -> &PayoffMatrix {
        &self.tables[state]
    }

    pub fn tables(&self) -> &[PayoffMatrix] {
        &self.tables
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn alice_info(&self) -> &Partition {
        &self.alice_info
    }

    pub fn bob_info(&self) -> &Partition {
        &self.bob_info
    }

    /// Payoff magnitude bound `M` across all states.
    pub fn payoff_bound(&self) -> f64 {
        self.tables.iter().fold(0.0, |m, t| m.max(t.max_abs_entry()))
    }

    pub fn with_prior(&self, prior: Belief) -> Result<StageGame> {
        StageGame::new(self.tables.clone(), prior, self.alice_info.clone(), self.bob_info.clone())
    }

    pub fn with_partitions(&self, alice: Partition, bob: Partition) -> Result<StageGame> {
        StageGame::new(self.tables.clone(), self.prior.clone(), alice, bob)
    }
}

/// Entrywise mixture of the state tables under `belief`.
pub fn average_table(game: &StageGame, belief: &Belief) -> Result<PayoffMatrix> {
    if belief.len() != game.num_states() {
        return Err(Error::invalid(format!(
            "belief covers {} states, expected {}",
            belief.len(),
            game.num_states()
        )));
    }
    let mut avg = PayoffMatrix::zeros(game.num_alice_actions(), game.num_bob_actions())?;
    for (t, &p) in game.tables.iter().zip(belief.probs()) {
        if p == 0.0 {
            continue;
        }
        for i in 0..avg.rows() {
            for j in 0..avg.cols() {
                avg.set(i, j, avg.get(i, j) + p * t.get(i, j));
            }
        }
    }
    Ok(avg)
}

/// Value of the one-stage game with the `belief`-averaged payoff table.
pub fn u(game: &StageGame, belief: &Belief) -> Result<f64> {
    Ok(matrix_game::solve(&average_table(game, belief)?)?.value)
}

/// Search controls for the simplex minimization of `u`.
#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions {
    /// Lattice subdivisions per edge; `None` picks a default by dimension
    /// (200 for up to 3 states in the support, 50 for 4, 24 beyond).
    pub resolution: Option<usize>,
    /// Rounds of pairwise-transfer descent, one step-halving per round.
    pub refinement_rounds: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { resolution: None, refinement_rounds: 20 }
    }
}

fn default_resolution(dim: usize) -> usize {
    match dim {
        0..=3 => 200,
        4 => 50,
        _ => 24,
    }
}

/// Global minimum of `u` over beliefs supported in `support`.
///
/// Exhaustive lattice scan at `grid_resolution`, then coordinate-descent
/// refinement that moves mass between support coordinates with a halving
/// step. The returned value is the minimum over every point the search
/// evaluated; ties on the lattice break to the lowest enumeration index,
/// so results are deterministic and independent of evaluation order.
pub fn min_u_over_subsimplex(
    game: &StageGame,
    support: &[usize],
    grid_resolution: usize,
    refinement_rounds: usize,
) -> Result<(f64, Belief)> {
    if support.is_empty() {
        return Err(Error::invalid("support must be non-empty"));
    }
    let n = game.num_states();
    let mut seen = vec![false; n];
    for &s in support {
        if s >= n {
            return Err(Error::invalid(format!("support state {s} out of range (< {n})")));
        }
        if seen[s] {
            return Err(Error::invalid(format!("support state {s} repeated")));
        }
        seen[s] = true;
    }
    let dim = support.len();

    if dim == 1 {
        let belief = Belief::point_mass(n, support[0]);
        let value = u(game, &belief)?;
        return Ok((value, belief));
    }

    let embed = |local: &[f64]| -> Belief {
        let mut probs = vec![0.0; n];
        for (&s, &p) in support.iter().zip(local) {
            probs[s] = p;
        }
        Belief { probs }
    };

    let points = simplex_grid(dim, grid_resolution)?;
    let evaluated: Vec<f64> = points
        .par_iter()
        .map(|local| u(game, &embed(local)))
        .collect::<Result<_>>()?;
    let (mut best_idx, mut best_val) = (0usize, evaluated[0]);
    for (i, &v) in evaluated.iter().enumerate().skip(1) {
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }

    // Pairwise mass transfers keep iterates on the sub-simplex exactly.
    let mut best_local = points[best_idx].clone();
    let mut step = 1.0 / grid_resolution as f64;
    for _ in 0..refinement_rounds {
        for from in 0..dim {
            for to in 0..dim {
                if from == to || best_local[from] <= 0.0 {
                    continue;
                }
                let moved = step.min(best_local[from]);
                let mut cand = best_local.clone();
                cand[from] -= moved;
                cand[to] += moved;
                let v = u(game, &embed(&cand))?;
                if v < best_val {
                    best_val = v;
                    best_local = cand;
                }
            }
        }
        step *= 0.5;
    }

    Ok((best_val, embed(&best_local)))
}

/// The guarantee level and the cell/belief witness achieving it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VSup {
    pub value: f64,
    /// Knowledge cell of the maximizer's partition achieving the minimum.
    pub cell: usize,
    /// Belief within that cell's sub-simplex achieving the minimum.
    pub belief: Belief,
    /// Lattice resolution the search ran at.
    pub resolution: usize,
}

/// Highest payoff guaranteeable with probability approaching one.
///
/// Minimizes `u` over each cell of the maximizer's partition and takes
/// the smallest. The prior's masses and the minimizer's partition are
/// never consulted; two games differing only in those fields produce
/// bit-identical results.
pub fn v_sup(game: &StageGame) -> Result<VSup> {
    v_sup_with(game, &MinimizeOptions::default())
}

pub fn v_sup_with(game: &StageGame, options: &MinimizeOptions) -> Result<VSup> {
    let mut best: Option<VSup> = None;
    for cell in 0..game.alice_info.num_cells() {
        let members = game.alice_info.members(cell);
        let resolution = options.resolution.unwrap_or_else(|| default_resolution(members.len()));
        let (value, belief) =
            min_u_over_subsimplex(game, &members, resolution, options.refinement_rounds)?;
        let better = match &best {
            None => true,
            Some(b) => value < b.value,
        };
        if better {
            best = Some(VSup { value, cell, belief, resolution });
        }
    }
    Ok(best.expect("partition has at least one cell"))
}
