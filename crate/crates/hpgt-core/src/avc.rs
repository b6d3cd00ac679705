//! Capacity of a compound arbitrarily-varying channel, evaluated through
//! the game machinery.
//!
//! The channel `p(y|x,a,s)` has an encoder input `x`, an adversary input
//! `a`, and a state `s` drawn once and fixed. Encoder and adversary hold
//! partial state knowledge through partitions. Capacity is the nested
//! program: over encoder knowledge cells, over state beliefs supported in
//! the cell, over adversary input distributions, the adversary minimizes
//! and the encoder maximizes `I(X; YA | S)` in bits. Discretizing the
//! encoder's input distributions to a finite grid turns the inner min-max
//! into a zero-sum matrix game whose state tables are conditional mutual
//! informations, so the whole expression is exactly a guarantee level of
//! that auxiliary game and is computed as one.

use crate::belief::{self, Belief, MinimizeOptions, Partition, StageGame};
use crate::error::{Error, Result};
use crate::grid::{simplex_grid, simplex_grid_size};
use crate::matrix_game::{self, MixedStrategy, PayoffMatrix, Player};
use serde::{Deserialize, Serialize};

/// Conditional law `p(y|x,a,s)` with alphabets and side information.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelSpec {
    x_size: usize,
    y_size: usize,
    a_size: usize,
    /// Indexed `[state][adversary][input][output]`.
    law: Vec<Vec<Vec<Vec<f64>>>>,
    state_prior: Belief,
    encoder_info: Partition,
    adversary_info: Partition,
}

impl ChannelSpec {
    pub fn new(
        law: Vec<Vec<Vec<Vec<f64>>>>,
        state_prior: Belief,
        encoder_info: Partition,
        adversary_info: Partition,
    ) -> Result<Self> {
        if law.is_empty() || law[0].is_empty() || law[0][0].is_empty() || law[0][0][0].is_empty() {
            return Err(Error::invalid("channel law must have non-empty alphabets"));
        }
        let states = law.len();
        let a_size = law[0].len();
        let x_size = law[0][0].len();
        let y_size = law[0][0][0].len();
        for (s, per_a) in law.iter().enumerate() {
            if per_a.len() != a_size {
                return Err(Error::invalid(format!("state {s} has a ragged adversary axis")));
            }
            for (a, per_x) in per_a.iter().enumerate() {
                if per_x.len() != x_size {
                    return Err(Error::invalid(format!("slice ({s},{a}) has a ragged input axis")));
                }
                for (x, py) in per_x.iter().enumerate() {
                    if py.len() != y_size {
                        return Err(Error::invalid(format!(
                            "slice ({s},{a},{x}) has a ragged output axis"
                        )));
                    }
                    let mut sum = 0.0;
                    for (y, &p) in py.iter().enumerate() {
                        if !p.is_finite() || p < -1e-12 {
                            return Err(Error::invalid(format!(
                                "law entry ({s},{a},{x},{y}) is {p}"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(Error::invalid(format!(
                            "law slice ({s},{a},{x}) sums to {sum}, expected 1"
                        )));
                    }
                }
            }
        }
        if state_prior.len() != states {
            return Err(Error::invalid(format!(
                "state prior covers {} states, law has {states}",
                state_prior.len()
            )));
        }
        for (s, &p) in state_prior.probs().iter().enumerate() {
            if p <= 1e-12 {
                return Err(Error::invalid(format!(
                    "state {s} has prior mass {p}; every state needs positive mass"
                )));
            }
        }
        for (name, part) in [("encoder", &encoder_info), ("adversary", &adversary_info)] {
            if part.num_states() != states {
                return Err(Error::invalid(format!(
                    "{name} partition covers {} states, law has {states}",
                    part.num_states()
                )));
            }
        }
        Ok(ChannelSpec { x_size, y_size, a_size, law, state_prior, encoder_info, adversary_info })
    }

    pub fn num_states(&self) -> usize {
        self.law.len()
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn state_prior(&self) -> &Belief {
        &self.state_prior
    }

    pub fn encoder_info(&self) -> &Partition {
        &self.encoder_info
    }

    pub fn adversary_info(&self) -> &Partition {
        &self.adversary_info
    }

    pub fn law(&self) -> &Vec<Vec<Vec<Vec<f64>>>> {
        &self.law
    }

    pub fn prob(&self, s: usize, a: usize, x: usize, y: usize) -> f64 {
        self.law[s][a][x][y]
    }
}

/// Finite family of encoder input distributions with a guaranteed
/// total-variation covering radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputGrid {
    points: Vec<Vec<f64>>,
    mesh: f64,
}

const MAX_INPUT_GRID_POINTS: usize = 200_000;

impl InputGrid {
    pub fn new(points: Vec<Vec<f64>>, mesh: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("input grid must be non-empty"));
        }
        let dim = points[0].len();
        let mut seen = std::collections::HashSet::new();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::invalid(format!("grid point {i} has a mismatched dimension")));
            }
            validate_distribution("grid point", p)?;
            if !seen.insert(p.iter().map(|&v| (v * 1e12).round() as i64).collect::<Vec<_>>()) {
                return Err(Error::invalid(format!("grid point {i} is a duplicate")));
            }
        }
        if mesh <= 0.0 || mesh.is_nan() {
            return Err(Error::invalid("mesh must be positive"));
        }
        Ok(InputGrid { points, mesh })
    }

    /// Uniform lattice over the input simplex with covering radius at
    /// most `target_mesh` in total variation. A mesh of `1/k` over a
    /// binary alphabet yields the k+1 equispaced points.
    pub fn lattice(x_size: usize, target_mesh: f64) -> Result<Self> {
        if x_size == 0 {
            return Err(Error::invalid("input alphabet must be non-empty"));
        }
        if target_mesh <= 0.0 || target_mesh.is_nan() {
            return Err(Error::invalid("mesh must be positive"));
        }
        if x_size == 1 || target_mesh >= 1.0 {
            // Any distribution is within TV 1 of the uniform one.
            return Ok(InputGrid {
                points: vec![vec![1.0 / x_size as f64; x_size]],
                mesh: target_mesh,
            });
        }
        // A resolution-k lattice covers within (d-1)/(2k); the 1/mesh
        // floor keeps the binary mesh-1/k convention.
        let need = ((x_size - 1) as f64 / 2.0).max(1.0) / target_mesh;
        let k = need.ceil() as usize;
        simplex_grid_size(x_size, k)
            .filter(|&c| c <= MAX_INPUT_GRID_POINTS as u128)
            .ok_or_else(|| {
                Error::limit(format!(
                    "mesh {target_mesh} needs more than {MAX_INPUT_GRID_POINTS} grid points"
                ))
            })?;
        let points = simplex_grid(x_size, k)?;
        let radius = (x_size - 1) as f64 / (2.0 * k as f64);
        Ok(InputGrid { points, mesh: radius.min(target_mesh) })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Replaces a grid by one with covering radius at most `target_mesh`.
/// A grid already satisfying the target is returned unchanged.
pub fn refine_grid(channel: &ChannelSpec, grid: &InputGrid, target_mesh: f64) -> Result<InputGrid> {
    if target_mesh <= 0.0 || target_mesh.is_nan() {
        return Err(Error::invalid("target mesh must be positive"));
    }
    if grid.mesh <= target_mesh {
        return Ok(grid.clone());
    }
    InputGrid::lattice(channel.x_size, target_mesh)
}

fn validate_distribution(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid(format!("{name} is empty")));
    }
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || v < -1e-12 {
            return Err(Error::invalid(format!("{name} entry {i} is {v}")));
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn xlog2(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// `I(X; Y | s, a)` in bits for one channel slice under input `px`.
fn slice_mi(channel: &ChannelSpec, s: usize, a: usize, px: &[f64]) -> f64 {
    let mut py = vec![0.0; channel.y_size];
    for (x, &wx) in px.iter().enumerate() {
        if wx == 0.0 {
            continue;
        }
        for (y, mass) in py.iter_mut().enumerate() {
            *mass += wx * channel.prob(s, a, x, y);
        }
    }
    let mut mi = 0.0;
    for (x, &wx) in px.iter().enumerate() {
        if wx == 0.0 {
            continue;
        }
        for (y, &marginal) in py.iter().enumerate() {
            let joint = wx * channel.prob(s, a, x, y);
            if joint > 0.0 {
                mi += joint * (joint / (wx * marginal)).log2();
            }
        }
    }
    mi.max(0.0)
}

/// `I(X; YA | S)` in bits under `p(s) p(a) p(x) p(y|x,a,s)`, with the
/// `0 log 0 = 0` convention; zero-mass states contribute zero.
pub fn mutual_information(
    channel: &ChannelSpec,
    px: &[f64],
    pa: &[f64],
    ps: &Belief,
) -> Result<f64> {
    if px.len() != channel.x_size {
        return Err(Error::invalid(format!(
            "input distribution covers {} symbols, alphabet has {}",
            px.len(),
            channel.x_size
        )));
    }
    if pa.len() != channel.a_size {
        return Err(Error::invalid(format!(
            "adversary distribution covers {} symbols, alphabet has {}",
            pa.len(),
            channel.a_size
        )));
    }
    if ps.len() != channel.num_states() {
        return Err(Error::invalid(format!(
            "state belief covers {} states, channel has {}",
            ps.len(),
            channel.num_states()
        )));
    }
    validate_distribution("input distribution", px)?;
    validate_distribution("adversary distribution", pa)?;

    let mut total = 0.0;
    for (s, &ws) in ps.probs().iter().enumerate() {
        if ws == 0.0 {
            continue;
        }
        // I = H(YA) - H(YA | X), expanded so zero cells drop out.
        let mut pya = vec![0.0; channel.y_size * channel.a_size];
        for (a, &wa) in pa.iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            for y in 0..channel.y_size {
                let m: f64 = px
                    .iter()
                    .enumerate()
                    .map(|(x, &wx)| wx * channel.prob(s, a, x, y))
                    .sum();
                pya[y * channel.a_size + a] = wa * m;
            }
        }
        let mut h_out = 0.0;
        for &p in &pya {
            h_out -= xlog2(p);
        }
        let mut h_out_given_x = 0.0;
        for (x, &wx) in px.iter().enumerate() {
            if wx == 0.0 {
                continue;
            }
            for (a, &wa) in pa.iter().enumerate() {
                if wa == 0.0 {
                    continue;
                }
                for y in 0..channel.y_size {
                    let cond = wa * channel.prob(s, a, x, y);
                    h_out_given_x -= wx * xlog2(cond);
                }
            }
        }
        total += ws * (h_out - h_out_given_x).max(0.0);
    }
    Ok(total)
}

/// The auxiliary zero-sum stage game: the encoder picks a grid input
/// distribution, the adversary picks a channel input, and the state-`s`
/// payoff is `I(pi; Y | s, a)`. The encoder seats as the maximizer with
/// the encoder partition, the adversary as the minimizer with the
/// adversary partition.
pub fn build_auxiliary_game(channel: &ChannelSpec, grid: &InputGrid) -> Result<StageGame> {
    if grid.is_empty() {
        return Err(Error::invalid("input grid must be non-empty"));
    }
    if grid.points[0].len() != channel.x_size {
        return Err(Error::invalid(format!(
            "grid points cover {} symbols, alphabet has {}",
            grid.points[0].len(),
            channel.x_size
        )));
    }
    let tables = (0..channel.num_states())
        .map(|s| {
            let rows = grid
                .points
                .iter()
                .map(|pi| (0..channel.a_size).map(|a| slice_mi(channel, s, a, pi)).collect())
                .collect();
            PayoffMatrix::from_rows(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    StageGame::new(
        tables,
        channel.state_prior.clone(),
        channel.encoder_info.clone(),
        channel.adversary_info.clone(),
    )
}

/// Capacity value with the witnesses that achieve it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Bits per channel use.
    pub bits: f64,
    /// Minimizing encoder knowledge cell.
    pub witness_cell: usize,
    /// Minimizing state belief within that cell.
    pub witness_belief: Belief,
    /// Minimizing adversary input distribution at the witness belief.
    pub witness_adversary: MixedStrategy,
    /// Maximizing encoder input distribution (a grid member).
    pub witness_input: Vec<f64>,
    pub witness_input_index: usize,
    pub grid_points: usize,
    pub grid_mesh: f64,
    pub belief_resolution: usize,
}

const MAX_CAPACITY_WORK: u128 = 50_000_000;

/// Evaluates the capacity program on a finite input grid.
///
/// The adversary side is solved exactly as a matrix-game LP over the grid
/// tables, the belief minimization runs on the simplex lattice at
/// `belief_resolution` with descent refinement, and encoder cells are
/// scanned exhaustively. Witnesses must reproduce the value through
/// [`mutual_information`] within 1e-6 or the call fails.
pub fn capacity(
    channel: &ChannelSpec,
    grid: &InputGrid,
    belief_resolution: usize,
    refinement_rounds: usize,
) -> Result<CapacityResult> {
    let work = grid.len() as u128
        * channel.a_size as u128
        * channel.num_states() as u128
        * channel.x_size as u128
        * channel.y_size as u128;
    if work > MAX_CAPACITY_WORK {
        return Err(Error::limit(format!(
            "auxiliary game needs {work} mutual-information cells, cap is {MAX_CAPACITY_WORK}"
        )));
    }

    let aux = build_auxiliary_game(channel, grid)?;
    let vs = belief::v_sup_with(
        &aux,
        &MinimizeOptions { resolution: Some(belief_resolution), refinement_rounds },
    )?;

    let table = belief::average_table(&aux, &vs.belief)?;
    let sol = matrix_game::solve(&table)?;
    let (_, row) = matrix_game::best_response_value(&table, &sol.bob, Player::Alice)?;
    let bits = vs.value.max(0.0);

    let replug = mutual_information(channel, &grid.points[row], sol.bob.weights(), &vs.belief)?;
    if (replug - bits).abs() > 1e-6 {
        return Err(Error::numerical(format!(
            "witnesses reproduce {replug} bits, capacity search found {bits}"
        )));
    }

    Ok(CapacityResult {
        bits,
        witness_cell: vs.cell,
        witness_belief: vs.belief,
        witness_adversary: sol.bob,
        witness_input: grid.points[row].clone(),
        witness_input_index: row,
        grid_points: grid.len(),
        grid_mesh: grid.mesh,
        belief_resolution,
    })
}
