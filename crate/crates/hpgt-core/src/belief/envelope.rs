//! Grid-backed convex and concave envelopes of `u` on the belief simplex.
//!
//! An envelope is not a symbolic object; it is an evaluator. The grid
//! points and their `u` values are precomputed, and a query at `p` solves
//! the small LP over mixture weights of grid points that reproduce `p`.
//! For the convex (lower) envelope the mixture value is minimized, for the
//! concave (upper) envelope maximized. The supporting weights of the
//! minimizing LP double as the decomposition used by state-revealing
//! strategies.

use super::{u, Belief, StageGame};
use crate::error::{Error, Result};
use crate::grid::simplex_grid;
use crate::matrix_game::{
    solve_lp, Constraint, LinearProgram, LpOutcome, Objective, Relation,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EnvelopeKind {
    Vex,
    Cav,
}

/// Pointwise evaluator for `vex u` or `cav u` at a fixed grid resolution.
#[derive(Clone, Debug)]
pub struct Envelope {
    kind: EnvelopeKind,
    dim: usize,
    resolution: usize,
    grid: Vec<Belief>,
    values: Vec<f64>,
}

impl Envelope {
    fn build(game: &StageGame, resolution: usize, kind: EnvelopeKind) -> Result<Envelope> {
        if resolution < 2 {
            return Err(Error::invalid("envelope resolution must be at least 2"));
        }
        let dim = game.num_states();
        let points = simplex_grid(dim, resolution)?;
        let values: Vec<f64> = points
            .par_iter()
            .map(|p| u(game, &Belief::new(p.clone())?))
            .collect::<Result<_>>()?;
        let grid = points
            .into_iter()
            .map(Belief::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Envelope { kind, dim, resolution, grid, values })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn grid(&self) -> &[Belief] {
        &self.grid
    }

    /// `u` sampled at the grid points, in grid order.
    pub fn grid_values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, p: &Belief) -> Result<f64> {
        Ok(self.eval_with_weights(p)?.0)
    }

    /// Envelope value plus the supporting grid weights at the LP vertex.
    pub fn eval_with_weights(&self, p: &Belief) -> Result<(f64, Vec<(usize, f64)>)> {
        if p.len() != self.dim {
            return Err(Error::invalid(format!(
                "query belief covers {} states, expected {}",
                p.len(),
                self.dim
            )));
        }
        let n = self.grid.len();
        let objective = match self.kind {
            EnvelopeKind::Vex => Objective::Minimize(self.values.clone()),
            EnvelopeKind::Cav => Objective::Maximize(self.values.clone()),
        };
        let mut constraints = Vec::with_capacity(self.dim + 1);
        for s in 0..self.dim {
            let coeffs = self.grid.iter().map(|g| g.probs()[s]).collect();
            constraints.push(Constraint::new(coeffs, Relation::Eq, p.probs()[s]));
        }
        constraints.push(Constraint::new(vec![1.0; n], Relation::Eq, 1.0));

        match solve_lp(&LinearProgram { objective, constraints })? {
            LpOutcome::Optimal(sol) => {
                let weights = sol
                    .x
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 1e-10)
                    .map(|(i, &w)| (i, w))
                    .collect();
                Ok((sol.value, weights))
            }
            // The grid spans the simplex, so the only infeasible queries
            // are points off the simplex.
            LpOutcome::Infeasible => Err(Error::invalid(
                "envelope query lies outside the belief simplex".to_string(),
            )),
            LpOutcome::Unbounded => Err(Error::numerical("envelope LP unbounded")),
        }
    }
}

/// Largest convex function lying below `u`, sampled on a lattice.
pub fn vex_envelope(game: &StageGame, grid_resolution: usize) -> Result<Envelope> {
    Envelope::build(game, grid_resolution, EnvelopeKind::Vex)
}

/// Smallest concave function lying above `u`; equals `-vex(-u)`.
pub fn cav_envelope(game: &StageGame, grid_resolution: usize) -> Result<Envelope> {
    Envelope::build(game, grid_resolution, EnvelopeKind::Cav)
}

/// Mixture witness for the convex envelope at one belief: weights and
/// beliefs with `sum w_i p_i = p` and `sum w_i u(p_i) = vex u(p)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VexDecomposition {
    pub weights: Vec<f64>,
    pub points: Vec<Belief>,
    pub anchor: Belief,
}

impl VexDecomposition {
    pub fn atoms(&self) -> usize {
        self.weights.len()
    }
}

/// Supporting decomposition of `vex u` at `belief`.
///
/// The LP vertex has at most (number of states + 1) active weights, so the
/// Caratheodory cap holds by construction; weights below 1e-10 are pruned
/// as numerical dust and the rest renormalized.
pub fn vex_decomposition(
    game: &StageGame,
    belief: &Belief,
    grid_resolution: usize,
) -> Result<VexDecomposition> {
    let env = vex_envelope(game, grid_resolution)?;
    let (_, support) = env.eval_with_weights(belief)?;
    let total: f64 = support.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::numerical("decomposition weights vanished"));
    }
    let mut weights = Vec::with_capacity(support.len());
    let mut points = Vec::with_capacity(support.len());
    for (i, w) in support {
        weights.push(w / total);
        points.push(env.grid[i].clone());
    }
    Ok(VexDecomposition { weights, points, anchor: belief.clone() })
}
