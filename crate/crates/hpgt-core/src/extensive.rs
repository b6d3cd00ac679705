//! Exact values of the n-stage repeated game and of the auxiliary
//! commit-to-a-state game, by strategic-form enumeration and LP.
//!
//! Two enumerations coexist here. [`enumerate_pure_strategies`] lists pure
//! strategies as functions of *every* realizable history, which is the
//! textbook strategy space (2 actions, one stage, no side information
//! gives 2 strategies; two stages give 2^5 = 32). The game solvers instead
//! enumerate *reduced* strategies, which branch only on the opponent's
//! actions because a player's own past moves are implied. Strategies that
//! differ off their own path collapse to one reduced strategy, the induced
//! payoff matrix is identical row-for-row after deduplication, and the
//! game value is unchanged; without the reduction a 2x2 game already
//! overflows the strategy cap at three stages.
//!
//! Enumeration order is fixed: decision vectors are generated in ascending
//! lexicographic order (cells in ascending id, then decisions in preorder,
//! opponent actions ascending), so strategy indices are stable across runs
//! and usable as identifiers in dumps.

use crate::belief::{self, Belief, StageGame};
use crate::error::{Error, Result};
use crate::matrix_game::{self, GameSolution, MixedStrategy, PayoffMatrix, Player};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default ceiling on the number of pure strategies per player.
pub const DEFAULT_STRATEGY_CAP: u128 = 1_000_000;

/// A deterministic plan for one player in the n-stage repeated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureStrategy {
    owner: Player,
    horizon: usize,
    num_own: usize,
    num_opp: usize,
    plan: Plan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Plan {
    /// Per cell, per stage, an action for every history of that length
    /// (histories ranked in mixed radix, earliest stage most significant).
    Full(Vec<Vec<Vec<u8>>>),
    /// Per cell, a tree branching on opponent actions only.
    Reduced(Vec<ReducedTree>),
}

/// Decision tree over opponent actions; `children` is empty at the last
/// stage and has one entry per opponent action otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ReducedTree {
    pub(crate) action: u8,
    pub(crate) children: Vec<ReducedTree>,
}

impl ReducedTree {
    /// Follows the opponent's actions down the tree.
    pub(crate) fn walk(&self, opp_hist: &[usize]) -> &ReducedTree {
        let mut node = self;
        for &o in opp_hist {
            node = &node.children[o];
        }
        node
    }
}

impl PureStrategy {
    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Action at the information set (own history, opponent history, cell).
    ///
    /// For reduced strategies the own history must be the one the strategy
    /// itself generated; replay always satisfies this.
    pub fn action(&self, cell: usize, own_hist: &[usize], opp_hist: &[usize]) -> usize {
        debug_assert_eq!(own_hist.len(), opp_hist.len());
        match &self.plan {
            Plan::Full(cells) => {
                let stage = own_hist.len();
                let mut rank = 0usize;
                for (&own, &opp) in own_hist.iter().zip(opp_hist) {
                    rank = rank * self.num_own * self.num_opp + own * self.num_opp + opp;
                }
                cells[cell][stage][rank] as usize
            }
            Plan::Reduced(cells) => cells[cell].walk(opp_hist).action as usize,
        }
    }

    /// Flattened decisions, cells first, then preorder within each cell.
    /// The vector identifies the strategy uniquely within its enumeration;
    /// dump legends are built from it.
    pub fn decision_vector(&self) -> Vec<usize> {
        let mut out = Vec::new();
        match &self.plan {
            Plan::Full(cells) => {
                for cell in cells {
                    for stage in cell {
                        out.extend(stage.iter().map(|&a| a as usize));
                    }
                }
            }
            Plan::Reduced(cells) => {
                fn preorder(node: &ReducedTree, out: &mut Vec<usize>) {
                    out.push(node.action as usize);
                    for ch in &node.children {
                        preorder(ch, out);
                    }
                }
                for cell in cells {
                    preorder(cell, &mut out);
                }
            }
        }
        out
    }
}

fn player_dims(game: &StageGame, owner: Player) -> (usize, usize, usize) {
    match owner {
        Player::Alice => (
            game.num_alice_actions(),
            game.num_bob_actions(),
            game.alice_info().num_cells(),
        ),
        Player::Bob => (
            game.num_bob_actions(),
            game.num_alice_actions(),
            game.bob_info().num_cells(),
        ),
    }
}

/// Number of history-based information sets per cell over `horizon` stages.
fn full_infosets_per_cell(num_own: usize, num_opp: usize, horizon: usize) -> Option<u128> {
    let k = (num_own as u128).checked_mul(num_opp as u128)?;
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..horizon {
        total = total.checked_add(pow)?;
        pow = pow.checked_mul(k)?;
    }
    Some(total)
}

fn checked_pow(base: u128, exp: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Complete enumeration of history-based pure strategies for one player.
///
/// The strategy space has size `A^(cells * sum_i (A*B)^i)`; the call
/// refuses with a resource-limit error naming that count when it exceeds
/// the cap. Use the game solvers for anything beyond toy horizons; they
/// work on the reduced space instead.
pub fn enumerate_pure_strategies(
    game: &StageGame,
    horizon: usize,
    owner: Player,
) -> Result<Vec<PureStrategy>> {
    enumerate_pure_strategies_capped(game, horizon, owner, DEFAULT_STRATEGY_CAP)
}

pub fn enumerate_pure_strategies_capped(
    game: &StageGame,
    horizon: usize,
    owner: Player,
    cap: u128,
) -> Result<Vec<PureStrategy>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let (num_own, num_opp, cells) = player_dims(game, owner);
    let per_cell = full_infosets_per_cell(num_own, num_opp, horizon)
        .ok_or_else(|| Error::limit("information-set count overflows".to_string()))?;
    let decisions = per_cell
        .checked_mul(cells as u128)
        .ok_or_else(|| Error::limit("information-set count overflows".to_string()))?;
    let count = checked_pow(num_own as u128, decisions).ok_or_else(|| {
        Error::limit(format!("strategy count {num_own}^{decisions} exceeds cap {cap}"))
    })?;
    if count > cap {
        return Err(Error::limit(format!("strategy count {count} exceeds cap {cap}")));
    }

    // Odometer over the flattened decision vector, last digit fastest,
    // which yields ascending lexicographic order.
    let decisions = decisions as usize;
    let mut digits = vec![0u8; decisions];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let mut cells_plan = Vec::with_capacity(cells);
        let mut at = 0usize;
        for _ in 0..cells {
            let mut stages = Vec::with_capacity(horizon);
            let mut width = 1usize;
            for _ in 0..horizon {
                stages.push(digits[at..at + width].to_vec());
                at += width;
                width *= num_own * num_opp;
            }
            cells_plan.push(stages);
        }
        out.push(PureStrategy {
            owner,
            horizon,
            num_own,
            num_opp,
            plan: Plan::Full(cells_plan),
        });

        let mut pos = decisions;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if (digits[pos] as usize) < num_own {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Reduced strategies per cell: `T(1) = A`, `T(h) = A * T(h-1)^B`.
fn reduced_count_per_cell(num_own: usize, num_opp: usize, horizon: usize) -> Option<u128> {
    let mut t: u128 = num_own as u128;
    for _ in 1..horizon {
        t = checked_pow(t, num_opp as u128)?.checked_mul(num_own as u128)?;
    }
    Some(t)
}

/// All reduced trees of the given depth, ordered lexicographically by
/// their preorder decision vector.
pub(crate) fn reduced_trees(num_own: usize, num_opp: usize, horizon: usize) -> Vec<ReducedTree> {
    if horizon == 1 {
        return (0..num_own)
            .map(|a| ReducedTree { action: a as u8, children: Vec::new() })
            .collect();
    }
    let sub = reduced_trees(num_own, num_opp, horizon - 1);
    let mut out = Vec::new();
    for a in 0..num_own {
        let mut idx = vec![0usize; num_opp];
        loop {
            out.push(ReducedTree {
                action: a as u8,
                children: idx.iter().map(|&i| sub[i].clone()).collect(),
            });
            let mut pos = num_opp;
            let mut done = false;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < sub.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if done {
                break;
            }
        }
    }
    out
}

fn reduced_strategies(
    game: &StageGame,
    horizon: usize,
    owner: Player,
    cap: u128,
) -> Result<Vec<PureStrategy>> {
    let (num_own, num_opp, cells) = player_dims(game, owner);
    let per_cell = reduced_count_per_cell(num_own, num_opp, horizon)
        .ok_or_else(|| Error::limit("reduced strategy count overflows".to_string()))?;
    let count = checked_pow(per_cell, cells as u128).ok_or_else(|| {
        Error::limit(format!("reduced strategy count {per_cell}^{cells} exceeds cap {cap}"))
    })?;
    if count > cap {
        return Err(Error::limit(format!(
            "reduced strategy count {count} exceeds cap {cap}"
        )));
    }
    let trees = reduced_trees(num_own, num_opp, horizon);
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; cells];
    loop {
        out.push(PureStrategy {
            owner,
            horizon,
            num_own,
            num_opp,
            plan: Plan::Reduced(idx.iter().map(|&i| trees[i].clone()).collect()),
        });
        let mut pos = cells;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < trees.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The induced one-shot game over pure repeated-game strategies.
///
/// Payoff entries are per-stage averages: entry (i, j) replays the
/// deterministic action sequences of strategy pair (i, j) in every state
/// and weighs the state totals by the prior.
#[derive(Clone, Debug)]
pub struct StrategicForm {
    pub alice_strategies: Vec<PureStrategy>,
    pub bob_strategies: Vec<PureStrategy>,
    pub payoff: PayoffMatrix,
    /// Per-state payoff matrices; their prior-weighted sum is `payoff`.
    pub per_state: Vec<PayoffMatrix>,
    pub horizon: usize,
}

fn replay_pair(
    game: &StageGame,
    state: usize,
    alice: &PureStrategy,
    bob: &PureStrategy,
    horizon: usize,
) -> f64 {
    let cell_a = game.alice_info().cell_of(state);
    let cell_b = game.bob_info().cell_of(state);
    let table = game.table(state);
    let mut ha: Vec<usize> = Vec::with_capacity(horizon);
    let mut hb: Vec<usize> = Vec::with_capacity(horizon);
    let mut total = 0.0;
    for _ in 0..horizon {
        let a = alice.action(cell_a, &ha, &hb);
        let b = bob.action(cell_b, &hb, &ha);
        total += table.get(a, b);
        ha.push(a);
        hb.push(b);
    }
    total / horizon as f64
}

/// Builds the reduced strategic form of the n-stage game.
pub fn build_strategic_form(game: &StageGame, horizon: usize) -> Result<StrategicForm> {
    build_strategic_form_capped(game, horizon, DEFAULT_STRATEGY_CAP)
}

/// The strategy cap is a configuration knob, not a constant; the
/// builder refuses past it rather than degrading.
pub fn build_strategic_form_capped(
    game: &StageGame,
    horizon: usize,
    cap: u128,
) -> Result<StrategicForm> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let alice = reduced_strategies(game, horizon, Player::Alice, cap)?;
    let bob = reduced_strategies(game, horizon, Player::Bob, cap)?;
    let per_state: Vec<PayoffMatrix> = (0..game.num_states())
        .map(|s| {
            let rows: Vec<Vec<f64>> = alice
                .par_iter()
                .map(|astrat| {
                    bob.iter()
                        .map(|bstrat| replay_pair(game, s, astrat, bstrat, horizon))
                        .collect()
                })
                .collect();
            PayoffMatrix::from_rows(rows)
        })
        .collect::<Result<_>>()?;
    let payoff = combine(&per_state, game.prior())?;
    Ok(StrategicForm { alice_strategies: alice, bob_strategies: bob, payoff, per_state, horizon })
}

fn combine(per_state: &[PayoffMatrix], prior: &Belief) -> Result<PayoffMatrix> {
    let mut m = PayoffMatrix::zeros(per_state[0].rows(), per_state[0].cols())?;
    for (t, &p) in per_state.iter().zip(prior.probs()) {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m.set(i, j, m.get(i, j) + p * t.get(i, j));
            }
        }
    }
    Ok(m)
}

/// Deduplicates identical rows/columns, iteratively removes strictly
/// dominated pure strategies, and solves. The returned strategies are
/// re-expanded over the original index space with zero weight on removed
/// indices; both reductions are value-preserving.
fn solve_reduced(matrix: &PayoffMatrix) -> Result<GameSolution> {
    let mut rows: Vec<usize> = (0..matrix.rows()).collect();
    let mut cols: Vec<usize> = (0..matrix.cols()).collect();

    let quantize = |x: f64| (x * 1e9).round() as i64;
    {
        let mut seen = std::collections::HashSet::new();
        rows.retain(|&i| {
            seen.insert(matrix.row(i).iter().map(|&x| quantize(x)).collect::<Vec<_>>())
        });
        let mut seen = std::collections::HashSet::new();
        cols.retain(|&j| {
            seen.insert(
                (0..matrix.rows()).map(|i| quantize(matrix.get(i, j))).collect::<Vec<_>>(),
            )
        });
    }

    // Iterated strict dominance, skipped when the scan would cost more
    // than just solving the larger LP.
    let margin = 1e-12;
    if rows.len() * cols.len() * (rows.len() + cols.len()) <= 200_000_000 {
        loop {
            let mut changed = false;
            let dominated_rows: Vec<usize> = (0..rows.len())
                .filter(|&ri| {
                    (0..rows.len()).any(|rk| {
                        rk != ri
                            && cols.iter().all(|&j| {
                                matrix.get(rows[rk], j) >= matrix.get(rows[ri], j) + margin
                            })
                    })
                })
                .collect();
            if !dominated_rows.is_empty() {
                changed = true;
                for (off, ri) in dominated_rows.into_iter().enumerate() {
                    rows.remove(ri - off);
                }
            }
            let dominated_cols: Vec<usize> = (0..cols.len())
                .filter(|&ci| {
                    (0..cols.len()).any(|ck| {
                        ck != ci
                            && rows.iter().all(|&i| {
                                matrix.get(i, cols[ck]) <= matrix.get(i, cols[ci]) - margin
                            })
                    })
                })
                .collect();
            if !dominated_cols.is_empty() {
                changed = true;
                for (off, ci) in dominated_cols.into_iter().enumerate() {
                    cols.remove(ci - off);
                }
            }
            if !changed {
                break;
            }
        }
    }

    let sub = PayoffMatrix::from_rows(
        rows.iter()
            .map(|&i| cols.iter().map(|&j| matrix.get(i, j)).collect())
            .collect(),
    )?;
    let sol = matrix_game::solve(&sub)?;

    let mut alice = vec![0.0; matrix.rows()];
    for (k, &i) in rows.iter().enumerate() {
        alice[i] = sol.alice.weights()[k];
    }
    let mut bob = vec![0.0; matrix.cols()];
    for (k, &j) in cols.iter().enumerate() {
        bob[j] = sol.bob.weights()[k];
    }
    Ok(GameSolution {
        value: sol.value,
        alice: MixedStrategy::normalized(alice)?,
        bob: MixedStrategy::normalized(bob)?,
    })
}

/// Value of the n-stage repeated game, as a per-stage average. Strategies
/// in the solution are indexed over the reduced enumeration of
/// [`build_strategic_form`].
pub fn value_gamma_n(game: &StageGame, horizon: usize) -> Result<GameSolution> {
    value_gamma_n_capped(game, horizon, DEFAULT_STRATEGY_CAP)
}

pub fn value_gamma_n_capped(
    game: &StageGame,
    horizon: usize,
    cap: u128,
) -> Result<GameSolution> {
    let sf = build_strategic_form_capped(game, horizon, cap)?;
    solve_strategic_form(&sf)
}

/// Solves an already-built strategic form.
pub fn solve_strategic_form(sf: &StrategicForm) -> Result<GameSolution> {
    solve_reduced(&sf.payoff)
}

/// Values of the n-stage game across many priors, reusing one enumeration.
pub fn gamma_values_for_priors(
    game: &StageGame,
    horizon: usize,
    priors: &[Belief],
) -> Result<Vec<f64>> {
    let sf = build_strategic_form(game, horizon)?;
    priors
        .par_iter()
        .map(|p| {
            if p.len() != game.num_states() {
                return Err(Error::invalid("prior dimension mismatch"));
            }
            Ok(solve_reduced(&combine(&sf.per_state, p)?)?.value)
        })
        .collect()
}

/// The auxiliary game in which the minimizer commits to a state up front.
///
/// Bob picks the payoff table once, secretly, before play; Alice receives
/// no side information; both then observe actions as usual. The base
/// game's prior and partitions are ignored by construction.
#[derive(Clone, Debug)]
pub struct OmegaGame {
    pub base: StageGame,
    pub horizon: usize,
}

impl OmegaGame {
    pub fn new(base: StageGame, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(OmegaGame { base, horizon })
    }
}

/// Solves the commit-to-a-state game. Bob's pure strategies are (state,
/// reduced tree) pairs indexed state-major; Alice's are her reduced trees
/// with no side information.
pub fn value_omega_n(omega: &OmegaGame) -> Result<GameSolution> {
    value_omega_n_capped(omega, DEFAULT_STRATEGY_CAP)
}

pub fn value_omega_n_capped(omega: &OmegaGame, cap: u128) -> Result<GameSolution> {
    let game = &omega.base;
    let n = omega.horizon;
    let a_act = game.num_alice_actions();
    let b_act = game.num_bob_actions();

    let a_count = reduced_count_per_cell(a_act, b_act, n)
        .ok_or_else(|| Error::limit("strategy count overflows".to_string()))?;
    let b_count = reduced_count_per_cell(b_act, a_act, n)
        .and_then(|c| c.checked_mul(game.num_states() as u128))
        .ok_or_else(|| Error::limit("strategy count overflows".to_string()))?;
    for (who, count) in [("alice", a_count), ("bob", b_count)] {
        if count > cap {
            return Err(Error::limit(format!(
                "{who} strategy count {count} exceeds cap {cap}"
            )));
        }
    }

    let alice_trees = reduced_trees(a_act, b_act, n);
    let bob_trees = reduced_trees(b_act, a_act, n);

    let rows: Vec<Vec<f64>> = alice_trees
        .par_iter()
        .map(|atree| {
            let mut row = Vec::with_capacity(game.num_states() * bob_trees.len());
            for s in 0..game.num_states() {
                let table = game.table(s);
                for btree in &bob_trees {
                    let mut ha: Vec<usize> = Vec::with_capacity(n);
                    let mut hb: Vec<usize> = Vec::with_capacity(n);
                    let mut total = 0.0;
                    for _ in 0..n {
                        let a = atree.walk(&hb).action as usize;
                        let b = btree.walk(&ha).action as usize;
                        total += table.get(a, b);
                        ha.push(a);
                        hb.push(b);
                    }
                    row.push(total / n as f64);
                }
            }
            row
        })
        .collect();
    solve_reduced(&PayoffMatrix::from_rows(rows)?)
}

/// Gap between the grid convex envelope at the prior and the exact
/// n-stage value, per horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub vex_u_at_prior: f64,
    pub entries: Vec<GapEntry>,
    /// `max_n gap_n * sqrt(n)`, an empirical stand-in for the decay
    /// constant.
    pub fitted_constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapEntry {
    pub horizon: usize,
    pub gamma_value: f64,
    pub gap: f64,
}

/// Checks `0 <= vex u(p) - v(Gamma_n)` on the given horizons and fits the
/// decay constant.
///
/// Only the uninformed-maximizer, fully-informed-minimizer arrangement is
/// accepted: the bound being checked is stated for that case, and other
/// partitions are rejected rather than extrapolated.
pub fn check_convergence_bound(
    game: &StageGame,
    prior: &Belief,
    horizons: &[usize],
    envelope_resolution: usize,
) -> Result<ConvergenceReport> {
    if game.alice_info().num_cells() != 1 {
        return Err(Error::invalid(
            "convergence check requires the maximizer to have no side information",
        ));
    }
    if !game.bob_info().is_discrete() {
        return Err(Error::invalid(
            "convergence check requires the minimizer to know the state exactly",
        ));
    }
    let game = game.with_prior(prior.clone())?;
    let vex = belief::vex_envelope(&game, envelope_resolution)?.eval(prior)?;
    let mut entries = Vec::with_capacity(horizons.len());
    let mut fitted: f64 = 0.0;
    for &n in horizons {
        let value = value_gamma_n(&game, n)?.value;
        let gap = vex - value;
        if gap < -1e-9 {
            return Err(Error::numerical(format!(
                "gap at horizon {n} is {gap}, below the -1e-9 floor; \
                 the envelope resolution is likely too coarse"
            )));
        }
        fitted = fitted.max(gap * (n as f64).sqrt());
        entries.push(GapEntry { horizon: n, gamma_value: value, gap });
    }
    Ok(ConvergenceReport { vex_u_at_prior: vex, entries, fitted_constant: fitted })
}
