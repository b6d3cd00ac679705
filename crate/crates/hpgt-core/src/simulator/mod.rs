//! Monte Carlo engine for the repeated game.
//!
//! Strategies are behavioral: a kernel mapping (stage, history, own side
//! information) to a distribution over own actions, plus an optional
//! private draw made once per trial before play (a state guess, an
//! announcement variable, and the like). Kernels are pure functions; all
//! randomness flows through [`TrialRng`], which gives every trial its own
//! substream, so runs are reproducible bit for bit at a fixed seed no
//! matter how many worker threads execute them.

mod rng;
mod strategies;

pub use rng::TrialRng;
pub use strategies::{
    alice_library, bob_library, strategy_block_iid, strategy_constant, strategy_nonrevealing_bob,
    strategy_revealing_bob, strategy_state_guessing_bob, strategy_state_guessing_bob_with,
    strategy_uniform, BlockIidStrategy,
};

use crate::belief::StageGame;
use crate::error::{Error, Result};
use crate::matrix_game::{MixedStrategy, Player};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Trial-scoped private randomness drawn before stage 1.
pub type PrivateState = Vec<u32>;

/// Everything a kernel may condition on at one stage.
#[derive(Clone, Copy, Debug)]
pub struct StageContext<'a> {
    pub stage: usize,
    pub horizon: usize,
    pub alice_history: &'a [usize],
    pub bob_history: &'a [usize],
    /// The acting player's own knowledge cell.
    pub own_info: usize,
}

type InitFn = dyn Fn(&mut TrialRng, usize) -> PrivateState + Send + Sync;
type KernelFn = dyn Fn(&PrivateState, &StageContext<'_>) -> MixedStrategy + Send + Sync;

/// A (possibly privately randomized) behavioral strategy for one player.
#[derive(Clone)]
pub struct BehavioralStrategy {
    owner: Player,
    name: String,
    num_actions: usize,
    init: Arc<InitFn>,
    kernel: Arc<KernelFn>,
}

impl std::fmt::Debug for BehavioralStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BehavioralStrategy")
            .field("owner", &self.owner)
            .field("name", &self.name)
            .field("num_actions", &self.num_actions)
            .finish()
    }
}

impl BehavioralStrategy {
    /// A strategy with no private randomness.
    pub fn stateless(
        owner: Player,
        name: impl Into<String>,
        num_actions: usize,
        kernel: impl Fn(&StageContext<'_>) -> MixedStrategy + Send + Sync + 'static,
    ) -> Self {
        BehavioralStrategy {
            owner,
            name: name.into(),
            num_actions,
            init: Arc::new(|_, _| Vec::new()),
            kernel: Arc::new(move |_, ctx| kernel(ctx)),
        }
    }

    /// A strategy that draws private state once per trial.
    pub fn with_init(
        owner: Player,
        name: impl Into<String>,
        num_actions: usize,
        init: impl Fn(&mut TrialRng, usize) -> PrivateState + Send + Sync + 'static,
        kernel: impl Fn(&PrivateState, &StageContext<'_>) -> MixedStrategy + Send + Sync + 'static,
    ) -> Self {
        BehavioralStrategy {
            owner,
            name: name.into(),
            num_actions,
            init: Arc::new(init),
            kernel: Arc::new(kernel),
        }
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn draw_private(&self, rng: &mut TrialRng, own_info: usize) -> PrivateState {
        (self.init)(rng, own_info)
    }

    pub fn action_distribution(
        &self,
        private: &PrivateState,
        ctx: &StageContext<'_>,
    ) -> MixedStrategy {
        let dist = (self.kernel)(private, ctx);
        debug_assert_eq!(dist.len(), self.num_actions);
        dist
    }
}

/// One simulated play-through of the repeated game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub state: usize,
    /// (alice action, bob action) per stage.
    pub actions: Vec<(usize, usize)>,
    /// Per-stage average payoff to the maximizer.
    pub sigma_n: f64,
}

/// Samples `trials` independent trajectories of the `horizon`-stage game.
///
/// Deterministic in `seed`: trial `t` uses substream `t`, and the within-
/// trial draw order is fixed (state, private draws, then one action draw
/// per player per stage).
pub fn run(
    game: &StageGame,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if alice.owner != Player::Alice || bob.owner != Player::Bob {
        return Err(Error::invalid("strategy owners do not match their seats"));
    }
    if alice.num_actions != game.num_alice_actions() {
        return Err(Error::invalid(format!(
            "alice strategy covers {} actions, game has {}",
            alice.num_actions,
            game.num_alice_actions()
        )));
    }
    if bob.num_actions != game.num_bob_actions() {
        return Err(Error::invalid(format!(
            "bob strategy covers {} actions, game has {}",
            bob.num_actions,
            game.num_bob_actions()
        )));
    }

    (0..trials as u64)
        .into_par_iter()
        .map(|t| simulate_one(game, alice, bob, horizon, seed, t))
        .collect()
}

fn simulate_one(
    game: &StageGame,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    horizon: usize,
    seed: u64,
    trial: u64,
) -> Result<Trajectory> {
    let mut rng = TrialRng::new(seed, trial);
    let state = rng.sample_weights(game.prior().probs());
    let cell_a = game.alice_info().cell_of(state);
    let cell_b = game.bob_info().cell_of(state);
    let priv_a = alice.draw_private(&mut rng, cell_a);
    let priv_b = bob.draw_private(&mut rng, cell_b);

    let table = game.table(state);
    let mut ha: Vec<usize> = Vec::with_capacity(horizon);
    let mut hb: Vec<usize> = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut total = 0.0;
    for stage in 0..horizon {
        let ctx_a = StageContext {
            stage,
            horizon,
            alice_history: &ha,
            bob_history: &hb,
            own_info: cell_a,
        };
        let da = alice.action_distribution(&priv_a, &ctx_a);
        if da.len() != alice.num_actions {
            return Err(Error::invalid("alice kernel returned a mis-sized distribution"));
        }
        let a = rng.sample_weights(da.weights());

        let ctx_b = StageContext {
            stage,
            horizon,
            alice_history: &ha,
            bob_history: &hb,
            own_info: cell_b,
        };
        let db = bob.action_distribution(&priv_b, &ctx_b);
        if db.len() != bob.num_actions {
            return Err(Error::invalid("bob kernel returned a mis-sized distribution"));
        }
        let b = rng.sample_weights(db.weights());

        total += table.get(a, b);
        ha.push(a);
        hb.push(b);
        actions.push((a, b));
    }
    Ok(Trajectory { state, actions, sigma_n: total / horizon as f64 })
}

/// Empirical failure rate for one state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateGuarantee {
    pub state: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
}

/// Empirical estimate of `Pr(sigma_n < threshold)`.
///
/// `standard_error` is Wilson-adjusted (z = 1): with x failures out of n,
/// the reported error is `sqrt(c(1-c)/(n+1))` around the shrunk center
/// `c = (x + 1/2)/(n + 1)`, which stays informative at zero counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub threshold: f64,
    pub trials: usize,
    pub failures: usize,
    pub empirical_failure: f64,
    pub standard_error: f64,
    pub per_state: Vec<StateGuarantee>,
}

pub(crate) fn wilson_stderr(failures: usize, trials: usize) -> f64 {
    let n = trials as f64;
    let center = (failures as f64 + 0.5) / (n + 1.0);
    (center * (1.0 - center) / (n + 1.0)).sqrt()
}

pub fn estimate_guarantee(trajectories: &[Trajectory], threshold: f64) -> Result<GuaranteeReport> {
    if trajectories.is_empty() {
        return Err(Error::invalid("no trajectories to evaluate"));
    }
    let num_states = trajectories.iter().map(|t| t.state).max().unwrap() + 1;
    let mut per_trials = vec![0usize; num_states];
    let mut per_failures = vec![0usize; num_states];
    for t in trajectories {
        per_trials[t.state] += 1;
        if t.sigma_n < threshold {
            per_failures[t.state] += 1;
        }
    }
    let trials = trajectories.len();
    let failures: usize = per_failures.iter().sum();
    let per_state = (0..num_states)
        .filter(|&s| per_trials[s] > 0)
        .map(|s| StateGuarantee {
            state: s,
            trials: per_trials[s],
            failures: per_failures[s],
            failure_rate: per_failures[s] as f64 / per_trials[s] as f64,
        })
        .collect();
    Ok(GuaranteeReport {
        threshold,
        trials,
        failures,
        empirical_failure: failures as f64 / trials as f64,
        standard_error: wilson_stderr(failures, trials),
        per_state,
    })
}

/// One tail comparison of the centered block sum against its bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AzumaThreshold {
    pub t: f64,
    pub empirical_tail: f64,
    pub analytic_bound: f64,
    pub stderr: f64,
    pub holds: bool,
}

/// Empirical check of the martingale tail bound for block play.
///
/// `W_m` is the payoff total over `m` blocks centered by `m * n * v`; its
/// lower tail must stay under `exp(-t^2 / (2 m (2Mn)^2))` at each probed
/// `t`, and every one-block increment must stay within `2Mn`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AzumaReport {
    pub blocks: usize,
    pub block_horizon: usize,
    pub block_value: f64,
    pub payoff_bound: f64,
    pub trials: usize,
    pub max_abs_increment: f64,
    pub increment_bound_holds: bool,
    pub thresholds: Vec<AzumaThreshold>,
    pub all_hold: bool,
}

pub fn check_azuma(
    game: &StageGame,
    block: &BlockIidStrategy,
    bob: &BehavioralStrategy,
    blocks: usize,
    trials: usize,
    seed: u64,
) -> Result<AzumaReport> {
    if blocks == 0 {
        return Err(Error::invalid("need at least one block"));
    }
    let n = block.block_horizon;
    let horizon = blocks * n;
    let v = block.block_value;
    let m_bound = game.payoff_bound();
    // |block sum - n v| <= n(M + |v|) <= 2Mn since |v| <= M.
    let increment_cap = 2.0 * m_bound * n as f64;

    let trajectories = run(game, &block.strategy, bob, horizon, trials, seed)?;

    let mut w_final = Vec::with_capacity(trials);
    let mut max_inc: f64 = 0.0;
    for traj in &trajectories {
        let table = game.table(traj.state);
        let mut w = 0.0;
        for k in 0..blocks {
            let block_sum: f64 = traj.actions[k * n..(k + 1) * n]
                .iter()
                .map(|&(a, b)| table.get(a, b))
                .sum();
            let inc = block_sum - n as f64 * v;
            max_inc = max_inc.max(inc.abs());
            w += inc;
        }
        w_final.push(w);
    }

    let m = blocks as f64;
    let scale = 2.0 * m_bound * n as f64;
    let mut thresholds = Vec::new();
    let mut all_hold = true;
    for exp in [0.6, 0.75, 0.9] {
        let t = m.powf(exp) * scale;
        let tail_count = w_final.iter().filter(|&&w| w < -t).count();
        let empirical = tail_count as f64 / trials as f64;
        let bound = (-t * t / (2.0 * m * scale * scale)).exp();
        let stderr = wilson_stderr(tail_count, trials);
        let holds = empirical <= bound + 3.0 * stderr;
        all_hold &= holds;
        thresholds.push(AzumaThreshold { t, empirical_tail: empirical, analytic_bound: bound, stderr, holds });
    }

    Ok(AzumaReport {
        blocks,
        block_horizon: n,
        block_value: v,
        payoff_bound: m_bound,
        trials,
        max_abs_increment: max_inc,
        increment_bound_holds: max_inc <= increment_cap + 1e-12,
        thresholds,
        all_hold,
    })
}

#[cfg(test)]
mod tests;
