//! The strategy library.
//!
//! The functions here build the named strategies the simulator and CLI
//! quantify over. "Library" strategies are the guarantee-oriented ones
//! returned by [`alice_library`] and [`bob_library`]; constant strategies
//! are available as baselines but are not library members.

use super::{BehavioralStrategy, PrivateState, StageContext};
use crate::belief::{self, StageGame, VexDecomposition};
use crate::error::{Error, Result};
use crate::extensive::{self, OmegaGame};
use crate::matrix_game::{self, GameSolution, MixedStrategy, Player};

fn actions_for(game: &StageGame, owner: Player) -> usize {
    match owner {
        Player::Alice => game.num_alice_actions(),
        Player::Bob => game.num_bob_actions(),
    }
}

/// Plays uniformly at random at every stage.
pub fn strategy_uniform(game: &StageGame, owner: Player) -> BehavioralStrategy {
    let n = actions_for(game, owner);
    BehavioralStrategy::stateless(owner, "uniform", n, move |_| MixedStrategy::uniform(n))
}

/// Always plays one action. Named `always-<index>`.
pub fn strategy_constant(game: &StageGame, owner: Player, action: usize) -> Result<BehavioralStrategy> {
    let n = actions_for(game, owner);
    if action >= n {
        return Err(Error::invalid(format!("action {action} out of range (< {n})")));
    }
    Ok(BehavioralStrategy::stateless(owner, format!("always-{action}"), n, move |_| {
        MixedStrategy::point_mass(n, action)
    }))
}

/// Bob plays the optimal column mix of the prior-averaged table, i.i.d.
/// across stages, deliberately ignoring whatever he knows about the
/// state. His actions carry zero information about it.
pub fn strategy_nonrevealing_bob(game: &StageGame) -> Result<BehavioralStrategy> {
    let n = game.num_bob_actions();
    let table = belief::average_table(game, game.prior())?;
    let mix = matrix_game::solve(&table)?.bob;
    Ok(BehavioralStrategy::stateless(Player::Bob, "nonrevealing", n, move |_| mix.clone()))
}

/// Bob guesses the state uniformly at random before play, independently
/// of his actual side information, then plays a per-state policy for the
/// guess at every stage. The default policy is the column minimizing the
/// guessed-state table against a uniform row mix, ties to lowest index.
pub fn strategy_state_guessing_bob(game: &StageGame) -> Result<BehavioralStrategy> {
    let uniform = MixedStrategy::uniform(game.num_alice_actions());
    let policies = (0..game.num_states())
        .map(|s| {
            let (_, col) = matrix_game::best_response_value(game.table(s), &uniform, Player::Bob)?;
            Ok(MixedStrategy::point_mass(game.num_bob_actions(), col))
        })
        .collect::<Result<Vec<_>>>()?;
    strategy_state_guessing_bob_with(game, policies)
}

/// State-guessing Bob with explicit per-state policies.
pub fn strategy_state_guessing_bob_with(
    game: &StageGame,
    policies: Vec<MixedStrategy>,
) -> Result<BehavioralStrategy> {
    let n = game.num_bob_actions();
    if policies.len() != game.num_states() {
        return Err(Error::invalid(format!(
            "{} per-state policies supplied, game has {} states",
            policies.len(),
            game.num_states()
        )));
    }
    if policies.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("per-state policy dimension mismatch"));
    }
    let states = game.num_states();
    Ok(BehavioralStrategy::with_init(
        Player::Bob,
        "state-guessing",
        n,
        move |rng, _own_info| vec![rng.sample_uniform_index(states) as u32],
        move |private, _ctx| policies[private[0] as usize].clone(),
    ))
}

/// Bob announces a mixture component through his opening actions, then
/// plays the optimal column mix for that component's belief.
///
/// Given a decomposition of `vex u` at the prior into atoms `(w_i, p_i)`,
/// Bob draws `V = i` with probability `w_i p_i(c) / p(c)` for his cell `c`
/// (with full information this is exactly `w_i p_i(s) / p(s)`, making the
/// state distribution conditional on `V = i` equal to `p_i`). He encodes
/// `V` over the first `ceil(log_B atoms)` stages in base B, most
/// significant symbol first; the code is spelled out in the strategy name
/// so observers can decode the announcement. A single atom means nothing
/// to announce and reduces to nonrevealing play.
pub fn strategy_revealing_bob(
    game: &StageGame,
    decomposition: &VexDecomposition,
) -> Result<BehavioralStrategy> {
    let b = game.num_bob_actions();
    let states = game.num_states();
    if decomposition.anchor.len() != states {
        return Err(Error::invalid("decomposition anchored on a different state space"));
    }
    let drift = decomposition
        .anchor
        .probs()
        .iter()
        .zip(game.prior().probs())
        .map(|(a, p)| (a - p).abs())
        .fold(0.0, f64::max);
    if drift > 1e-9 {
        return Err(Error::invalid(format!(
            "decomposition is anchored {drift:e} away from the game prior"
        )));
    }
    let atoms = decomposition.atoms();
    if atoms == 0 {
        return Err(Error::invalid("decomposition has no atoms"));
    }
    let signal_stages = if atoms == 1 {
        0
    } else {
        (atoms as f64).log(b as f64).ceil() as usize
    };

    // Column mix per atom, from the one-stage game at that atom's belief.
    let column_mixes = decomposition
        .points
        .iter()
        .map(|p| Ok(matrix_game::solve(&belief::average_table(game, p)?)?.bob))
        .collect::<Result<Vec<_>>>()?;

    // Nothing to announce: skip the private draw so play coincides with
    // the nonrevealing strategy draw for draw.
    if atoms == 1 {
        let mix = column_mixes.into_iter().next().unwrap();
        let name = format!("revealing[atoms=1,signal_stages=0,code=base{b}-msb]");
        return Ok(BehavioralStrategy::stateless(Player::Bob, name, b, move |_| mix.clone()));
    }

    // V-sampling weights per knowledge cell.
    let mut cell_weights: Vec<Vec<f64>> = Vec::with_capacity(game.bob_info().num_cells());
    for cell in 0..game.bob_info().num_cells() {
        let members = game.bob_info().members(cell);
        let cell_mass: f64 = members.iter().map(|&s| game.prior().probs()[s]).sum();
        let mut w: Vec<f64> = decomposition
            .weights
            .iter()
            .zip(&decomposition.points)
            .map(|(wi, pi)| {
                let atom_mass: f64 = members.iter().map(|&s| pi.probs()[s]).sum();
                wi * atom_mass / cell_mass
            })
            .collect();
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(
                "decomposition weights do not mix back to the prior on a cell",
            ));
        }
        for v in w.iter_mut() {
            *v /= total;
        }
        cell_weights.push(w);
    }

    let name = format!("revealing[atoms={atoms},signal_stages={signal_stages},code=base{b}-msb]");
    Ok(BehavioralStrategy::with_init(
        Player::Bob,
        name,
        b,
        move |rng, own_info| vec![rng.sample_weights(&cell_weights[own_info]) as u32],
        move |private, ctx| {
            let v = private[0] as usize;
            if ctx.stage < signal_stages {
                let place = signal_stages - 1 - ctx.stage;
                let digit = (v / b.pow(place as u32)) % b;
                MixedStrategy::point_mass(b, digit)
            } else {
                column_mixes[v].clone()
            }
        },
    ))
}

/// Alice strategy that restarts an equilibrium of the commit-to-a-state
/// game every `block_horizon` stages.
#[derive(Clone, Debug)]
pub struct BlockIidStrategy {
    pub strategy: BehavioralStrategy,
    pub block_horizon: usize,
    /// Value of the block game the strategy was built from.
    pub block_value: f64,
}

/// Builds block-restarting Alice from a solution of the commit game.
///
/// `block_solution` must be the [`extensive::value_omega_n`] solution for
/// this game at `block_horizon`; its mixed weights are matched positionally
/// against the stable reduced-strategy enumeration. Within a block the
/// mixed strategy is played behaviorally by conditioning the support on
/// the within-block history; cross-block history is ignored. For a total
/// horizon `m * block + r`, the `r` leftover stages play the opening-stage
/// distribution of a fresh block.
pub fn strategy_block_iid(
    game: &StageGame,
    block_horizon: usize,
    block_solution: &GameSolution,
) -> Result<BlockIidStrategy> {
    if block_horizon == 0 {
        return Err(Error::invalid("block horizon must be at least 1"));
    }
    let a = game.num_alice_actions();
    let b = game.num_bob_actions();
    let trees = extensive::reduced_trees(a, b, block_horizon);
    if block_solution.alice.len() != trees.len() {
        return Err(Error::invalid(format!(
            "block solution mixes {} strategies, expected {} for block horizon {block_horizon}",
            block_solution.alice.len(),
            trees.len()
        )));
    }
    let support: Vec<(extensive::ReducedTree, f64)> = trees
        .into_iter()
        .zip(block_solution.alice.weights())
        .filter(|(_, &w)| w > 1e-12)
        .map(|(t, &w)| (t, w))
        .collect();
    if support.is_empty() {
        return Err(Error::invalid("block solution has empty support"));
    }

    let n = block_horizon;
    let kernel = move |_: &PrivateState, ctx: &StageContext<'_>| -> MixedStrategy {
        let full_blocks = ctx.horizon / n;
        let (within, ha, hb): (usize, &[usize], &[usize]) = if ctx.stage >= full_blocks * n {
            (0, &[], &[])
        } else {
            let j = ctx.stage % n;
            let start = ctx.stage - j;
            (
                j,
                &ctx.alice_history[start..ctx.stage],
                &ctx.bob_history[start..ctx.stage],
            )
        };

        let mut dist = vec![0.0; a];
        let mut mass = 0.0;
        for (tree, w) in &support {
            let mut node = tree;
            let mut consistent = true;
            for t in 0..within {
                if node.action as usize != ha[t] {
                    consistent = false;
                    break;
                }
                node = &node.children[hb[t]];
            }
            if consistent {
                dist[node.action as usize] += w;
                mass += w;
            }
        }
        if mass <= 0.0 {
            // Own history is always generated by this kernel, so the
            // support never empties during simulation.
            debug_assert!(false, "block strategy lost its support");
            return MixedStrategy::uniform(a);
        }
        for d in dist.iter_mut() {
            *d /= mass;
        }
        MixedStrategy::normalized(dist).expect("conditional block distribution")
    };

    Ok(BlockIidStrategy {
        strategy: BehavioralStrategy::with_init(
            Player::Alice,
            format!("block-iid[n={block_horizon}]"),
            a,
            |_, _| Vec::new(),
            kernel,
        ),
        block_horizon,
        block_value: block_solution.value,
    })
}

/// The guarantee-oriented strategies for the maximizer: uniform play and
/// the one-stage block strategy.
pub fn alice_library(game: &StageGame) -> Result<Vec<BehavioralStrategy>> {
    let omega = extensive::value_omega_n(&OmegaGame::new(game.clone(), 1)?)?;
    Ok(vec![
        strategy_uniform(game, Player::Alice),
        strategy_block_iid(game, 1, &omega)?.strategy,
    ])
}

/// The adversarial strategies for the minimizer: uniform, state-guessing,
/// nonrevealing, and the announcement strategy built from the convex
/// decomposition at the prior.
pub fn bob_library(game: &StageGame, envelope_resolution: usize) -> Result<Vec<BehavioralStrategy>> {
    let decomposition = belief::vex_decomposition(game, game.prior(), envelope_resolution)?;
    Ok(vec![
        strategy_uniform(game, Player::Bob),
        strategy_state_guessing_bob(game)?,
        strategy_nonrevealing_bob(game)?,
        strategy_revealing_bob(game, &decomposition)?,
    ])
}
