use super::*;
use crate::belief;
use crate::belief::Belief;
use crate::extensive::{value_omega_n, OmegaGame};
use crate::fixtures::{minefield, safe_risky, single_state, treasure};
use crate::matrix_game::PayoffMatrix;

fn mean_sigma(trajectories: &[Trajectory]) -> (f64, f64) {
    let n = trajectories.len() as f64;
    let mean = trajectories.iter().map(|t| t.sigma_n).sum::<f64>() / n;
    let var = trajectories.iter().map(|t| (t.sigma_n - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn identical_seeds_reproduce_bit_for_bit() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_state_guessing_bob(&g).unwrap();
    let a = run(&g, &alice, &bob, 20, 64, 99).unwrap();
    let b = run(&g, &alice, &bob, 20, 64, 99).unwrap();
    assert_eq!(a, b);
    let c = run(&g, &alice, &bob, 20, 64, 100).unwrap();
    assert_ne!(a, c);
}

#[test]
fn point_mass_strategies_give_a_deterministic_path() {
    let g = safe_risky();
    let alice = strategy_constant(&g, Player::Alice, 1).unwrap();
    let bob = strategy_constant(&g, Player::Bob, 0).unwrap();
    let trajs = run(&g, &alice, &bob, 5, 16, 3).unwrap();
    for t in &trajs {
        assert!(t.actions.iter().all(|&ab| ab == (1, 0)));
    }
}

#[test]
fn sigma_is_recomputable_and_bounded() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    let m = g.payoff_bound();
    for t in run(&g, &alice, &bob, 13, 50, 5).unwrap() {
        let table = g.table(t.state);
        let recomputed: f64 =
            t.actions.iter().map(|&(a, b)| table.get(a, b)).sum::<f64>() / t.actions.len() as f64;
        assert!((recomputed - t.sigma_n).abs() < 1e-12);
        assert!(t.sigma_n.abs() <= m);
    }
}

#[test]
fn safe_row_guarantees_one_against_every_bob() {
    let g = safe_risky();
    let alice = strategy_constant(&g, Player::Alice, 0).unwrap();
    for bob in bob_library(&g, 100).unwrap() {
        let trajs = run(&g, &alice, &bob, 50, 100, 11).unwrap();
        assert!(trajs.iter().all(|t| t.sigma_n >= 1.0), "vs {}", bob.name());
        let report = estimate_guarantee(&trajs, 1.0).unwrap();
        assert_eq!(report.failures, 0);
    }
}

#[test]
fn uniform_play_on_the_trap_game_averages_minus_quarter() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    let trajs = run(&g, &alice, &bob, 10_000, 300, 21).unwrap();
    let (mean, se) = mean_sigma(&trajs);
    assert!((mean + 0.25).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn guarantee_report_edges_and_identity() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    let trajs = run(&g, &alice, &bob, 100, 400, 7).unwrap();

    let all_pass = estimate_guarantee(&trajs, -10.0).unwrap();
    assert_eq!(all_pass.failures, 0);
    assert!(all_pass.standard_error > 0.0);

    let all_fail = estimate_guarantee(&trajs, g.payoff_bound() + 1.0).unwrap();
    assert!((all_fail.empirical_failure - 1.0).abs() < 1e-12);

    // Count-weighted per-state rates reproduce the total.
    let mid = estimate_guarantee(&trajs, -0.25).unwrap();
    let recombined: f64 = mid
        .per_state
        .iter()
        .map(|s| s.failure_rate * s.trials as f64)
        .sum::<f64>()
        / mid.trials as f64;
    assert!((recombined - mid.empirical_failure).abs() < 1e-12);
}

#[test]
fn concentrated_failure_rate_is_small_at_a_slack_threshold() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    let trajs = run(&g, &alice, &bob, 10_000, 500, 13).unwrap();
    let report = estimate_guarantee(&trajs, -0.30).unwrap();
    assert!(report.empirical_failure <= 0.01, "failure {}", report.empirical_failure);
}

#[test]
fn stage_one_frequencies_match_the_kernel() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_nonrevealing_bob(&g).unwrap();
    let trials = 100_000;
    let trajs = run(&g, &alice, &bob, 1, trials, 17).unwrap();
    let mut counts = [0usize; 2];
    for t in &trajs {
        counts[t.actions[0].0] += 1;
    }
    for &c in &counts {
        let freq = c as f64 / trials as f64;
        let se = (0.25 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * se, "freq {freq}");
    }
}

#[test]
fn state_guessing_reduces_to_the_policy_with_one_state() {
    let t = PayoffMatrix::from_rows(vec![vec![2.0, -1.0], vec![0.0, 5.0]]).unwrap();
    let g = single_state(t);
    let bob = strategy_state_guessing_bob(&g).unwrap();
    let alice = strategy_uniform(&g, Player::Alice);
    // Column 0 minimizes against uniform rows: (2+0)/2 = 1 vs (-1+5)/2 = 2.
    let trajs = run(&g, &alice, &bob, 4, 32, 23).unwrap();
    assert!(trajs.iter().all(|t| t.actions.iter().all(|&(_, b)| b == 0)));
}

#[test]
fn state_guess_is_uniform_and_its_damage_is_half_per_stage() {
    // The default policy plays column 0 for guess 0 and column 1 for
    // guess 1, so the guess is readable off Bob's first action.
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_state_guessing_bob(&g).unwrap();
    let trials = 4000;
    let trajs = run(&g, &alice, &bob, 200, trials, 29).unwrap();
    let correct: Vec<&Trajectory> =
        trajs.iter().filter(|t| t.actions[0].1 == t.state).collect();
    let frac = correct.len() as f64 / trials as f64;
    assert!((frac - 0.5).abs() < 3.0 * (0.25f64 / trials as f64).sqrt());

    // Conditional on a correct guess the per-stage expectation is -1/2:
    // the guessed column contains the -1 entry half the time under
    // uniform rows.
    let mean = correct.iter().map(|t| t.sigma_n).sum::<f64>() / correct.len() as f64;
    assert!((mean + 0.5).abs() < 0.02, "conditional mean {mean}");
}

#[test]
fn nonrevealing_bob_caps_every_alice_at_u_of_prior() {
    let g = minefield();
    let u0 = belief::u(&g, g.prior()).unwrap();
    let bob = strategy_nonrevealing_bob(&g).unwrap();
    for alice in alice_library(&g).unwrap() {
        let trajs = run(&g, &alice, &bob, 10_000, 300, 31).unwrap();
        let (mean, se) = mean_sigma(&trajs);
        assert!(mean <= u0 + 3.0 * se, "{}: mean {mean} vs u {u0}", alice.name());
    }
}

#[test]
fn revealing_bob_announces_and_conditions_the_state() {
    // treasure() has concave u, so the decomposition at the uniform prior
    // puts half weight on each vertex and V identifies the state.
    let g = treasure();
    let d = belief::vex_decomposition(&g, g.prior(), 100).unwrap();
    assert_eq!(d.atoms(), 2);
    let bob = strategy_revealing_bob(&g, &d).unwrap();
    assert!(bob.name().starts_with("revealing[atoms=2,signal_stages=1"));

    let alice = strategy_uniform(&g, Player::Alice);
    let n = 400;
    let trajs = run(&g, &alice, &bob, n, 2000, 37).unwrap();
    for t in &trajs {
        let announced = t.actions[0].1;
        let atom = &d.points[announced];
        // Fully informed Bob announces exactly: state ~ point mass.
        assert!((atom.probs()[t.state] - 1.0).abs() < 1e-12);
    }

    // Mean payoff obeys the envelope bound plus the announcement cost.
    let value_bound: f64 = d
        .weights
        .iter()
        .zip(&d.points)
        .map(|(w, p)| w * belief::u(&g, p).unwrap())
        .sum();
    let (mean, se) = mean_sigma(&trajs);
    let slack = 1.0 * 2.0 * g.payoff_bound() / n as f64;
    assert!(mean <= value_bound + slack + 3.0 * se, "mean {mean} bound {value_bound}");
}

#[test]
fn single_atom_reveal_is_nonrevealing() {
    let g = minefield(); // u convex: one atom at the prior
    let d = belief::vex_decomposition(&g, g.prior(), 200).unwrap();
    assert_eq!(d.atoms(), 1);
    let bob = strategy_revealing_bob(&g, &d).unwrap();
    assert!(bob.name().contains("signal_stages=0"));
    let nonrev = strategy_nonrevealing_bob(&g).unwrap();
    let alice = strategy_uniform(&g, Player::Alice);
    let a = run(&g, &alice, &bob, 30, 50, 41).unwrap();
    let b = run(&g, &alice, &nonrev, 30, 50, 41).unwrap();
    assert_eq!(a, b, "identical kernels and seeds must coincide");
}

#[test]
fn revealing_bob_rejects_a_mismatched_anchor() {
    let g = minefield();
    let shifted = g.with_prior(Belief::new(vec![0.3, 0.7]).unwrap()).unwrap();
    let d = belief::vex_decomposition(&shifted, shifted.prior(), 100).unwrap();
    assert!(matches!(
        strategy_revealing_bob(&g, &d),
        Err(crate::Error::InvalidInput(_))
    ));
}

#[test]
fn block_one_strategy_is_stationary_uniform_on_the_trap_game() {
    let g = minefield();
    let omega = value_omega_n(&OmegaGame::new(g.clone(), 1).unwrap()).unwrap();
    let block = strategy_block_iid(&g, 1, &omega).unwrap();
    assert!((block.block_value + 0.5).abs() < 1e-9);
    let trajs = run(&g, &block.strategy, &strategy_uniform(&g, Player::Bob), 1000, 200, 43).unwrap();
    let mut heads = 0usize;
    let mut total = 0usize;
    for t in &trajs {
        heads += t.actions.iter().filter(|&&(a, _)| a == 0).count();
        total += t.actions.len();
    }
    let freq = heads as f64 / total as f64;
    assert!((freq - 0.5).abs() < 0.01, "row frequency {freq}");
}

#[test]
fn block_strategy_replays_the_block_equilibrium_behaviorally() {
    // Two-stage blocks on a single-state game: the support conditioning
    // must follow the opponent's action within the block.
    let t = PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    let g = single_state(t);
    let omega = value_omega_n(&OmegaGame::new(g.clone(), 2).unwrap()).unwrap();
    let block = strategy_block_iid(&g, 2, &omega).unwrap();
    assert!(block.block_value.abs() < 1e-9);
    let trajs = run(&g, &block.strategy, &strategy_uniform(&g, Player::Bob), 10, 500, 47).unwrap();
    let (mean, se) = mean_sigma(&trajs);
    assert!(mean.abs() < 3.0 * se + 1e-9);
}

#[test]
fn block_solution_size_mismatch_is_invalid() {
    let g = minefield();
    let omega = value_omega_n(&OmegaGame::new(g.clone(), 1).unwrap()).unwrap();
    assert!(matches!(
        strategy_block_iid(&g, 2, &omega),
        Err(crate::Error::InvalidInput(_))
    ));
}

#[test]
fn alphabet_mismatch_is_invalid() {
    let g = minefield();
    let wide = single_state(PayoffMatrix::from_rows(vec![vec![0.0, 0.0, 0.0]]).unwrap());
    let alice = strategy_uniform(&wide, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    assert!(matches!(
        run(&g, &alice, &bob, 5, 5, 0),
        Err(crate::Error::InvalidInput(_))
    ));
}

#[test]
fn azuma_bound_is_trivial_on_a_constant_game() {
    let t = PayoffMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let g = single_state(t);
    let omega = value_omega_n(&OmegaGame::new(g.clone(), 1).unwrap()).unwrap();
    let block = strategy_block_iid(&g, 1, &omega).unwrap();
    let report =
        check_azuma(&g, &block, &strategy_uniform(&g, Player::Bob), 500, 100, 51).unwrap();
    assert!(report.all_hold);
    assert!(report.increment_bound_holds);
    assert!(report.max_abs_increment < 1e-12, "payoff always equals the block value");
}

#[test]
fn azuma_tail_holds_on_the_trap_game() {
    let g = minefield();
    let omega = value_omega_n(&OmegaGame::new(g.clone(), 1).unwrap()).unwrap();
    let block = strategy_block_iid(&g, 1, &omega).unwrap();
    let report =
        check_azuma(&g, &block, &strategy_uniform(&g, Player::Bob), 2000, 300, 53).unwrap();
    assert!(report.all_hold, "{:?}", report.thresholds);
    assert!(report.increment_bound_holds);
    assert!(report.max_abs_increment <= 2.0 * g.payoff_bound());
}

#[test]
fn per_state_failure_rates_do_not_depend_on_prior_masses() {
    // Same strategies, same per-state dynamics, different priors: the
    // conditional failure rates must agree within noise.
    let g1 = minefield();
    let g2 = g1.with_prior(Belief::new(vec![0.8, 0.2]).unwrap()).unwrap();
    let alice = strategy_uniform(&g1, Player::Alice);
    let bob = strategy_state_guessing_bob(&g1).unwrap();
    let trials = 4000;
    let t1 = run(&g1, &alice, &bob, 500, trials, 57).unwrap();
    let t2 = run(&g2, &alice, &bob, 500, trials, 58).unwrap();
    let r1 = estimate_guarantee(&t1, -0.2).unwrap();
    let r2 = estimate_guarantee(&t2, -0.2).unwrap();
    for (a, b) in r1.per_state.iter().zip(&r2.per_state) {
        assert_eq!(a.state, b.state);
        let se = wilson_stderr(a.failures, a.trials) + wilson_stderr(b.failures, b.trials);
        assert!(
            (a.failure_rate - b.failure_rate).abs() <= 3.0 * se,
            "state {}: {} vs {}",
            a.state,
            a.failure_rate,
            b.failure_rate
        );
    }
}

#[test]
fn zero_trials_is_invalid() {
    let g = minefield();
    let alice = strategy_uniform(&g, Player::Alice);
    let bob = strategy_uniform(&g, Player::Bob);
    assert!(run(&g, &alice, &bob, 5, 0, 0).is_err());
    assert!(estimate_guarantee(&[], 0.0).is_err());
}
