//! `hpgt`: values, envelopes, guarantee levels, exact small-horizon
//! solves, Monte Carlo verification, and channel capacities for zero-sum
//! repeated games with incomplete information.
//!
//! Exit codes: 0 success, 2 malformed input, 3 configured resource cap
//! exceeded, 1 internal numerical failure.

mod formats;

use clap::{Parser, Subcommand};
use formats::{fmt_sig, load_channel, load_game, round_floats, LoadedGame, RunManifest};
use hpgt_core::avc::{self, InputGrid};
use hpgt_core::belief::{self, MinimizeOptions};
use hpgt_core::extensive::{self, OmegaGame};
use hpgt_core::matrix_game::{self, PayoffMatrix};
use hpgt_core::simulator::{self, BehavioralStrategy};
use hpgt_core::{Belief, Player};
use serde_json::json;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Limit(String),
    Internal(String),
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Limit(m) => write!(f, "resource limit: {m}"),
            CliError::Internal(m) => write!(f, "internal failure: {m}"),
        }
    }
}

impl From<hpgt_core::Error> for CliError {
    fn from(e: hpgt_core::Error) -> Self {
        match e {
            hpgt_core::Error::InvalidInput(m) => CliError::Input(m),
            hpgt_core::Error::ResourceLimit(m) => CliError::Limit(m),
            hpgt_core::Error::Numerical(m) => CliError::Internal(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "hpgt",
    version,
    about = "Guaranteed payoffs in repeated games with hidden state, and the channel capacities that reduce to them"
)]
struct Cli {
    /// Worker threads; falls back to HPGT_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Tolerance for the saddle verification reported by `solve`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one zero-sum table from a game file.
    Solve {
        file: PathBuf,
        /// Solve the table of this state index.
        #[arg(long, conflicts_with = "belief")]
        state: Option<usize>,
        /// Solve the belief-averaged table (one weight per state).
        #[arg(long, num_args = 1..)]
        belief: Option<Vec<f64>>,
    },
    /// Sample the one-stage value u over the belief lattice (CSV).
    Usweep {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Sample u and its convex envelope over the lattice (CSV).
    Envelope {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Guarantee level with its achieving cell and belief.
    Vsup {
        file: PathBuf,
        /// Lattice subdivisions (default picked by cell size).
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
    },
    /// Exact per-stage value of the n-stage repeated game.
    GammaN {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        /// Per-player pure-strategy ceiling; the solver refuses past it.
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        /// Write the strategic form to PREFIX.csv with a decision
        /// legend at PREFIX.legend.json.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Exact value of the game where the minimizer commits to a state.
    OmegaN {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        /// Per-player pure-strategy ceiling; the solver refuses past it.
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Monte Carlo failure-rate estimation for a strategy pairing.
    Simulate {
        #[arg(long)]
        game: PathBuf,
        /// uniform | block-iid | always-K
        #[arg(long)]
        alice: String,
        /// uniform | state-guessing | nonrevealing | revealing | always-K
        #[arg(long)]
        bob: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, allow_hyphen_values = true)]
        threshold: f64,
        /// Block size for the block-iid strategy.
        #[arg(long, default_value_t = 1)]
        block: usize,
        /// Envelope resolution for the revealing strategy.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Also write trajectories as JSON lines to this path.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Empirical martingale tail check for block play.
    Azuma {
        #[arg(long)]
        game: PathBuf,
        /// Opponent strategy name.
        #[arg(long, default_value = "uniform")]
        bob: String,
        #[arg(long)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        block_n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Compound-AVC capacity on a finite input grid.
    AvcCapacity {
        #[arg(long)]
        channel: PathBuf,
        /// Covering radius of the input-distribution grid.
        #[arg(long, default_value_t = 0.02)]
        mesh: f64,
        #[arg(long, default_value_t = 200)]
        belief_res: usize,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| std::env::var("HPGT_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_json(
    out: &Option<PathBuf>,
    mut manifest: RunManifest,
    result: serde_json::Value,
    started: Instant,
) -> Result<(), CliError> {
    manifest.wall_ms = started.elapsed().as_millis();
    let mut doc = json!({ "manifest": manifest, "result": result });
    round_floats(&mut doc);
    emit(
        out,
        &serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?,
    )
}

fn emit_csv(
    out: &Option<PathBuf>,
    mut manifest: RunManifest,
    header: &str,
    rows: Vec<String>,
    started: Instant,
) -> Result<(), CliError> {
    manifest.wall_ms = started.elapsed().as_millis();
    let mut manifest_json =
        serde_json::to_value(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    round_floats(&mut manifest_json);
    let mut text = format!("# manifest: {manifest_json}\n{header}\n");
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    emit(out, text.trim_end())
}

fn build_alice(
    loaded: &LoadedGame,
    name: &str,
    block: usize,
) -> Result<BehavioralStrategy, CliError> {
    match name {
        "uniform" => Ok(simulator::strategy_uniform(&loaded.game, Player::Alice)),
        "block-iid" => {
            let omega = extensive::value_omega_n(&OmegaGame::new(loaded.game.clone(), block)?)?;
            Ok(simulator::strategy_block_iid(&loaded.game, block, &omega)?.strategy)
        }
        other => parse_constant(&loaded.game, Player::Alice, other),
    }
}

fn build_bob(
    loaded: &LoadedGame,
    name: &str,
    resolution: usize,
) -> Result<BehavioralStrategy, CliError> {
    match name {
        "uniform" => Ok(simulator::strategy_uniform(&loaded.game, Player::Bob)),
        "state-guessing" => Ok(simulator::strategy_state_guessing_bob(&loaded.game)?),
        "nonrevealing" => Ok(simulator::strategy_nonrevealing_bob(&loaded.game)?),
        "revealing" => {
            let d = belief::vex_decomposition(&loaded.game, loaded.game.prior(), resolution)?;
            Ok(simulator::strategy_revealing_bob(&loaded.game, &d)?)
        }
        other => parse_constant(&loaded.game, Player::Bob, other),
    }
}

fn parse_constant(
    game: &hpgt_core::StageGame,
    owner: Player,
    name: &str,
) -> Result<BehavioralStrategy, CliError> {
    let Some(idx) = name.strip_prefix("always-") else {
        return Err(CliError::input(format!(
            "unknown strategy `{name}`; expected uniform, block-iid, state-guessing, \
             nonrevealing, revealing, or always-<action>"
        )));
    };
    let action: usize = idx
        .parse()
        .map_err(|_| CliError::input(format!("`{name}`: action index must be an integer")))?;
    Ok(simulator::strategy_constant(game, owner, action)?)
}

fn solution_json(
    sol: &matrix_game::GameSolution,
    table: &PayoffMatrix,
    tol: f64,
) -> serde_json::Value {
    // Residual of the saddle inequalities, reported against --tolerance.
    let mut violation = 0.0f64;
    for j in 0..table.cols() {
        let v: f64 = (0..table.rows()).map(|i| table.get(i, j) * sol.alice.weights()[i]).sum();
        violation = violation.max(sol.value - v);
    }
    for i in 0..table.rows() {
        let v: f64 = (0..table.cols()).map(|j| table.get(i, j) * sol.bob.weights()[j]).sum();
        violation = violation.max(v - sol.value);
    }
    json!({
        "value": sol.value,
        "alice": sol.alice.weights(),
        "bob": sol.bob.weights(),
        "saddle_check": {
            "max_violation": violation,
            "tolerance": tol,
            "ok": violation <= tol,
        },
    })
}

fn lattice_header(states: &[String], extra: &[&str]) -> String {
    let mut cols: Vec<String> = states.iter().map(|s| format!("p_{s}")).collect();
    cols.extend(extra.iter().map(|s| s.to_string()));
    cols.join(",")
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let tolerance = cli.tolerance;
    let out = cli.out.clone();
    match cli.command {
        Command::Solve { file, state, belief } => {
            let loaded = load_game(&file)?;
            let (table, selector) = match (state, belief) {
                (Some(s), None) => {
                    if s >= loaded.game.num_states() {
                        return Err(CliError::input(format!(
                            "state: index {s} out of range (< {})",
                            loaded.game.num_states()
                        )));
                    }
                    (loaded.game.table(s).clone(), json!({ "state": s }))
                }
                (None, Some(b)) => {
                    let belief = Belief::new(b.clone())
                        .map_err(|e| CliError::input(format!("belief: {}", formats::msg(e))))?;
                    (
                        belief::average_table(&loaded.game, &belief)
                            .map_err(|e| CliError::input(format!("belief: {}", formats::msg(e))))?,
                        json!({ "belief": b }),
                    )
                }
                _ => {
                    return Err(CliError::input(
                        "exactly one of --state or --belief must be given",
                    ))
                }
            };
            let sol = matrix_game::solve(&table)?;
            let manifest = RunManifest::new(
                "solve",
                json!({ "file": file, "selector": selector, "tolerance": tolerance }),
                None,
            );
            emit_json(&out, manifest, solution_json(&sol, &table, tolerance), started)
        }

        Command::Usweep { file, resolution } => {
            let loaded = load_game(&file)?;
            let env = belief::vex_envelope(&loaded.game, resolution)?;
            let rows = env
                .grid()
                .iter()
                .zip(env.grid_values())
                .map(|(b, &u)| {
                    let mut cells: Vec<String> = b.probs().iter().map(|&p| fmt_sig(p)).collect();
                    cells.push(fmt_sig(u));
                    cells.join(",")
                })
                .collect();
            let manifest =
                RunManifest::new("usweep", json!({ "file": file, "resolution": resolution }), None);
            emit_csv(&out, manifest, &lattice_header(&loaded.states, &["u"]), rows, started)
        }

        Command::Envelope { file, resolution } => {
            let loaded = load_game(&file)?;
            let env = belief::vex_envelope(&loaded.game, resolution)?;
            let rows = env
                .grid()
                .iter()
                .zip(env.grid_values())
                .map(|(b, &u)| {
                    let vex = env.eval(b)?;
                    let mut cells: Vec<String> = b.probs().iter().map(|&p| fmt_sig(p)).collect();
                    cells.push(fmt_sig(u));
                    cells.push(fmt_sig(vex));
                    Ok(cells.join(","))
                })
                .collect::<Result<Vec<_>, hpgt_core::Error>>()?;
            let manifest = RunManifest::new(
                "envelope",
                json!({ "file": file, "resolution": resolution }),
                None,
            );
            emit_csv(&out, manifest, &lattice_header(&loaded.states, &["u", "vex"]), rows, started)
        }

        Command::Vsup { file, resolution, rounds } => {
            let loaded = load_game(&file)?;
            let vs = belief::v_sup_with(
                &loaded.game,
                &MinimizeOptions { resolution, refinement_rounds: rounds },
            )?;
            let result = json!({
                "value": vs.value,
                "witness_cell": loaded.alice_cells[vs.cell],
                "witness_belief": vs.belief.probs(),
                "resolution": vs.resolution,
            });
            let manifest = RunManifest::new(
                "vsup",
                json!({ "file": file, "resolution": resolution, "rounds": rounds }),
                None,
            );
            emit_json(&out, manifest, result, started)
        }

        Command::GammaN { file, n, cap, dump } => {
            let loaded = load_game(&file)?;
            let sf = extensive::build_strategic_form_capped(&loaded.game, n, cap as u128)?;
            let sol = extensive::solve_strategic_form(&sf)?;
            if let Some(prefix) = &dump {
                dump_strategic_form(prefix, &sf)?;
            }
            let result = json!({
                "horizon": n,
                "value": sol.value,
                "alice_strategies": sf.alice_strategies.len(),
                "bob_strategies": sf.bob_strategies.len(),
            });
            let manifest = RunManifest::new(
                "gamma-n",
                json!({ "file": file, "n": n, "cap": cap, "dump": dump }),
                None,
            );
            emit_json(&out, manifest, result, started)
        }

        Command::OmegaN { file, n, cap } => {
            let loaded = load_game(&file)?;
            let sol = extensive::value_omega_n_capped(
                &OmegaGame::new(loaded.game.clone(), n)?,
                cap as u128,
            )?;
            let result = json!({ "horizon": n, "value": sol.value });
            let manifest = RunManifest::new(
                "omega-n",
                json!({ "file": file, "n": n, "cap": cap }),
                None,
            );
            emit_json(&out, manifest, result, started)
        }

        Command::Simulate {
            game,
            alice,
            bob,
            n,
            trials,
            seed,
            threshold,
            block,
            resolution,
            trajectories,
        } => {
            let loaded = load_game(&game)?;
            let alice_strategy = build_alice(&loaded, &alice, block)?;
            let bob_strategy = build_bob(&loaded, &bob, resolution)?;
            let trajs =
                simulator::run(&loaded.game, &alice_strategy, &bob_strategy, n, trials, seed)?;
            let report = simulator::estimate_guarantee(&trajs, threshold)?;
            let manifest = RunManifest::new(
                "simulate",
                json!({
                    "game": game, "alice": alice, "bob": bob, "n": n, "trials": trials,
                    "threshold": threshold, "block": block, "resolution": resolution,
                }),
                Some(seed),
            );
            if let Some(path) = &trajectories {
                write_trajectories(path, &manifest, &trajs)?;
            }
            let mut result =
                serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            result["alice_strategy"] = json!(alice_strategy.name());
            result["bob_strategy"] = json!(bob_strategy.name());
            emit_json(&out, manifest, result, started)
        }

        Command::Azuma { game, bob, blocks, block_n, trials, seed, resolution } => {
            let loaded = load_game(&game)?;
            let omega = extensive::value_omega_n(&OmegaGame::new(loaded.game.clone(), block_n)?)?;
            let block = simulator::strategy_block_iid(&loaded.game, block_n, &omega)?;
            let bob_strategy = build_bob(&loaded, &bob, resolution)?;
            let report =
                simulator::check_azuma(&loaded.game, &block, &bob_strategy, blocks, trials, seed)?;
            let manifest = RunManifest::new(
                "azuma",
                json!({
                    "game": game, "bob": bob, "blocks": blocks, "block_n": block_n,
                    "trials": trials, "resolution": resolution,
                }),
                Some(seed),
            );
            let result =
                serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            emit_json(&out, manifest, result, started)
        }

        Command::AvcCapacity { channel, mesh, belief_res, rounds } => {
            let loaded = load_channel(&channel)?;
            let grid = InputGrid::lattice(loaded.channel.x_size(), mesh)?;
            let cap = avc::capacity(&loaded.channel, &grid, belief_res, rounds)?;
            let result = json!({
                "bits": cap.bits,
                "witness_cell": loaded.encoder_cells[cap.witness_cell],
                "witness_belief": cap.witness_belief.probs(),
                "witness_adversary": cap.witness_adversary.weights(),
                "witness_input": cap.witness_input,
                "grid_points": cap.grid_points,
                "grid_mesh": cap.grid_mesh,
                "belief_resolution": cap.belief_resolution,
            });
            let manifest = RunManifest::new(
                "avc-capacity",
                json!({
                    "channel": channel, "mesh": mesh, "belief_res": belief_res,
                    "rounds": rounds,
                }),
                None,
            );
            emit_json(&out, manifest, result, started)
        }
    }
}

fn dump_strategic_form(prefix: &Path, sf: &extensive::StrategicForm) -> Result<(), CliError> {
    let csv_path = prefix.with_extension("csv");
    let legend_path = prefix.with_extension("legend.json");

    let mut text = String::new();
    let header: Vec<String> = std::iter::once("alice\\bob".to_string())
        .chain((0..sf.payoff.cols()).map(|j| j.to_string()))
        .collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for i in 0..sf.payoff.rows() {
        let mut row = vec![i.to_string()];
        row.extend((0..sf.payoff.cols()).map(|j| fmt_sig(sf.payoff.get(i, j))));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(&csv_path, text)?;

    let legend = json!({
        "horizon": sf.horizon,
        "alice": sf.alice_strategies.iter().map(|s| s.decision_vector()).collect::<Vec<_>>(),
        "bob": sf.bob_strategies.iter().map(|s| s.decision_vector()).collect::<Vec<_>>(),
    });
    std::fs::write(
        &legend_path,
        serde_json::to_string(&legend).map_err(|e| CliError::Internal(e.to_string()))?,
    )?;
    Ok(())
}

fn write_trajectories(
    path: &Path,
    manifest: &RunManifest,
    trajectories: &[simulator::Trajectory],
) -> Result<(), CliError> {
    let mut text = String::new();
    let mut head = json!({ "manifest": manifest });
    round_floats(&mut head);
    text.push_str(&head.to_string());
    text.push('\n');
    for t in trajectories {
        let mut line = serde_json::to_value(t).map_err(|e| CliError::Internal(e.to_string()))?;
        round_floats(&mut line);
        text.push_str(&line.to_string());
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
