//! On-disk formats: game and channel files in, manifest-carrying JSON and
//! CSV out.

use hpgt_core::avc::ChannelSpec;
use hpgt_core::belief::{Belief, Partition, StageGame};
use hpgt_core::matrix_game::PayoffMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

use crate::CliError;

/// Inner message of a core error, for re-prefixing with field context.
pub(crate) fn msg(e: hpgt_core::Error) -> String {
    match e {
        hpgt_core::Error::InvalidInput(m)
        | hpgt_core::Error::ResourceLimit(m)
        | hpgt_core::Error::Numerical(m) => m,
    }
}

/// A stage game as stored on disk. Unknown fields are rejected so typos
/// fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub states: Vec<String>,
    /// Row-major payoff table per state.
    pub tables: Vec<Vec<Vec<f64>>>,
    pub prior: Vec<f64>,
    pub alice_partition: std::collections::BTreeMap<String, String>,
    pub bob_partition: std::collections::BTreeMap<String, String>,
}

/// The in-memory game plus the label bookkeeping needed to report
/// witnesses back in the file's vocabulary.
pub struct LoadedGame {
    pub game: StageGame,
    pub states: Vec<String>,
    pub alice_cells: Vec<String>,
}

fn partition_from_labels(
    field: &str,
    states: &[String],
    map: &std::collections::BTreeMap<String, String>,
) -> Result<(Partition, Vec<String>), CliError> {
    for key in map.keys() {
        if !states.contains(key) {
            return Err(CliError::input(format!("{field}: unknown state label `{key}`")));
        }
    }
    let mut cell_labels: Vec<String> = Vec::new();
    let mut cell_of = Vec::with_capacity(states.len());
    // Cells are numbered by sorted label so ids are stable across runs.
    let sorted: BTreeSet<&String> = map.values().collect();
    for label in &sorted {
        cell_labels.push((*label).clone());
    }
    for state in states {
        let Some(cell) = map.get(state) else {
            return Err(CliError::input(format!("{field}: state `{state}` has no cell")));
        };
        cell_of.push(cell_labels.iter().position(|c| c == cell).unwrap());
    }
    let partition = Partition::from_cells(cell_of)
        .map_err(|e| CliError::input(format!("{field}: {}", msg(e))))?;
    Ok((partition, cell_labels))
}

pub fn load_game(path: &Path) -> Result<LoadedGame, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let file: GameFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;

    if file.states.is_empty() {
        return Err(CliError::input("states: must list at least one state"));
    }
    let unique: BTreeSet<&String> = file.states.iter().collect();
    if unique.len() != file.states.len() {
        return Err(CliError::input("states: labels must be unique"));
    }
    if file.tables.len() != file.states.len() {
        return Err(CliError::input(format!(
            "tables: {} tables for {} states",
            file.tables.len(),
            file.states.len()
        )));
    }
    if file.prior.len() != file.states.len() {
        return Err(CliError::input(format!(
            "prior: {} entries for {} states",
            file.prior.len(),
            file.states.len()
        )));
    }

    let tables = file
        .tables
        .iter()
        .enumerate()
        .map(|(s, rows)| {
            PayoffMatrix::from_rows(rows.clone())
                .map_err(|e| CliError::input(format!("tables[{s}]: {}", msg(e))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let prior = Belief::new(file.prior.clone())
        .map_err(|e| CliError::input(format!("prior: {}", msg(e))))?;
    let (alice_info, alice_cells) =
        partition_from_labels("alice_partition", &file.states, &file.alice_partition)?;
    let (bob_info, _) =
        partition_from_labels("bob_partition", &file.states, &file.bob_partition)?;

    let game = StageGame::new(tables, prior, alice_info, bob_info)
        .map_err(|e| CliError::input(msg(e)))?;
    Ok(LoadedGame { game, states: file.states, alice_cells })
}

/// A channel as stored on disk; the law is indexed `[state][a][x][y]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub a: Vec<String>,
    pub states: Vec<String>,
    pub law: Vec<Vec<Vec<Vec<f64>>>>,
    pub state_prior: Vec<f64>,
    pub encoder_partition: std::collections::BTreeMap<String, String>,
    pub adversary_partition: std::collections::BTreeMap<String, String>,
}

pub struct LoadedChannel {
    pub channel: ChannelSpec,
    pub encoder_cells: Vec<String>,
}

pub fn load_channel(path: &Path) -> Result<LoadedChannel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let file: ChannelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;

    if file.law.len() != file.states.len() {
        return Err(CliError::input(format!(
            "law: {} state slices for {} states",
            file.law.len(),
            file.states.len()
        )));
    }
    for (s, per_a) in file.law.iter().enumerate() {
        if per_a.len() != file.a.len() {
            return Err(CliError::input(format!(
                "law[{s}]: {} adversary slices for {} symbols",
                per_a.len(),
                file.a.len()
            )));
        }
        for (ai, per_x) in per_a.iter().enumerate() {
            if per_x.len() != file.x.len() {
                return Err(CliError::input(format!(
                    "law[{s}][{ai}]: {} input rows for {} symbols",
                    per_x.len(),
                    file.x.len()
                )));
            }
            for (xi, py) in per_x.iter().enumerate() {
                if py.len() != file.y.len() {
                    return Err(CliError::input(format!(
                        "law[{s}][{ai}][{xi}]: {} outputs for {} symbols",
                        py.len(),
                        file.y.len()
                    )));
                }
            }
        }
    }
    let prior = Belief::new(file.state_prior.clone())
        .map_err(|e| CliError::input(format!("state_prior: {}", msg(e))))?;
    let (encoder_info, encoder_cells) =
        partition_from_labels("encoder_partition", &file.states, &file.encoder_partition)?;
    let (adversary_info, _) =
        partition_from_labels("adversary_partition", &file.states, &file.adversary_partition)?;
    let channel = ChannelSpec::new(file.law.clone(), prior, encoder_info, adversary_info)
        .map_err(|e| CliError::input(msg(e)))?;
    Ok(LoadedChannel { channel, encoder_cells })
}

/// Provenance block embedded in every output artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub wall_ms: u128,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: 0,
        }
    }
}

/// Rounds every number in a JSON tree to 12 significant digits so output
/// is stable enough for golden files.
pub fn round_floats(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if f.is_finite() && n.as_i64().is_none() && n.as_u64().is_none() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig(f, 12)) {
                        *value = serde_json::Value::Number(rounded);
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

/// Formats one float with 12 significant digits for CSV cells.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x, 12);
    let mut s = format!("{r}");
    if s.contains('e') || s.contains('E') {
        s = format!("{r:e}");
    }
    s
}
