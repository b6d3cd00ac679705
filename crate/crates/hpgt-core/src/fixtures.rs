//! Small games shared by unit tests across modules.

use crate::belief::{Belief, Partition, StageGame};
use crate::matrix_game::PayoffMatrix;

/// Two-state 2x2 trap game: one -1 entry whose position depends on the
/// state. u(p) = -p(1-p); the minimizer knows the state.
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

/// Two-state 2x2 game with a safe row paying (1, 2) in both states and a
/// risky row paying (-4, -6) or (8, 8). Neither player sees the state.
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

/// Single-row tables, so u(p) = min(p, 1-p): concave with a ridge at 1/2.
pub fn ridge() -> StageGame {
    let t0 = PayoffMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
    let t1 = PayoffMatrix::from_rows(vec![vec![0.0, 1.0]]).unwrap();
    StageGame::new(
        vec![t0, t1],
        Belief::uniform(2),
        Partition::trivial(2),
        Partition::discrete(2),
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

/// 1x1 tables: u is affine, u(p) = 2p - (1-p).
pub fn affine_game() -> StageGame {
    let t0 = PayoffMatrix::from_rows(vec![vec![2.0]]).unwrap();
    let t1 = PayoffMatrix::from_rows(vec![vec![-1.0]]).unwrap();
    StageGame::new(
        vec![t0, t1],
        Belief::uniform(2),
        Partition::trivial(2),
        Partition::trivial(2),
    )
    .unwrap()
}

/// One-state wrapper around a single table.
pub fn single_state(table: PayoffMatrix) -> StageGame {
    StageGame::new(
        vec![table],
        Belief::uniform(1),
        Partition::trivial(1),
        Partition::trivial(1),
    )
    .unwrap()
}

/// Player-swapped game: tables transposed and negated, so its one-stage
/// value function is the negation of the original's.
pub fn mirrored(game: &StageGame) -> StageGame {
    let tables = game.tables().iter().map(|t| t.transpose_negated()).collect();
    StageGame::new(
        tables,
        game.prior().clone(),
        game.alice_info().clone(),
        game.bob_info().clone(),
    )
    .unwrap()
}
