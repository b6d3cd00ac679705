//! Guaranteed payoffs in zero-sum repeated games with incomplete
//! information, and the channel-capacity problems that reduce to them.
//!
//! The crate is organized around one pipeline:
//!
//! * [`matrix_game`] solves finite zero-sum matrix games by linear
//!   programming.
//! * [`belief`] lifts the one-stage value to a function `u(p)` on the
//!   belief simplex, computes its convex/concave envelopes, and evaluates
//!   the high-probability guarantee level `v_sup`: the minimum of `u` over
//!   each of the informed player's knowledge cells, minimized across cells.
//! * [`extensive`] solves the n-stage repeated game and the auxiliary game
//!   in which the minimizer commits to a state up front, exactly, by
//!   strategic-form enumeration for small n.
//! * [`simulator`] plays the repeated game forward under a library of
//!   behavioral strategies with a seed-deterministic engine, estimating
//!   empirical guarantee failure rates and martingale tail bounds.
//! * [`avc`] evaluates the capacity of a compound arbitrarily-varying
//!   channel by building the associated mutual-information game and
//!   reusing the belief machinery.
//!
//! All numeric results are per-stage averages, and all computations are
//! deterministic: parallel evaluation never changes values, argmins, or
//! sampled trajectories.

pub mod avc;
pub mod belief;
mod error;
pub mod extensive;
#[cfg(test)]
pub(crate) mod fixtures;
pub(crate) mod grid;
pub mod matrix_game;
pub mod simulator;

pub use error::{Error, Result};
pub use matrix_game::{GameSolution, MixedStrategy, PayoffMatrix, Player};

pub use belief::{Belief, Partition, StageGame};
