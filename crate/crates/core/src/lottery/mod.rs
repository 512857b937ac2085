//! Approximately stable lotteries: dependent rounding, the defender best
//! response, a multiplicative-weights solver and an exact game solver.

mod defender;
mod dependent;
mod game;
mod mwu;
mod simplex;

pub use defender::defender_response;
pub use dependent::{dependent_round, weighted_sum, FractionalVector};
pub use game::{exact_game, exact_game_for, GameSolution, GAME_TOL, MAX_STRATEGIES};
pub use mwu::{default_rounds, mwu_lottery, MwuOutcome, MwuParams, MAX_ATTACKER_STRATEGIES};
