use thiserror::Error;

use crate::model::{Committee, Lottery};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid committee: {0}")]
    InvalidCommittee(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    /// Committee not listed in an explicit score table.
    #[error("committee {0} is outside the oracle universe")]
    UnsupportedCommittee(Committee),

    /// A zero-weight committee that some voters strictly prefer.
    #[error("blocker {0} has zero weight but {1} supporting voter(s)")]
    DegenerateBlocker(Committee, usize),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("committee {committee} has weight {weight} above the limit {limit}")]
    InfeasibleCommittee {
        committee: Committee,
        weight: f64,
        limit: f64,
    },

    #[error("lottery support committee {committee} has weight {weight} above the limit {limit}")]
    InfeasibleLottery {
        committee: Committee,
        weight: f64,
        limit: f64,
    },

    #[error("invalid fractional vector: {0}")]
    InvalidFractional(String),

    /// The attacker mix carries no positive weight, so the scale factor is zero.
    #[error("degenerate attacker mix: {0}")]
    DegenerateAttacker(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no lottery passed verification at c = {target_c} (best measured c = {measured_c})")]
    Convergence {
        target_c: f64,
        measured_c: f64,
        best: Box<Lottery>,
    },

    /// A guaranteed-existence result failed to materialize; this indicates a bug.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),
}
