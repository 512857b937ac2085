//! Approximately stable committees and lotteries for multiwinner elections
//! with candidate weights and a budget `K`.
//!
//! A committee `S` is `c`-approximately stable when no committee `S'` is
//! strictly preferred to it by at least `c * w(S') / K * n` voters. The crate
//! verifies this exhaustively, builds stable lotteries by solving the
//! associated zero-sum game, rounds lotteries into deterministic committees
//! and generates the lower-bound instance families.

pub mod bench;
pub mod enumerate;
pub mod error;
pub mod generators;
pub mod lottery;
pub mod model;
pub mod preferences;
pub mod rounding;
pub mod small_k;
pub mod stability;

pub use enumerate::EnumerationBound;
pub use error::{Error, Result};
pub use model::{committee_weight, validate_instance, Committee, Instance, Lottery, RawInstance, WeightSpec};
pub use preferences::{compare, strictly_prefers, weakly_prefers, Ordering, PreferenceModel};
pub use stability::{
    blocking_ratio, find_worst_blocker, lottery_score, min_deterministic_c, pairwise_score, verify_committee,
    verify_lottery, verify_lottery_for, StabilityReport,
};
