//! The one-lie Ulam liar game.
//!
//! A responder picks `x` in `1..=n` and may lie once; the questioner asks
//! yes/no membership questions. This crate provides the game semantics
//! ([`game`]), exact question-count formulas ([`bounds`]), a constructive
//! questioner ([`strategy`]), honest and adversarial responders
//! ([`adversary`]), an exact minimax solver ([`oracle`]) and verification
//! runs tying them together ([`harness`]).

pub mod adversary;
mod blocks;
pub mod bounds;
pub mod game;
pub mod harness;
pub mod num;
pub mod oracle;
pub mod strategy;
pub mod transcript;

pub use adversary::{Honest, Responder, ResponderConfig, TieBreak, WeightAdversary};
pub use bounds::{BoundKind, BoundResult, Bounds, BoundsError};
pub use game::{Answer, CandidateId, GameError, GameState, Question, StateSummary};
pub use num::ExactInt;
pub use oracle::{Oracle, OracleLimits};
pub use strategy::{run_game, GameOutcome, Phase, StrategyPlan, Verdict};
pub use transcript::Transcript;

/// Bounds over `u64`, valid up to 57 questions.
pub type Bounds64 = Bounds<u64>;
/// Bounds over `u128`, valid up to 120 questions.
pub type WideBounds = Bounds<u128>;
/// Bounds over arbitrary-precision integers; never overflows.
pub type ExactBounds = Bounds<num_bigint::BigUint>;
