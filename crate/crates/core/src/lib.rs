//! Maker-Breaker games on the complete graph over the rationals.
//!
//! The crate provides exact rational enumerations, a lazily built partition
//! of `(0,1) ∩ Q` whose classes are ordered like `Q`, a universal sequence,
//! a game engine with replayable traces, Maker's Q-game strategy, Breaker
//! opponents including the dense pairing strategy, and verifiers that check
//! runs, extract clique certificates, and exercise small Ramsey colourings.

pub mod analysis;
pub mod breaker;
pub mod dense;
pub mod engine;
pub mod error;
pub mod maker;
pub mod rational;
pub mod stream;

pub use dense::{class_between, class_compare, class_enum, ClassId, Partition};
pub use engine::{run_game, Decision, Edge, GameState, Move, MoveFlag, Player, Strategy, Trace};
pub use error::{EngineError, OrderError, RationalError, StrategyError, TraceError};
pub use rational::{enum_index_of, enum_q, enum_unit_interval, EnumerationIndex, Rational};
pub use stream::{gap_at, UniversalStream};
