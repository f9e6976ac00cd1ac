//! Board state, alternation referee, and traces.

mod state;
mod trace;

use std::fmt;

pub use state::{ConnectionRecord, GameState};
pub use trace::{config_digest, format_move, parse_move_line, replay, Trace, TraceHeader, TraceParts, TRACE_MAGIC};

use crate::error::{EngineError, StrategyError};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Maker,
    Breaker,
}

impl Player {
    pub fn tag(self) -> char {
        match self {
            Player::Maker => 'M',
            Player::Breaker => 'B',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "M" => Some(Player::Maker),
            "B" => Some(Player::Breaker),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Maker => "Maker",
            Player::Breaker => "Breaker",
        })
    }
}

/// Unordered pair of distinct rationals, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    lo: Rational,
    hi: Rational,
}

impl Edge {
    pub fn new(a: Rational, b: Rational) -> Result<Self, EngineError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(EngineError::Loop(a)),
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo == r || &self.hi == r
    }

    /// The endpoint other than `r`, if `r` is an endpoint.
    pub fn other(&self, r: &Rational) -> Option<&Rational> {
        if &self.lo == r {
            Some(&self.hi)
        } else if &self.hi == r {
            Some(&self.lo)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

/// Why a strategy left its main rule; recorded on the move's trace line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveFlag {
    /// Every edge from the active vertex into a full `F` was claimed.
    BlockedF,
    /// The universal-sequence occurrence lay beyond the search budget.
    OccurrenceBudget,
    /// Breaker had no rule-driven move and took the canonical first edge.
    Canonical,
}

impl MoveFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveFlag::BlockedF => "fallback=blocked-f",
            MoveFlag::OccurrenceBudget => "fallback=occurrence-budget",
            MoveFlag::Canonical => "fallback=canonical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [MoveFlag::BlockedF, MoveFlag::OccurrenceBudget, MoveFlag::Canonical].into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for MoveFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    /// 1-based turn number.
    pub turn: u64,
    pub player: Player,
    pub edge: Edge,
    pub flag: Option<MoveFlag>,
}

/// A strategy's answer for one turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub edge: Edge,
    pub flag: Option<MoveFlag>,
}

impl Decision {
    pub fn plain(edge: Edge) -> Self {
        Decision { edge, flag: None }
    }

    pub fn flagged(edge: Edge, flag: MoveFlag) -> Self {
        Decision { edge, flag: Some(flag) }
    }
}

/// A player's decision rule. The engine owns all board mutation; a strategy
/// may keep a private memo derived from the states it has been shown.
pub trait Strategy {
    /// Identifier written to trace headers.
    fn id(&self) -> String;

    /// Stable description of every frozen ingredient, for the config digest.
    fn descriptor(&self) -> String {
        self.id()
    }

    /// Called once before the first move with the run seed.
    fn begin(&mut self, _seed: u64) {}

    fn choose(&mut self, state: &GameState) -> Result<Decision, StrategyError>;
}

/// A game stopped early because a strategy failed or cheated.
#[derive(Debug, Clone)]
pub struct GameAbort {
    pub trace: Trace,
    pub turn: u64,
    pub offender: Player,
    pub strategy: String,
    pub reason: String,
}

impl fmt::Display for GameAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "turn {}: {} ({}) aborted the game: {}", self.turn, self.offender, self.strategy, self.reason)
    }
}

impl std::error::Error for GameAbort {}

/// Plays `turns` alternating moves, Maker first.
pub fn run_game(
    maker: &mut dyn Strategy,
    breaker: &mut dyn Strategy,
    turns: u64,
    seed: u64,
) -> Result<(Trace, GameState), Box<GameAbort>> {
    assert!(turns >= 1, "a game needs at least one turn");
    let header = TraceHeader::for_run(&*maker, &*breaker, turns, seed);
    maker.begin(seed);
    breaker.begin(seed);
    let mut state = GameState::new();
    while state.turn() < turns {
        let player = state.to_move();
        let strategy: &mut dyn Strategy = match player {
            Player::Maker => maker,
            Player::Breaker => breaker,
        };
        let abort = |state: &GameState, strategy: &dyn Strategy, reason: String| {
            Box::new(GameAbort {
                trace: Trace { header: header.clone(), moves: state.moves().to_vec(), certificates: Vec::new() },
                turn: state.turn() + 1,
                offender: player,
                strategy: strategy.id(),
                reason,
            })
        };
        let decision = match strategy.choose(&state) {
            Ok(d) => d,
            Err(e) => return Err(abort(&state, strategy, e.to_string())),
        };
        if let Err(e) = state.apply_flagged(player, &decision.edge, decision.flag) {
            return Err(abort(&state, strategy, e.to_string()));
        }
    }
    let trace = Trace { header, moves: state.moves().to_vec(), certificates: Vec::new() };
    Ok((trace, state))
}
