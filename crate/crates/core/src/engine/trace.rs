//! Line-oriented trace files.
//!
//! ```text
//! qgame-trace v1 maker=q-strategy breaker=random:7 turns=4 seed=7 digest=0123456789abcdef
//! 1 M 0/1 1/1
//! 2 B 1/1 2/1
//! 3 M 0/1 1/3
//! 4 B -1/1 0/1 fallback=canonical
//! ```
//!
//! Certificate sections (`certificate v1` … `end`) may follow the moves.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::engine::{Edge, GameState, Move, MoveFlag, Player, Strategy};
use crate::error::TraceError;
use crate::rational::Rational;

pub const TRACE_MAGIC: &str = "qgame-trace v1";

/// First 16 hex digits of SHA-256 over the run configuration.
pub fn config_digest(maker: &str, breaker: &str, turns: u64, seed: u64) -> String {
    let mut h = Sha256::new();
    for part in [maker, breaker, &turns.to_string(), &seed.to_string()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().take(8).fold(String::with_capacity(16), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub maker: String,
    pub breaker: String,
    pub turns: u64,
    pub seed: u64,
    pub digest: String,
}

impl TraceHeader {
    pub fn for_run(maker: &dyn Strategy, breaker: &dyn Strategy, turns: u64, seed: u64) -> Self {
        TraceHeader {
            maker: maker.id(),
            breaker: breaker.id(),
            turns,
            seed,
            digest: config_digest(&maker.descriptor(), &breaker.descriptor(), turns, seed),
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{TRACE_MAGIC} maker={} breaker={} turns={} seed={} digest={}",
            self.maker, self.breaker, self.turns, self.seed, self.digest
        )
    }

    pub fn parse(line: &str) -> Result<Self, TraceError> {
        let bad = |reason: &str| TraceError::Malformed { line: 1, reason: reason.to_string() };
        let rest = line.strip_prefix(TRACE_MAGIC).ok_or_else(|| bad("missing trace header"))?;
        let mut fields = [None, None, None, None, None];
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad("header field without '='"))?;
            let slot = match k {
                "maker" => 0,
                "breaker" => 1,
                "turns" => 2,
                "seed" => 3,
                "digest" => 4,
                _ => return Err(bad(&format!("unknown header field {k:?}"))),
            };
            fields[slot] = Some(v.to_string());
        }
        let [Some(maker), Some(breaker), Some(turns), Some(seed), Some(digest)] = fields else {
            return Err(bad("header is missing a field"));
        };
        Ok(TraceHeader {
            maker,
            breaker,
            turns: turns.parse().map_err(|_| bad("turns is not an integer"))?,
            seed: seed.parse().map_err(|_| bad("seed is not an integer"))?,
            digest,
        })
    }
}

/// Header, numbered move lines, and raw certificate sections.
pub type TraceParts<'a> = (TraceHeader, Vec<(usize, &'a str)>, Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub moves: Vec<Move>,
    /// Raw certificate sections, each from `certificate` through `end`.
    pub certificates: Vec<String>,
}

/// Parses `<turn> <M|B> <a> <b> [flag]`.
pub fn parse_move_line(line: &str) -> Result<Move, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if !(4..=5).contains(&toks.len()) {
        return Err(format!("expected 4 or 5 fields, found {}", toks.len()));
    }
    let turn: u64 = toks[0].parse().map_err(|_| format!("bad turn number {:?}", toks[0]))?;
    let player = Player::from_tag(toks[1]).ok_or_else(|| format!("bad player tag {:?}", toks[1]))?;
    let a: Rational = toks[2].parse().map_err(|e| format!("{e}"))?;
    let b: Rational = toks[3].parse().map_err(|e| format!("{e}"))?;
    for (tok, r) in [(toks[2], &a), (toks[3], &b)] {
        if tok != r.to_string() {
            return Err(format!("{tok:?} is not in canonical num/den form"));
        }
    }
    if a >= b {
        return Err("edge endpoints must be distinct and ascending".into());
    }
    let flag = match toks.get(4) {
        Some(f) => Some(MoveFlag::parse(f).ok_or_else(|| format!("unknown flag {f:?}"))?),
        None => None,
    };
    Ok(Move { turn, player, edge: Edge::new(a, b).map_err(|e| e.to_string())?, flag })
}

pub fn format_move(m: &Move) -> String {
    let mut s = format!("{} {} {} {}", m.turn, m.player.tag(), m.edge.lo(), m.edge.hi());
    if let Some(f) = m.flag {
        s.push(' ');
        s.push_str(f.as_str());
    }
    s
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut out = self.header.to_line();
        out.push('\n');
        for m in &self.moves {
            out.push_str(&format_move(m));
            out.push('\n');
        }
        for c in &self.certificates {
            out.push_str(c);
            if !c.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }

    /// Splits a trace file into header, move lines, and certificate sections
    /// without interpreting the moves. Line numbers are 1-based.
    pub fn split(text: &str) -> Result<TraceParts<'_>, TraceError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, first) = lines.next().ok_or(TraceError::Malformed { line: 1, reason: "empty trace".into() })?;
        let header = TraceHeader::parse(first)?;
        let mut moves = Vec::new();
        let mut certs = Vec::new();
        let mut cert: Option<String> = None;
        for (no, line) in lines {
            if let Some(buf) = cert.as_mut() {
                buf.push_str(line);
                buf.push('\n');
                if line.trim() == "end" {
                    certs.push(cert.take().unwrap());
                }
                continue;
            }
            if line.starts_with("certificate") {
                cert = Some(format!("{line}\n"));
            } else if !certs.is_empty() {
                return Err(TraceError::Malformed { line: no, reason: "move after certificate section".into() });
            } else if line.trim().is_empty() {
                return Err(TraceError::Malformed { line: no, reason: "blank line".into() });
            } else {
                moves.push((no, line));
            }
        }
        if cert.is_some() {
            return Err(TraceError::Malformed {
                line: text.lines().count(),
                reason: "unterminated certificate".into(),
            });
        }
        Ok((header, moves, certs))
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let (header, lines, certificates) = Self::split(text)?;
        let mut moves = Vec::with_capacity(lines.len());
        for (k, (no, line)) in lines.into_iter().enumerate() {
            let m = parse_move_line(line).map_err(|reason| TraceError::Malformed { line: no, reason })?;
            if m.turn != k as u64 + 1 {
                return Err(TraceError::Malformed {
                    line: no,
                    reason: format!("turn {} out of sequence, expected {}", m.turn, k + 1),
                });
            }
            moves.push(m);
        }
        Ok(Trace { header, moves, certificates })
    }
}

/// Rebuilds the final state; fails at the first illegal move.
pub fn replay(trace: &Trace) -> Result<GameState, TraceError> {
    let mut st = GameState::new();
    for m in &trace.moves {
        st.apply_flagged(m.player, &m.edge, m.flag)?;
    }
    Ok(st)
}
