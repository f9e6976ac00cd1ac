//! Breaker opponents: the dense pairing strategy, a seeded random player,
//! and an adversary that blocks Maker's planned connection.
//!
//! Pairing uses the intervals `I_j = (j, j+1)` for `j ≥ 1` and the 2-subsets
//! `{e_a, e_b}` (`a < b`) of `enum_q` ordered by `(b, a)`; the `j`-th subset
//! is `{p_j, q_j}`. For every `s ∈ I_j` that comes later in `enum_q` than both
//! `p_j` and `q_j`, the edges `{p_j, s}` and `{q_j, s}` form a pair.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Decision, Edge, GameState, MoveFlag, Player, Strategy};
use crate::error::StrategyError;
use crate::maker::{MakerConfig, PlanChoice, QStrategy};
use crate::rational::{enum_index_big, enum_q, EnumerationIndex, Rational};

pub const PAIRING_ID: &str = "pairing";
pub const BLOCKING_ID: &str = "blocking";
pub const RANDOM_PREFIX: &str = "random";

/// 1-based indices `(a, b)`, `a < b`, of the `j`-th 2-subset in `(b, a)` order.
pub fn two_subset(j: u64) -> (u64, u64) {
    assert!(j >= 1, "2-subsets are counted from 1");
    // largest b with (b-1)(b-2)/2 < j
    let mut b = ((2.0 * j as f64).sqrt() as u64).max(2);
    while (b - 1) * (b - 2) / 2 >= j {
        b -= 1;
    }
    while b * (b - 1) / 2 < j {
        b += 1;
    }
    (j - (b - 1) * (b - 2) / 2, b)
}

/// Position of `{e_a, e_b}` in the `(b, a)` order.
pub fn two_subset_position(a: u64, b: u64) -> u64 {
    let (a, b) = (a.min(b), a.max(b));
    assert!(a >= 1 && a < b);
    (b - 1) * (b - 2) / 2 + a
}

/// The `j`-th 2-subset as rationals `(p_j, q_j)` with `p_j = e_a`, `q_j = e_b`.
pub fn pair_base(j: u64) -> (Rational, Rational) {
    let (a, b) = two_subset(j);
    (enum_q(EnumerationIndex::new(a).unwrap()), enum_q(EnumerationIndex::new(b).unwrap()))
}

/// `j` with `s ∈ I_j`, if any (and if `j` fits in 64 bits).
pub fn interval_of(s: &Rational) -> Option<u64> {
    if s.is_integer() {
        return None;
    }
    let j = s.floor().to_u64()?;
    (j >= 1).then_some(j)
}

/// One generated pair `{p_j s, q_j s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub j: u64,
    pub s: Rational,
    pub edges: (Edge, Edge),
}

/// If `s` is eligible in its interval, the pair it belongs to.
pub fn pair_for(s: &Rational) -> Option<PairEntry> {
    let j = interval_of(s)?;
    let (a, b) = two_subset(j);
    if enum_index_big(s) <= BigUint::from(b) {
        return None;
    }
    let p = enum_q(EnumerationIndex::new(a).unwrap());
    let q = enum_q(EnumerationIndex::new(b).unwrap());
    let edges = (Edge::new(p, s.clone()).ok()?, Edge::new(q, s.clone()).ok()?);
    Some(PairEntry { j, s: s.clone(), edges })
}

/// The partner of `edge` in the pair table, if `edge` is paired.
pub fn pair_of(edge: &Edge) -> Option<Edge> {
    // at most one endpoint can play the role of s: it must be enum-later
    for s in [edge.lo(), edge.hi()] {
        let Some(entry) = pair_for(s) else { continue };
        if &entry.edges.0 == edge {
            return Some(entry.edges.1);
        }
        if &entry.edges.1 == edge {
            return Some(entry.edges.0);
        }
    }
    None
}

/// Pairs in order of `enum_q` index of `s`.
pub fn pair_table() -> impl Iterator<Item = PairEntry> {
    (1u64..).filter_map(|i| pair_for(&enum_q(EnumerationIndex::new(i).unwrap())))
}

/// Walks the canonical edge order `{e_a, e_b}` by `(b, a)` and returns the
/// first unclaimed edge. Claims are permanent, so the cursor only advances.
#[derive(Debug, Clone)]
pub struct CanonicalCursor {
    next: u64,
    turn: u64,
}

impl Default for CanonicalCursor {
    fn default() -> Self {
        CanonicalCursor { next: 1, turn: 0 }
    }
}

impl CanonicalCursor {
    pub fn first_unclaimed(&mut self, state: &GameState, mut skip: impl FnMut(&Edge) -> bool) -> Edge {
        if state.turn() < self.turn {
            *self = Self::default();
        }
        self.turn = state.turn();
        let mut j = self.next;
        let mut advancing = true;
        loop {
            let (p, q) = pair_base(j);
            let edge = Edge::new(p, q).expect("enum_q is injective");
            if !state.is_claimed(&edge) {
                if !skip(&edge) {
                    return edge;
                }
                advancing = false;
            } else if advancing {
                self.next = j + 1;
            }
            j += 1;
        }
    }
}

/// Breaker's dense pairing strategy.
#[derive(Debug, Clone, Default)]
pub struct PairingBreaker {
    cursor: CanonicalCursor,
}

impl PairingBreaker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pairing_move(&mut self, state: &GameState) -> Decision {
        if let Some(last) = state.last_move().filter(|m| m.player == Player::Maker) {
            if let Some(partner) = pair_of(&last.edge) {
                if !state.is_claimed(&partner) {
                    return Decision::plain(partner);
                }
            }
        }
        let edge = self
            .cursor
            .first_unclaimed(state, |e| pair_of(e).is_some_and(|p| state.owner_of(&p) == Some(Player::Maker)));
        Decision::flagged(edge, MoveFlag::Canonical)
    }
}

impl Strategy for PairingBreaker {
    fn id(&self) -> String {
        PAIRING_ID.into()
    }

    fn descriptor(&self) -> String {
        "pairing;intervals=(j,j+1);subsets=(max,min)-index;fallback=canonical".into()
    }

    fn choose(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        Ok(self.pairing_move(state))
    }
}

/// Uniform choice among unclaimed edges within the touched vertices plus the
/// next three fresh `enum_q` vertices. Plays either side.
#[derive(Debug, Clone)]
pub struct RandomStrategy {
    seed: Option<u64>,
    rng: ChaCha8Rng,
    fresh_cursor: u64,
}

impl RandomStrategy {
    /// With `None`, the run seed passed to [`Strategy::begin`] is used.
    pub fn new(seed: Option<u64>) -> Self {
        RandomStrategy { seed, rng: ChaCha8Rng::seed_from_u64(seed.unwrap_or(0)), fresh_cursor: 1 }
    }

    fn next_fresh(&mut self, state: &GameState, count: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(count);
        let mut i = self.fresh_cursor;
        let mut leading = true;
        while out.len() < count {
            let r = enum_q(EnumerationIndex::new(i).unwrap());
            if state.is_fresh(&r) {
                leading = false;
                out.push(r);
            } else if leading {
                self.fresh_cursor = i + 1;
            }
            i += 1;
        }
        out
    }

    pub fn random_move(&mut self, state: &GameState) -> Edge {
        let touched = state.touched_vertices();
        let fresh = self.next_fresh(state, 3);
        let n = touched.len() + fresh.len();
        let vertex = |i: usize| if i < touched.len() { &touched[i] } else { &fresh[i - touched.len()] };
        let edge_at = |i: usize, j: usize| Edge::new(vertex(i).clone(), vertex(j).clone()).expect("distinct vertices");
        let total = n * (n - 1) / 2;
        // rejection sampling is uniform; fall back to enumeration when the
        // pool is mostly claimed
        if state.turn() as usize * 2 < total {
            for _ in 0..64 {
                let i = self.rng.gen_range(0..n);
                let j = self.rng.gen_range(0..n);
                if i == j {
                    continue;
                }
                let e = edge_at(i, j);
                if !state.is_claimed(&e) {
                    return e;
                }
            }
        }
        let free: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !state.is_claimed(&edge_at(i, j)))
            .collect();
        let (i, j) = free[self.rng.gen_range(0..free.len())];
        edge_at(i, j)
    }
}

impl Strategy for RandomStrategy {
    fn id(&self) -> String {
        match self.seed {
            Some(s) => format!("{RANDOM_PREFIX}:{s}"),
            None => RANDOM_PREFIX.into(),
        }
    }

    fn descriptor(&self) -> String {
        format!("{};rng=chacha8;pool=touched+3-fresh", self.id())
    }

    fn begin(&mut self, seed: u64) {
        *self = RandomStrategy::new(self.seed);
        self.rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(seed));
    }

    fn choose(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        Ok(Decision::plain(self.random_move(state)))
    }
}

/// Claims the edge Maker's balanced choice would take next.
#[derive(Debug, Clone, Default)]
pub struct BlockingBreaker {
    shadow: QStrategy,
    cursor: CanonicalCursor,
}

impl BlockingBreaker {
    pub fn new(config: MakerConfig) -> Self {
        BlockingBreaker { shadow: QStrategy::new(config), cursor: CanonicalCursor::default() }
    }

    pub fn blocking_move(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        if state.maker_vertex_count() > 0 {
            let plan = self.shadow.plan(state)?;
            if let PlanChoice::Connect { edge, .. } = plan.choice {
                if !state.is_claimed(&edge) {
                    return Ok(Decision::plain(edge));
                }
            }
        }
        Ok(Decision::flagged(self.cursor.first_unclaimed(state, |_| false), MoveFlag::Canonical))
    }
}

impl Strategy for BlockingBreaker {
    fn id(&self) -> String {
        BLOCKING_ID.into()
    }

    fn descriptor(&self) -> String {
        format!("{BLOCKING_ID};shadow={}", self.shadow.config().descriptor())
    }

    fn choose(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        self.blocking_move(state)
    }
}

/// Builds a strategy from its trace identifier.
pub fn strategy_by_id(id: &str, config: &MakerConfig) -> Result<Box<dyn Strategy>, StrategyError> {
    match id {
        crate::maker::Q_STRATEGY_ID => Ok(Box::new(QStrategy::new(config.clone()))),
        PAIRING_ID => Ok(Box::new(PairingBreaker::new())),
        BLOCKING_ID => Ok(Box::new(BlockingBreaker::new(config.clone()))),
        RANDOM_PREFIX => Ok(Box::new(RandomStrategy::new(None))),
        _ => {
            let seed = id
                .strip_prefix("random:")
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| StrategyError::UnknownId(id.to_string()))?;
            Ok(Box::new(RandomStrategy::new(Some(seed))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn e(a: &str, b: &str) -> Edge {
        Edge::new(q(a), q(b)).unwrap()
    }

    #[test]
    fn two_subset_order() {
        let firsts: Vec<(u64, u64)> = (1..=7).map(two_subset).collect();
        assert_eq!(firsts, vec![(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4), (1, 5)]);
        for j in 1..5000 {
            let (a, b) = two_subset(j);
            assert_eq!(two_subset_position(a, b), j);
        }
    }

    #[test]
    fn pair_examples() {
        // {p_1, q_1} = {e_1, e_2} = {0, 1}; 3/2 lies in I_1 and is enum-later
        assert_eq!(pair_base(1), (q("0"), q("1")));
        let idx = crate::rational::enum_index_of(&q("3/2")).unwrap().get();
        assert!(idx > 2);
        let partner = pair_of(&e("0", "3/2")).unwrap();
        assert_eq!(partner, e("1", "3/2"));
        assert_eq!(pair_of(&partner).unwrap(), e("0", "3/2"));
        assert_eq!(pair_of(&e("5", "6")), None);
    }

    #[test]
    fn unpaired_edges_among_integers() {
        // integers lie in no interval, so an edge of two integers is never paired
        for a in -5..5 {
            for b in (a + 1)..6 {
                assert_eq!(pair_of(&Edge::new(a.into(), b.into()).unwrap()), None);
            }
        }
    }

    #[test]
    fn pair_of_agrees_with_the_table() {
        let table: Vec<PairEntry> = pair_table().take(1000).collect();
        for p in &table {
            assert_eq!(pair_of(&p.edges.0).as_ref(), Some(&p.edges.1));
            assert_eq!(pair_of(&p.edges.1).as_ref(), Some(&p.edges.0));
        }
    }

    #[test]
    fn pairing_responds_to_paired_maker_moves() {
        let mut st = GameState::new();
        st.apply_move(Player::Maker, &e("0", "3/2")).unwrap();
        let d = PairingBreaker::new().pairing_move(&st);
        assert_eq!(d, Decision::plain(e("1", "3/2")));
    }

    #[test]
    fn pairing_falls_back_to_canonical_order() {
        let mut st = GameState::new();
        st.apply_move(Player::Maker, &e("0", "1")).unwrap();
        let d = PairingBreaker::new().pairing_move(&st);
        // {e_1,e_2} is taken, next is {e_1,e_3} = {0,-1}
        assert_eq!(d, Decision::flagged(e("-1", "0"), MoveFlag::Canonical));
    }

    #[test]
    fn random_is_seeded_and_legal() {
        let mut st = GameState::new();
        let mut a = RandomStrategy::new(Some(7));
        let mut b = RandomStrategy::new(Some(7));
        for t in 0..200 {
            let (ea, eb) = (a.random_move(&st), b.random_move(&st));
            assert_eq!(ea, eb);
            assert!(!st.is_claimed(&ea));
            let p = if t % 2 == 0 { Player::Maker } else { Player::Breaker };
            st.apply_move(p, &ea).unwrap();
        }
    }

    #[test]
    fn ids_round_trip() {
        let cfg = MakerConfig::default();
        for id in ["q-strategy", "pairing", "blocking", "random", "random:7"] {
            assert_eq!(strategy_by_id(id, &cfg).unwrap().id(), id);
        }
        assert!(matches!(strategy_by_id("random:x", &cfg), Err(StrategyError::UnknownId(_))));
    }
}
