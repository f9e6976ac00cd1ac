use std::collections::HashMap;

use crate::engine::{Edge, Move, MoveFlag, Player};
use crate::error::EngineError;
use crate::rational::Rational;

/// Ordered record of a Maker vertex's older neighbours (`S_v`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionRecord {
    /// Maker position of the owner.
    pub owner: usize,
    /// Maker positions of older neighbours, in claim order.
    pub older: Vec<usize>,
    /// Record length when the next fresh vertex entered Maker's graph.
    pub frozen: Option<usize>,
}

impl ConnectionRecord {
    /// `S_v`: the record truncated at its freeze point.
    pub fn effective(&self) -> &[usize] {
        match self.frozen {
            Some(len) => &self.older[..len.min(self.older.len())],
            None => &self.older,
        }
    }
}

/// Board state of one game.
///
/// Vertices are interned in first-touch order. Maker's vertices additionally
/// carry a 0-based *Maker position*: `v_1` is position 0.
#[derive(Debug, Clone, Default)]
pub struct GameState {
    vertices: Vec<Rational>,
    ids: HashMap<Rational, u32>,
    owner: HashMap<(u32, u32), (Player, u64)>,
    moves: Vec<Move>,
    maker_order: Vec<u32>,
    maker_pos: Vec<Option<u32>>,
    /// per Maker position: neighbour Maker positions in claim order
    maker_adj: Vec<Vec<u32>>,
    breaker_touched: Vec<bool>,
    records: Vec<ConnectionRecord>,
    maker_edges: usize,
    breaker_edges: usize,
}

impl PartialEq for GameState {
    /// Structural equality on everything a trace determines.
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.moves == other.moves
            && self.maker_order == other.maker_order
            && self.maker_adj == other.maker_adj
            && self.records == other.records
            && self.owner == other.owner
    }
}

impl GameState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Player whose turn it is; Maker moves first.
    pub fn to_move(&self) -> Player {
        if self.moves.len().is_multiple_of(2) {
            Player::Maker
        } else {
            Player::Breaker
        }
    }

    /// Number of claimed edges so far.
    pub fn turn(&self) -> u64 {
        self.moves.len() as u64
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn last_move(&self) -> Option<&Move> {
        self.moves.last()
    }

    pub fn maker_edge_count(&self) -> usize {
        self.maker_edges
    }

    pub fn breaker_edge_count(&self) -> usize {
        self.breaker_edges
    }

    fn id_of(&self, r: &Rational) -> Option<u32> {
        self.ids.get(r).copied()
    }

    fn key(&self, edge: &Edge) -> Option<(u32, u32)> {
        let a = self.id_of(edge.lo())?;
        let b = self.id_of(edge.hi())?;
        Some((a.min(b), a.max(b)))
    }

    /// Owner of `edge`, if claimed.
    pub fn owner_of(&self, edge: &Edge) -> Option<Player> {
        self.claim_of(edge).map(|(p, _)| p)
    }

    /// Owner and claiming turn of `edge`.
    pub fn claim_of(&self, edge: &Edge) -> Option<(Player, u64)> {
        self.key(edge).and_then(|k| self.owner.get(&k).copied())
    }

    pub fn is_claimed(&self, edge: &Edge) -> bool {
        self.claim_of(edge).is_some()
    }

    /// True iff no claimed edge of either player touches `r`.
    pub fn is_fresh(&self, r: &Rational) -> bool {
        !self.ids.contains_key(r)
    }

    /// All touched vertices in first-touch order.
    pub fn touched_vertices(&self) -> &[Rational] {
        &self.vertices
    }

    /// `|V(G_M)|`.
    pub fn maker_vertex_count(&self) -> usize {
        self.maker_order.len()
    }

    /// `v_{pos+1}`.
    pub fn maker_vertex(&self, pos: usize) -> &Rational {
        &self.vertices[self.maker_order[pos] as usize]
    }

    pub fn maker_vertices(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.maker_order.iter().map(|&id| &self.vertices[id as usize])
    }

    /// Maker position of `r`, if `r ∈ V(G_M)`.
    pub fn maker_position(&self, r: &Rational) -> Option<usize> {
        let id = self.id_of(r)?;
        self.maker_pos[id as usize].map(|p| p as usize)
    }

    pub fn in_breaker_graph(&self, r: &Rational) -> bool {
        self.id_of(r).is_some_and(|id| self.breaker_touched[id as usize])
    }

    /// Maker neighbours of position `pos`, in claim order.
    pub fn maker_neighbours(&self, pos: usize) -> impl Iterator<Item = usize> + '_ {
        self.maker_adj[pos].iter().map(|&p| p as usize)
    }

    pub fn maker_degree(&self, pos: usize) -> usize {
        self.maker_adj[pos].len()
    }

    pub fn record(&self, pos: usize) -> &ConnectionRecord {
        &self.records[pos]
    }

    /// The newest Maker vertex, which the strategy is extending.
    pub fn active_vertex(&self) -> Option<usize> {
        self.maker_order.len().checked_sub(1)
    }

    /// True iff Maker owns the edge between two Maker positions.
    pub fn maker_adjacent(&self, a: usize, b: usize) -> bool {
        let (ia, ib) = (self.maker_order[a], self.maker_order[b]);
        let k = (ia.min(ib), ia.max(ib));
        matches!(self.owner.get(&k), Some((Player::Maker, _)))
    }

    fn intern(&mut self, r: &Rational) -> u32 {
        if let Some(&id) = self.ids.get(r) {
            return id;
        }
        let id = self.vertices.len() as u32;
        self.vertices.push(r.clone());
        self.ids.insert(r.clone(), id);
        self.maker_pos.push(None);
        self.breaker_touched.push(false);
        id
    }

    fn add_maker_vertex(&mut self, id: u32) -> u32 {
        if let Some(p) = self.maker_pos[id as usize] {
            return p;
        }
        if let Some(prev) = self.records.last_mut() {
            if prev.frozen.is_none() {
                prev.frozen = Some(prev.older.len());
            }
        }
        let pos = self.maker_order.len() as u32;
        self.maker_order.push(id);
        self.maker_pos[id as usize] = Some(pos);
        self.maker_adj.push(Vec::new());
        self.records.push(ConnectionRecord { owner: pos as usize, older: Vec::new(), frozen: None });
        pos
    }

    /// Claims `edge` for `player`.
    ///
    /// When a Maker edge brings two new vertices at once, the smaller one is
    /// appended to the vertex order first.
    pub fn apply_move(&mut self, player: Player, edge: &Edge) -> Result<(), EngineError> {
        self.apply_flagged(player, edge, None)
    }

    pub(crate) fn apply_flagged(
        &mut self,
        player: Player,
        edge: &Edge,
        flag: Option<MoveFlag>,
    ) -> Result<(), EngineError> {
        let turn = self.turn() + 1;
        let expected = self.to_move();
        if player != expected {
            return Err(EngineError::OutOfTurn { turn, expected, got: player });
        }
        if let Some((_, claimed_at)) = self.claim_of(edge) {
            return Err(EngineError::AlreadyClaimed { turn, edge: Box::new(edge.clone()), claimed_at });
        }
        let a = self.intern(edge.lo());
        let b = self.intern(edge.hi());
        self.owner.insert((a.min(b), a.max(b)), (player, turn));
        match player {
            Player::Maker => {
                let pa = self.add_maker_vertex(a) as usize;
                let pb = self.add_maker_vertex(b) as usize;
                self.maker_adj[pa].push(pb as u32);
                self.maker_adj[pb].push(pa as u32);
                let (older, younger) = if pa < pb { (pa, pb) } else { (pb, pa) };
                self.records[younger].older.push(older);
                self.maker_edges += 1;
            }
            Player::Breaker => {
                self.breaker_touched[a as usize] = true;
                self.breaker_touched[b as usize] = true;
                self.breaker_edges += 1;
            }
        }
        self.moves.push(Move { turn, player, edge: edge.clone(), flag });
        Ok(())
    }
}
