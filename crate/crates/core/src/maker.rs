//! Maker's Q-game strategy.
//!
//! Maker opens with `{0,1}`. Afterwards the newest Maker vertex `v_k` is the
//! active vertex. Its record `S_{v_k}` (as vertex positions) is looked up in
//! the universal sequence to pick a target class; if enough record-compatible
//! vertices of that class exist, Maker connects `v_k` to the least loaded of
//! them, otherwise she adds a fresh vertex from the class the sequence names
//! next and connects it to `v_1`.

use std::collections::HashMap;

use crate::dense::{class_enum, ClassId, Partition};
use crate::engine::{Decision, Edge, GameState, MoveFlag, Strategy};
use crate::error::StrategyError;
use crate::rational::{EnumerationIndex, Rational};
use crate::stream::{UniversalStream, DEFAULT_OCCURRENCE_LIMIT};

pub const Q_STRATEGY_ID: &str = "q-strategy";

/// The three frozen ingredients plus the occurrence search budget.
#[derive(Clone, Debug)]
pub struct MakerConfig {
    pub partition: Partition,
    pub stream: UniversalStream,
    /// Longest stream prefix one occurrence query may scan.
    pub occurrence_limit: usize,
}

impl Default for MakerConfig {
    fn default() -> Self {
        MakerConfig {
            partition: Partition::default(),
            stream: UniversalStream::new(),
            occurrence_limit: DEFAULT_OCCURRENCE_LIMIT,
        }
    }
}

impl MakerConfig {
    pub fn descriptor(&self) -> String {
        format!(
            "{};enumeration=class_enum(enum_q);{};occurrence<={};fresh=first-fresh-in-unit-scan",
            self.partition.descriptor(),
            self.stream.descriptor(),
            self.occurrence_limit
        )
    }
}

/// What Maker does this turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanChoice {
    /// Claim `{v_partner, v_k}`.
    Connect { partner: usize, edge: Edge },
    /// Add `vertex` (a fresh member of `class`) via `{v_1, vertex}`.
    Fresh { class: ClassId, vertex: Rational, flag: Option<MoveFlag> },
}

/// Maker's reasoning for one decision. Vertices are 0-based Maker positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPlan {
    pub active: usize,
    /// Current record length of the active vertex.
    pub ell: usize,
    /// `S_{v_k}` as 1-based positions.
    pub word: Vec<u32>,
    /// `|L|`, or 0 when the active vertex has no class.
    pub l_size: usize,
    /// Target class, when one was determined.
    pub target: Option<ClassId>,
    /// `F`, in position order.
    pub candidates: Vec<usize>,
    pub choice: PlanChoice,
}

impl TargetPlan {
    pub fn threshold(&self) -> usize {
        f_threshold(self.ell)
    }

    pub fn edge(&self, state: &GameState) -> Edge {
        match &self.choice {
            PlanChoice::Connect { edge, .. } => edge.clone(),
            PlanChoice::Fresh { vertex, .. } => {
                Edge::new(state.maker_vertex(0).clone(), vertex.clone()).expect("fresh vertex differs from v_1")
            }
        }
    }

    pub fn flag(&self) -> Option<MoveFlag> {
        match &self.choice {
            PlanChoice::Connect { .. } => None,
            PlanChoice::Fresh { flag, .. } => *flag,
        }
    }
}

/// `ℓ(ℓ+1)+1`.
pub fn f_threshold(ell: usize) -> usize {
    ell * (ell + 1) + 1
}

pub fn opening_move(state: &GameState) -> Result<Edge, StrategyError> {
    if state.turn() != 0 {
        return Err(StrategyError::Precondition {
            strategy: Q_STRATEGY_ID.into(),
            reason: "the opening move needs an empty board".into(),
        });
    }
    Ok(Edge::new(Rational::zero(), Rational::one()).unwrap())
}

#[derive(Debug, Default, Clone)]
struct Memo {
    /// turn count of the last state seen
    turn: u64,
    classes: Vec<Option<ClassId>>,
    /// positions whose frozen records are indexed in `buckets`
    bucketed: usize,
    /// (class, record prefix) -> positions with that class and prefix
    buckets: HashMap<(ClassId, Vec<usize>), Vec<usize>>,
    fresh_cursor: HashMap<ClassId, usize>,
}

/// The Q-game strategy with a private memo derived from the states it sees.
#[derive(Clone, Debug, Default)]
pub struct QStrategy {
    config: MakerConfig,
    memo: Memo,
}

impl QStrategy {
    pub fn new(config: MakerConfig) -> Self {
        QStrategy { config, memo: Memo::default() }
    }

    pub fn config(&self) -> &MakerConfig {
        &self.config
    }

    /// Brings the memo up to `state`; resets if `state` is not a continuation.
    fn sync(&mut self, state: &GameState) -> Result<(), StrategyError> {
        if state.turn() < self.memo.turn || state.maker_vertex_count() < self.memo.classes.len() {
            self.memo = Memo::default();
        }
        self.memo.turn = state.turn();
        for pos in self.memo.classes.len()..state.maker_vertex_count() {
            let class = self.config.partition.try_class_of(state.maker_vertex(pos))?;
            self.memo.classes.push(class);
        }
        // every vertex but the newest has a frozen record
        let frozen = state.maker_vertex_count().saturating_sub(1);
        for pos in self.memo.bucketed..frozen {
            if let Some(class) = &self.memo.classes[pos] {
                let record = state.record(pos).effective();
                for len in 1..=record.len() {
                    self.memo.buckets.entry((class.clone(), record[..len].to_vec())).or_default().push(pos);
                }
            }
        }
        self.memo.bucketed = self.memo.bucketed.max(frozen);
        Ok(())
    }

    fn bucket(&self, class: &ClassId, prefix: &[usize]) -> &[usize] {
        // lookups are rare enough that the key clone does not matter
        self.memo.buckets.get(&(class.clone(), prefix.to_vec())).map_or(&[], |v| v.as_slice())
    }

    /// Class of a Maker vertex; `None` for vertices outside `(0,1)`.
    pub fn class_at(&mut self, state: &GameState, pos: usize) -> Result<Option<ClassId>, StrategyError> {
        self.sync(state)?;
        Ok(self.memo.classes[pos].clone())
    }

    fn active_info(&self, state: &GameState) -> Option<(usize, ClassId, Vec<usize>)> {
        let active = state.active_vertex()?;
        let class = self.memo.classes[active].clone()?;
        let record = state.record(active).older.clone();
        Some((active, class, record))
    }

    /// `L`: positions in the active vertex's class whose record starts with
    /// the active vertex's full current record; includes the active vertex.
    pub fn compute_l(&mut self, state: &GameState) -> Result<Vec<usize>, StrategyError> {
        self.sync(state)?;
        let Some((active, class, record)) = self.active_info(state) else {
            return Ok(state.active_vertex().into_iter().collect());
        };
        let mut l = self.bucket(&class, &record).to_vec();
        l.push(active);
        Ok(l)
    }

    /// Class named by the `(|L|+1)`-th occurrence of the active record in the
    /// universal sequence; `None` if outside the search budget or if the
    /// active vertex has no class or an empty record.
    pub fn target_class(&mut self, state: &GameState) -> Result<Option<ClassId>, StrategyError> {
        self.sync(state)?;
        let Some((_, class, record)) = self.active_info(state) else { return Ok(None) };
        if record.is_empty() {
            return Ok(None);
        }
        let l_size = self.bucket(&class, &record).len() + 1;
        Ok(self.lookup_target(&record, l_size))
    }

    fn lookup_target(&self, record: &[usize], l_size: usize) -> Option<ClassId> {
        let word: Vec<u32> = record.iter().map(|&p| p as u32 + 1).collect();
        let n = self.config.stream.occurrence_next_within(&word, l_size + 1, self.config.occurrence_limit)?;
        Some(class_enum(EnumerationIndex::new(n as u64).expect("stream values are positive")))
    }

    /// `F`: the first `ℓ(ℓ+1)+1` positions in `target` whose record starts
    /// with the active record.
    pub fn compute_f(&mut self, state: &GameState, target: &ClassId) -> Result<Vec<usize>, StrategyError> {
        self.sync(state)?;
        let Some(active) = state.active_vertex() else { return Ok(Vec::new()) };
        let record = &state.record(active).older;
        let cap = f_threshold(record.len());
        let mut f: Vec<usize> = self.bucket(target, record).iter().copied().take(cap).collect();
        if f.len() < cap && self.memo.classes[active].as_ref() == Some(target) {
            f.push(active);
        }
        Ok(f)
    }

    /// Least member of `f` by `(|N_M(v_i) ∩ L|, i)` whose edge to the active
    /// vertex is unclaimed.
    pub fn balanced_min(&mut self, state: &GameState, f: &[usize], l: &[usize]) -> Option<(usize, Edge)> {
        let active = state.active_vertex()?;
        let in_l: std::collections::HashSet<usize> = l.iter().copied().collect();
        let mut best: Option<((usize, usize), Edge)> = None;
        for &vi in f {
            if vi == active {
                continue;
            }
            let edge = Edge::new(state.maker_vertex(vi).clone(), state.maker_vertex(active).clone())
                .expect("distinct positions");
            if state.is_claimed(&edge) {
                continue;
            }
            let load = state.maker_neighbours(vi).filter(|u| in_l.contains(u)).count();
            let key = (load, vi);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, edge));
            }
        }
        best.map(|((_, vi), e)| (vi, e))
    }

    /// First fresh member of `class` in unit-interval scan order.
    pub fn fresh_member(&mut self, state: &GameState, class: &ClassId) -> Result<Rational, StrategyError> {
        let cursor = self.memo.fresh_cursor.entry(class.clone()).or_insert(1);
        loop {
            let r = self.config.partition.scanned_member(class, *cursor)?;
            if state.is_fresh(&r) {
                return Ok(r);
            }
            *cursor += 1;
        }
    }

    fn fresh_choice(&mut self, state: &GameState, flag: Option<MoveFlag>) -> Result<PlanChoice, StrategyError> {
        let k = state.maker_vertex_count();
        let n = self.config.stream.stream_at(k + 1);
        let class = class_enum(EnumerationIndex::new(n as u64).expect("stream values are positive"));
        let vertex = self.fresh_member(state, &class)?;
        Ok(PlanChoice::Fresh { class, vertex, flag })
    }

    /// Maker's full reasoning for the current state (which must be past the
    /// opening).
    pub fn plan(&mut self, state: &GameState) -> Result<TargetPlan, StrategyError> {
        self.sync(state)?;
        let active = state.active_vertex().ok_or_else(|| StrategyError::Precondition {
            strategy: Q_STRATEGY_ID.into(),
            reason: "no active vertex before the opening move".into(),
        })?;
        let record = state.record(active).older.clone();
        let ell = record.len();
        let word: Vec<u32> = record.iter().map(|&p| p as u32 + 1).collect();
        let mut plan = TargetPlan {
            active,
            ell,
            word,
            l_size: 0,
            target: None,
            candidates: Vec::new(),
            choice: PlanChoice::Fresh {
                class: class_enum(EnumerationIndex::new(1).unwrap()),
                vertex: Rational::zero(),
                flag: None,
            },
        };
        if self.memo.classes[active].is_none() || record.is_empty() {
            plan.choice = self.fresh_choice(state, None)?;
            return Ok(plan);
        }
        let l = self.compute_l(state)?;
        plan.l_size = l.len();
        let Some(target) = self.lookup_target(&record, l.len()) else {
            plan.choice = self.fresh_choice(state, Some(MoveFlag::OccurrenceBudget))?;
            return Ok(plan);
        };
        let f = self.compute_f(state, &target)?;
        plan.target = Some(target);
        plan.candidates = f;
        if plan.candidates.len() < f_threshold(ell) {
            plan.choice = self.fresh_choice(state, None)?;
            return Ok(plan);
        }
        plan.choice = match self.balanced_min(state, &plan.candidates, &l) {
            Some((partner, edge)) => PlanChoice::Connect { partner, edge },
            None => self.fresh_choice(state, Some(MoveFlag::BlockedF))?,
        };
        Ok(plan)
    }

    /// The move the strategy makes in `state`.
    pub fn maker_move(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        if state.turn() == 0 {
            return Ok(Decision::plain(opening_move(state)?));
        }
        let plan = self.plan(state)?;
        Ok(Decision { edge: plan.edge(state), flag: plan.flag() })
    }
}

impl Strategy for QStrategy {
    fn id(&self) -> String {
        Q_STRATEGY_ID.into()
    }

    fn descriptor(&self) -> String {
        format!("{Q_STRATEGY_ID};{}", self.config.descriptor())
    }

    fn choose(&mut self, state: &GameState) -> Result<Decision, StrategyError> {
        self.maker_move(state)
    }
}
