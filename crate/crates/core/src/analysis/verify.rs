use std::collections::{BTreeMap, HashMap};

use crate::analysis::Report;
use crate::breaker::{interval_of, pair_base, pair_of, pair_table, two_subset, PairEntry, PAIRING_ID};
use crate::dense::class_enum;
use crate::engine::{Edge, GameState, Move, MoveFlag, Player, Trace};
use crate::error::TraceError;
use crate::maker::{f_threshold, MakerConfig, PlanChoice, QStrategy, Q_STRATEGY_ID};
use crate::rational::{enum_q, EnumerationIndex, Rational};

/// Well-formedness, alternation and legality of a trace file. Keeps going
/// after a violation so that every bad line is listed.
pub fn verify_trace(text: &str) -> Result<Report, TraceError> {
    let (header, lines, certs) = Trace::split(text)?;
    let mut report = Report::new();
    let mut owner: HashMap<Edge, u64> = HashMap::new();
    for (k, (no, line)) in lines.iter().enumerate() {
        let expected_turn = k as u64 + 1;
        let m = match crate::engine::parse_move_line(line) {
            Ok(m) => m,
            Err(reason) => {
                report.violation(format!("line {no}: {reason}"));
                continue;
            }
        };
        if m.turn != expected_turn {
            report.violation(format!("line {no}: turn {} out of sequence, expected {expected_turn}", m.turn));
        }
        let expected = if expected_turn % 2 == 1 { Player::Maker } else { Player::Breaker };
        if m.player != expected {
            report.violation(format!("turn {expected_turn}: {} moved but it is {expected}'s turn", m.player));
        }
        match owner.get(&m.edge) {
            Some(first) => {
                report.violation(format!("turn {expected_turn}: edge {} already claimed at turn {first}", m.edge))
            }
            None => {
                owner.insert(m.edge.clone(), expected_turn);
            }
        }
    }
    if header.turns != lines.len() as u64 {
        report.violation(format!("header declares {} turns but the trace has {} moves", header.turns, lines.len()));
    }
    report.note(format!("moves={} certificates={}", lines.len(), certs.len()));
    Ok(report)
}

/// Independent reconstruction of every Maker vertex's record from the raw
/// move list: `(vertex, older neighbours in claim order, frozen length)`.
pub fn reconstruct_records(moves: &[Move]) -> Vec<(Rational, Vec<usize>, Option<usize>)> {
    // vertex order: first Maker incidence, the smaller endpoint first on ties
    let mut pos: HashMap<&Rational, usize> = HashMap::new();
    let mut order: Vec<&Rational> = Vec::new();
    let mut older: Vec<Vec<usize>> = Vec::new();
    let mut frozen: Vec<Option<usize>> = Vec::new();
    for m in moves.iter().filter(|m| m.player == Player::Maker) {
        for v in [m.edge.lo(), m.edge.hi()] {
            if !pos.contains_key(v) {
                // the previous vertex's record freezes as this one enters
                if let Some(last) = older.last() {
                    let p = older.len() - 1;
                    frozen[p].get_or_insert(last.len());
                }
                pos.insert(v, order.len());
                order.push(v);
                older.push(Vec::new());
                frozen.push(None);
            }
        }
        let (a, b) = (pos[m.edge.lo()], pos[m.edge.hi()]);
        let (young, old) = if a > b { (a, b) } else { (b, a) };
        older[young].push(old);
    }
    order.into_iter().zip(older).zip(frozen).map(|((v, o), f)| (v.clone(), o, f)).collect()
}

/// Outcome of replaying a trace against the Q-game strategy.
#[derive(Debug, Clone, Default)]
pub struct MakerReplay {
    pub report: Report,
    /// First turn where the trace departs from the strategy.
    pub divergence: Option<u64>,
    pub maker_moves: usize,
    pub connects: usize,
    pub fresh: usize,
    pub blocked_f: usize,
    pub occurrence_budget: usize,
    /// Largest `|F| / (ℓ(ℓ+1)+1)` pair seen, as `(|F|, bound)`.
    pub max_f: (usize, usize),
    pub first_connection_ok: usize,
    pub class_placement_ok: usize,
    pub class_placement_checked: usize,
}

/// Recomputes every Maker move from its prefix and checks the strategy's
/// structural laws on the final state.
pub fn verify_maker_strategy(trace: &Trace, config: &MakerConfig) -> Result<MakerReplay, TraceError> {
    if trace.header.maker != Q_STRATEGY_ID {
        return Err(TraceError::HeaderMismatch { expected: Q_STRATEGY_ID.into(), found: trace.header.maker.clone() });
    }
    let mut out = MakerReplay::default();
    let mut strategy = QStrategy::new(config.clone());
    let mut state = GameState::new();
    // vertices the strategy itself placed; all of them unless it diverged
    let mut placed = usize::MAX;
    for m in &trace.moves {
        if m.player == Player::Maker {
            out.maker_moves += 1;
            // past a divergence the strategy would plan for a state it never produced
            if out.divergence.is_none() {
                check_maker_move(&mut strategy, &state, m, &mut out);
                if out.divergence.is_some() {
                    placed = state.maker_vertex_count();
                }
            }
        }
        state.apply_move(m.player, &m.edge)?;
    }
    check_laws(&state, config, &trace.moves, placed, &mut out);
    let r = &mut out.report;
    r.note(format!(
        "maker moves={} connect={} fresh={} fallback blocked-f={} occurrence-budget={}",
        out.maker_moves, out.connects, out.fresh, out.blocked_f, out.occurrence_budget
    ));
    r.note(format!("largest F={} (bound {})", out.max_f.0, out.max_f.1));
    Ok(out)
}

fn check_maker_move(strategy: &mut QStrategy, state: &GameState, m: &Move, out: &mut MakerReplay) {
    let (edge, flag) = if state.turn() == 0 {
        (Edge::new(Rational::zero(), Rational::one()).unwrap(), None)
    } else {
        let plan = match strategy.plan(state) {
            Ok(p) => p,
            Err(e) => {
                out.report.violation(format!("turn {}: strategy failed: {e}", m.turn));
                return;
            }
        };
        let bound = f_threshold(plan.ell);
        if plan.candidates.len() > bound {
            out.report.violation(format!("turn {}: |F|={} exceeds {bound}", m.turn, plan.candidates.len()));
        }
        if plan.candidates.len() * out.max_f.1.max(1) >= out.max_f.0 * bound {
            out.max_f = (plan.candidates.len(), bound);
        }
        match &plan.choice {
            PlanChoice::Connect { partner, .. } => {
                out.connects += 1;
                check_balanced(strategy, state, &plan.candidates, *partner, m.turn, &mut out.report);
            }
            PlanChoice::Fresh { flag, .. } => {
                out.fresh += 1;
                match flag {
                    Some(MoveFlag::BlockedF) => out.blocked_f += 1,
                    Some(MoveFlag::OccurrenceBudget) => out.occurrence_budget += 1,
                    _ => {}
                }
            }
        }
        (plan.edge(state), plan.flag())
    };
    if edge != m.edge || flag != m.flag {
        out.divergence = Some(m.turn);
        out.report.violation(format!(
            "turn {}: divergence, strategy claims {edge}{} but the trace has {}{}",
            m.turn,
            flag.map(|f| format!(" {f}")).unwrap_or_default(),
            m.edge,
            m.flag.map(|f| format!(" {f}")).unwrap_or_default()
        ));
    }
}

/// The chosen partner has the least `(|N_M ∩ L|, position)` among the
/// members of `F` with a free edge to the active vertex.
fn check_balanced(strategy: &mut QStrategy, state: &GameState, f: &[usize], chosen: usize, turn: u64, r: &mut Report) {
    let Some(active) = state.active_vertex() else { return };
    let Ok(mut l) = strategy.compute_l(state) else { return };
    l.sort_unstable();
    let load = |v: usize| state.maker_neighbours(v).filter(|u| l.binary_search(u).is_ok()).count();
    let best = f
        .iter()
        .copied()
        .filter(|&v| v != active)
        .filter(|&v| {
            let e = Edge::new(state.maker_vertex(v).clone(), state.maker_vertex(active).clone()).unwrap();
            !state.is_claimed(&e)
        })
        .min_by_key(|&v| (load(v), v));
    if best != Some(chosen) {
        r.violation(format!("turn {turn}: balanced order picks {best:?}, strategy picked {chosen}"));
    }
}

fn check_laws(state: &GameState, config: &MakerConfig, moves: &[Move], placed: usize, out: &mut MakerReplay) {
    let r = &mut out.report;
    for p in 1..state.maker_vertex_count() {
        if state.record(p).older.first() == Some(&0) {
            out.first_connection_ok += 1;
        } else {
            r.violation(format!("v_{} = {} was not first connected to v_1", p + 1, state.maker_vertex(p)));
        }
    }
    let placed = placed.min(state.maker_vertex_count());
    if placed < state.maker_vertex_count() {
        r.note(format!(
            "class placement skipped for {} vertices after the divergence",
            state.maker_vertex_count() - placed
        ));
    }
    for p in 2..placed {
        out.class_placement_checked += 1;
        let k = p + 1;
        let expected = class_enum(EnumerationIndex::new(config.stream.stream_at(k) as u64).unwrap());
        match config.partition.try_class_of(state.maker_vertex(p)) {
            Ok(Some(c)) if c == expected => out.class_placement_ok += 1,
            Ok(c) => r.violation(format!("v_{k} = {} lies in {c:?}, expected {expected}", state.maker_vertex(p))),
            Err(e) => r.violation(format!("v_{k}: {e}")),
        }
    }
    let rebuilt = reconstruct_records(moves);
    if rebuilt.len() != state.maker_vertex_count() {
        r.violation(format!(
            "vertex order has {} entries, reconstruction {}",
            state.maker_vertex_count(),
            rebuilt.len()
        ));
        return;
    }
    for (p, (v, older, frozen)) in rebuilt.iter().enumerate() {
        let rec = state.record(p);
        if state.maker_vertex(p) != v || &rec.older != older || &rec.frozen != frozen {
            r.violation(format!("record of v_{} differs from the reconstruction", p + 1));
        }
    }
}

/// Common `I_j`-neighbours of `p_j` and `q_j` in Maker's graph, against the
/// number of `I_j` members enumerated before `max(p_j, q_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityWitness {
    pub j: u64,
    pub count: usize,
    pub bound: usize,
}

pub fn density_witnesses(state: &GameState) -> Vec<DensityWitness> {
    let mut by_interval: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for p in 0..state.maker_vertex_count() {
        if let Some(j) = interval_of(state.maker_vertex(p)) {
            by_interval.entry(j).or_default().push(p);
        }
    }
    let mut out = Vec::new();
    for (j, members) in by_interval {
        let (pj, qj) = pair_base(j);
        let (Some(pp), Some(pq)) = (state.maker_position(&pj), state.maker_position(&qj)) else {
            continue;
        };
        let count = members
            .iter()
            .filter(|&&s| s != pp && s != pq && state.maker_adjacent(s, pp) && state.maker_adjacent(s, pq))
            .count();
        let (_, b) = two_subset(j);
        let bound = (1..b).filter(|&i| interval_of(&enum_q(EnumerationIndex::new(i).unwrap())) == Some(j)).count();
        out.push(DensityWitness { j, count, bound });
    }
    out
}

/// Response discipline and pair soundness for a trace whose Breaker is the
/// pairing strategy.
pub fn verify_pairing(trace: &Trace) -> Result<Report, TraceError> {
    if trace.header.breaker != PAIRING_ID {
        return Err(TraceError::HeaderMismatch { expected: PAIRING_ID.into(), found: trace.header.breaker.clone() });
    }
    let mut report = Report::new();
    let mut state = GameState::new();
    let mut paired_maker_moves = 0usize;
    for (k, m) in trace.moves.iter().enumerate() {
        if m.player == Player::Maker {
            if let Some(partner) = pair_of(&m.edge) {
                paired_maker_moves += 1;
                match state.claim_of(&partner) {
                    Some((Player::Maker, t)) => report.violation(format!(
                        "turn {}: Maker completes the pair {} / {partner} (partner taken at turn {t})",
                        m.turn, m.edge
                    )),
                    Some((Player::Breaker, _)) => {}
                    None => {
                        if let Some(next) = trace.moves.get(k + 1) {
                            if next.edge != partner {
                                report.violation(format!(
                                    "turn {}: Breaker skipped the partner {partner} of Maker's edge {}",
                                    next.turn, m.edge
                                ));
                            }
                        }
                    }
                }
            }
        }
        state.apply_move(m.player, &m.edge)?;
    }
    let witnesses = density_witnesses(&state);
    for w in &witnesses {
        if w.count > w.bound {
            report.violation(format!("I_{}: {} common neighbours exceed the bound {}", w.j, w.count, w.bound));
        }
    }
    report.note(format!("paired maker moves={paired_maker_moves}"));
    report.note(format!("density intervals checked={}", witnesses.len()));
    for w in witnesses.iter().filter(|w| w.count > 0).take(20) {
        report.note(format!("I_{}: witnesses={} bound={}", w.j, w.count, w.bound));
    }
    Ok(report)
}

/// Pairwise edge-disjointness of a pair family, by hashing every edge.
pub fn check_pair_disjointness(pairs: impl IntoIterator<Item = PairEntry>) -> Report {
    let mut report = Report::new();
    let mut seen: HashMap<Edge, (usize, u64, Rational)> = HashMap::new();
    let mut n = 0usize;
    for (i, p) in pairs.into_iter().enumerate() {
        n += 1;
        if p.edges.0 == p.edges.1 {
            report.violation(format!("pair #{} (j={}, s={}) repeats one edge", i + 1, p.j, p.s));
        }
        for e in [&p.edges.0, &p.edges.1] {
            if let Some((k, j, s)) = seen.get(e) {
                if *k != i + 1 {
                    report.violation(format!(
                        "pairs #{k} (j={j}, s={s}) and #{} (j={}, t={}) share edge {e}",
                        i + 1,
                        p.j,
                        p.s
                    ));
                }
            } else {
                seen.insert(e.clone(), (i + 1, p.j, p.s.clone()));
            }
        }
    }
    report.note(format!("pairs checked={n}"));
    report
}

/// Disjointness of the first `bound` pairs of the frozen pair table.
pub fn pair_disjointness(bound: usize) -> Report {
    assert!(bound >= 1, "bound must be positive");
    check_pair_disjointness(pair_table().take(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breaker::{pair_for, PairingBreaker, RandomStrategy};
    use crate::engine::run_game;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// O(n²) oracle: compare every pair with every other.
    fn quadratic_collisions(pairs: &[PairEntry]) -> usize {
        let mut c = 0;
        for i in 0..pairs.len() {
            for k in i + 1..pairs.len() {
                let (a, b) = (&pairs[i].edges, &pairs[k].edges);
                for e in [&a.0, &a.1] {
                    if e == &b.0 || e == &b.1 {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn pair_table_is_disjoint_against_the_quadratic_oracle() {
        let pairs: Vec<PairEntry> = pair_table().take(1500).collect();
        assert_eq!(quadratic_collisions(&pairs), 0);
        assert!(check_pair_disjointness(pairs).is_ok());
    }

    #[test]
    fn same_interval_pairs_are_disjoint() {
        let in_i1: Vec<PairEntry> = pair_table().filter(|p| p.j == 1).take(20).collect();
        assert_eq!(in_i1.len(), 20);
        assert!(check_pair_disjointness(in_i1).is_ok());
    }

    #[test]
    fn detector_counts_injected_collisions() {
        let mut pairs: Vec<PairEntry> = pair_table().take(200).collect();
        for k in [3usize, 40, 117] {
            let mut dup = pairs[k].clone();
            dup.edges.1 = Edge::new(Rational::from(1000 + k as i64), Rational::from(2000)).unwrap();
            pairs.push(dup);
        }
        let report = check_pair_disjointness(pairs.clone());
        assert_eq!(report.violations.len(), 3, "{report}");
        assert_eq!(report.violations.len(), quadratic_collisions(&pairs));
    }

    #[test]
    fn trace_violations_are_located() {
        let text = "qgame-trace v1 maker=a breaker=b turns=4 seed=0 digest=0\n\
            1 M 0/1 1/1\n2 B 1/1 2/1\n3 M 1/1 2/1\n4 B 0/1 1/1\n";
        let r = verify_trace(text).unwrap();
        assert_eq!(r.violations.len(), 2, "{r}");
        assert!(r.violations[0].contains("turn 3") && r.violations[0].contains("turn 2"));
        assert!(r.violations[1].contains("turn 4") && r.violations[1].contains("turn 1"));
        let swapped = "qgame-trace v1 maker=a breaker=b turns=4 seed=0 digest=0\n\
            1 M 0/1 1/1\n2 B 1/1 2/1\n3 M 0/1 2/1\n4 M 0/1 3/1\n";
        let r = verify_trace(swapped).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].starts_with("turn 4"));
    }

    #[test]
    fn pairing_trace_with_a_skipped_response() {
        let mut maker = RandomStrategy::new(Some(3));
        let mut breaker = PairingBreaker::new();
        let (trace, _) = run_game(&mut maker, &mut breaker, 400, 3).unwrap();
        assert!(verify_pairing(&trace).unwrap().is_ok());
        // a scripted Maker edge that is paired, answered by something else
        let text = "qgame-trace v1 maker=m breaker=pairing turns=2 seed=0 digest=0\n\
            1 M 0/1 3/2\n2 B 5/1 6/1\n";
        let t = Trace::parse(text).unwrap();
        let r = verify_pairing(&t).unwrap();
        assert_eq!(r.violations.len(), 1, "{r}");
        let complete = "qgame-trace v1 maker=m breaker=pairing turns=3 seed=0 digest=0\n\
            1 M 0/1 3/2\n2 B 5/1 6/1\n3 M 1/1 3/2\n";
        let r = verify_pairing(&Trace::parse(complete).unwrap()).unwrap();
        // skipped response, completed pair, and 3/2 joined to both p_1 and q_1
        assert_eq!(r.violations.len(), 3, "{r}");
        assert!(r.violations[2].starts_with("I_1"));
    }

    #[test]
    fn density_bound_for_the_first_interval() {
        // p_1 = 0, q_1 = 1 (indices 1, 2): no member of I_1 comes before e_2
        let mut st = GameState::new();
        let s = q("3/2");
        assert!(pair_for(&s).is_some());
        st.apply_move(Player::Maker, &Edge::new(q("0"), q("1")).unwrap()).unwrap();
        st.apply_move(Player::Breaker, &Edge::new(q("5"), q("6")).unwrap()).unwrap();
        st.apply_move(Player::Maker, &Edge::new(q("0"), s.clone()).unwrap()).unwrap();
        let w = density_witnesses(&st);
        assert_eq!(w, vec![DensityWitness { j: 1, count: 0, bound: 0 }]);
    }

    #[test]
    fn records_reconstruct_on_random_games() {
        let mut a = RandomStrategy::new(Some(11));
        let mut b = RandomStrategy::new(Some(12));
        let (trace, st) = run_game(&mut a, &mut b, 600, 0).unwrap();
        let rebuilt = reconstruct_records(&trace.moves);
        assert_eq!(rebuilt.len(), st.maker_vertex_count());
        for (p, (v, older, frozen)) in rebuilt.iter().enumerate() {
            assert_eq!(st.maker_vertex(p), v);
            assert_eq!(&st.record(p).older, older);
            assert_eq!(&st.record(p).frozen, frozen);
        }
    }
}
