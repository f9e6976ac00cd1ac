//! Finite-scale clique extraction with checkable certificates.
//!
//! Starting from `u_1 = v_1` and `W_1` (every vertex whose record starts with
//! `v_1`), step `k` picks a class `R_{k+1}` in the gap named by `a_k`: above
//! `R_{a_k}` with no earlier `R_j` in between (`R_1` sits below every class).
//! The class must hold at least `threshold` members of `W_k`, the stand-in for
//! "infinitely many". `u_{k+1}` is taken from `F`, the first `k(k+1)+1`
//! members of `W_k ∩ R_{k+1}`, and `W_{k+1}` keeps the vertices whose record
//! continues with `u_{k+1}`. A depth-first search with backtracking returns
//! the deepest clique reachable within the node budget; candidates are tried
//! in the preferred order (least class enumeration index, then vertices that
//! keep some class above threshold, each by position).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::analysis::Report;
use crate::dense::{class_compare, ClassId, Partition};
use crate::engine::GameState;
use crate::error::OrderError;
use crate::rational::{enum_index_of, Rational};
use crate::stream::gap_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    pub m_max: usize,
    pub threshold: usize,
    /// Search nodes visited before the best clique so far is returned.
    pub node_budget: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { m_max: 8, threshold: 3, node_budget: 200_000 }
    }
}

/// Witness for the step from `K^k` to `K^{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepWitness {
    pub k: usize,
    /// `a_k`: index of the class whose upper gap `R_{k+1}` lies in.
    pub gap: u64,
    /// Enumeration index of `R_{k+1}` among the classes.
    pub x: u64,
    pub class: ClassId,
    /// `|W_k ∩ R_{k+1}|`.
    pub count: usize,
    /// The first `threshold` members of `W_k ∩ R_{k+1}`.
    pub members: Vec<Rational>,
    /// `|F|`.
    pub f_size: usize,
    /// Index of `u_{k+1}` in `F`.
    pub rank: usize,
    /// Classes holding at least `threshold` members of `W_{k+1}` inside the
    /// gap named by `a_{k+1}`.
    pub next_gap_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCertificate {
    pub threshold: usize,
    /// `(u_1, …, u_m)`.
    pub vertices: Vec<Rational>,
    /// `R_i`; `None` for `u_1`, which lies outside `(0,1)`.
    pub classes: Vec<Option<ClassId>>,
    pub steps: Vec<StepWitness>,
}

impl CliqueCertificate {
    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("certificate v1 m={} threshold={}\n", self.m(), self.threshold);
        for (i, (v, c)) in self.vertices.iter().zip(&self.classes).enumerate() {
            let label = c.as_ref().map_or("-".to_string(), |c| c.label().to_string());
            let _ = writeln!(s, "u {} {v} {label}", i + 1);
        }
        for st in &self.steps {
            let _ = writeln!(
                s,
                "step {} a={} x={} class={} count={} f={} rank={} next={}",
                st.k,
                st.gap,
                st.x,
                st.class.label(),
                st.count,
                st.f_size,
                st.rank,
                st.next_gap_classes
            );
            let _ = write!(s, "w {}", st.k);
            for w in &st.members {
                let _ = write!(s, " {w}");
            }
            s.push('\n');
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or("empty certificate")?;
        let head = head.strip_prefix("certificate v1 ").ok_or("missing certificate header")?;
        let kv = |tok: &str, key: &str| -> Result<String, String> {
            tok.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_string)
                .ok_or(format!("expected {key}=…, found {tok:?}"))
        };
        let num = |s: String| s.parse::<u64>().map_err(|_| format!("bad number {s:?}"));
        let rat = |s: &str| s.parse::<Rational>().map_err(|e| e.to_string());
        let ht: Vec<&str> = head.split_whitespace().collect();
        if ht.len() != 2 {
            return Err("certificate header needs m and threshold".into());
        }
        let m = num(kv(ht[0], "m")?)? as usize;
        let threshold = num(kv(ht[1], "threshold")?)? as usize;
        let mut cert = CliqueCertificate { threshold, vertices: Vec::new(), classes: Vec::new(), steps: Vec::new() };
        let mut ended = false;
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.first().copied() {
                Some("u") if t.len() == 4 => {
                    if num(t[1].to_string())? as usize != cert.vertices.len() + 1 {
                        return Err(format!("vertex line out of order: {line:?}"));
                    }
                    cert.vertices.push(rat(t[2])?);
                    cert.classes.push(if t[3] == "-" { None } else { Some(ClassId(rat(t[3])?)) });
                }
                Some("step") if t.len() == 9 => cert.steps.push(StepWitness {
                    k: num(t[1].to_string())? as usize,
                    gap: num(kv(t[2], "a")?)?,
                    x: num(kv(t[3], "x")?)?,
                    class: ClassId(rat(&kv(t[4], "class")?)?),
                    count: num(kv(t[5], "count")?)? as usize,
                    f_size: num(kv(t[6], "f")?)? as usize,
                    rank: num(kv(t[7], "rank")?)? as usize,
                    next_gap_classes: num(kv(t[8], "next")?)? as usize,
                    members: Vec::new(),
                }),
                Some("w") if t.len() >= 2 => {
                    let step = cert.steps.last_mut().ok_or("witness line before any step")?;
                    if num(t[1].to_string())? as usize != step.k {
                        return Err(format!("witness line does not match step {}", step.k));
                    }
                    step.members = t[2..].iter().map(|s| rat(s)).collect::<Result<_, _>>()?;
                }
                Some("end") if t.len() == 1 => {
                    ended = true;
                    break;
                }
                _ => return Err(format!("unrecognised certificate line {line:?}")),
            }
        }
        if !ended {
            return Err("certificate has no end line".into());
        }
        if cert.vertices.len() != m {
            return Err(format!("header says m={m} but {} vertices are listed", cert.vertices.len()));
        }
        Ok(cert)
    }
}

/// Per-state data the search and the checker both use.
struct Index<'a> {
    state: &'a GameState,
    classes: Vec<Option<ClassId>>,
}

impl<'a> Index<'a> {
    fn new(state: &'a GameState, partition: &Partition) -> Result<Self, OrderError> {
        let classes = (0..state.maker_vertex_count())
            .map(|p| partition.try_class_of(state.maker_vertex(p)))
            .collect::<Result<_, _>>()?;
        Ok(Index { state, classes })
    }

    fn record(&self, p: usize) -> &[usize] {
        self.state.record(p).effective()
    }

    /// `W_k` for the clique `us` (positions).
    fn reservoir(&self, us: &[usize]) -> Vec<usize> {
        let k = us.len();
        (0..self.state.maker_vertex_count())
            .filter(|&p| self.record(p).len() >= k && self.record(p)[..k] == *us)
            .collect()
    }
}

/// Bounds of the gap above `rs[a-1]`: `(lower, upper)`, `None` meaning
/// unbounded below (the class of `u_1`) or above.
fn gap_bounds(rs: &[Option<ClassId>], a: usize) -> (Option<&ClassId>, Option<&ClassId>) {
    let lower = rs[a - 1].as_ref();
    let above = |c: &ClassId| lower.is_none_or(|l| class_compare(c, l) == Ordering::Greater);
    let upper = rs.iter().flatten().filter(|c| above(c)).min_by(|a, b| class_compare(a, b));
    (lower, upper)
}

fn in_gap(c: &ClassId, rs: &[Option<ClassId>], a: usize) -> bool {
    let (lower, upper) = gap_bounds(rs, a);
    lower.is_none_or(|l| class_compare(c, l) == Ordering::Greater)
        && upper.is_none_or(|u| class_compare(c, u) == Ordering::Less)
        && !rs.iter().flatten().any(|r| r == c)
}

/// Members of `w` per class, in position order.
fn by_class(idx: &Index<'_>, w: &[usize]) -> HashMap<ClassId, Vec<usize>> {
    let mut m: HashMap<ClassId, Vec<usize>> = HashMap::new();
    for &p in w {
        if let Some(c) = &idx.classes[p] {
            m.entry(c.clone()).or_default().push(p);
        }
    }
    m
}

fn gap_class_count(idx: &Index<'_>, w: &[usize], rs: &[Option<ClassId>], a: usize, threshold: usize) -> usize {
    by_class(idx, w).iter().filter(|(c, v)| v.len() >= threshold && in_gap(c, rs, a)).count()
}

fn f_size(k: usize) -> usize {
    k * (k + 1) + 1
}

struct Search<'a, 'b> {
    idx: &'b Index<'a>,
    opts: ExtractOptions,
    nodes: usize,
    best: Vec<(usize, StepWitness)>,
    path: Vec<(usize, StepWitness)>,
}

impl Search<'_, '_> {
    fn dfs(&mut self, us: &mut Vec<usize>, rs: &mut Vec<Option<ClassId>>, w: &[usize]) {
        self.nodes += 1;
        if self.path.len() > self.best.len() {
            self.best = self.path.clone();
        }
        let k = us.len();
        if k >= self.opts.m_max || self.nodes >= self.opts.node_budget || self.best.len() + 1 >= self.opts.m_max {
            return;
        }
        let a = gap_at(k as u64);
        let groups = by_class(self.idx, w);
        let mut gap: Vec<(u64, &ClassId, &Vec<usize>)> = groups
            .iter()
            .filter(|(c, v)| v.len() >= self.opts.threshold && in_gap(c, rs, a as usize))
            .filter_map(|(c, v)| Some((enum_index_of(c.label()).ok()?.get(), c, v)))
            .collect();
        gap.sort_by_key(|g| g.0);
        for (x, class, members) in gap {
            let f: Vec<usize> = members.iter().copied().take(f_size(k)).collect();
            let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
            for &p in w {
                if let Some(&u) = self.idx.record(p).get(k) {
                    next.entry(u).or_default().push(p);
                }
            }
            let mut order: Vec<(bool, usize, usize)> = f
                .iter()
                .enumerate()
                .map(|(rank, &u)| {
                    let keeps = next
                        .get(&u)
                        .is_some_and(|wn| by_class(self.idx, wn).values().any(|v| v.len() >= self.opts.threshold));
                    (!keeps, u, rank)
                })
                .collect();
            order.sort();
            for (_, u, rank) in order {
                let wn = next.remove(&u).unwrap_or_default();
                us.push(u);
                rs.push(Some(class.clone()));
                let a_next = gap_at(k as u64 + 1) as usize;
                let step = StepWitness {
                    k,
                    gap: a,
                    x,
                    class: class.clone(),
                    count: members.len(),
                    members: members
                        .iter()
                        .take(self.opts.threshold)
                        .map(|&p| self.idx.state.maker_vertex(p).clone())
                        .collect(),
                    f_size: f.len(),
                    rank,
                    next_gap_classes: gap_class_count(self.idx, &wn, rs, a_next, self.opts.threshold),
                };
                self.path.push((u, step));
                self.dfs(us, rs, &wn);
                self.path.pop();
                rs.pop();
                us.pop();
                if self.nodes >= self.opts.node_budget || self.best.len() + 1 >= self.opts.m_max {
                    return;
                }
            }
        }
    }
}

/// Deepest certified clique in Maker's graph within the options' limits.
pub fn extract_clique(
    state: &GameState,
    partition: &Partition,
    opts: ExtractOptions,
) -> Result<CliqueCertificate, OrderError> {
    assert!(opts.m_max >= 1 && opts.threshold >= 1, "m_max and threshold must be positive");
    let v1 = state.maker_vertex_count().min(1);
    if v1 == 0 {
        return Ok(CliqueCertificate {
            threshold: opts.threshold,
            vertices: Vec::new(),
            classes: Vec::new(),
            steps: Vec::new(),
        });
    }
    let idx = Index::new(state, partition)?;
    let mut us = vec![0usize];
    let mut rs = vec![None];
    let w1 = idx.reservoir(&us);
    let mut search = Search { idx: &idx, opts, nodes: 0, best: Vec::new(), path: Vec::new() };
    search.dfs(&mut us, &mut rs, &w1);
    let mut cert = CliqueCertificate {
        threshold: opts.threshold,
        vertices: vec![state.maker_vertex(0).clone()],
        classes: vec![None],
        steps: Vec::new(),
    };
    for (u, step) in search.best {
        cert.vertices.push(state.maker_vertex(u).clone());
        cert.classes.push(Some(step.class.clone()));
        cert.steps.push(step);
    }
    Ok(cert)
}

/// Re-verifies every claim of `cert` against `state`.
pub fn check_certificate(cert: &CliqueCertificate, state: &GameState, partition: &Partition) -> Report {
    let mut r = Report::new();
    let m = cert.m();
    if m == 0 || state.maker_vertex_count() == 0 {
        r.violation("empty certificate or empty Maker graph");
        return r;
    }
    if cert.threshold == 0 {
        r.violation("threshold must be positive");
    }
    if cert.classes.len() != m || cert.steps.len() + 1 != m {
        r.violation(format!("shape: {m} vertices, {} classes, {} steps", cert.classes.len(), cert.steps.len()));
        return r;
    }
    let idx = match Index::new(state, partition) {
        Ok(i) => i,
        Err(e) => {
            r.violation(format!("cannot classify Maker vertices: {e}"));
            return r;
        }
    };
    let mut us = Vec::with_capacity(m);
    for (i, v) in cert.vertices.iter().enumerate() {
        match state.maker_position(v) {
            Some(p) if !us.contains(&p) => us.push(p),
            Some(_) => r.violation(format!("u_{} = {v} repeats an earlier vertex", i + 1)),
            None => r.violation(format!("u_{} = {v} is not a Maker vertex", i + 1)),
        }
    }
    if us.len() != m {
        return r;
    }
    if us[0] != 0 {
        r.violation(format!("u_1 must be v_1 = {}", state.maker_vertex(0)));
    }
    // (a): complete in G_M
    for i in 0..m {
        for j in i + 1..m {
            if !state.maker_adjacent(us[i], us[j]) {
                r.violation(format!("(a) edge u_{} u_{} is not Maker's", i + 1, j + 1));
            }
        }
    }
    for (i, c) in cert.classes.iter().enumerate() {
        if c != &idx.classes[us[i]] || (i > 0 && c.is_none()) {
            r.violation(format!("R_{} = {c:?} but u_{} lies in {:?}", i + 1, i + 1, idx.classes[us[i]]));
        }
    }
    for (s, step) in cert.steps.iter().enumerate() {
        let k = s + 1;
        check_step(&idx, cert, &us, k, step, &mut r);
    }
    r
}

fn check_step(idx: &Index<'_>, cert: &CliqueCertificate, us: &[usize], k: usize, step: &StepWitness, r: &mut Report) {
    let t = cert.threshold;
    if step.k != k {
        r.violation(format!("step {k} is labelled {}", step.k));
    }
    let a = gap_at(k as u64);
    if step.gap != a {
        r.violation(format!("(d) step {k}: gap index {} but a_{k} = {a}", step.gap));
    }
    if Some(&step.class) != cert.classes[k].as_ref() {
        r.violation(format!("step {k}: class {} is not R_{}", step.class, k + 1));
    }
    match enum_index_of(step.class.label()) {
        Ok(x) if x.get() == step.x => {}
        _ => r.violation(format!("step {k}: x = {} does not enumerate {}", step.x, step.class)),
    }
    let rs = &cert.classes[..k];
    if !in_gap(&step.class, rs, a as usize) {
        r.violation(format!("(d) step {k}: {} is not in the gap above R_{a}", step.class));
    }
    // (b): recount W_k inside the class
    let w = idx.reservoir(&us[..k]);
    let inside: Vec<usize> = w.iter().copied().filter(|&p| idx.classes[p].as_ref() == Some(&step.class)).collect();
    if step.count != inside.len() {
        r.violation(format!("step {k}: |W_{k} ∩ R_{}| is {}, certificate says {}", k + 1, inside.len(), step.count));
    }
    if inside.len() < t {
        r.violation(format!("step {k}: only {} members of W_{k} in {} (threshold {t})", inside.len(), step.class));
    }
    let expected: Vec<&Rational> = inside.iter().take(t).map(|&p| idx.state.maker_vertex(p)).collect();
    if step.members.len() != t || step.members.iter().collect::<Vec<_>>() != expected {
        r.violation(format!("(b) step {k}: witness list is not the first {t} members of W_{k} ∩ R_{}", k + 1));
    }
    for wv in &step.members {
        let ok = idx.state.maker_position(wv).is_some_and(|p| {
            let rec = idx.record(p);
            rec.len() >= k && rec[..k] == us[..k]
        });
        if !ok {
            r.violation(format!("(b) step {k}: witness {wv} does not start its record with u_1..u_{k}"));
        }
    }
    let f: Vec<usize> = inside.iter().copied().take(f_size(k)).collect();
    if step.f_size != f.len() {
        r.violation(format!("step {k}: |F| is {}, certificate says {}", f.len(), step.f_size));
    }
    if f.get(step.rank) != Some(&us[k]) {
        r.violation(format!("step {k}: u_{} is not member {} of F", k + 1, step.rank));
    }
    let wn = idx.reservoir(&us[..=k]);
    let next = gap_class_count(idx, &wn, &cert.classes[..=k], gap_at(k as u64 + 1) as usize, t);
    if step.next_gap_classes != next {
        r.violation(format!(
            "step {k}: {next} classes meet the threshold in the next gap, certificate says {}",
            step.next_gap_classes
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Edge, Player};

    #[test]
    fn opening_only_gives_m_one() {
        let mut st = GameState::new();
        st.apply_move(Player::Maker, &Edge::new(Rational::zero(), Rational::one()).unwrap()).unwrap();
        let part = Partition::default();
        let cert = extract_clique(&st, &part, ExtractOptions::default()).unwrap();
        assert_eq!(cert.m(), 1);
        assert_eq!(cert.vertices[0], Rational::zero());
        assert!(check_certificate(&cert, &st, &part).is_ok());
        assert_eq!(CliqueCertificate::parse(&cert.to_text()).unwrap(), cert);
    }

    #[test]
    fn gap_bounds_follow_the_chain() {
        let c = |s: &str| Some(ClassId(s.parse().unwrap()));
        let rs = vec![None, c("0"), c("1")];
        // above R_1 (bottom), below the least R_j
        assert!(in_gap(&ClassId("-5".parse().unwrap()), &rs, 1));
        assert!(!in_gap(&ClassId("1/2".parse().unwrap()), &rs, 1));
        assert!(in_gap(&ClassId("1/2".parse().unwrap()), &rs, 2));
        assert!(!in_gap(&ClassId("1".parse().unwrap()), &rs, 2));
        assert!(in_gap(&ClassId("7".parse().unwrap()), &rs, 3));
    }
}
