//! Back-and-forth order isomorphism `(Q², lex) → (0,1) ∩ Q` and the interval
//! partition of `(0,1) ∩ Q` it induces.
//!
//! The partition classes are the images `f[{q} × Q]`; a class is named by its
//! label `q`. Classes are convex and ordered like their labels, so the class
//! order is a copy of `(Q, <)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Roots;
use parking_lot::Mutex;

use crate::error::OrderError;
use crate::rational::{
    enum_index_big, enum_q, enum_unit_interval, least_enum_between, least_unit_between, EnumerationIndex, Rational,
};

/// An element of `Q²`, compared lexicographically.
pub type DomainPair = (Rational, Rational);

/// Default cap on back-and-forth steps per instance.
pub const DEFAULT_STEP_LIMIT: u64 = 1 << 21;

/// Default cap on codomain elements classified by the member scan.
pub const DEFAULT_SCAN_LIMIT: u64 = 1 << 20;

/// Cantor diagonal position `d ≥ 1` to enumeration indices `(i, j)`.
///
/// Pairs are ordered by `(i + j, i)`.
pub fn domain_indices(d: u64) -> (u64, u64) {
    assert!(d >= 1, "domain positions start at 1");
    // n = s - 1 is the smallest n with n(n+1)/2 >= d
    let mut n = ((8 * d as u128 + 1).sqrt() as u64).saturating_sub(1) / 2;
    while (n as u128) * (n as u128 + 1) / 2 < d as u128 {
        n += 1;
    }
    while n > 0 && ((n - 1) as u128) * (n as u128) / 2 >= d as u128 {
        n -= 1;
    }
    let before = (n as u128 - 1) * (n as u128) / 2;
    let i = (d as u128 - before) as u64;
    let s = n + 1;
    (i, s - i)
}

/// Inverse of [`domain_indices`].
pub fn domain_position(i: u64, j: u64) -> u64 {
    assert!(i >= 1 && j >= 1);
    let s = i + j;
    (s - 2) * (s - 1) / 2 + i
}

fn domain_pair_at(d: u64) -> DomainPair {
    let (i, j) = domain_indices(d);
    (enum_q(EnumerationIndex::new(i).unwrap()), enum_q(EnumerationIndex::new(j).unwrap()))
}

/// Diagonal order key `(i + j, i)` for a pair, computed without overflow.
fn diagonal_key(pair: &DomainPair) -> (BigUint, BigUint) {
    let i = enum_index_big(&pair.0);
    let j = enum_index_big(&pair.1);
    (&i + &j, i)
}

/// Deterministic back-and-forth between `(Q², lex)` and `(0,1) ∩ Q`.
///
/// Odd steps go forth: the least unmatched domain pair is matched to the
/// least-index codomain element in the gap its neighbours leave. Even steps go
/// back symmetrically. The memo after `n` steps depends only on `n`.
#[derive(Debug, Clone)]
pub struct BackAndForthIso {
    log: Vec<(DomainPair, Rational)>,
    forward: BTreeMap<DomainPair, usize>,
    backward: BTreeMap<Rational, usize>,
    domain_cursor: u64,
    codomain_cursor: u64,
    step_limit: u64,
}

impl Default for BackAndForthIso {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_LIMIT)
    }
}

impl BackAndForthIso {
    pub fn new(step_limit: u64) -> Self {
        BackAndForthIso {
            log: Vec::new(),
            forward: BTreeMap::new(),
            backward: BTreeMap::new(),
            domain_cursor: 1,
            codomain_cursor: 1,
            step_limit,
        }
    }

    pub fn steps(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn step_limit(&self) -> u64 {
        self.step_limit
    }

    /// Matched pairs in the order they were matched.
    pub fn log(&self) -> &[(DomainPair, Rational)] {
        &self.log
    }

    /// Runs one step; `Err` once the step budget is spent.
    pub fn step(&mut self) -> Result<(), OrderError> {
        if self.steps() >= self.step_limit {
            return Err(OrderError::StepBudget { limit: self.step_limit });
        }
        if self.steps().is_multiple_of(2) {
            self.step_forth();
        } else {
            self.step_back();
        }
        Ok(())
    }

    /// Extends the memo to exactly `n` steps (or errors at the budget).
    pub fn extend_to(&mut self, n: u64) -> Result<(), OrderError> {
        while self.steps() < n {
            self.step()?;
        }
        Ok(())
    }

    fn record(&mut self, pair: DomainPair, image: Rational) {
        let at = self.log.len();
        self.forward.insert(pair.clone(), at);
        self.backward.insert(image.clone(), at);
        self.log.push((pair, image));
    }

    fn step_forth(&mut self) {
        let pair = loop {
            let pair = domain_pair_at(self.domain_cursor);
            if !self.forward.contains_key(&pair) {
                break pair;
            }
            self.domain_cursor += 1;
        };
        let below =
            self.forward.range((Bound::Unbounded, Bound::Excluded(&pair))).next_back().map(|(_, &at)| &self.log[at].1);
        let above =
            self.forward.range((Bound::Excluded(&pair), Bound::Unbounded)).next().map(|(_, &at)| &self.log[at].1);
        let image = least_unit_between(below, above);
        self.record(pair, image);
    }

    fn step_back(&mut self) {
        let image = loop {
            let r = enum_unit_interval(EnumerationIndex::new(self.codomain_cursor).unwrap());
            if !self.backward.contains_key(&r) {
                break r;
            }
            self.codomain_cursor += 1;
        };
        let below = self
            .backward
            .range((Bound::Unbounded, Bound::Excluded(&image)))
            .next_back()
            .map(|(_, &at)| &self.log[at].0);
        let above =
            self.backward.range((Bound::Excluded(&image), Bound::Unbounded)).next().map(|(_, &at)| &self.log[at].0);
        let pair = least_domain_between(below, above);
        self.record(pair, image);
    }

    pub fn lookup_forward(&self, pair: &DomainPair) -> Option<&Rational> {
        self.forward.get(pair).map(|&at| &self.log[at].1)
    }

    pub fn lookup_backward(&self, r: &Rational) -> Option<&DomainPair> {
        self.backward.get(r).map(|&at| &self.log[at].0)
    }

    /// `f(pair)`, extending the memo as far as needed.
    pub fn iso_forward(&mut self, pair: &DomainPair) -> Result<Rational, OrderError> {
        loop {
            if let Some(r) = self.lookup_forward(pair) {
                return Ok(r.clone());
            }
            self.step()?;
        }
    }

    /// `f⁻¹(r)` for `r ∈ (0,1)`, extending the memo as far as needed.
    pub fn iso_backward(&mut self, r: &Rational) -> Result<DomainPair, OrderError> {
        if !r.in_unit_interval() {
            return Err(OrderError::OutsideUnitInterval(r.clone()));
        }
        loop {
            if let Some(p) = self.lookup_backward(r) {
                return Ok(p.clone());
            }
            self.step()?;
        }
    }
}

/// Least diagonal-order pair strictly between two lex bounds.
///
/// Everything strictly inside the gap is unmatched, so no matched check is
/// needed. Candidates: a first coordinate strictly between the bounds' first
/// coordinates (second coordinate `e_1 = 0`), or one of the bounds' own first
/// coordinates with the least admissible second coordinate.
fn least_domain_between(below: Option<&DomainPair>, above: Option<&DomainPair>) -> DomainPair {
    if let (Some((a1, b1)), Some((a2, b2))) = (below, above) {
        if a1 == a2 {
            return (a1.clone(), least_enum_between(Some(b1), Some(b2)));
        }
    }
    let mut candidates: Vec<DomainPair> = Vec::with_capacity(3);
    candidates.push((least_enum_between(below.map(|p| &p.0), above.map(|p| &p.0)), Rational::zero()));
    if let Some((a1, b1)) = below {
        candidates.push((a1.clone(), least_enum_between(Some(b1), None)));
    }
    if let Some((a2, b2)) = above {
        candidates.push((a2.clone(), least_enum_between(None, Some(b2))));
    }
    candidates.into_iter().min_by_key(diagonal_key).expect("at least one candidate")
}

/// A partition class, named by the first coordinate shared by its preimages.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub Rational);

impl ClassId {
    pub fn label(&self) -> &Rational {
        &self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P[{}]", self.0)
    }
}

impl fmt::Debug for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(P_i)`: the `i`-th class, labelled `enum_q(i)`.
pub fn class_enum(i: EnumerationIndex) -> ClassId {
    ClassId(enum_q(i))
}

/// Label order, which is the element-wise order of the classes.
pub fn class_compare(a: &ClassId, b: &ClassId) -> std::cmp::Ordering {
    a.0.cmp(&b.0)
}

/// A class strictly between `lower` and `upper` (label midpoint).
pub fn class_between(lower: &ClassId, upper: &ClassId) -> Result<ClassId, OrderError> {
    if lower >= upper {
        return Err(OrderError::NotIncreasing { lower: Box::new(lower.0.clone()), upper: Box::new(upper.0.clone()) });
    }
    Ok(ClassId(lower.0.midpoint(&upper.0)))
}

#[derive(Debug, Default)]
struct ClassScan {
    /// next codomain position to classify
    cursor: u64,
    members: HashMap<ClassId, Vec<Rational>>,
}

#[derive(Debug)]
struct PartitionState {
    iso: BackAndForthIso,
    scan: ClassScan,
    scan_limit: u64,
}

/// Shared handle on the lazily built partition of `(0,1) ∩ Q`.
///
/// Clones share one memo. Extension is serialized by a mutex; every query is
/// a pure function of the frozen construction, so sharing never changes an
/// answer.
#[derive(Clone, Debug)]
pub struct Partition {
    state: Arc<Mutex<PartitionState>>,
}

impl Default for Partition {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_LIMIT, DEFAULT_SCAN_LIMIT)
    }
}

impl Partition {
    pub fn new(step_limit: u64, scan_limit: u64) -> Self {
        Partition {
            state: Arc::new(Mutex::new(PartitionState {
                iso: BackAndForthIso::new(step_limit),
                scan: ClassScan { cursor: 1, ..Default::default() },
                scan_limit,
            })),
        }
    }

    pub fn iso_forward(&self, pair: &DomainPair) -> Result<Rational, OrderError> {
        self.state.lock().iso.iso_forward(pair)
    }

    pub fn iso_backward(&self, r: &Rational) -> Result<DomainPair, OrderError> {
        self.state.lock().iso.iso_backward(r)
    }

    /// Class containing `r ∈ (0,1)`.
    pub fn class_of(&self, r: &Rational) -> Result<ClassId, OrderError> {
        Ok(ClassId(self.iso_backward(r)?.0))
    }

    /// `class_of` for an arbitrary rational: `None` outside `(0,1)`.
    pub fn try_class_of(&self, r: &Rational) -> Result<Option<ClassId>, OrderError> {
        if r.in_unit_interval() {
            self.class_of(r).map(Some)
        } else {
            Ok(None)
        }
    }

    /// `f(label, enum_q(k))`: the `k`-th member of `class` by second coordinate.
    pub fn class_member(&self, class: &ClassId, k: EnumerationIndex) -> Result<Rational, OrderError> {
        self.iso_forward(&(class.0.clone(), enum_q(k)))
    }

    /// The `k`-th member (`k ≥ 1`) of `class` in `enum_unit_interval` order.
    ///
    /// Unlike [`Partition::class_member`], whose `k`-th element needs about
    /// `k²/2` back-and-forth steps, this costs a number of steps linear in
    /// `k` divided by the class's share of the codomain.
    pub fn scanned_member(&self, class: &ClassId, k: usize) -> Result<Rational, OrderError> {
        assert!(k >= 1, "members are counted from 1");
        let mut guard = self.state.lock();
        let st = &mut *guard;
        loop {
            if let Some(found) = st.scan.members.get(class).and_then(|m| m.get(k - 1)) {
                return Ok(found.clone());
            }
            if st.scan.cursor > st.scan_limit {
                return Err(OrderError::ScanBudget { limit: st.scan_limit });
            }
            let r = enum_unit_interval(EnumerationIndex::new(st.scan.cursor).unwrap());
            st.scan.cursor += 1;
            let label = st.iso.iso_backward(&r)?.0;
            st.scan.members.entry(ClassId(label)).or_default().push(r);
        }
    }

    /// Back-and-forth steps taken so far.
    pub fn steps(&self) -> u64 {
        self.state.lock().iso.steps()
    }

    /// Forces the memo to at least `n` steps.
    pub fn extend_to(&self, n: u64) -> Result<(), OrderError> {
        self.state.lock().iso.extend_to(n)
    }

    /// Copy of the first `n` matches (extending the memo if needed).
    pub fn matched_prefix(&self, n: usize) -> Result<Vec<(DomainPair, Rational)>, OrderError> {
        let mut st = self.state.lock();
        st.iso.extend_to(n as u64)?;
        Ok(st.iso.log()[..n].to_vec())
    }

    /// Stable description of the construction, for config digests.
    pub fn descriptor(&self) -> String {
        let st = self.state.lock();
        format!(
            "partition=back-and-forth(domain=cantor-diagonal(i+j,i),codomain=unit-calkin-wilf,steps<={},scan<={})",
            st.iso.step_limit(),
            st.scan_limit
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn idx(i: u64) -> EnumerationIndex {
        EnumerationIndex::new(i).unwrap()
    }

    #[test]
    fn diagonal_positions() {
        assert_eq!(domain_indices(1), (1, 1));
        assert_eq!(domain_indices(2), (1, 2));
        assert_eq!(domain_indices(3), (2, 1));
        assert_eq!(domain_indices(4), (1, 3));
        for d in 1..5000 {
            let (i, j) = domain_indices(d);
            assert_eq!(domain_position(i, j), d);
        }
        let big = domain_position(3_000_000_000, 7);
        assert_eq!(domain_indices(big), (3_000_000_000, 7));
    }

    #[test]
    fn first_steps_by_hand() {
        let mut iso = BackAndForthIso::default();
        iso.extend_to(4).unwrap();
        let log = iso.log();
        // forth: (0,0) gets the first unit element
        assert_eq!(log[0], ((q("0"), q("0")), q("1/2")));
        // back: 1/3 lies below (0,0); (0,-1) has key (4,1), (-1,0) has (4,3)
        assert_eq!(log[1], ((q("0"), q("-1")), q("1/3")));
        // forth: (0,1) lies above (0,0)
        assert_eq!(log[2], ((q("0"), q("1")), q("2/3")));
        // back: 1/4 lies below (0,-1); (-1,0) beats (0,-2)
        assert_eq!(log[3], ((q("-1"), q("0")), q("1/4")));
    }

    #[test]
    fn forward_backward_examples() {
        let p = Partition::default();
        assert_eq!(p.iso_forward(&(q("0"), q("0"))).unwrap(), q("1/2"));
        assert_eq!(p.iso_backward(&q("1/2")).unwrap(), (q("0"), q("0")));
        let pair = (q("1"), q("-1/2"));
        let img = p.iso_forward(&pair).unwrap();
        assert_eq!(p.iso_backward(&img).unwrap(), pair);
        let pre = p.iso_backward(&q("1/3")).unwrap();
        assert_eq!(p.iso_forward(&pre).unwrap(), q("1/3"));
        assert!(p.iso_forward(&(q("0"), q("0"))).unwrap() < p.iso_forward(&(q("0"), q("1"))).unwrap());
        assert!(matches!(p.iso_backward(&q("1")), Err(OrderError::OutsideUnitInterval(_))));
        assert!(matches!(p.class_of(&q("-1/3")), Err(OrderError::OutsideUnitInterval(_))));
    }

    #[test]
    fn backward_hits_several_labels() {
        let p = Partition::default();
        let labels: std::collections::BTreeSet<_> =
            (1..=100u64).map(|i| p.iso_backward(&enum_unit_interval(idx(i))).unwrap().0).collect();
        assert!(labels.len() >= 2);
    }

    #[test]
    fn class_examples() {
        let p = Partition::default();
        assert_eq!(p.class_of(&q("1/2")).unwrap(), ClassId(q("0")));
        assert_eq!(p.class_member(&ClassId(q("0")), idx(1)).unwrap(), q("1/2"));
        let c1 = ClassId(q("1"));
        let m = p.class_member(&c1, idx(3)).unwrap();
        assert_eq!(p.class_of(&m).unwrap(), c1);
        let c0 = ClassId(q("0"));
        assert_ne!(p.class_member(&c0, idx(1)).unwrap(), p.class_member(&c0, idx(2)).unwrap());
        for k in 1..=20u64 {
            for k2 in 1..=20u64 {
                if (k * 7 + k2) % 20 != 0 {
                    continue;
                }
                let lo = p.class_member(&c0, idx(k)).unwrap();
                let hi = p.class_member(&c1, idx(k2)).unwrap();
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn class_enum_and_between() {
        assert_eq!(class_enum(idx(1)), ClassId(q("0")));
        assert_eq!(class_enum(idx(2)), ClassId(q("1")));
        assert_eq!(class_enum(idx(6)), ClassId(q("2")));
        let (a, b) = (ClassId(q("0")), ClassId(q("1")));
        assert_eq!(class_compare(&a, &a), std::cmp::Ordering::Equal);
        assert_eq!(class_compare(&a, &b), std::cmp::Ordering::Less);
        assert_eq!(class_between(&a, &b).unwrap(), ClassId(q("1/2")));
        assert!(class_between(&b, &a).is_err());
        let mut seen = std::collections::HashSet::new();
        let mut hi = b.clone();
        for _ in 0..10 {
            let mid = class_between(&a, &hi).unwrap();
            assert!(a < mid && mid < hi);
            assert!(seen.insert(mid.clone()));
            hi = mid;
        }
    }

    #[test]
    fn scanned_members_follow_codomain_order() {
        let p = Partition::default();
        let c0 = ClassId(q("0"));
        let first = p.scanned_member(&c0, 1).unwrap();
        assert_eq!(first, q("1/2"));
        let mut prev_index = 0;
        for k in 1..=30 {
            let m = p.scanned_member(&c0, k).unwrap();
            assert_eq!(p.class_of(&m).unwrap(), c0);
            let i = crate::rational::unit_index_of(&m).unwrap().get();
            assert!(i > prev_index);
            prev_index = i;
        }
    }

    #[test]
    fn step_budget_is_reported() {
        let mut iso = BackAndForthIso::new(10);
        let far = (q("0"), enum_q(idx(50)));
        assert_eq!(iso.iso_forward(&far), Err(OrderError::StepBudget { limit: 10 }));
    }
}
