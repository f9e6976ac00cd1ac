//! Two-colourings of the rationals: the index colouring with no monochromatic
//! copy of `Q`, and the budgeted search for a monochromatic subset across
//! partition classes.

use std::collections::VecDeque;
use std::fmt;

use crate::dense::{ClassId, Partition};
use crate::error::OrderError;
use crate::rational::{enum_q, EnumerationIndex, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Colour {
    Red,
    Blue,
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colour::Red => "red",
            Colour::Blue => "blue",
        })
    }
}

/// Blue iff the value order of `(e_i, e_j)` agrees with the index order.
/// `None` when `i = j`.
pub fn index_colouring(i: EnumerationIndex, j: EnumerationIndex) -> Option<Colour> {
    if i == j {
        return None;
    }
    let (qi, qj) = (enum_q(i), enum_q(j));
    Some(if (qi < qj) == (i < j) { Colour::Blue } else { Colour::Red })
}

/// Longest strictly increasing subsequence, by patience sorting.
pub fn longest_increasing<T: Ord>(xs: &[T]) -> usize {
    let mut tails: Vec<&T> = Vec::new();
    for x in xs {
        let at = tails.partition_point(|t| *t < x);
        if at == tails.len() {
            tails.push(x);
        } else {
            tails[at] = x;
        }
    }
    tails.len()
}

/// Longest strictly decreasing subsequence.
pub fn longest_decreasing<T: Ord>(xs: &[T]) -> usize {
    let rev: Vec<std::cmp::Reverse<&T>> = xs.iter().map(std::cmp::Reverse).collect();
    longest_increasing(&rev)
}

/// Largest clique among `e_1..e_n` monochromatic in `colour` under the index
/// colouring: blue cliques are increasing runs, red ones decreasing.
pub fn max_mono_clique_prefix(n: u64, colour: Colour) -> usize {
    assert!(n >= 1, "prefix must be nonempty");
    let values: Vec<Rational> = (1..=n).map(|i| enum_q(EnumerationIndex::new(i).unwrap())).collect();
    match colour {
        Colour::Blue => longest_increasing(&values),
        Colour::Red => longest_decreasing(&values),
    }
}

/// Exhaustive maximum monochromatic clique among `e_1..e_n` (`n ≤ 20`).
pub fn brute_force_mono_clique(n: u64, colour: Colour) -> usize {
    assert!((1..=20).contains(&n), "brute force is limited to 20 vertices");
    let n = n as usize;
    let same: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = index_colouring(
                        EnumerationIndex::new(i as u64 + 1).unwrap(),
                        EnumerationIndex::new(j as u64 + 1).unwrap(),
                    );
                    c == Some(colour)
                })
                .collect()
        })
        .collect();
    (1u32..1 << n)
        .filter(|&mask| {
            let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            members.iter().enumerate().all(|(a, &i)| members[a + 1..].iter().all(|&j| same[i][j]))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// A colouring of single rationals.
pub trait VertexColouring {
    fn name(&self) -> String;
    fn colour(&self, r: &Rational) -> Colour;
}

pub struct AllBlue;
pub struct AllRed;
/// Red iff the denominator is odd.
pub struct DenominatorParity;

impl VertexColouring for AllBlue {
    fn name(&self) -> String {
        "all-blue".into()
    }
    fn colour(&self, _: &Rational) -> Colour {
        Colour::Blue
    }
}

impl VertexColouring for AllRed {
    fn name(&self) -> String {
        "all-red".into()
    }
    fn colour(&self, _: &Rational) -> Colour {
        Colour::Red
    }
}

impl VertexColouring for DenominatorParity {
    fn name(&self) -> String {
        "denominator-parity".into()
    }
    fn colour(&self, r: &Rational) -> Colour {
        if r.denom().bit(0) {
            Colour::Red
        } else {
            Colour::Blue
        }
    }
}

/// The first `count` labels of the breadth-first midpoint tree: root 0,
/// children `x-1` / `x+1` on unbounded sides and midpoints otherwise. Every
/// pair of labels from levels `0..=d` has a label strictly between it on
/// level `d+1`.
pub fn dense_pattern_labels(count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut queue: VecDeque<(Rational, Option<Rational>, Option<Rational>)> = VecDeque::new();
    queue.push_back((Rational::zero(), None, None));
    while out.len() < count {
        let (x, lo, hi) = queue.pop_front().expect("the tree is infinite");
        let left = match &lo {
            Some(l) => l.midpoint(&x),
            None => &x - &Rational::one(),
        };
        let right = match &hi {
            Some(h) => x.midpoint(h),
            None => &x + &Rational::one(),
        };
        queue.push_back((left, lo, Some(x.clone())));
        queue.push_back((right, Some(x.clone()), hi));
        out.push(x);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseCase {
    /// Some class showed no red member within the budget; its blue members
    /// are returned. Certified only relative to the budget.
    AllBlueClass,
    /// Every chosen class had a red member; one red member per class.
    RedInEveryClass,
}

impl DenseCase {
    pub fn tag(self) -> &'static str {
        match self {
            DenseCase::AllBlueClass => "case 1",
            DenseCase::RedInEveryClass => "case 2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSubset {
    pub case: DenseCase,
    pub colour: Colour,
    pub elements: Vec<Rational>,
    /// Class label of each element.
    pub classes: Vec<ClassId>,
}

/// The budget did not certify either case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inconclusive {
    pub reason: String,
}

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inconclusive: {}", self.reason)
    }
}

/// Looks for `count` elements of one colour spread as a dense pattern over
/// partition classes, scanning at most `budget` members per class.
pub fn mono_dense_subset(
    oracle: &dyn VertexColouring,
    partition: &Partition,
    count: usize,
    budget: usize,
) -> Result<Result<DenseSubset, Inconclusive>, OrderError> {
    assert!(count >= 1, "count must be positive");
    let labels = dense_pattern_labels(count);
    let mut reds = Vec::with_capacity(count);
    for label in &labels {
        let class = ClassId(label.clone());
        let mut found = None;
        let mut scanned = Vec::new();
        for k in 1..=budget {
            let r = partition.scanned_member(&class, k)?;
            if oracle.colour(&r) == Colour::Red {
                found = Some(r);
                break;
            }
            scanned.push(r);
        }
        match found {
            Some(r) => reds.push((r, class)),
            None => {
                if scanned.len() < count {
                    return Ok(Err(Inconclusive {
                        reason: format!(
                            "{class} has no red member among {budget} scanned, but fewer than {count} blue ones were seen"
                        ),
                    }));
                }
                scanned.truncate(count);
                return Ok(Ok(DenseSubset {
                    case: DenseCase::AllBlueClass,
                    colour: Colour::Blue,
                    classes: vec![class; count],
                    elements: scanned,
                }));
            }
        }
    }
    let (elements, classes) = reds.into_iter().unzip();
    Ok(Ok(DenseSubset { case: DenseCase::RedInEveryClass, colour: Colour::Red, elements, classes }))
}
