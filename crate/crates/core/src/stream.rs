//! The universal sequence `(n_i)` and the gap sequence `(a_i)`.
//!
//! Words (nonempty finite sequences of positive integers) are enumerated by
//! weight `length + sum`, ties broken lexicographically:
//! `(1), (2), (1,1), (3), (1,2), (2,1), (4), (1,1,1), …`. The stream is the
//! triangular concatenation `w_1 | w_1 w_2 | w_1 w_2 w_3 | …`, so word `w_t`
//! reappears in every block from `t` on.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;

/// Default prefix length the strategy may scan for one occurrence query.
pub const DEFAULT_OCCURRENCE_LIMIT: usize = 1 << 21;

/// Words of one weight in lexicographic order.
fn words_of_weight(weight: u32) -> Vec<Vec<u32>> {
    fn compositions(sum: u32, parts: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        // leave at least one for every remaining part
        for first in 1..=sum.saturating_sub(parts - 1) {
            prefix.push(first);
            compositions(sum - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for len in 1..weight {
        let sum = weight - len;
        if sum >= len {
            compositions(sum, len, &mut Vec::new(), &mut out);
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Default)]
struct WordSource {
    words: Vec<Vec<u32>>,
    next_weight: u32,
}

impl WordSource {
    fn word(&mut self, t: usize) -> &[u32] {
        if self.next_weight == 0 {
            self.next_weight = 2;
        }
        while self.words.len() <= t {
            let batch = words_of_weight(self.next_weight);
            self.words.extend(batch);
            self.next_weight += 1;
        }
        &self.words[t]
    }
}

#[derive(Debug, Default)]
struct OccurrenceMemo {
    /// starting positions (0-based) found so far, increasing
    found: Vec<usize>,
    /// next index into the anchor value's position list
    cursor: usize,
}

#[derive(Debug, Default)]
struct StreamState {
    words: WordSource,
    values: Vec<u32>,
    /// value -> 0-based positions in `values`
    positions: HashMap<u32, Vec<usize>>,
    /// block being emitted and how many of its words are out
    block: usize,
    block_word: usize,
    memo: HashMap<Vec<u32>, OccurrenceMemo>,
}

impl StreamState {
    fn push_word(&mut self) {
        let t = self.block_word;
        let word = self.words.word(t).to_vec();
        for v in word {
            self.positions.entry(v).or_default().push(self.values.len());
            self.values.push(v);
        }
        self.block_word += 1;
        if self.block_word > self.block {
            self.block += 1;
            self.block_word = 0;
        }
    }

    fn ensure_len(&mut self, len: usize) {
        while self.values.len() < len {
            self.push_word();
        }
    }

    /// m-th (1-based) occurrence of `word` whose successor lies below `limit`.
    fn occurrence(&mut self, word: &[u32], m: usize, limit: Option<usize>) -> Option<usize> {
        assert!(!word.is_empty() && m >= 1);
        let (anchor_at, &anchor) =
            word.iter().enumerate().max_by_key(|&(i, v)| (*v, std::cmp::Reverse(i))).expect("nonempty");
        let len = word.len();
        let mut memo = self.memo.remove(word).unwrap_or_default();
        let result = loop {
            if let Some(&start) = memo.found.get(m - 1) {
                break if limit.is_none_or(|l| start + len < l) { Some(start) } else { None };
            }
            let next_pos = self.positions.get(&anchor).and_then(|p| p.get(memo.cursor)).copied();
            let Some(p) = next_pos else {
                // grow the prefix geometrically until the anchor shows up again
                let target = (self.values.len() * 2).max(64);
                if let Some(l) = limit {
                    if self.values.len() >= l {
                        break None;
                    }
                    self.ensure_len(target.min(l));
                } else {
                    self.ensure_len(target);
                }
                continue;
            };
            if p < anchor_at {
                memo.cursor += 1;
                continue;
            }
            let start = p - anchor_at;
            if let Some(l) = limit {
                if start + len >= l {
                    break None;
                }
            }
            self.ensure_len(start + len + 1);
            if self.values[start..start + len] == *word {
                memo.found.push(start);
            }
            memo.cursor += 1;
        };
        self.memo.insert(word.to_vec(), memo);
        result
    }
}

/// Shared, lazily materialized universal sequence.
///
/// Clones share one cache; every answer is a pure function of its arguments.
#[derive(Clone, Debug, Default)]
pub struct UniversalStream {
    state: Arc<Mutex<StreamState>>,
}

impl UniversalStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n_i` for `i ≥ 1`.
    pub fn stream_at(&self, i: usize) -> u32 {
        assert!(i >= 1, "stream positions start at 1");
        let mut st = self.state.lock();
        st.ensure_len(i);
        st.values[i - 1]
    }

    /// The first `n` values.
    pub fn prefix(&self, n: usize) -> Vec<u32> {
        let mut st = self.state.lock();
        st.ensure_len(n);
        st.values[..n].to_vec()
    }

    /// The `t`-th word (`t ≥ 1`) of the word enumeration.
    pub fn word(&self, t: usize) -> Vec<u32> {
        assert!(t >= 1);
        self.state.lock().words.word(t - 1).to_vec()
    }

    /// Value right after the `m`-th occurrence of `word` as a consecutive
    /// subsequence. Occurrences are counted at every starting position,
    /// overlapping ones included.
    ///
    /// Always terminates, but words with large entries occur astronomically
    /// late; see [`UniversalStream::occurrence_next_within`].
    pub fn occurrence_next(&self, word: &[u32], m: usize) -> u32 {
        let at = self.occurrence_start(word, m);
        self.stream_at(at + word.len())
    }

    /// 1-based starting position of the `m`-th occurrence.
    pub fn occurrence_start(&self, word: &[u32], m: usize) -> usize {
        let start = self.state.lock().occurrence(word, m, None).expect("unbounded search");
        start + 1
    }

    /// Like [`UniversalStream::occurrence_next`], restricted to the first
    /// `limit` stream values (the successor included); `None` if the `m`-th
    /// occurrence does not finish inside that prefix.
    pub fn occurrence_next_within(&self, word: &[u32], m: usize, limit: usize) -> Option<u32> {
        let mut st = self.state.lock();
        let start = st.occurrence(word, m, Some(limit))?;
        Some(st.values[start + word.len()])
    }

    pub fn descriptor(&self) -> &'static str {
        "stream=triangular(weight=len+sum,then-lex)"
    }
}

/// `a_i` for `i ≥ 1`: the triangular sequence `1, 1,2, 1,2,3, …`.
pub fn gap_at(i: u64) -> u64 {
    assert!(i >= 1, "gap positions start at 1");
    // largest t with t(t+1)/2 < i
    let mut t = (((8 * i as u128) as f64).sqrt() as u64) / 2;
    while (t as u128) * (t as u128 + 1) / 2 >= i as u128 {
        t -= 1;
    }
    while ((t + 1) as u128) * ((t + 2) as u128) / 2 < i as u128 {
        t += 1;
    }
    i - t * (t + 1) / 2
}
