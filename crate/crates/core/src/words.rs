//! Words: nonempty finite multisets of `(x, y)` pairs, concatenated by `gamma`.
//!
//! Storing words as sorted multisets quotients away the permutation rule
//! structurally. The sorted pair list is the canonical linearization.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::carrier::{Carrier, Elem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pair {
    pub x: Elem,
    pub y: Elem,
}

impl Pair {
    pub fn new(x: Elem, y: Elem) -> Self {
        Pair { x, y }
    }
}

/// A nonempty multiset of pairs kept in canonical (sorted) order.
///
/// Words order by size first, then lexicographically by canonical
/// linearization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<Pair>);

impl Word {
    pub fn new(mut pairs: Vec<Pair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Invalid(
                "words must contain at least one pair".into(),
            ));
        }
        pairs.sort_unstable();
        Ok(Word(pairs))
    }

    pub fn singleton(x: Elem, y: Elem) -> Self {
        Word(vec![Pair { x, y }])
    }

    /// Builds a word from `(x, y)` tuples. Panics on an empty slice.
    pub fn from_tuples(pairs: &[(Elem, Elem)]) -> Self {
        Word::new(pairs.iter().map(|&(x, y)| Pair { x, y }).collect()).expect("nonempty word")
    }

    /// Caller guarantees `pairs` is sorted and nonempty.
    pub(crate) fn from_sorted(pairs: Vec<Pair>) -> Self {
        debug_assert!(!pairs.is_empty() && pairs.windows(2).all(|w| w[0] <= w[1]));
        Word(pairs)
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; words are nonempty.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    /// Multiset union.
    pub fn gamma(&self, other: &Word) -> Word {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Word(out)
    }

    /// Multiplicity of a pair.
    pub fn count(&self, p: Pair) -> usize {
        self.0.iter().filter(|&&q| q == p).count()
    }

    pub fn has_duplicates(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == w[1])
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "({},{})", p.x, p.y)?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|p| [p.x, p.y]))
    }
}

/// Default ceiling on the number of enumerated words.
pub const DEFAULT_MAX_WORDS: usize = 2_000_000;

/// The pair of carriers that words range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpace {
    x: Arc<Carrier>,
    y: Arc<Carrier>,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl WordSpace {
    pub fn new(x: Arc<Carrier>, y: Arc<Carrier>) -> Self {
        WordSpace { x, y }
    }

    pub fn x(&self) -> &Arc<Carrier> {
        &self.x
    }

    pub fn y(&self) -> &Arc<Carrier> {
        &self.y
    }

    /// Number of distinct pairs `|X| * |Y|`.
    pub fn pair_count(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.pairs()
            .iter()
            .all(|p| (p.x as usize) < self.x.len() && (p.y as usize) < self.y.len())
    }

    fn check(&self, w: &Word) -> Result<()> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(Error::CarrierMismatch(format!(
                "word {w} is not over {} × {}",
                self.x, self.y
            )))
        }
    }

    /// `gamma` with a carrier check on both operands.
    pub fn gamma(&self, w1: &Word, w2: &Word) -> Result<Word> {
        self.check(w1)?;
        self.check(w2)?;
        Ok(w1.gamma(w2))
    }

    /// Number of words of size `1..=bound`: `Σ_k C(P + k - 1, k)` with `P = |X||Y|`.
    /// `None` on overflow.
    pub fn count_words(&self, bound: usize) -> Option<u128> {
        let p = self.pair_count() as u128;
        (1..=bound as u128).try_fold(0u128, |acc, k| acc.checked_add(binomial(p + k - 1, k)?))
    }

    /// All words of size `1..=bound`, strictly increasing in canonical order.
    pub fn enumerate(&self, bound: usize, max_words: usize) -> Result<Vec<Word>> {
        if bound == 0 {
            return Err(Error::InvalidSize("word bound must be at least 1".into()));
        }
        let needed = self.count_words(bound).unwrap_or(u128::MAX);
        if needed > max_words as u128 {
            return Err(Error::ResourceLimit {
                what: "word universe",
                needed,
                limit: max_words as u128,
            });
        }
        let ny = self.y.len();
        let pairs: Vec<Pair> = (0..self.pair_count())
            .map(|i| Pair {
                x: (i / ny) as Elem,
                y: (i % ny) as Elem,
            })
            .collect();
        let np = pairs.len();
        let mut out = Vec::with_capacity(needed as usize);
        for k in 1..=bound {
            // nondecreasing index sequences of length k, in lexicographic order
            let mut idx = vec![0usize; k];
            loop {
                out.push(Word::from_sorted(idx.iter().map(|&i| pairs[i]).collect()));
                let Some(pos) = (0..k).rev().find(|&i| idx[i] + 1 < np) else {
                    break;
                };
                let v = idx[pos] + 1;
                idx[pos..].iter_mut().for_each(|e| *e = v);
            }
        }
        Ok(out)
    }

    /// Parses `(x,y)+(x',y')` using carrier labels.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let mut pairs = Vec::new();
        for part in text.split('+') {
            let part = part.trim();
            let inner = part
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected `(x,y)`, found `{part}`")))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected `(x,y)`, found `{part}`")))?;
            let (a, b) = (a.trim(), b.trim());
            let x = self
                .x
                .index_of(a)
                .ok_or_else(|| Error::Parse(format!("`{a}` is not an element of X")))?;
            let y = self
                .y
                .index_of(b)
                .ok_or_else(|| Error::Parse(format!("`{b}` is not an element of Y")))?;
            pairs.push(Pair { x, y });
        }
        Word::new(pairs)
    }

    /// Canonical textual form using carrier labels.
    pub fn format(&self, w: &Word) -> String {
        w.pairs()
            .iter()
            .map(|p| format!("({},{})", self.x.label(p.x), self.y.label(p.y)))
            .collect::<Vec<_>>()
            .join("+")
    }
}
