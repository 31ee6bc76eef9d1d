//! A compact, canonically ordered set of edge indices.

use std::fmt;

use crate::model::EdgeIx;

const BITS: usize = u64::BITS as usize;

/// Set of edges backed by a bit vector.
///
/// Trailing zero words are always trimmed, so two sets with the same members
/// compare and hash equal regardless of how they were built. Iteration is in
/// ascending index order, which is the canonical edge order of the owning graph.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet {
    words: Vec<u64>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set `{0, .., len - 1}`.
    pub fn full(len: usize) -> Self {
        (0..len).map(EdgeIx).collect()
    }

    pub fn contains(&self, edge: EdgeIx) -> bool {
        self.words
            .get(edge.0 / BITS)
            .is_some_and(|w| w & (1 << (edge.0 % BITS)) != 0)
    }

    /// Returns true if the edge was not already present.
    pub fn insert(&mut self, edge: EdgeIx) -> bool {
        let word = edge.0 / BITS;
        if word >= self.words.len() {
            self.words.resize(word + 1, 0);
        }
        let mask = 1 << (edge.0 % BITS);
        let fresh = self.words[word] & mask == 0;
        self.words[word] |= mask;
        fresh
    }

    /// Returns true if the edge was present.
    pub fn remove(&mut self, edge: EdgeIx) -> bool {
        let word = edge.0 / BITS;
        let Some(w) = self.words.get_mut(word) else {
            return false;
        };
        let mask = 1 << (edge.0 % BITS);
        let present = *w & mask != 0;
        *w &= !mask;
        self.trim();
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeIx> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(EdgeIx(i * BITS + bit))
            })
        })
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, o) in words.iter_mut().zip(&short.words) {
            *w |= o;
        }
        EdgeSet { words }
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = EdgeSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        };
        out.trim();
        out
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = EdgeSet {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        };
        out.trim();
        out
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Largest member, if any.
    pub fn last(&self) -> Option<EdgeIx> {
        let last = *self.words.last()?;
        Some(EdgeIx(
            (self.words.len() - 1) * BITS + (BITS - 1 - last.leading_zeros() as usize),
        ))
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<EdgeIx> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = EdgeIx>>(iter: I) -> Self {
        let mut set = EdgeSet::new();
        for e in iter {
            set.insert(e);
        }
        set
    }
}

impl Extend<EdgeIx> for EdgeSet {
    fn extend<I: IntoIterator<Item = EdgeIx>>(&mut self, iter: I) {
        for e in iter {
            self.insert(e);
        }
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}
