//! Bitset-backed world sets and binary relations.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::structure::World;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WorldSet(FixedBitSet);

impl WorldSet {
    pub fn empty(n: usize) -> Self {
        WorldSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert_range(..);
        WorldSet(s)
    }

    pub fn from_worlds(n: usize, ws: impl IntoIterator<Item = World>) -> Self {
        let mut s = WorldSet::empty(n);
        for w in ws {
            s.insert(w);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, w: World) {
        self.0.insert(w);
    }

    pub fn contains(&self, w: World) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        self.0.ones()
    }

    pub fn to_vec(&self) -> Vec<World> {
        self.iter().collect()
    }

    pub fn complement(&self) -> Self {
        let mut s = self.0.clone();
        s.toggle_range(..);
        WorldSet(s)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = self.0.clone();
        s.intersect_with(&other.0);
        WorldSet(s)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.0.clone();
        s.union_with(&other.0);
        WorldSet(s)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }
}

/// Binary relation over `0..n` stored as successor rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairSet {
    rows: Vec<FixedBitSet>,
}

impl PairSet {
    pub fn empty(n: usize) -> Self {
        PairSet { rows: vec![FixedBitSet::with_capacity(n); n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = PairSet::empty(n);
        for u in 0..n {
            r.insert(u, u);
        }
        r
    }

    pub fn full(n: usize) -> Self {
        let mut row = FixedBitSet::with_capacity(n);
        row.insert_range(..);
        PairSet { rows: vec![row; n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (World, World)>) -> Self {
        let mut r = PairSet::empty(n);
        for (u, v) in pairs {
            r.insert(u, v);
        }
        r
    }

    /// Pairs `(w, w)` for `w` in the set.
    pub fn diagonal_of(s: &WorldSet) -> Self {
        let mut r = PairSet::empty(s.universe());
        for w in s.iter() {
            r.insert(w, w);
        }
        r
    }

    pub fn universe(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, u: World, v: World) {
        self.rows[u].insert(v);
    }

    pub fn contains(&self, u: World, v: World) -> bool {
        self.rows[u].contains(v)
    }

    pub fn successors(&self, u: World) -> impl Iterator<Item = World> + '_ {
        self.rows[u].ones()
    }

    pub fn row(&self, u: World) -> &FixedBitSet {
        &self.rows[u]
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    /// Pairs in lexicographic world order.
    pub fn iter(&self) -> impl Iterator<Item = (World, World)> + '_ {
        self.rows.iter().enumerate().flat_map(|(u, r)| r.ones().map(move |v| (u, v)))
    }

    pub fn to_set(&self) -> BTreeSet<(World, World)> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a | b).collect();
        PairSet { rows }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a & b).collect();
        PairSet { rows }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let n = self.universe();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = FixedBitSet::with_capacity(n);
                for v in r.ones() {
                    out.union_with(&other.rows[v]);
                }
                out
            })
            .collect();
        PairSet { rows }
    }

    pub fn transpose(&self) -> Self {
        let mut t = PairSet::empty(self.universe());
        for (u, v) in self.iter() {
            t.insert(v, u);
        }
        t
    }

    /// Reflexive-transitive closure by repeated squaring.
    pub fn star(&self) -> Self {
        let mut closure = self.union(&PairSet::identity(self.universe()));
        loop {
            let next = closure.compose(&closure);
            if next == closure {
                return closure;
            }
            closure = next;
        }
    }

    /// Transitive closure with at least one step.
    pub fn plus(&self) -> Self {
        self.compose(&self.star())
    }

    pub fn domain(&self) -> WorldSet {
        WorldSet::from_worlds(
            self.universe(),
            self.rows.iter().enumerate().filter(|(_, r)| !r.is_clear()).map(|(u, _)| u),
        )
    }

    /// Worlds `w` with `(w, w)` in the relation.
    pub fn loops(&self) -> WorldSet {
        WorldSet::from_worlds(self.universe(), (0..self.universe()).filter(|&u| self.contains(u, u)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_of_chain() {
        let r = PairSet::from_pairs(3, [(0, 1), (1, 2)]);
        let expected: BTreeSet<_> = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)].into_iter().collect();
        assert_eq!(r.star().to_set(), expected);
        assert_eq!(r.plus().to_set(), [(0, 1), (1, 2), (0, 2)].into_iter().collect());
    }

    #[test]
    fn complement_and_domain() {
        let s = WorldSet::from_worlds(4, [1, 3]);
        assert_eq!(s.complement().to_vec(), vec![0, 2]);
        let r = PairSet::from_pairs(4, [(2, 0), (2, 1)]);
        assert_eq!(r.domain().to_vec(), vec![2]);
        assert_eq!(r.transpose().to_set(), [(0, 2), (1, 2)].into_iter().collect());
    }
}
