//! Exact tree decompositions of small graphs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{atomic_programs, reverse, Atom, ConjProgram, Expression, Node, Program, Var};
use crate::graph::{underlying_graphs, UGraph};

/// Largest vertex count accepted by the exact search.
pub const MAX_EXACT_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdError {
    #[error("graph has {0} vertices; exact tree decomposition supports at most 16")]
    TooLarge(usize),
    #[error("tree-width {found} exceeds the bound {bound}")]
    WidthExceeded { found: usize, bound: usize },
    #[error("no bag contains both root variables")]
    NoRootBag,
    #[error("conjunctive program is not connected")]
    Disconnected,
    #[error("conjunctive program contains a relation atom")]
    RelationAtom,
}

/// Rooted tree of bags over graph vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<usize>>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
    pub width: usize,
}

impl TreeDecomposition {
    pub fn single(bag: BTreeSet<usize>) -> Self {
        let width = bag.len().saturating_sub(1);
        TreeDecomposition { bags: vec![bag], parent: vec![None], root: 0, width }
    }

    pub fn children(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.bags.len()).filter(move |&c| self.parent[c] == Some(node))
    }

    /// Nodes listed so that every child precedes its parent.
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.bags.len());
        let mut stack = vec![(self.root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                order.push(n);
            } else {
                stack.push((n, true));
                stack.extend(self.children(n).map(|c| (c, false)));
            }
        }
        order
    }

    fn recompute_width(&mut self) {
        self.width = self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1);
    }

    /// Make `new_root` the root by reversing parent pointers along its root path.
    pub fn reroot(&mut self, new_root: usize) {
        let mut prev = None;
        let mut cur = Some(new_root);
        while let Some(c) = cur {
            let next = self.parent[c];
            self.parent[c] = prev;
            prev = Some(c);
            cur = next;
        }
        self.root = new_root;
    }

    /// Contracts every tree edge whose one bag contains the other.
    pub fn merge_redundant(&mut self) {
        let mut alive = vec![true; self.bags.len()];
        loop {
            let found = (0..self.bags.len()).find(|&i| {
                alive[i] && self.parent[i].is_some_and(|p| self.bags[i].is_subset(&self.bags[p]) || self.bags[p].is_subset(&self.bags[i]))
            });
            let Some(i) = found else { break };
            let p = self.parent[i].expect("non-root");
            let bag = std::mem::take(&mut self.bags[i]);
            self.bags[p].extend(bag);
            for c in 0..self.bags.len() {
                if self.parent[c] == Some(i) {
                    self.parent[c] = Some(p);
                }
            }
            self.parent[i] = None;
            alive[i] = false;
        }
        self.compact(&alive);
    }

    /// Drop nodes not reachable from the root and renumber the rest.
    fn compact(&mut self, alive: &[bool]) {
        let mut map = vec![usize::MAX; self.bags.len()];
        let mut bags = Vec::new();
        for (i, &a) in alive.iter().enumerate() {
            if a {
                map[i] = bags.len();
                bags.push(std::mem::take(&mut self.bags[i]));
            }
        }
        let parent = (0..alive.len())
            .filter(|&i| alive[i])
            .map(|i| self.parent[i].map(|p| map[p]))
            .collect();
        self.bags = bags;
        self.parent = parent;
        self.root = map[self.root];
        self.recompute_width();
    }
}

/// Size of the neighbourhood of the component of `v` in `G[s ∪ {v}]`, outside `s ∪ {v}`.
fn q_size(adj: &[u32], s: u32, v: usize) -> u32 {
    let inside = s | (1 << v);
    let mut reached = 1u32 << v;
    let mut frontier = reached;
    let mut border = 0u32;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[u];
        }
        border |= next & !inside;
        next &= s & !reached;
        reached |= next;
        frontier = next;
    }
    border.count_ones()
}

/// Optimal elimination ordering via the subset recurrence
/// `TW(S) = min_{v∈S} max(TW(S∖v), |Q(S∖v, v)|)`.
fn optimal_elimination_order(g: &UGraph) -> Vec<usize> {
    let n = g.len();
    let adj: Vec<u32> = (0..n).map(|u| g.neighbors(u).fold(0u32, |m, v| m | (1 << v))).collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut tw = vec![0u8; 1usize << n];
    let mut last = vec![0u8; 1usize << n];
    for s in 1..=full {
        let mut best = u8::MAX;
        let mut arg = 0u8;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = s & !(1 << v);
            let cost = tw[without as usize].max(q_size(&adj, without, v) as u8);
            if cost < best {
                best = cost;
                arg = v as u8;
            }
        }
        tw[s as usize] = best;
        last[s as usize] = arg;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = last[s as usize];
        order.push(v as usize);
        s &= !(1 << v);
    }
    order.reverse();
    order
}

/// Decomposition induced by eliminating vertices in `order`.
pub fn from_elimination_order(g: &UGraph, order: &[usize]) -> TreeDecomposition {
    let n = g.len();
    if n == 0 {
        return TreeDecomposition::single(BTreeSet::new());
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut fill: Vec<BTreeSet<usize>> = (0..n).map(|u| g.neighbors(u).collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (i, &v) in order.iter().enumerate() {
        let later: Vec<usize> = fill[v].iter().copied().filter(|&w| pos[w] > i).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    fill[a].insert(b);
                }
            }
        }
        if let Some(&next) = later.iter().min_by_key(|&&w| pos[w]) {
            parent[i] = Some(pos[next]);
        }
        bags.push(later.into_iter().chain([v]).collect::<BTreeSet<_>>());
    }
    let root = n - 1;
    for (i, p) in parent.iter_mut().enumerate() {
        if p.is_none() && i != root {
            *p = Some(root);
        }
    }
    let mut td = TreeDecomposition { bags, parent, root, width: 0 };
    td.recompute_width();
    td
}

/// Minimum-width decomposition of a graph with at most 16 vertices.
pub fn decompose(g: &UGraph) -> Result<TreeDecomposition, TdError> {
    if g.len() > MAX_EXACT_VERTICES {
        return Err(TdError::TooLarge(g.len()));
    }
    Ok(from_elimination_order(g, &optimal_elimination_order(g)))
}

pub fn treewidth(g: &UGraph) -> Result<usize, TdError> {
    decompose(g).map(|td| td.width)
}

/// Checks vertex cover, edge cover, connectedness of occurrences, tree shape and width.
pub fn validate(g: &UGraph, td: &TreeDecomposition) -> bool {
    let m = td.bags.len();
    if m == 0 || td.parent.len() != m || td.root >= m || td.parent[td.root].is_some() {
        return false;
    }
    // every node reaches the root without cycles
    for start in 0..m {
        let mut cur = start;
        let mut steps = 0;
        while let Some(p) = td.parent[cur] {
            if p >= m || steps > m {
                return false;
            }
            cur = p;
            steps += 1;
        }
        if cur != td.root {
            return false;
        }
    }
    if td.bags.iter().flatten().any(|&v| v >= g.len()) {
        return false;
    }
    let covered = |u: usize, v: usize| td.bags.iter().any(|b| b.contains(&u) && b.contains(&v));
    if !(0..g.len()).all(|v| covered(v, v)) {
        return false;
    }
    if !g.edges().into_iter().all(|(u, v)| covered(u, v)) {
        return false;
    }
    // occurrences of a vertex are connected iff exactly one occurrence has its parent outside
    for v in 0..g.len() {
        let tops = (0..m)
            .filter(|&i| td.bags[i].contains(&v))
            .filter(|&i| td.parent[i].is_none_or(|p| !td.bags[p].contains(&v)))
            .count();
        if tops != 1 {
            return false;
        }
    }
    let width = td.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1);
    width == td.width
}

/// Adds `Σ*(z1, z2)` atoms for every pair inside each bag of an optimal decomposition
/// of the full underlying graph, where `Σ` is the union of all atomic programs of `c`
/// and their converses. Returned bags index `Vars(c)` in name order.
pub fn clique_complete(c: &ConjProgram, n: usize) -> Result<(ConjProgram, TreeDecomposition), TdError> {
    if c.r_atoms().next().is_some() {
        return Err(TdError::RelationAtom);
    }
    let graphs = underlying_graphs(c);
    if !graphs.gc.is_connected() {
        return Err(TdError::Disconnected);
    }
    let td = decompose(&graphs.gfull)?;
    if td.width > n {
        return Err(TdError::WidthExceeded { found: td.width, bound: n });
    }
    let sigma = reachability_program(c);
    let mut atoms = c.atoms.clone();
    for bag in &td.bags {
        let vs: Vec<usize> = bag.iter().copied().collect();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                atoms.insert(Atom::p(sigma.clone(), graphs.vars[u].clone(), graphs.vars[v].clone()));
            }
        }
    }
    let completed = ConjProgram { atoms, source: c.source.clone(), target: c.target.clone() };
    Ok((completed, td))
}

/// `((∪a) ∪ (∪ā))*` over the atomic programs of `c`, or `eps` when there are none.
fn reachability_program(c: &ConjProgram) -> Program {
    let mut universal = false;
    Expression::Program(Program::conj(c.clone())).walk(&mut |n| {
        universal |= matches!(n, Node::Program(Program::Universal));
    });
    if universal {
        return Program::Universal;
    }
    let names = atomic_programs(&Program::conj(c.clone()).into());
    let forward = names.iter().map(|a| Program::atomic(a.clone()));
    let backward = names.iter().map(|a| reverse(&Program::atomic(a.clone())).expect("atomic"));
    match Program::union_all(forward.chain(backward)) {
        Some(sigma) => Program::star(sigma),
        None => Program::Epsilon,
    }
}

/// Re-roots at a bag containing both root vertices and contracts every bag that is a
/// subset of its parent, so no leaf is included in its parent.
pub fn normalize_rooted(
    td: &TreeDecomposition,
    root_pair: (usize, usize),
) -> Result<TreeDecomposition, TdError> {
    let (x, y) = root_pair;
    let root = (0..td.bags.len())
        .find(|&i| td.bags[i].contains(&x) && td.bags[i].contains(&y))
        .ok_or(TdError::NoRootBag)?;
    let mut out = td.clone();
    out.reroot(root);
    let mut alive = vec![true; out.bags.len()];
    loop {
        let victim = (0..out.bags.len()).find(|&i| {
            alive[i] && out.parent[i].is_some_and(|p| out.bags[i].is_subset(&out.bags[p]))
        });
        let Some(v) = victim else { break };
        let p = out.parent[v];
        for c in 0..out.bags.len() {
            if out.parent[c] == Some(v) {
                out.parent[c] = p;
            }
        }
        alive[v] = false;
        out.parent[v] = None;
    }
    out.compact(&alive);
    Ok(out)
}

/// Variables of `c` indexed like the bags returned by [`clique_complete`].
pub fn bag_vars(c: &ConjProgram, bag: &BTreeSet<usize>) -> BTreeSet<Var> {
    let vars: Vec<Var> = c.vars().into_iter().collect();
    bag.iter().map(|&i| vars[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> UGraph {
        let mut g = UGraph::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    #[test]
    fn small_widths() {
        assert_eq!(treewidth(&UGraph::complete(3)).unwrap(), 2);
        assert_eq!(treewidth(&path(3)).unwrap(), 1);
        assert_eq!(treewidth(&UGraph::new(1)).unwrap(), 0);
        assert_eq!(treewidth(&UGraph::complete(4)).unwrap(), 3);
    }

    #[test]
    fn too_large_is_rejected() {
        assert_eq!(decompose(&UGraph::new(17)), Err(TdError::TooLarge(17)));
    }

    #[test]
    fn validation_examples() {
        let k3 = UGraph::complete(3);
        assert!(validate(&k3, &TreeDecomposition::single(BTreeSet::from([0, 1, 2]))));
        let split = TreeDecomposition {
            bags: vec![BTreeSet::from([0, 1]), BTreeSet::from([1, 2])],
            parent: vec![None, Some(0)],
            root: 0,
            width: 1,
        };
        assert!(!validate(&k3, &split));
        let p = path(3);
        let gap = TreeDecomposition {
            bags: vec![BTreeSet::from([0, 1]), BTreeSet::from([1, 2]), BTreeSet::from([0])],
            parent: vec![None, Some(0), Some(1)],
            root: 0,
            width: 1,
        };
        assert!(!validate(&p, &gap));
    }

    #[test]
    fn normalization_collapses_chains() {
        let td = TreeDecomposition {
            bags: vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 1]), BTreeSet::from([0])],
            parent: vec![None, Some(0), Some(1)],
            root: 0,
            width: 1,
        };
        let out = normalize_rooted(&td, (0, 1)).unwrap();
        assert_eq!(out.bags, vec![BTreeSet::from([0, 1])]);
    }

    #[test]
    fn normalization_needs_root_bag() {
        let td = TreeDecomposition {
            bags: vec![BTreeSet::from([0, 1]), BTreeSet::from([1, 2])],
            parent: vec![None, Some(0)],
            root: 0,
            width: 1,
        };
        assert_eq!(normalize_rooted(&td, (0, 2)), Err(TdError::NoRootBag));
    }

    #[test]
    fn clique_completion_adds_pair_atoms() {
        let c = ConjProgram::new(
            [Atom::p(Program::atomic("a"), "x", "y"), Atom::p(Program::atomic("b"), "y", "z")],
            "x",
            "z",
        )
        .unwrap();
        let (cc, td) = clique_complete(&c, 2).unwrap();
        assert_eq!(td.width, 2);
        assert_eq!(cc.atoms.len(), 5);
        assert_eq!(cc.vars(), c.vars());
    }
}
