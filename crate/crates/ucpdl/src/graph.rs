//! Simple undirected graphs with optional size-1 edges.

use std::collections::{BTreeSet, VecDeque};

use crate::ast::{ConjProgram, Var};

/// Undirected graph on vertices `0..n`; `loops` holds size-1 edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UGraph {
    adj: Vec<BTreeSet<usize>>,
    loops: BTreeSet<usize>,
}

impl UGraph {
    pub fn new(n: usize) -> Self {
        UGraph { adj: vec![BTreeSet::new(); n], loops: BTreeSet::new() }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = UGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            self.loops.insert(u);
        } else {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            self.loops.contains(&u)
        } else {
            self.adj[u].contains(&v)
        }
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().copied()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// Edges `(u, v)` with `u <= v`; `u == v` marks a size-1 edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
            .chain(self.loops.iter().map(|&u| (u, u)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Breadth-first distances from `src`; `None` marks unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component index per vertex, numbered in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for s in 0..self.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            for (v, d) in self.bfs(s).into_iter().enumerate() {
                if d.is_some() {
                    comp[v] = next;
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

/// Underlying graphs of a conjunctive program over its variables in name order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjGraphs {
    pub vars: Vec<Var>,
    /// Co-occurrence graph of the atoms.
    pub gc: UGraph,
    /// `gc` plus the edge between source and target.
    pub gfull: UGraph,
}

impl ConjGraphs {
    pub fn index(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search(v).ok()
    }
}

pub fn underlying_graphs(c: &ConjProgram) -> ConjGraphs {
    let vars: Vec<Var> = c.vars().into_iter().collect();
    let idx = |v: &Var| vars.binary_search(v).expect("atom variable");
    let mut gc = UGraph::new(vars.len());
    for atom in &c.atoms {
        let vs: Vec<usize> = atom.vars().into_iter().map(idx).collect();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                gc.add_edge(u, v);
            }
        }
    }
    let mut gfull = gc.clone();
    gfull.add_edge(idx(&c.source), idx(&c.target));
    ConjGraphs { vars, gc, gfull }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Atom, Program};

    #[test]
    fn single_atom_graphs_coincide() {
        let c = ConjProgram::new([Atom::p(Program::atomic("a"), "x", "y")], "x", "y").unwrap();
        let g = underlying_graphs(&c);
        assert_eq!(g.gc.edges(), vec![(0, 1)]);
        assert_eq!(g.gc, g.gfull);
    }

    #[test]
    fn gfull_adds_source_target_edge() {
        let c = ConjProgram::new(
            [Atom::p(Program::atomic("a"), "x", "y"), Atom::p(Program::atomic("b"), "y", "z")],
            "x",
            "z",
        )
        .unwrap();
        let g = underlying_graphs(&c);
        assert_eq!(g.gc.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.gfull.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn self_atom_gives_size_one_edge() {
        let c = ConjProgram::new([Atom::p(Program::atomic("a"), "x", "x")], "x", "x").unwrap();
        let g = underlying_graphs(&c);
        assert_eq!(g.gc.edges(), vec![(0, 0)]);
    }

    #[test]
    fn components_and_distances() {
        let mut g = UGraph::new(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        assert_eq!(g.bfs(0), vec![Some(0), Some(1), Some(2), None]);
        assert_eq!(g.components(), vec![0, 0, 0, 1]);
        assert!(!g.is_connected());
    }
}
