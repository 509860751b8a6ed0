//! Front-end reductions for satisfiability: unnested form, r-atom and
//! universal-program elimination, path splitting and the tree-shape
//! translation of conjunctive programs into ICPDL.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::convert::Infallible;

use thiserror::Error;

use crate::ast::{atomic_programs, reverse, walk_program, Atom, ConjProgram, Expression, Formula, Name, Node, Program, Var};
use crate::graph::UGraph;
use crate::par;
use crate::translate::{Fresh, Rewrite};

/// Cap on the number of tuples produced by [`k_split`].
pub const DEFAULT_SPLIT_CAP: usize = 100_000;
/// Cap on the number of (tree, split choice) candidates examined by [`tree_translate`].
pub const DEFAULT_SHAPE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("enumeration exceeds the cap of {0}")]
    BlowupExceeded(usize),
    #[error("input is not supported: {0}")]
    Unsupported(String),
}

/// Replaces every non-atomic test nested inside another test by a fresh
/// proposition, conjoining `!<U;((p & !ψ) + (!p & ψ))?>` for each one.
pub fn unnested_form(f: &Formula) -> Formula {
    let mut u = Unnester::default();
    let body = u.formula(f, false);
    let patches = u.order.into_iter().map(|(psi, p)| {
        let p = Formula::Prop(p);
        let differ = Formula::or(
            Formula::and(p.clone(), Formula::not(psi.clone())),
            Formula::and(Formula::not(p), psi),
        );
        Formula::not(Formula::diamond(Program::compose(Program::Universal, Program::test(differ))))
    });
    Formula::and_all(std::iter::once(body).chain(patches))
}

#[derive(Default)]
struct Unnester {
    fresh: Fresh,
    names: HashMap<Formula, Name>,
    order: Vec<(Formula, Name)>,
}

impl Unnester {
    fn formula(&mut self, f: &Formula, nested: bool) -> Formula {
        match f {
            Formula::Prop(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.formula(g, nested)),
            Formula::And(l, r) => Formula::and(self.formula(l, nested), self.formula(r, nested)),
            Formula::Diamond(p) => Formula::diamond(self.program(p, nested)),
            Formula::Loop(p) => Formula::loop_of(self.program(p, nested)),
        }
    }

    fn program(&mut self, p: &Program, nested: bool) -> Program {
        match p {
            Program::Epsilon | Program::Universal | Program::Atomic(_) | Program::Converse(_) => p.clone(),
            Program::Union(l, r) => Program::union(self.program(l, nested), self.program(r, nested)),
            Program::Compose(l, r) => Program::compose(self.program(l, nested), self.program(r, nested)),
            Program::Intersect(l, r) => Program::intersect(self.program(l, nested), self.program(r, nested)),
            Program::Star(q) => Program::star(self.program(q, nested)),
            Program::Test(g) => {
                let g = self.formula(g, true);
                if !nested || matches!(g, Formula::Prop(_)) {
                    return Program::test(g);
                }
                let name = match self.names.get(&g) {
                    Some(n) => n.clone(),
                    None => {
                        let n = self.fresh.var("p");
                        self.names.insert(g.clone(), n.clone());
                        self.order.push((g, n.clone()));
                        n
                    }
                };
                Program::test(Formula::Prop(name))
            }
            Program::Conj(c) => {
                let atoms = c
                    .atoms
                    .iter()
                    .map(|a| match a {
                        Atom::P { program, x, y } => Atom::p(self.program(program, nested), x.clone(), y.clone()),
                        Atom::R { .. } => a.clone(),
                    })
                    .collect();
                Program::conj(ConjProgram { atoms, source: c.source.clone(), target: c.target.clone() })
            }
        }
    }
}

/// Replaces each r-atom `R(x1..xn)` by `R^[i](z, xi)` with a fresh `z`;
/// the programs `R^[i]` are fresh once per relation name.
pub fn remove_r_atoms(e: &Expression) -> Expression {
    let mut r = RAtoms::default();
    match e {
        Expression::Formula(f) => Expression::Formula(unwrap(r.formula(f))),
        Expression::Program(p) => Expression::Program(unwrap(r.program(p))),
    }
}

fn unwrap<T>(r: Result<T, Infallible>) -> T {
    match r {
        Ok(t) => t,
        Err(e) => match e {},
    }
}

#[derive(Default)]
struct RAtoms {
    fresh: Fresh,
    stems: BTreeMap<Name, Var>,
}

impl Rewrite for RAtoms {
    type Error = Infallible;

    fn on_loop(&mut self, p: Program) -> Result<Formula, Infallible> {
        Ok(Formula::loop_of(p))
    }

    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, Infallible> {
        Ok(Program::intersect(l, r))
    }

    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, Infallible> {
        let mut atoms = BTreeSet::new();
        for a in c.atoms {
            match a {
                Atom::P { .. } => {
                    atoms.insert(a);
                }
                Atom::R { relation, args } => {
                    let z = self.fresh.var("z");
                    let stem = match self.stems.get(&relation) {
                        Some(s) => s.clone(),
                        None => {
                            let s = self.fresh.var(relation.as_str());
                            self.stems.insert(relation.clone(), s.clone());
                            s
                        }
                    };
                    for (i, x) in args.into_iter().enumerate() {
                        let name = Name::from(format!("{stem}_{}", i + 1));
                        atoms.insert(Atom::p(Program::Atomic(name), z.clone(), x));
                    }
                }
            }
        }
        Ok(Program::conj(ConjProgram { atoms, source: c.source, target: c.target }))
    }
}

/// Replaces `U` by `(a0 + a1 + ... + -a0 + -a1 + ...)*` over the atomic
/// programs of `e` and a fresh `a0`.
pub fn remove_universal(e: &Expression) -> Expression {
    let mut letters: Vec<Name> = vec![Name::new("$a0")];
    letters.extend(atomic_programs(e));
    let steps = letters
        .iter()
        .map(|a| Program::Atomic(a.clone()))
        .chain(letters.iter().map(|a| Program::Converse(a.clone())));
    let mut r = NoUniversal { replacement: Program::star(Program::union_all(steps).expect("a0 is present")) };
    match e {
        Expression::Formula(f) => Expression::Formula(unwrap(r.formula(f))),
        Expression::Program(p) => Expression::Program(unwrap(r.program(p))),
    }
}

struct NoUniversal {
    replacement: Program,
}

impl Rewrite for NoUniversal {
    type Error = Infallible;

    fn on_loop(&mut self, p: Program) -> Result<Formula, Infallible> {
        Ok(Formula::loop_of(p))
    }

    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, Infallible> {
        Ok(Program::intersect(l, r))
    }

    fn on_universal(&mut self) -> Result<Program, Infallible> {
        Ok(self.replacement.clone())
    }

    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, Infallible> {
        Ok(Program::conj(c))
    }
}

fn compose(l: Program, r: Program) -> Program {
    match (&l, &r) {
        (Program::Epsilon, _) => r,
        (_, Program::Epsilon) => l,
        _ => Program::compose(l, r),
    }
}

fn check_icpdl(p: &Program) -> Result<(), SatError> {
    let mut bad = None;
    walk_program(p, &mut |n| match n {
        Node::Program(Program::Universal) => bad = Some("the universal program"),
        Node::Program(Program::Conj(_)) => bad = Some("a conjunctive program"),
        _ => {}
    });
    match bad {
        Some(what) => Err(SatError::Unsupported(format!("ICPDL program expected, found {what}"))),
        None => Ok(()),
    }
}

/// Memoized splitter for ICPDL programs.
struct Splitter {
    cap: usize,
    two: HashMap<Program, BTreeSet<(Program, Program)>>,
}

impl Splitter {
    fn new(cap: usize) -> Self {
        Splitter { cap, two: HashMap::new() }
    }

    fn guard<T>(&self, s: &BTreeSet<T>) -> Result<(), SatError> {
        if s.len() > self.cap {
            Err(SatError::BlowupExceeded(self.cap))
        } else {
            Ok(())
        }
    }

    fn split2(&mut self, p: &Program) -> Result<BTreeSet<(Program, Program)>, SatError> {
        if let Some(s) = self.two.get(p) {
            return Ok(s.clone());
        }
        let mut out = BTreeSet::new();
        match p {
            Program::Epsilon | Program::Atomic(_) | Program::Converse(_) | Program::Test(_) => {
                out.insert((p.clone(), Program::Epsilon));
                out.insert((Program::Epsilon, p.clone()));
            }
            Program::Compose(l, r) => {
                for (a, b) in self.split2(l)? {
                    out.insert((a, compose(b, (**r).clone())));
                }
                for (a, b) in self.split2(r)? {
                    out.insert((compose((**l).clone(), a), b));
                }
            }
            Program::Union(l, r) => {
                out.extend(self.split2(l)?);
                out.extend(self.split2(r)?);
            }
            Program::Intersect(l, r) => {
                let right = self.split2(r)?;
                for (a1, b1) in self.split2(l)? {
                    for (a2, b2) in &right {
                        out.insert((Program::intersect(a1.clone(), a2.clone()), Program::intersect(b1.clone(), b2.clone())));
                    }
                    self.guard(&out)?;
                }
            }
            Program::Star(q) => {
                out.insert((p.clone(), p.clone()));
                for (a, b) in self.split2(q)? {
                    let trivial = (a == **q && b == Program::Epsilon) || (a == Program::Epsilon && b == **q);
                    if !trivial {
                        out.insert((compose(p.clone(), a), compose(b, p.clone())));
                    }
                }
            }
            Program::Universal | Program::Conj(_) => return Err(check_icpdl(p).unwrap_err()),
        }
        self.guard(&out)?;
        self.two.insert(p.clone(), out.clone());
        Ok(out)
    }

    fn split(&mut self, p: &Program, k: usize) -> Result<BTreeSet<Vec<Program>>, SatError> {
        if k <= 1 {
            return Ok(BTreeSet::from([vec![p.clone()]]));
        }
        let mut out = BTreeSet::new();
        for (head, tail) in self.split2(p)? {
            for rest in self.split(&tail, k - 1)? {
                let mut t = Vec::with_capacity(k);
                t.push(head.clone());
                t.extend(rest);
                out.insert(t);
            }
            self.guard(&out)?;
        }
        Ok(out)
    }
}

/// All ways of splitting `p` into `k` consecutive pieces along a tree path.
pub fn k_split(p: &Program, k: usize, cap: usize) -> Result<BTreeSet<Vec<Program>>, SatError> {
    if k == 0 {
        return Err(SatError::Unsupported("k must be at least 1".into()));
    }
    check_icpdl(p)?;
    Splitter::new(cap).split(p, k)
}

/// Labeled trees on `n` vertices, as adjacency lists, in Prüfer order.
fn prufer_trees(n: usize) -> Vec<Vec<Vec<usize>>> {
    match n {
        0 => return Vec::new(),
        1 => return vec![vec![Vec::new()]],
        _ => {}
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut().rev() {
            *s = c % n;
            c /= n;
        }
        out.push(decode_prufer(&seq, n));
    }
    out
}

fn decode_prufer(seq: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut adj = vec![Vec::new(); n];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        adj[a].push(b);
        adj[b].push(a);
    };
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        link(leaf, s, &mut adj);
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    link(rest[0], rest[1], &mut adj);
    adj
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    parent[from] = from;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Directed edge labels of one shape.
type Labels = BTreeMap<(usize, usize), BTreeSet<Program>>;

struct Shape<'a> {
    adj: &'a [Vec<usize>],
    labels: Labels,
    tests: Vec<BTreeSet<Formula>>,
}

impl Shape<'_> {
    fn edge(&self, a: usize, b: usize) -> Program {
        Program::intersect_all(self.labels[&(a, b)].iter().cloned()).expect("labels are non-empty")
    }

    /// Conjunction of the test label of `v` after folding its subtree away from `parent`.
    fn fold(&self, v: usize, parent: usize) -> BTreeSet<Formula> {
        let mut label = self.tests[v].clone();
        for &c in &self.adj[v] {
            if c != parent {
                label.insert(self.branch(v, c));
            }
        }
        label
    }

    fn branch(&self, v: usize, c: usize) -> Formula {
        let below = self.fold(c, v);
        let step = self.edge(v, c);
        if below.is_empty() {
            Formula::diamond(step)
        } else {
            Formula::diamond(Program::compose(step, Program::test(Formula::and_all(below))))
        }
    }

    fn program(&self, path: &[usize]) -> Program {
        let on_path: BTreeSet<usize> = path.iter().copied().collect();
        let psi = |v: usize| {
            let mut label = self.tests[v].clone();
            for &c in &self.adj[v] {
                if !on_path.contains(&c) {
                    label.insert(self.branch(v, c));
                }
            }
            Program::test(Formula::and_all(label))
        };
        let mut out = psi(path[0]);
        for w in path.windows(2) {
            out = Program::compose(out, self.edge(w[0], w[1]));
            out = Program::compose(out, psi(w[1]));
        }
        out
    }
}

/// ICPDL program equivalent to `c` on structures whose Gaifman graph is a tree.
///
/// Self-loop atoms `π(x,x)` become the test `<π & eps>` on `x`.
pub fn tree_translate(c: &ConjProgram, budget: usize) -> Result<Program, SatError> {
    if c.r_atoms().next().is_some() {
        return Err(SatError::Unsupported("relation atoms are not allowed".into()));
    }
    let vars: Vec<Var> = c.vars().into_iter().collect();
    let index = |v: &Var| vars.iter().position(|w| w == v).expect("variable of c");
    let mut gc = UGraph::new(vars.len());
    let mut edges = Vec::new();
    let mut loops: Vec<BTreeSet<Formula>> = vec![BTreeSet::new(); vars.len()];
    for (p, x, y) in c.p_atoms() {
        check_icpdl(p)?;
        let (i, j) = (index(x), index(y));
        if i == j {
            loops[i].insert(Formula::diamond(Program::intersect(p.clone(), Program::Epsilon)));
        } else {
            gc.add_edge(i, j);
            edges.push((p.clone(), i, j));
        }
    }
    if !gc.is_connected() {
        return Err(SatError::Unsupported("the conjunctive program is not connected".into()));
    }
    let (s, t) = (index(&c.source), index(&c.target));

    let nv = vars.len();
    let max_vertices = if nv >= 2 { 2 * nv - 2 } else { nv };
    let mut splitter = Splitter::new(budget);
    let mut options: HashMap<(Program, usize), Vec<Vec<Program>>> = HashMap::new();
    let mut trees = Vec::new();
    for n in nv..=max_vertices {
        for adj in prufer_trees(n) {
            if (nv..n).any(|v| adj[v].len() < 3) {
                continue;
            }
            let paths: Vec<Vec<usize>> = edges.iter().map(|(_, i, j)| tree_path(&adj, *i, *j)).collect();
            let mut count: usize = 1;
            for ((p, _, _), path) in edges.iter().zip(&paths) {
                let k = path.len() - 1;
                let split = match options.entry((p.clone(), k)) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(splitter.split(p, k)?.into_iter().collect()),
                };
                count = count.saturating_mul(split.len());
            }
            trees.push((adj, paths, count));
        }
    }
    let total = trees.iter().fold(0usize, |acc, t| acc.saturating_add(t.2));
    if total > budget {
        return Err(SatError::BlowupExceeded(budget));
    }

    let choices: Vec<Vec<&Vec<Vec<Program>>>> = trees
        .iter()
        .map(|(_, paths, _)| {
            edges.iter().zip(paths).map(|((p, _, _), path)| &options[&(p.clone(), path.len() - 1)]).collect()
        })
        .collect();
    let per_tree = par::map(&trees.iter().zip(&choices).collect::<Vec<_>>(), |((adj, paths, _), choice)| {
        shapes_of(adj, paths, choice, &loops, s, t)
    });
    let all: BTreeSet<Program> = per_tree.into_iter().flatten().collect();
    Program::union_all(all).ok_or_else(|| SatError::Unsupported("no tree shape fits the program".into()))
}

fn shapes_of(
    adj: &[Vec<usize>],
    paths: &[Vec<usize>],
    choice: &[&Vec<Vec<Program>>],
    loops: &[BTreeSet<Formula>],
    s: usize,
    t: usize,
) -> BTreeSet<Program> {
    let mut tests = loops.to_vec();
    tests.resize(adj.len(), BTreeSet::new());
    let main = tree_path(adj, s, t);
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; choice.len()];
    loop {
        let mut labels = Labels::new();
        for (a, path) in paths.iter().enumerate() {
            let tuple = &choice[a][pick[a]];
            for (i, w) in path.windows(2).enumerate() {
                labels.entry((w[0], w[1])).or_default().insert(tuple[i].clone());
                let back = reverse(&tuple[i]).expect("ICPDL programs reverse");
                labels.entry((w[1], w[0])).or_default().insert(back);
            }
        }
        let labeled = adj.iter().enumerate().all(|(v, ns)| ns.iter().all(|&w| labels.contains_key(&(v, w))));
        if labeled {
            let shape = Shape { adj, labels, tests: tests.clone() };
            out.insert(shape.program(&main));
        }
        let mut a = 0;
        loop {
            if a == pick.len() {
                return out;
            }
            pick[a] += 1;
            if pick[a] < choice[a].len() {
                break;
            }
            pick[a] = 0;
            a += 1;
        }
    }
}
