//! Pebble games for k-simulation and k-bisimulation, their safety solver,
//! the k-power reduction to modal simulation, and bounded unravellings.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::ast::{Atom, ConjProgram, Formula, Name, Program, Var};
use crate::structure::{Structure, World};
use crate::treedecomp::TreeDecomposition;

/// Default cap on explored arena positions.
pub const DEFAULT_ARENA_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("arena exceeds {0} positions")]
    ArenaTooLarge(usize),
    #[error("invalid tuple: {0}")]
    BadTuple(String),
    #[error("k must be at least {0}")]
    BadK(usize),
    #[error("structure has relations of arity above 2")]
    NotKripke,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    Sim,
    Bisim,
    SimU,
    BisimU,
}

impl GameKind {
    pub fn new(bisim: bool, universal: bool) -> Self {
        match (bisim, universal) {
            (false, false) => GameKind::Sim,
            (true, false) => GameKind::Bisim,
            (false, true) => GameKind::SimU,
            (true, true) => GameKind::BisimU,
        }
    }

    pub fn is_bisim(self) -> bool {
        matches!(self, GameKind::Bisim | GameKind::BisimU)
    }

    pub fn is_universal(self) -> bool {
        matches!(self, GameKind::SimU | GameKind::BisimU)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Spoiler,
    /// Duplicator answers a move of pebble `i` (1-based); 0 answers a stacking move.
    Duplicator(usize),
}

/// A game position; `u` lives in the first structure unless `flipped`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub owner: Owner,
    pub flipped: bool,
    pub u: Vec<World>,
    pub v: Vec<World>,
}

/// Name-indexed view of a structure for fast homomorphism checks.
struct Side<'a> {
    s: &'a Structure,
    /// Closed Gaifman neighbourhoods.
    near: Vec<Vec<World>>,
    component: Vec<usize>,
    props: Vec<FixedBitSet>,
    out: Vec<Vec<(u32, World)>>,
    edges: HashSet<(u32, World, World)>,
}

struct Names {
    props: HashMap<Name, usize>,
    progs: HashMap<Name, u32>,
}

impl Names {
    fn of(structures: &[&Structure]) -> Self {
        let mut props = HashMap::new();
        let mut progs = HashMap::new();
        for s in structures {
            for p in s.unary().keys() {
                let n = props.len();
                props.entry(p.clone()).or_insert(n);
            }
            for a in s.binary().keys() {
                let n = progs.len() as u32;
                progs.entry(a.clone()).or_insert(n);
            }
        }
        Names { props, progs }
    }
}

impl<'a> Side<'a> {
    fn new(s: &'a Structure, names: &Names) -> Self {
        let g = s.gaifman();
        let near = (0..s.len())
            .map(|w| {
                let mut n: Vec<World> = std::iter::once(w).chain(g.neighbors(w)).collect();
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect();
        let mut props = vec![FixedBitSet::with_capacity(names.props.len()); s.len()];
        for (p, ws) in s.unary() {
            for &w in ws {
                props[w].insert(names.props[p]);
            }
        }
        let mut out = vec![Vec::new(); s.len()];
        let mut edges = HashSet::new();
        for (a, es) in s.binary() {
            let id = names.progs[a];
            for &(x, y) in es {
                out[x].push((id, y));
                edges.insert((id, x, y));
            }
        }
        Side { s, near, component: g.components(), props, out, edges }
    }

    fn len(&self) -> usize {
        self.s.len()
    }
}

/// Whether `u[i] -> v[i]` is a partial homomorphism from `a` to `b`.
fn partial_hom(a: &Side, b: &Side, u: &[World], v: &[World]) -> bool {
    let k = u.len();
    for i in 0..k {
        for j in i + 1..k {
            if u[i] == u[j] && v[i] != v[j] {
                return false;
            }
        }
        if !a.props[u[i]].is_subset(&b.props[v[i]]) {
            return false;
        }
        for &(name, y) in &a.out[u[i]] {
            for j in 0..k {
                if u[j] == y && !b.edges.contains(&(name, v[i], v[j])) {
                    return false;
                }
            }
        }
    }
    for (r, rel) in a.s.higher() {
        let target = b.s.higher().get(r);
        for t in &rel.tuples {
            let image: Option<Vec<World>> = t.iter().map(|x| u.iter().position(|y| y == x).map(|i| v[i])).collect();
            if let Some(image) = image {
                if !target.is_some_and(|tr| tr.arity == image.len() && tr.tuples.contains(&image)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Solved arena: the reachable fragment from a start position.
#[derive(Debug, Clone)]
pub struct WinningRegion {
    pub positions: Vec<Position>,
    pub successors: Vec<Vec<usize>>,
    pub duplicator_wins: Vec<bool>,
}

impl WinningRegion {
    pub fn wins(&self, i: usize) -> bool {
        self.duplicator_wins[i]
    }

    /// Local certificate: winning Duplicator positions keep a winning move,
    /// winning Spoiler positions only have winning moves.
    pub fn is_consistent(&self) -> bool {
        (0..self.positions.len()).all(|i| {
            if !self.duplicator_wins[i] {
                return true;
            }
            let succ = &self.successors[i];
            match self.positions[i].owner {
                Owner::Spoiler => succ.iter().all(|&j| self.duplicator_wins[j]),
                Owner::Duplicator(_) => succ.iter().any(|&j| self.duplicator_wins[j]),
            }
        })
    }
}

/// Game arena between `K` (first) and `K'` (second), explored lazily.
pub struct Game<'a> {
    kind: GameKind,
    k: usize,
    sides: [Side<'a>; 2],
    bits: u32,
    cap: usize,
}

impl<'a> Game<'a> {
    pub fn new(kind: GameKind, k: usize, first: &'a Structure, second: &'a Structure, cap: usize) -> Result<Self, GameError> {
        if k < 1 {
            return Err(GameError::BadK(1));
        }
        let names = Names::of(&[first, second]);
        let worlds = first.len().max(second.len()).max(2);
        let bits = usize::BITS - (worlds - 1).leading_zeros();
        if 2 * k as u32 * bits + 8 > 128 {
            return Err(GameError::ArenaTooLarge(cap));
        }
        Ok(Game { kind, k, sides: [Side::new(first, &names), Side::new(second, &names)], bits, cap })
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn pair(&self, flipped: bool) -> (&Side<'a>, &Side<'a>) {
        if flipped {
            (&self.sides[1], &self.sides[0])
        } else {
            (&self.sides[0], &self.sides[1])
        }
    }

    /// Spoiler position with tuples padded to dimension k.
    pub fn start(&self, u: &[World], v: &[World]) -> Result<Position, GameError> {
        Ok(Position {
            owner: Owner::Spoiler,
            flipped: false,
            u: pad(u, self.k, self.sides[0].len())?,
            v: pad(v, self.k, self.sides[1].len())?,
        })
    }

    pub fn is_valid(&self, p: &Position) -> bool {
        let (a, b) = self.pair(p.flipped);
        partial_hom(a, b, &p.u, &p.v)
    }

    fn encode(&self, p: &Position) -> u128 {
        let owner = match p.owner {
            Owner::Spoiler => 0u128,
            Owner::Duplicator(i) => i as u128 + 1,
        };
        let mut key = (owner << 1) | p.flipped as u128;
        for &w in p.u.iter().chain(&p.v) {
            key = (key << self.bits) | w as u128;
        }
        key
    }

    /// Moves out of `p`; Duplicator moves only reach valid positions.
    pub fn moves(&self, p: &Position) -> Vec<Position> {
        let (a, b) = self.pair(p.flipped);
        let k = self.k;
        let mut out = Vec::new();
        match p.owner {
            Owner::Spoiler => {
                if !self.is_valid(p) {
                    return out;
                }
                for i in 0..k {
                    let mut seen = HashSet::new();
                    for j in (0..k).filter(|&j| j != i) {
                        for &w in &a.near[p.u[j]] {
                            if seen.insert(w) {
                                let mut u = p.u.clone();
                                u[i] = w;
                                out.push(Position { owner: Owner::Duplicator(i + 1), flipped: p.flipped, u, v: p.v.clone() });
                            }
                        }
                    }
                }
                if self.kind.is_universal() {
                    for w in 0..a.len() {
                        out.push(Position { owner: Owner::Duplicator(0), flipped: p.flipped, u: vec![w; k], v: p.v.clone() });
                    }
                }
                if self.kind.is_bisim() && p.u.iter().all(|&w| w == p.u[0]) {
                    out.push(Position { owner: Owner::Spoiler, flipped: !p.flipped, u: p.v.clone(), v: p.u.clone() });
                }
            }
            Owner::Duplicator(0) => {
                for w in 0..b.len() {
                    let q = Position { owner: Owner::Spoiler, flipped: p.flipped, u: p.u.clone(), v: vec![w; k] };
                    if partial_hom(a, b, &q.u, &q.v) {
                        out.push(q);
                    }
                }
            }
            Owner::Duplicator(i) => {
                let i = i - 1;
                let mut seen = HashSet::new();
                for j in (0..k).filter(|&j| j != i) {
                    for &w in &b.near[p.v[j]] {
                        if seen.insert(w) {
                            let mut v = p.v.clone();
                            v[i] = w;
                            if partial_hom(a, b, &p.u, &v) {
                                out.push(Position { owner: Owner::Spoiler, flipped: p.flipped, u: p.u.clone(), v });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Explores the positions reachable from `start` and solves the safety game.
    pub fn solve(&self, start: &Position) -> Result<WinningRegion, GameError> {
        let mut index: HashMap<u128, usize> = HashMap::new();
        let mut positions = vec![start.clone()];
        index.insert(self.encode(start), 0);
        let mut successors: Vec<Vec<usize>> = Vec::new();
        let mut next = 0;
        while next < positions.len() {
            let p = positions[next].clone();
            let mut succ = Vec::new();
            for q in self.moves(&p) {
                let key = self.encode(&q);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = positions.len();
                        if id >= self.cap {
                            return Err(GameError::ArenaTooLarge(self.cap));
                        }
                        index.insert(key, id);
                        positions.push(q);
                        id
                    }
                };
                succ.push(id);
            }
            succ.sort_unstable();
            succ.dedup();
            successors.push(succ);
            next += 1;
        }

        let n = positions.len();
        let mut preds = vec![Vec::new(); n];
        for (i, succ) in successors.iter().enumerate() {
            for &j in succ {
                preds[j].push(i);
            }
        }
        let mut lost = vec![false; n];
        let mut remaining: Vec<usize> = successors.iter().map(Vec::len).collect();
        let mut queue = VecDeque::new();
        for (i, p) in positions.iter().enumerate() {
            let dead = match p.owner {
                Owner::Spoiler => !self.is_valid(p),
                Owner::Duplicator(_) => successors[i].is_empty(),
            };
            if dead {
                lost[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &p in &preds[x] {
                if lost[p] {
                    continue;
                }
                let now_lost = match positions[p].owner {
                    Owner::Spoiler => true,
                    Owner::Duplicator(_) => {
                        remaining[p] -= 1;
                        remaining[p] == 0
                    }
                };
                if now_lost {
                    lost[p] = true;
                    queue.push_back(p);
                }
            }
        }
        Ok(WinningRegion { positions, successors, duplicator_wins: lost.into_iter().map(|l| !l).collect() })
    }

    /// Duplicator wins from `start` in the infinite game.
    pub fn duplicator_wins(&self, start: &Position) -> Result<bool, GameError> {
        Ok(self.solve(start)?.wins(0))
    }

    /// Duplicator survives `rounds` Spoiler moves from the Spoiler position `start`.
    pub fn bounded_round_duplicator_wins(&self, start: &Position, rounds: usize) -> bool {
        let mut memo = HashMap::new();
        self.survives(start, rounds, &mut memo)
    }

    fn survives(&self, p: &Position, rounds: usize, memo: &mut HashMap<(u128, usize), bool>) -> bool {
        if !self.is_valid(p) {
            return false;
        }
        if rounds == 0 {
            return true;
        }
        let key = (self.encode(p), rounds);
        if let Some(&r) = memo.get(&key) {
            return r;
        }
        let result = self.moves(p).iter().all(|d| match d.owner {
            Owner::Spoiler => self.survives(d, rounds - 1, memo),
            Owner::Duplicator(_) => self.moves(d).iter().any(|s| self.survives(s, rounds - 1, memo)),
        });
        memo.insert(key, result);
        result
    }

    fn spans_components(&self, side: usize, u: &[World]) -> bool {
        let c = &self.sides[side].component;
        u.iter().any(|&w| c[w] != c[u[0]])
    }
}

fn pad(t: &[World], k: usize, n: usize) -> Result<Vec<World>, GameError> {
    let Some(&last) = t.last() else {
        return Err(GameError::BadTuple("empty tuple".into()));
    };
    if t.len() > k {
        return Err(GameError::BadTuple(format!("dimension {} exceeds k = {k}", t.len())));
    }
    if let Some(&w) = t.iter().find(|&&w| w >= n) {
        return Err(GameError::BadTuple(format!("world {w} out of range")));
    }
    let mut out = t.to_vec();
    out.resize(k, last);
    Ok(out)
}

/// Half of the simulation or bisimulation relation: from `K,u` towards `K',v`.
fn half(kind: GameKind, k: usize, a: &Structure, u: &[World], b: &Structure, v: &[World], cap: usize) -> Result<bool, GameError> {
    if k < 2 {
        return Err(GameError::BadK(2));
    }
    let game = Game::new(kind, k, a, b, cap)?;
    let start = game.start(u, v)?;
    if !kind.is_universal() && game.spans_components(0, &start.u) {
        return Ok(true);
    }
    if !game.is_valid(&start) {
        return Ok(false);
    }
    game.duplicator_wins(&start)
}

/// `K,u ⪯_k K',v` (or its ∀-variant).
pub fn k_simulates(
    a: &Structure,
    u: &[World],
    b: &Structure,
    v: &[World],
    k: usize,
    universal: bool,
    cap: usize,
) -> Result<bool, GameError> {
    half(GameKind::new(false, universal), k, a, u, b, v, cap)
}

/// k-bisimilarity: half-bisimulations in both directions.
pub fn k_bisimulates(
    a: &Structure,
    u: &[World],
    b: &Structure,
    v: &[World],
    k: usize,
    universal: bool,
    cap: usize,
) -> Result<bool, GameError> {
    let kind = GameKind::new(true, universal);
    Ok(half(kind, k, a, u, b, v, cap)? && half(kind, k, b, v, a, u, cap)?)
}

/// The k-power Kripke structure `S_k(K)`; worlds enumerate `dom(K)^k` in
/// lexicographic order.
pub fn power_structure(s: &Structure, k: usize) -> Result<Structure, GameError> {
    if !s.is_kripke() {
        return Err(GameError::NotKripke);
    }
    if k < 1 {
        return Err(GameError::BadK(1));
    }
    let n = s.len();
    let tuples = tuples(n, k);
    let names: Vec<String> = tuples
        .iter()
        .map(|t| format!("({})", t.iter().map(|&w| s.world_name(w)).collect::<Vec<_>>().join(",")))
        .collect();
    let mut out = Structure::with_worlds(&names).map_err(|e| GameError::BadTuple(e.to_string()))?;
    let g = s.gaifman();
    let index = |t: &[World]| t.iter().fold(0, |acc, &w| acc * n + w);
    for i in 1..=k {
        out.declare_binary(i.to_string());
        for j in 1..=k {
            out.declare_unary(format!("({i},{j})"));
            for a in s.binary().keys() {
                out.declare_unary(format!("({a},{i},{j})"));
            }
        }
        for p in s.unary().keys() {
            out.declare_unary(format!("({p},{i})"));
        }
    }
    for (x, t) in tuples.iter().enumerate() {
        for i in 0..k {
            for (p, ws) in s.unary() {
                if ws.contains(&t[i]) {
                    out.add_unary(format!("({p},{})", i + 1), x);
                }
            }
            for j in 0..k {
                if t[i] == t[j] {
                    out.add_unary(format!("({},{})", i + 1, j + 1), x);
                }
                for (a, es) in s.binary() {
                    if es.contains(&(t[i], t[j])) {
                        out.add_unary(format!("({a},{},{})", i + 1, j + 1), x);
                    }
                }
            }
            let mut targets: Vec<World> = Vec::new();
            for j in (0..k).filter(|&j| j != i) {
                targets.push(t[j]);
                targets.extend(g.neighbors(t[j]));
            }
            targets.sort_unstable();
            targets.dedup();
            for w in targets {
                let mut t2 = t.clone();
                t2[i] = w;
                out.add_binary((i + 1).to_string(), x, index(&t2));
            }
        }
    }
    Ok(out)
}

fn tuples(n: usize, k: usize) -> Vec<Vec<World>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t: Vec<World>| {
                (0..n).map(move |w| {
                    let mut t = t.clone();
                    t.push(w);
                    t
                })
            })
            .collect();
    }
    out
}

/// Index of a tuple among the worlds of [`power_structure`].
pub fn power_world(n: usize, t: &[World]) -> World {
    t.iter().fold(0, |acc, &w| acc * n + w)
}

/// Classical modal simulation: `K',v` simulates `K,u`.
pub fn ml_simulates(a: &Structure, u: World, b: &Structure, v: World) -> Result<bool, GameError> {
    if !a.is_kripke() || !b.is_kripke() {
        return Err(GameError::NotKripke);
    }
    let (n, m) = (a.len(), b.len());
    let props_ok = |x: World, y: World| a.unary().iter().all(|(p, ws)| !ws.contains(&x) || b.unary().get(p).is_some_and(|s| s.contains(&y)));
    let mut z: Vec<FixedBitSet> = (0..n)
        .map(|x| {
            let mut row = FixedBitSet::with_capacity(m);
            for y in 0..m {
                row.set(y, props_ok(x, y));
            }
            row
        })
        .collect();
    let (sa, sb) = (successor_lists(a), successor_lists(b));
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..m {
                if !z[x][y] {
                    continue;
                }
                let ok = sa.iter().all(|(name, adj)| {
                    adj[x].iter().all(|&x2| {
                        sb.get(name).is_some_and(|badj| badj[y].iter().any(|&y2| z[x2][y2]))
                    })
                });
                if !ok {
                    z[x].set(y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(z[u][v]);
        }
    }
}

fn successor_lists(s: &Structure) -> BTreeMap<&Name, Vec<Vec<World>>> {
    let mut out = BTreeMap::new();
    for (name, es) in s.binary() {
        let mut adj = vec![Vec::new(); s.len()];
        for &(x, y) in es {
            adj[x].push(y);
        }
        out.insert(name, adj);
    }
    out
}

/// Bounded unravelling with its width-(k-1) tree decomposition.
#[derive(Debug, Clone)]
pub struct Unravelling {
    pub structure: Structure,
    pub root: World,
    pub decomposition: TreeDecomposition,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Tree nodes are sequences of non-empty sets of at most `k` worlds starting
/// at `{u}`, of length at most `depth + 1`; worlds are the ≈-classes.
pub fn unravel(s: &Structure, u: World, k: usize, depth: usize) -> Unravelling {
    let n = s.len();
    let mut sets: Vec<Vec<World>> = Vec::new();
    for size in 1..=k.min(n) {
        subsets(n, size, 0, &mut Vec::new(), &mut sets);
    }
    let mut labels: Vec<Vec<World>> = vec![vec![u]];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &node in &frontier {
            for set in &sets {
                next.push(labels.len());
                labels.push(set.clone());
                parent.push(Some(node));
            }
        }
        frontier = next;
    }

    let mut offset = Vec::with_capacity(labels.len());
    let mut total = 0;
    for l in &labels {
        offset.push(total);
        total += l.len();
    }
    let slot = |node: usize, w: World, labels: &[Vec<World>]| offset[node] + labels[node].iter().position(|&x| x == w).expect("member");
    let mut uf = UnionFind((0..total).collect());
    for node in 1..labels.len() {
        let p = parent[node].expect("non-root");
        for &w in &labels[node] {
            if labels[p].contains(&w) {
                uf.union(slot(node, w, &labels), slot(p, w, &labels));
            }
        }
    }

    let mut class_of: HashMap<usize, World> = HashMap::new();
    let mut names = Vec::new();
    let mut world_of = vec![0; total];
    for (node, l) in labels.iter().enumerate() {
        for &w in l {
            let sl = slot(node, w, &labels);
            let root = uf.find(sl);
            let id = *class_of.entry(root).or_insert_with(|| {
                names.push(format!("{}.{node}", s.world_name(w)));
                names.len() - 1
            });
            world_of[sl] = id;
        }
    }
    let mut out = Structure::with_worlds(&names).expect("distinct names");
    for p in s.unary().keys() {
        out.declare_unary(p.clone());
    }
    for a in s.binary().keys() {
        out.declare_binary(a.clone());
    }
    for (r, rel) in s.higher() {
        out.declare_relation(r.clone(), rel.arity).expect("fresh relation");
    }
    let mut bags = Vec::with_capacity(labels.len());
    for (node, l) in labels.iter().enumerate() {
        let class = |w: World| world_of[slot(node, w, &labels)];
        for (p, ws) in s.unary() {
            for &w in l.iter().filter(|w| ws.contains(w)) {
                out.add_unary(p.clone(), class(w));
            }
        }
        for (a, es) in s.binary() {
            for &x in l {
                for &y in l {
                    if es.contains(&(x, y)) {
                        out.add_binary(a.clone(), class(x), class(y));
                    }
                }
            }
        }
        for (r, rel) in s.higher() {
            for t in rel.tuples.iter().filter(|t| t.iter().all(|w| l.contains(w))) {
                out.add_tuple(r.clone(), t.iter().map(|&w| class(w)).collect()).expect("declared arity");
            }
        }
        bags.push(l.iter().map(|&w| class(w)).collect());
    }
    let width = labels.iter().map(Vec::len).max().unwrap_or(1) - 1;
    Unravelling {
        structure: out,
        root: world_of[0],
        decomposition: TreeDecomposition { bags, parent, root: 0, width },
    }
}

fn subsets(n: usize, size: usize, from: usize, cur: &mut Vec<World>, out: &mut Vec<Vec<World>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for w in from..n {
        cur.push(w);
        subsets(n, size, w + 1, cur, out);
        cur.pop();
    }
}

/// The `m`-clique formula `<C[x1,xm]> & !<{a(x1,y), a(y,y)}[x1,y]>` with
/// `C = {a(xi,xj) | i < j}`.
pub fn clique_formula(m: usize, a: &str) -> Formula {
    let xs: Vec<Var> = (1..=m.max(2)).map(|i| Var::from(format!("x{i}"))).collect();
    let step = || Program::atomic(a);
    let mut atoms = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            atoms.push(Atom::p(step(), xs[i].clone(), xs[j].clone()));
        }
    }
    let c = ConjProgram::new(atoms, xs[0].clone(), xs[xs.len() - 1].clone()).expect("variables occur");
    let c2 = ConjProgram::new([Atom::p(step(), "x1", "y"), Atom::p(step(), "y", "y")], "x1", "y").expect("variables occur");
    Formula::and(Formula::diamond(Program::conj(c)), Formula::not(Formula::diamond(Program::conj(c2))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_formula;
    use crate::treedecomp::validate;

    fn chain(len: usize) -> Structure {
        let mut k = Structure::numbered(len + 1);
        for i in 0..len {
            k.add_binary("a", i, i + 1);
        }
        k
    }

    fn clique4() -> Structure {
        let mut k = Structure::numbered(4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    k.add_binary("a", i, j);
                }
            }
        }
        k
    }

    #[test]
    fn identity_simulates() {
        let k = clique4();
        assert!(k_simulates(&k, &[0, 1], &k, &[0, 1], 2, false, DEFAULT_ARENA_CAP).unwrap());
        assert!(k_bisimulates(&k, &[2], &k, &[2], 3, true, DEFAULT_ARENA_CAP).unwrap());
    }

    #[test]
    fn longer_chain_not_simulated() {
        assert!(!k_simulates(&chain(2), &[0], &chain(1), &[0], 2, false, DEFAULT_ARENA_CAP).unwrap());
        let (k, k2) = (chain(2), chain(1));
        let game = Game::new(GameKind::Sim, 2, &k, &k2, DEFAULT_ARENA_CAP).unwrap();
        let start = game.start(&[0], &[0]).unwrap();
        assert!(game.bounded_round_duplicator_wins(&start, 1));
        assert!(!game.bounded_round_duplicator_wins(&start, 2));
    }

    #[test]
    fn extra_edges_keep_simulation() {
        let k = chain(3);
        let mut k2 = k.clone();
        k2.add_binary("a", 3, 0);
        k2.add_binary("a", 1, 1);
        for kk in 2..=3 {
            assert!(k_simulates(&k, &[0], &k2, &[0], kk, false, DEFAULT_ARENA_CAP).unwrap());
        }
    }

    #[test]
    fn self_loop_and_two_cycle_are_separated() {
        let mut one = Structure::numbered(1);
        one.add_binary("a", 0, 0);
        let mut two = Structure::numbered(2);
        two.add_binary("a", 0, 1);
        two.add_binary("a", 1, 0);
        // The stacked start position already fails: a(w,w) has no image a(v,v).
        assert!(!k_bisimulates(&one, &[0], &two, &[0], 2, false, DEFAULT_ARENA_CAP).unwrap());
        let looped = Formula::loop_of(Program::atomic("a"));
        assert_eq!(eval_formula(&one, &looped).unwrap().len(), 1);
        assert!(eval_formula(&two, &looped).unwrap().is_empty());
        // Without the self-loop the two structures are indistinguishable.
        let mut cycle = Structure::numbered(1);
        cycle.add_unary("p", 0);
        let mut two_p = Structure::numbered(2);
        two_p.add_unary("p", 0);
        two_p.add_unary("p", 1);
        assert!(k_bisimulates(&cycle, &[0], &two_p, &[0], 2, false, DEFAULT_ARENA_CAP).unwrap());
    }

    #[test]
    fn solver_certificate() {
        let (k, k2) = (chain(2), clique4());
        let game = Game::new(GameKind::BisimU, 2, &k, &k2, DEFAULT_ARENA_CAP).unwrap();
        let region = game.solve(&game.start(&[0], &[0]).unwrap()).unwrap();
        assert!(region.is_consistent());
    }

    #[test]
    fn power_of_self_loop() {
        let mut k = Structure::numbered(1);
        k.add_binary("a", 0, 0);
        let s = power_structure(&k, 2).unwrap();
        assert_eq!(s.len(), 1);
        for p in ["(a,1,1)", "(a,1,2)", "(a,2,1)", "(a,2,2)", "(1,2)", "(2,1)", "(1,1)", "(2,2)"] {
            assert!(s.unary()[p].contains(&0), "{p}");
        }
        assert!(ml_simulates(&s, 0, &s, 0).unwrap());
    }

    #[test]
    fn unravel_collapses_self_loop() {
        let mut k = Structure::numbered(1);
        k.add_binary("a", 0, 0);
        k.add_unary("p", 0);
        let un = unravel(&k, 0, 3, 2);
        assert_eq!(un.structure.len(), 1);
        assert!(un.structure.binary()["a"].contains(&(0, 0)));
    }

    #[test]
    fn unravel_depth_zero_is_the_root() {
        let k = clique4();
        let un = unravel(&k, 2, 3, 0);
        assert_eq!(un.structure.len(), 1);
        assert!(un.structure.binary()["a"].is_empty());
    }

    #[test]
    fn unravelled_clique_has_no_4_clique() {
        let k = clique4();
        let un = unravel(&k, 0, 3, 2);
        assert!(un.decomposition.width <= 2);
        assert!(validate(&un.structure.gaifman(), &un.decomposition));
        let f = clique_formula(4, "a");
        assert_eq!(eval_formula(&k, &f).unwrap().len(), 4);
        assert!(eval_formula(&un.structure, &f).unwrap().is_empty());
    }
}
