//! Seeded random generators for expressions, structures and UNTC formulas.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucpdl::ast::{Atom, ConjProgram, Formula, Name, Program, Var};
use ucpdl::structure::Structure;
use ucpdl::untc::UntcFormula;

pub const PROGRAMS: [&str; 3] = ["a", "b", "c"];
pub const PROPS: [&str; 3] = ["p", "q", "r"];

/// Constructs a generator may emit.
#[derive(Clone, Copy, Debug)]
pub struct Lang {
    pub converse: bool,
    pub intersect: bool,
    pub loops: bool,
    pub universal: bool,
    pub tests: bool,
    pub conj: Option<ConjShape>,
    /// Ternary r-atoms over relation `R` inside conjunctive programs.
    pub relations: bool,
    pub programs: usize,
    pub props: usize,
    /// Only propositions, ∧, ⟨⟩, no negation: the positive fragment.
    pub positive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjShape {
    /// Connected atoms over at most this many variables.
    Connected { vars: usize, atoms: usize },
    /// `{π₁(x,x), …}[x,x]`.
    SelfLoop,
    /// `{π₁(x,y), …}[x,y]`.
    Parallel,
}

impl Lang {
    pub const PDL: Lang = Lang {
        converse: false,
        intersect: false,
        loops: false,
        universal: false,
        tests: true,
        conj: None,
        relations: false,
        programs: 2,
        props: 2,
        positive: false,
    };

    pub fn cpdl() -> Lang {
        Lang { converse: true, ..Lang::PDL }
    }

    pub fn loop_cpdl() -> Lang {
        Lang { loops: true, ..Lang::cpdl() }
    }

    pub fn icpdl() -> Lang {
        Lang { intersect: true, ..Lang::cpdl() }
    }

    pub fn cpdl_plus() -> Lang {
        Lang { conj: Some(ConjShape::Connected { vars: 4, atoms: 5 }), ..Lang::cpdl() }
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
    /// Range of edge probabilities for random structures.
    pub density: (f64, f64),
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), density: (0.1, 0.5), fresh: 0 }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn atomic(&mut self, lang: &Lang) -> Program {
        let a = PROGRAMS[self.below(lang.programs)];
        if lang.converse && self.chance(0.3) {
            Program::converse(a)
        } else {
            Program::atomic(a)
        }
    }

    fn prop(&mut self, lang: &Lang) -> Formula {
        Formula::prop(PROPS[self.below(lang.props)])
    }

    pub fn program(&mut self, lang: &Lang, depth: usize) -> Program {
        if depth == 0 || self.chance(0.25) {
            return match self.below(10) {
                0 => Program::Epsilon,
                1 if lang.universal => Program::Universal,
                _ => self.atomic(lang),
            };
        }
        let d = depth - 1;
        loop {
            match self.below(7) {
                0 => return Program::union(self.program(lang, d), self.program(lang, d)),
                1 => return Program::compose(self.program(lang, d), self.program(lang, d)),
                2 => return Program::star(self.program(lang, d)),
                3 if lang.tests => return Program::test(self.formula(lang, d)),
                4 if lang.intersect => return Program::intersect(self.program(lang, d), self.program(lang, d)),
                5 | 6 if lang.conj.is_some() => return Program::conj(self.conj(lang, d)),
                _ => {}
            }
        }
    }

    pub fn formula(&mut self, lang: &Lang, depth: usize) -> Formula {
        if depth == 0 || self.chance(0.2) {
            return self.prop(lang);
        }
        let d = depth - 1;
        loop {
            match self.below(5) {
                0 if !lang.positive => return Formula::not(self.formula(lang, d)),
                1 => return Formula::and(self.formula(lang, d), self.formula(lang, d)),
                2 | 3 => return Formula::diamond(self.program(lang, d)),
                4 if lang.loops => return Formula::loop_of(self.program(lang, d)),
                _ => {}
            }
        }
    }

    /// A conjunctive program in the shape `lang.conj` requests.
    pub fn conj(&mut self, lang: &Lang, depth: usize) -> ConjProgram {
        let shape = lang.conj.expect("conjunctive programs enabled");
        let inner = Lang { conj: if depth > 1 { lang.conj } else { None }, ..*lang };
        match shape {
            ConjShape::SelfLoop | ConjShape::Parallel => {
                let y = if shape == ConjShape::SelfLoop { "x" } else { "y" };
                let n = 1 + self.below(3);
                let atoms: Vec<Atom> = (0..n).map(|_| Atom::p(self.program(&inner, depth), "x", y)).collect();
                ConjProgram::new(atoms, "x", y).expect("well formed")
            }
            ConjShape::Connected { vars, atoms } => {
                let nv = 1 + self.below(vars);
                let names: Vec<Var> = (0..nv).map(|i| Var::from(format!("x{i}"))).collect();
                let mut out = Vec::new();
                for i in 1..nv {
                    let j = self.below(i);
                    let (s, t) = if self.chance(0.5) { (i, j) } else { (j, i) };
                    out.push(Atom::p(self.program(&inner, depth), names[s].clone(), names[t].clone()));
                }
                let extra = (1 + self.below(atoms)).saturating_sub(out.len()).max(usize::from(out.is_empty()));
                for _ in 0..extra {
                    if lang.relations && nv >= 2 && self.chance(0.3) {
                        let args = (0..3).map(|_| names[self.below(nv)].clone()).collect();
                        out.push(Atom::r("R", args).expect("ternary"));
                    } else {
                        let (s, t) = (self.below(nv), self.below(nv));
                        out.push(Atom::p(self.program(&inner, depth), names[s].clone(), names[t].clone()));
                    }
                }
                let (s, t) = (names[self.below(nv)].clone(), names[self.below(nv)].clone());
                ConjProgram::new(out, s, t).expect("well formed")
            }
        }
    }

    /// Kripke structure over `lang`'s names with 1..=`max_worlds` worlds, plus
    /// a ternary `R` when `lang.relations`.
    pub fn structure(&mut self, lang: &Lang, max_worlds: usize) -> Structure {
        let n = 1 + self.below(max_worlds);
        let density = self.rng.gen_range(self.density.0..self.density.1);
        let mut k = Structure::numbered(n);
        for a in &PROGRAMS[..lang.programs] {
            k.declare_binary(*a);
            for u in 0..n {
                for v in 0..n {
                    if self.chance(density) {
                        k.add_binary(*a, u, v);
                    }
                }
            }
        }
        for p in &PROPS[..lang.props] {
            k.declare_unary(*p);
            for w in 0..n {
                if self.chance(0.4) {
                    k.add_unary(*p, w);
                }
            }
        }
        if lang.relations {
            k.declare_relation("R", 3).expect("fresh");
            for _ in 0..self.below(2 * n + 1) {
                let t = (0..3).map(|_| self.below(n)).collect();
                k.add_tuple("R", t).expect("arity 3");
            }
        }
        k
    }

    /// A structure whose Gaifman graph is a tree on exactly `n` worlds, edges
    /// labelled by `a`/`b` in random directions, no self-loops.
    pub fn tree_structure(&mut self, n: usize, programs: &[&str], props: &[&str]) -> Structure {
        let mut k = Structure::numbered(n);
        for a in programs {
            k.declare_binary(*a);
        }
        for i in 1..n {
            let j = self.below(i);
            let mut labelled = false;
            while !labelled {
                for a in programs {
                    if self.chance(0.6) {
                        let (s, t) = if self.chance(0.5) { (i, j) } else { (j, i) };
                        k.add_binary(*a, s, t);
                        labelled = true;
                    }
                }
            }
        }
        for p in props {
            k.declare_unary(*p);
            for w in 0..n {
                if self.chance(0.4) {
                    k.add_unary(*p, w);
                }
            }
        }
        k
    }

    fn fresh_var(&mut self, stem: &str) -> Var {
        self.fresh += 1;
        Var::from(format!("{stem}{}", self.fresh))
    }

    /// UNTC formula whose free variables lie in `scope` (at most two names).
    pub fn untc(&mut self, scope: &[Var], depth: usize) -> UntcFormula {
        let pick = |g: &mut Gen| scope[g.below(scope.len())].clone();
        if depth == 0 || self.chance(0.2) {
            return match self.below(4) {
                0 => UntcFormula::Eq(pick(self), pick(self)),
                1 => UntcFormula::Rel(Name::new(PROPS[self.below(2)]), vec![pick(self)]),
                _ => UntcFormula::Rel(Name::new(PROGRAMS[self.below(2)]), vec![pick(self), pick(self)]),
            };
        }
        let d = depth - 1;
        match self.below(6) {
            0 => UntcFormula::and(self.untc(scope, d), self.untc(scope, d)),
            1 => UntcFormula::or(self.untc(scope, d), self.untc(scope, d)),
            2 => {
                let z = self.fresh_var("z");
                let mut inner = scope.to_vec();
                inner.push(z.clone());
                let body = self.untc(&inner, d);
                let guard = UntcFormula::Rel(Name::new(PROGRAMS[self.below(2)]), vec![pick(self), z.clone()]);
                UntcFormula::exists(vec![z], UntcFormula::and(guard, body))
            }
            3 => {
                let one = [pick(self)];
                UntcFormula::not(self.untc(&one, d))
            }
            _ => {
                let (u, v) = (self.fresh_var("u"), self.fresh_var("v"));
                let body = self.untc(&[u.clone(), v.clone()], d);
                let step = UntcFormula::Rel(Name::new(PROGRAMS[self.below(2)]), vec![u.clone(), v.clone()]);
                let body = if self.chance(0.5) { UntcFormula::and(step, body) } else { UntcFormula::or(step, body) };
                UntcFormula::Tc { u, v, body: Box::new(body), x: pick(self), y: pick(self) }
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Every split of `0..=m` into `k` consecutive segments, as boundary indices.
pub fn segmentations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            acc.push(m);
            out.push(acc.clone());
            acc.pop();
            return;
        }
        for b in start..=m {
            acc.push(b);
            go(b, m, left - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut vec![0], &mut out);
    out
}

/// The unique simple path between two worlds of a structure whose Gaifman graph is a forest.
pub fn tree_path(k: &Structure, u: usize, v: usize) -> Option<Vec<usize>> {
    let g = k.gaifman();
    let mut prev = vec![usize::MAX; k.len()];
    let mut seen = BTreeSet::from([u]);
    let mut queue = std::collections::VecDeque::from([u]);
    while let Some(w) = queue.pop_front() {
        for n in g.neighbors(w) {
            if seen.insert(n) {
                prev[n] = w;
                queue.push_back(n);
            }
        }
    }
    if !seen.contains(&v) {
        return None;
    }
    let mut path = vec![v];
    while *path.last().unwrap() != u {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}
