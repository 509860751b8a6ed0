//! Translations between UNTC and UCPDL⁺.

use std::collections::BTreeSet;

use super::{Fresh, TranslateError};
use crate::ast::{Atom, ConjProgram, Expression, Formula, Program, Var};
use crate::graph::UGraph;
use crate::untc::UntcFormula;

/// Default cap on normal-form nodes.
pub const DEFAULT_NODE_CAP: usize = 100_000;

/// Disjunctions of existentially closed conjunctions, recursively inside negations and
/// closure bodies; no disjunction spans more than two free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormUntc {
    pub formula: UntcFormula,
    /// Largest number of atoms in one conjunction.
    pub nf_conj_width: usize,
}

#[derive(Clone, Debug)]
struct Branch {
    bound: Vec<Var>,
    atoms: Vec<UntcFormula>,
}

impl Branch {
    fn atom(f: UntcFormula) -> Self {
        Branch { bound: Vec::new(), atoms: vec![f] }
    }

    fn free(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.atoms.iter().flat_map(|a| a.free_vars()).collect();
        for b in &self.bound {
            out.remove(b);
        }
        out
    }

    fn all_names(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(|a| a.free_vars()).chain(self.bound.iter().cloned()).collect()
    }

    fn rename_bound(&mut self, avoid: &BTreeSet<Var>, fresh: &mut Fresh) {
        for i in 0..self.bound.len() {
            if avoid.contains(&self.bound[i]) {
                let new = fresh.var("z");
                let old = std::mem::replace(&mut self.bound[i], new.clone());
                for a in &mut self.atoms {
                    *a = subst(a, &old, &new);
                }
            }
        }
    }

    fn to_formula(&self) -> UntcFormula {
        let body = UntcFormula::and_all(self.atoms.iter().cloned()).expect("branches hold atoms");
        UntcFormula::exists(self.bound.clone(), body)
    }
}

/// Replaces free occurrences of `from` by the unused name `to`.
fn subst(f: &UntcFormula, from: &Var, to: &Var) -> UntcFormula {
    let s = |v: &Var| if v == from { to.clone() } else { v.clone() };
    match f {
        UntcFormula::Rel(r, args) => UntcFormula::Rel(r.clone(), args.iter().map(s).collect()),
        UntcFormula::Eq(a, b) => UntcFormula::Eq(s(a), s(b)),
        UntcFormula::And(l, r) => UntcFormula::and(subst(l, from, to), subst(r, from, to)),
        UntcFormula::Or(l, r) => UntcFormula::or(subst(l, from, to), subst(r, from, to)),
        UntcFormula::Not(b) => UntcFormula::not(subst(b, from, to)),
        UntcFormula::Exists(vs, _) if vs.contains(from) => f.clone(),
        UntcFormula::Exists(vs, b) => UntcFormula::Exists(vs.clone(), Box::new(subst(b, from, to))),
        UntcFormula::Tc { u, v, body, x, y } => {
            UntcFormula::Tc { u: u.clone(), v: v.clone(), body: body.clone(), x: s(x), y: s(y) }
        }
    }
}

struct Normalizer {
    fresh: Fresh,
    cap: usize,
    width: usize,
}

impl Normalizer {
    fn check(&self, branches: &[Branch]) -> Result<(), TranslateError> {
        let nodes: usize = branches.iter().flat_map(|b| &b.atoms).map(|a| a.node_count()).sum();
        if nodes > self.cap {
            return Err(TranslateError::BlowupExceeded(self.cap));
        }
        Ok(())
    }

    fn formula(&mut self, f: &UntcFormula) -> Result<UntcFormula, TranslateError> {
        let branches = self.dnf(f)?;
        for b in &branches {
            self.width = self.width.max(b.atoms.len());
        }
        Ok(UntcFormula::or_all(branches.iter().map(Branch::to_formula)).expect("at least one branch"))
    }

    fn dnf(&mut self, f: &UntcFormula) -> Result<Vec<Branch>, TranslateError> {
        let out = match f {
            UntcFormula::Rel(..) | UntcFormula::Eq(..) => vec![Branch::atom(f.clone())],
            UntcFormula::Not(b) => vec![Branch::atom(UntcFormula::not(self.formula(b)?))],
            UntcFormula::Tc { u, v, body, x, y } => {
                let body = self.formula(body)?;
                vec![Branch::atom(UntcFormula::tc(u.clone(), v.clone(), body, x.clone(), y.clone()))]
            }
            UntcFormula::Or(l, r) => {
                let mut out = self.dnf(l)?;
                out.extend(self.dnf(r)?);
                out
            }
            UntcFormula::And(l, r) => {
                let (ls, rs) = (self.dnf(l)?, self.dnf(r)?);
                let mut out = Vec::with_capacity(ls.len() * rs.len());
                for bl in &ls {
                    for br in &rs {
                        let mut bl = bl.clone();
                        let mut br = br.clone();
                        br.rename_bound(&bl.all_names(), &mut self.fresh);
                        bl.rename_bound(&br.free(), &mut self.fresh);
                        bl.bound.extend(br.bound);
                        bl.atoms.extend(br.atoms);
                        out.push(bl);
                    }
                }
                self.check(&out)?;
                out
            }
            UntcFormula::Exists(vs, body) => {
                let mut out = self.dnf(body)?;
                for b in &mut out {
                    // An outer binder shadowed by an inner one is vacuous.
                    for v in vs {
                        if !b.bound.contains(v) {
                            b.bound.push(v.clone());
                        }
                    }
                }
                out
            }
        };
        self.check(&out)?;
        Ok(out)
    }
}

/// Pushes disjunctions outward through conjunction and quantification.
pub fn untc_normal_form(f: &UntcFormula, cap: usize) -> Result<NormalFormUntc, TranslateError> {
    let free = f.free_vars();
    if free.len() > 2 {
        return Err(TranslateError::TooManyFreeVars(free.len()));
    }
    f.validate().map_err(|e| TranslateError::NotNormalForm(e.to_string()))?;
    let mut n = Normalizer { fresh: Fresh::default(), cap, width: 0 };
    let formula = n.formula(f)?;
    Ok(NormalFormUntc { formula, nf_conj_width: n.width })
}

struct ToUcpdl {
    fresh: Fresh,
}

/// Atoms of one conjunction after flattening nested quantifiers.
struct Flat {
    atoms: Vec<Atom>,
    /// Conjuncts without free variables.
    sentences: Vec<Formula>,
}

impl ToUcpdl {
    /// Formula true at `u` iff `f[x ↦ u]` holds; `f` has free variables among `{x}`.
    fn formula(&mut self, f: &UntcFormula, x: &Var) -> Result<Formula, TranslateError> {
        match f {
            UntcFormula::Or(l, r) => Ok(Formula::or(self.formula(l, x)?, self.formula(r, x)?)),
            UntcFormula::Not(b) => Ok(Formula::not(self.formula(b, x)?)),
            _ => {
                let flat = self.flatten(f)?;
                Ok(self.close_at(flat, x))
            }
        }
    }

    /// Program containing `(u,v)` iff `f[x ↦ u, y ↦ v]` holds.
    fn program(&mut self, f: &UntcFormula, x: &Var, y: &Var) -> Result<Program, TranslateError> {
        let free = f.free_vars();
        if !free.contains(y) {
            return Ok(Program::compose(Program::test(self.formula(f, x)?), Program::Universal));
        }
        if !free.contains(x) {
            return Ok(Program::compose(Program::Universal, Program::test(self.formula(f, y)?)));
        }
        if let UntcFormula::Or(l, r) = f {
            return Ok(Program::union(self.program(l, x, y)?, self.program(r, x, y)?));
        }
        let Flat { atoms, sentences } = self.flatten(f)?;
        if atoms.len() == 1 && sentences.is_empty() {
            if let Atom::P { program, x: a, y: b } = &atoms[0] {
                if a == x && b == y {
                    return Ok(program.clone());
                }
            }
        }
        let (mut with_x, rest) = split_components(atoms, x);
        let mut sentences = sentences;
        let (with_y, rest) = if with_x.iter().any(|a| a.vars().contains(&y)) {
            (Vec::new(), rest)
        } else {
            split_components(rest, y)
        };
        sentences.extend(self.components_as_sentences(rest));
        if let Some(s) = test_of(sentences) {
            with_x.push(Atom::p(s, x.clone(), x.clone()));
        }
        if with_y.is_empty() {
            return Ok(conj(with_x, x, y));
        }
        Ok(Program::compose(
            Program::compose(Program::test(Formula::diamond(conj(with_x, x, x))), Program::Universal),
            Program::test(Formula::diamond(conj(with_y, y, y))),
        ))
    }

    /// `<C[x,x]>` for the component of `x`; other components become `<U;...>` sentences.
    fn close_at(&mut self, flat: Flat, x: &Var) -> Formula {
        let Flat { atoms, mut sentences } = flat;
        let (mut main, rest) = split_components(atoms, x);
        sentences.extend(self.components_as_sentences(rest));
        if main.is_empty() {
            return Formula::and_all(sentences);
        }
        if main.len() == 1 && sentences.is_empty() {
            if let Atom::P { program: Program::Test(f), .. } = &main[0] {
                return (**f).clone();
            }
        }
        if let Some(s) = test_of(sentences) {
            main.push(Atom::p(s, x.clone(), x.clone()));
        }
        Formula::diamond(conj(main, x, x))
    }

    fn components_as_sentences(&mut self, mut atoms: Vec<Atom>) -> Vec<Formula> {
        let mut out = Vec::new();
        while let Some(first) = atoms.first() {
            let z = first.vars()[0].clone();
            let (comp, rest) = split_components(atoms, &z);
            atoms = rest;
            let inner = Formula::diamond(conj(comp, &z, &z));
            out.push(Formula::diamond(Program::compose(Program::Universal, Program::test(inner))));
        }
        out
    }

    fn flatten(&mut self, f: &UntcFormula) -> Result<Flat, TranslateError> {
        let mut flat = Flat { atoms: Vec::new(), sentences: Vec::new() };
        let mut scope: BTreeSet<Var> = f.free_vars();
        self.collect(f, &mut scope, &mut flat)?;
        Ok(flat)
    }

    fn collect(&mut self, f: &UntcFormula, scope: &mut BTreeSet<Var>, flat: &mut Flat) -> Result<(), TranslateError> {
        match f {
            UntcFormula::And(l, r) => {
                self.collect(l, scope, flat)?;
                self.collect(r, scope, flat)
            }
            UntcFormula::Exists(vs, body) => {
                let mut body = (**body).clone();
                for v in vs {
                    if scope.contains(v) {
                        let new = self.fresh.var("z");
                        body = subst(&body, v, &new);
                        scope.insert(new);
                    } else {
                        scope.insert(v.clone());
                    }
                }
                self.collect(&body, scope, flat)
            }
            UntcFormula::Rel(r, args) => {
                let atom = match args.as_slice() {
                    [w] => Atom::p(Program::test(Formula::prop(r.clone())), w.clone(), w.clone()),
                    [a, b] => Atom::p(Program::atomic(r.clone()), a.clone(), b.clone()),
                    _ => Atom::r(r.clone(), args.clone()).map_err(|e| TranslateError::NotNormalForm(e.to_string()))?,
                };
                flat.atoms.push(atom);
                Ok(())
            }
            UntcFormula::Eq(a, b) => {
                flat.atoms.push(Atom::p(Program::Epsilon, a.clone(), b.clone()));
                Ok(())
            }
            UntcFormula::Tc { u, v, body, x, y } => {
                let step = self.program(body, u, v)?;
                flat.atoms.push(Atom::p(Program::plus(step), x.clone(), y.clone()));
                Ok(())
            }
            UntcFormula::Not(_) | UntcFormula::Or(..) => {
                let free: Vec<Var> = f.free_vars().into_iter().collect();
                match free.as_slice() {
                    [] => {
                        let any = Var::new("x");
                        flat.sentences.push(self.formula(f, &any)?);
                    }
                    [w] => {
                        let t = self.formula(f, w)?;
                        flat.atoms.push(Atom::p(Program::test(t), w.clone(), w.clone()));
                    }
                    [a, b] => {
                        let p = self.program(f, a, b)?;
                        flat.atoms.push(Atom::p(p, a.clone(), b.clone()));
                    }
                    _ => {
                        return Err(TranslateError::NotNormalForm(format!(
                            "disjunction over {} free variables inside a conjunction",
                            free.len()
                        )))
                    }
                }
                Ok(())
            }
        }
    }
}

fn test_of(sentences: Vec<Formula>) -> Option<Program> {
    (!sentences.is_empty()).then(|| Program::test(Formula::and_all(sentences)))
}

fn conj(atoms: Vec<Atom>, s: &Var, t: &Var) -> Program {
    Program::conj(ConjProgram::new(atoms, s.clone(), t.clone()).expect("endpoints occur in their component"))
}

/// Splits off the atoms connected to `z`.
fn split_components(atoms: Vec<Atom>, z: &Var) -> (Vec<Atom>, Vec<Atom>) {
    let vars: Vec<Var> = atoms.iter().flat_map(|a| a.vars()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let Some(start) = vars.iter().position(|v| v == z) else { return (Vec::new(), atoms) };
    let mut g = UGraph::new(vars.len());
    for a in &atoms {
        let ix: Vec<usize> = a.vars().iter().map(|v| vars.iter().position(|w| w == *v).expect("listed")).collect();
        for w in ix.windows(2) {
            g.add_edge(w[0], w[1]);
        }
    }
    let reach = g.bfs(start);
    atoms.into_iter().partition(|a| {
        let v = a.vars()[0];
        reach[vars.iter().position(|w| w == v).expect("listed")].is_some()
    })
}

/// Formula for at most one free variable, program over the two free variables in name
/// order otherwise.
pub fn untc_to_ucpdl(nf: &NormalFormUntc) -> Result<Expression, TranslateError> {
    let free: Vec<Var> = nf.formula.free_vars().into_iter().collect();
    let mut t = ToUcpdl { fresh: Fresh::default() };
    match free.as_slice() {
        [] => Ok(t.formula(&nf.formula, &Var::new("x"))?.into()),
        [x] => Ok(t.formula(&nf.formula, x)?.into()),
        [x, y] => Ok(t.program(&nf.formula, x, y)?.into()),
        _ => Err(TranslateError::TooManyFreeVars(free.len())),
    }
}

struct ToUntc {
    fresh: Fresh,
}

impl ToUntc {
    fn formula(&mut self, f: &Formula, x: &Var) -> Result<UntcFormula, TranslateError> {
        Ok(match f {
            Formula::Prop(p) => UntcFormula::Rel(p.clone(), vec![x.clone()]),
            Formula::Not(g) => UntcFormula::not(self.formula(g, x)?),
            Formula::And(l, r) => UntcFormula::and(self.formula(l, x)?, self.formula(r, x)?),
            Formula::Diamond(p) => {
                let y = self.fresh.var("y");
                UntcFormula::exists(vec![y.clone()], self.program(p, x, &y)?)
            }
            Formula::Loop(p) => {
                let y = self.fresh.var("y");
                let body = UntcFormula::and(UntcFormula::eq(x.clone(), y.clone()), self.program(p, x, &y)?);
                UntcFormula::exists(vec![y], body)
            }
        })
    }

    /// `x` and `y` must be distinct.
    fn program(&mut self, p: &Program, x: &Var, y: &Var) -> Result<UntcFormula, TranslateError> {
        Ok(match p {
            Program::Epsilon => UntcFormula::eq(x.clone(), y.clone()),
            Program::Universal => UntcFormula::and(UntcFormula::eq(x.clone(), x.clone()), UntcFormula::eq(y.clone(), y.clone())),
            Program::Atomic(a) => UntcFormula::Rel(a.clone(), vec![x.clone(), y.clone()]),
            Program::Converse(a) => UntcFormula::Rel(a.clone(), vec![y.clone(), x.clone()]),
            Program::Union(l, r) => UntcFormula::or(self.program(l, x, y)?, self.program(r, x, y)?),
            Program::Intersect(l, r) => UntcFormula::and(self.program(l, x, y)?, self.program(r, x, y)?),
            Program::Compose(l, r) => {
                let z = self.fresh.var("z");
                let body = UntcFormula::and(self.program(l, x, &z)?, self.program(r, &z, y)?);
                UntcFormula::exists(vec![z], body)
            }
            Program::Test(f) => UntcFormula::and(UntcFormula::eq(x.clone(), y.clone()), self.formula(f, x)?),
            Program::Star(q) => {
                let (u, v) = (self.fresh.var("u"), self.fresh.var("v"));
                let body = self.program(q, &u, &v)?;
                UntcFormula::or(UntcFormula::eq(x.clone(), y.clone()), UntcFormula::tc(u, v, body, x.clone(), y.clone()))
            }
            Program::Conj(c) => {
                let renamed: Vec<(Var, Var)> = c.vars().into_iter().map(|v| (v, self.fresh.var("c"))).collect();
                let r = |v: &Var| renamed.iter().find(|(o, _)| o == v).map(|(_, n)| n.clone()).expect("variable of C");
                let mut parts = vec![UntcFormula::eq(x.clone(), r(&c.source)), UntcFormula::eq(y.clone(), r(&c.target))];
                for a in &c.atoms {
                    parts.push(match a {
                        Atom::R { relation, args } => UntcFormula::Rel(relation.clone(), args.iter().map(r).collect()),
                        Atom::P { program, x: a, y: b } => {
                            let (a, b) = (r(a), r(b));
                            if a == b {
                                let w = self.fresh.var("w");
                                let inner = UntcFormula::and(UntcFormula::eq(a.clone(), w.clone()), self.program(program, &a, &w)?);
                                UntcFormula::exists(vec![w], inner)
                            } else {
                                self.program(program, &a, &b)?
                            }
                        }
                    });
                }
                let body = UntcFormula::and_all(parts).expect("nonempty");
                UntcFormula::exists(renamed.into_iter().map(|(_, n)| n).collect(), body)
            }
        })
    }
}

/// `T^x` on formulas (free variable `x`), `T^(x,y)` on programs.
pub fn ucpdl_to_untc(e: &Expression) -> Result<UntcFormula, TranslateError> {
    let mut t = ToUntc { fresh: Fresh::default() };
    let (x, y) = (Var::new("x"), Var::new("y"));
    let out = match e {
        Expression::Formula(f) => t.formula(f, &x)?,
        Expression::Program(p) => t.program(p, &x, &y)?,
    };
    out.validate().map_err(|e| TranslateError::DialectViolation(e.to_string()))?;
    Ok(out)
}
