//! Model checking by bottom-up evaluation of subexpressions.

mod conj;
mod sets;
mod untc;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::ast::{Atom, ConjProgram, Formula, Name, Program, Var};
use crate::measures::Role;
use crate::structure::{Structure, World};

pub use conj::eval_conj;
pub use sets::{PairSet, WorldSet};
pub use untc::{eval_untc, untc_relation, Assignment};

/// Default cap on partial assignments and closure work.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{name} is used as a {used} but the structure interprets it as a {declared}")]
    ArityMismatch { name: Name, used: Role, declared: Role },
    #[error("evaluation budget of {0} partial assignments exceeded")]
    BudgetExceeded(usize),
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("output variable {0} does not occur in the atoms")]
    UnknownOutputVariable(Var),
    #[error("conjunctive program has {0} variables; decomposition supports at most 16")]
    TooManyVariables(usize),
}

/// Strategy for evaluating conjunctive programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConjMode {
    /// Enumerate every assignment of worlds to variables.
    Brute,
    /// Join bag relations bottom-up along an optimal tree decomposition.
    #[default]
    Decomp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub mode: ConjMode,
    pub budget: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { mode: ConjMode::Decomp, budget: DEFAULT_BUDGET }
    }
}

/// Evaluation context caching the denotations of conjunctive subexpressions.
///
/// Only conjunctive programs are memoised: hashing a key costs time linear in
/// its size, so caching every node would be quadratic on deep expressions.
pub struct Evaluator<'k> {
    k: &'k Structure,
    options: EvalOptions,
    formulas: HashMap<Formula, WorldSet>,
    programs: HashMap<Program, PairSet>,
}

impl<'k> Evaluator<'k> {
    pub fn new(k: &'k Structure, options: EvalOptions) -> Self {
        Evaluator { k, options, formulas: HashMap::new(), programs: HashMap::new() }
    }

    pub fn structure(&self) -> &'k Structure {
        self.k
    }

    pub fn options(&self) -> EvalOptions {
        self.options
    }

    fn n(&self) -> usize {
        self.k.len()
    }

    fn check_role(&self, name: &Name, used: Role) -> Result<(), EvalError> {
        let declared = if self.k.unary().contains_key(name) {
            Some(Role::Proposition)
        } else if self.k.binary().contains_key(name) {
            Some(Role::Program)
        } else {
            self.k.higher().get(name).map(|r| Role::Relation(r.arity))
        };
        match declared {
            Some(d) if d != used => Err(EvalError::ArityMismatch { name: name.clone(), used, declared: d }),
            _ => Ok(()),
        }
    }

    pub fn formula(&mut self, f: &Formula) -> Result<WorldSet, EvalError> {
        let cached = matches!(f, Formula::Diamond(p) if matches!(**p, Program::Conj(_)));
        if cached {
            if let Some(s) = self.formulas.get(f) {
                return Ok(s.clone());
            }
        }
        let n = self.n();
        let out = match f {
            Formula::Prop(p) => {
                self.check_role(p, Role::Proposition)?;
                match self.k.unary().get(p) {
                    Some(ws) => WorldSet::from_worlds(n, ws.iter().copied()),
                    None => WorldSet::empty(n),
                }
            }
            Formula::Not(g) => self.formula(g)?.complement(),
            Formula::And(l, r) => self.formula(l)?.intersection(&self.formula(r)?),
            Formula::Diamond(p) => match &**p {
                Program::Conj(c) => self.conj_domain(c)?,
                _ => self.program(p)?.domain(),
            },
            Formula::Loop(p) => self.program(p)?.loops(),
        };
        if cached {
            self.formulas.insert(f.clone(), out.clone());
        }
        Ok(out)
    }

    pub fn program(&mut self, p: &Program) -> Result<PairSet, EvalError> {
        let cached = matches!(p, Program::Conj(_));
        if cached {
            if let Some(r) = self.programs.get(p) {
                return Ok(r.clone());
            }
        }
        let n = self.n();
        let out = match p {
            Program::Epsilon => PairSet::identity(n),
            Program::Universal => PairSet::full(n),
            Program::Atomic(a) | Program::Converse(a) => {
                self.check_role(a, Role::Program)?;
                let r = match self.k.binary().get(a) {
                    Some(es) => PairSet::from_pairs(n, es.iter().copied()),
                    None => PairSet::empty(n),
                };
                if matches!(p, Program::Converse(_)) {
                    r.transpose()
                } else {
                    r
                }
            }
            Program::Union(l, r) => self.program(l)?.union(&self.program(r)?),
            Program::Intersect(l, r) => self.program(l)?.intersection(&self.program(r)?),
            Program::Compose(l, r) => self.program(l)?.compose(&self.program(r)?),
            Program::Star(q) => self.program(q)?.star(),
            Program::Test(f) => PairSet::diagonal_of(&self.formula(f)?),
            Program::Conj(c) => {
                let tuples = self.conj(&c.atoms, &[c.source.clone(), c.target.clone()])?;
                PairSet::from_pairs(n, tuples.into_iter().map(|t| (t[0], t[1])))
            }
        };
        if cached {
            self.programs.insert(p.clone(), out.clone());
        }
        Ok(out)
    }

    fn conj_domain(&mut self, c: &ConjProgram) -> Result<WorldSet, EvalError> {
        let tuples = self.conj(&c.atoms, std::slice::from_ref(&c.source))?;
        Ok(WorldSet::from_worlds(self.n(), tuples.into_iter().map(|t| t[0])))
    }

    /// Projections of satisfying assignments of `atoms` onto `out`.
    pub fn conj(&mut self, atoms: &BTreeSet<Atom>, out: &[Var]) -> Result<BTreeSet<Vec<World>>, EvalError> {
        conj::evaluate(self, atoms, out)
    }
}

pub fn eval_formula(k: &Structure, f: &Formula) -> Result<WorldSet, EvalError> {
    Evaluator::new(k, EvalOptions::default()).formula(f)
}

pub fn eval_program(k: &Structure, p: &Program) -> Result<PairSet, EvalError> {
    Evaluator::new(k, EvalOptions::default()).program(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ConjProgram;

    fn chain() -> Structure {
        let mut k = Structure::numbered(3);
        k.add_binary("a", 0, 1);
        k.add_binary("a", 1, 2);
        k
    }

    /// Directed 4-clique: an a-edge for every ordered pair of distinct worlds.
    pub(crate) fn clique4() -> Structure {
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

    pub(crate) fn xi4() -> Formula {
        let xs = ["x1", "x2", "x3", "x4"];
        let mut atoms = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                atoms.push(Atom::p(Program::atomic("a"), xs[i], xs[j]));
            }
        }
        let c = ConjProgram::new(atoms, "x1", "x4").unwrap();
        let c2 = ConjProgram::new(
            [Atom::p(Program::atomic("a"), "x1", "y"), Atom::p(Program::atomic("a"), "y", "y")],
            "x1",
            "y",
        )
        .unwrap();
        Formula::and(Formula::diamond(Program::conj(c)), Formula::not(Formula::diamond(Program::conj(c2))))
    }

    #[test]
    fn proposition() {
        let mut k = Structure::numbered(1);
        k.add_unary("p", 0);
        assert_eq!(eval_formula(&k, &Formula::prop("p")).unwrap().to_vec(), vec![0]);
    }

    #[test]
    fn top_is_everything() {
        assert_eq!(eval_formula(&chain(), &Formula::top()).unwrap().len(), 3);
    }

    #[test]
    fn converse_star_universal() {
        let k = chain();
        assert_eq!(eval_program(&k, &Program::converse("a")).unwrap().to_set(), [(1, 0), (2, 1)].into_iter().collect());
        assert_eq!(eval_program(&k, &Program::star(Program::atomic("a"))).unwrap().len(), 6);
        assert_eq!(eval_program(&k, &Program::Universal).unwrap().len(), 9);
    }

    #[test]
    fn clique_formula_holds_everywhere_on_the_clique() {
        assert_eq!(eval_formula(&clique4(), &xi4()).unwrap().len(), 4);
        let brute = Evaluator::new(&clique4(), EvalOptions { mode: ConjMode::Brute, ..Default::default() })
            .formula(&xi4())
            .unwrap();
        assert_eq!(brute.len(), 4);
    }

    #[test]
    fn role_mismatch_is_reported() {
        let k = chain();
        assert!(matches!(eval_formula(&k, &Formula::prop("a")), Err(EvalError::ArityMismatch { .. })));
    }

    #[test]
    fn unknown_names_are_empty() {
        let k = chain();
        assert!(eval_program(&k, &Program::atomic("zz")).unwrap().is_empty());
    }
}
