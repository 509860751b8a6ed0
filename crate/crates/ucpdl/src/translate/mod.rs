//! Semantics-preserving translations between dialects.

mod tw2;
mod untc;

use thiserror::Error;

use crate::ast::{Atom, ConjProgram, Formula, Program, Var};

pub use tw2::{lemita_program, tw2_to_icpdl, tw2_to_icpdl_program};
pub use untc::{ucpdl_to_untc, untc_normal_form, untc_to_ucpdl, NormalFormUntc, DEFAULT_NODE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("input is outside the source dialect: {0}")]
    DialectViolation(String),
    #[error("conjunctive program has the wrong shape: {0}")]
    ShapeViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("tree-width {found} exceeds the bound {bound}")]
    WidthExceeded { found: usize, bound: usize },
    #[error("formula has {0} free variables; at most 2 are supported")]
    TooManyFreeVars(usize),
    #[error("normal form exceeds {0} nodes")]
    BlowupExceeded(usize),
    #[error("formula is not in normal form: {0}")]
    NotNormalForm(String),
}

/// Deterministic supply of reserved names (`$` prefix, unparsable).
#[derive(Debug, Default)]
pub(crate) struct Fresh {
    next: usize,
}

impl Fresh {
    pub(crate) fn var(&mut self, stem: &str) -> Var {
        self.next += 1;
        Var::from(format!("${stem}{}", self.next))
    }
}

fn var_x() -> Var {
    Var::new("x")
}

fn var_y() -> Var {
    Var::new("y")
}

/// Tr₁: replaces `loop(π)` by `<{π(x,x)}[x,x]>`.
pub fn loop_to_conj(f: &Formula) -> Result<Formula, TranslateError> {
    LoopToConj.formula(f)
}

pub fn loop_to_conj_program(p: &Program) -> Result<Program, TranslateError> {
    LoopToConj.program(p)
}

/// Tr₂: replaces `{π1(x,x),...}[x,x]` by `(loop(π1) & ...)?`.
pub fn conj_to_loop(f: &Formula) -> Result<Formula, TranslateError> {
    ConjToLoop.formula(f)
}

pub fn conj_to_loop_program(p: &Program) -> Result<Program, TranslateError> {
    ConjToLoop.program(p)
}

/// Tr₃: replaces `π1 & π2` by `{π1(x,y), π2(x,y)}[x,y]` in ICPDL input.
pub fn icpdl_to_conj(f: &Formula) -> Result<Formula, TranslateError> {
    IcpdlToConj.formula(f)
}

pub fn icpdl_to_conj_program(p: &Program) -> Result<Program, TranslateError> {
    IcpdlToConj.program(p)
}

/// Removes every intersection, including those nested in conjunctive programs.
pub fn elim_intersection(f: &Formula) -> Formula {
    match ElimIntersection.formula(f) {
        Ok(g) => g,
        Err(never) => match never {},
    }
}

pub fn elim_intersection_program(p: &Program) -> Program {
    match ElimIntersection.program(p) {
        Ok(q) => q,
        Err(never) => match never {},
    }
}

fn intersection_as_conj(l: Program, r: Program) -> Program {
    let c = ConjProgram::new([Atom::p(l, var_x(), var_y()), Atom::p(r, var_x(), var_y())], var_x(), var_y())
        .expect("both endpoints occur");
    Program::conj(c)
}

/// Homomorphic rewriting with per-translation overrides.
pub(crate) trait Rewrite {
    type Error;

    fn on_loop(&mut self, p: Program) -> Result<Formula, Self::Error>;
    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, Self::Error>;
    fn on_universal(&mut self) -> Result<Program, Self::Error> {
        Ok(Program::Universal)
    }
    /// Receives the conjunctive program with its atoms already rewritten.
    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, Self::Error>;

    fn formula(&mut self, f: &Formula) -> Result<Formula, Self::Error> {
        Ok(match f {
            Formula::Prop(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.formula(g)?),
            Formula::And(l, r) => Formula::and(self.formula(l)?, self.formula(r)?),
            Formula::Diamond(p) => Formula::diamond(self.program(p)?),
            Formula::Loop(p) => {
                let p = self.program(p)?;
                self.on_loop(p)?
            }
        })
    }

    fn program(&mut self, p: &Program) -> Result<Program, Self::Error> {
        Ok(match p {
            Program::Epsilon | Program::Atomic(_) | Program::Converse(_) => p.clone(),
            Program::Universal => self.on_universal()?,
            Program::Union(l, r) => Program::union(self.program(l)?, self.program(r)?),
            Program::Compose(l, r) => Program::compose(self.program(l)?, self.program(r)?),
            Program::Star(q) => Program::star(self.program(q)?),
            Program::Test(f) => Program::test(self.formula(f)?),
            Program::Intersect(l, r) => {
                let (l, r) = (self.program(l)?, self.program(r)?);
                self.on_intersect(l, r)?
            }
            Program::Conj(c) => {
                let atoms = c
                    .atoms
                    .iter()
                    .map(|a| match a {
                        Atom::P { program, x, y } => Ok(Atom::p(self.program(program)?, x.clone(), y.clone())),
                        Atom::R { .. } => Ok(a.clone()),
                    })
                    .collect::<Result<_, Self::Error>>()?;
                self.on_conj(ConjProgram { atoms, source: c.source.clone(), target: c.target.clone() })?
            }
        })
    }
}

struct LoopToConj;

impl Rewrite for LoopToConj {
    type Error = TranslateError;

    fn on_loop(&mut self, p: Program) -> Result<Formula, TranslateError> {
        let c = ConjProgram::new([Atom::p(p, var_x(), var_x())], var_x(), var_x()).expect("x occurs");
        Ok(Formula::diamond(Program::conj(c)))
    }

    fn on_intersect(&mut self, _: Program, _: Program) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("intersection is not loop-CPDL".into()))
    }

    fn on_universal(&mut self) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("universal program is not loop-CPDL".into()))
    }

    fn on_conj(&mut self, _: ConjProgram) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("conjunctive program is not loop-CPDL".into()))
    }
}

struct ConjToLoop;

impl Rewrite for ConjToLoop {
    type Error = TranslateError;

    fn on_loop(&mut self, p: Program) -> Result<Formula, TranslateError> {
        Ok(Formula::loop_of(p))
    }

    fn on_intersect(&mut self, _: Program, _: Program) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("intersection has no loop-CPDL counterpart".into()))
    }

    fn on_universal(&mut self) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("universal program has no loop-CPDL counterpart".into()))
    }

    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, TranslateError> {
        if c.source != c.target {
            return Err(TranslateError::ShapeViolation(format!("endpoints {} and {} differ", c.source, c.target)));
        }
        let loops = c
            .atoms
            .iter()
            .map(|a| match a {
                Atom::P { program, x, y } if *x == c.source && *y == c.source => Ok(Formula::loop_of(program.clone())),
                _ => Err(TranslateError::ShapeViolation(format!("atom outside the self-loop shape in {}", Program::conj(c.clone())))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Program::test(Formula::and_all(loops)))
    }
}

struct IcpdlToConj;

impl Rewrite for IcpdlToConj {
    type Error = TranslateError;

    fn on_loop(&mut self, _: Program) -> Result<Formula, TranslateError> {
        Err(TranslateError::DialectViolation("loop is not ICPDL".into()))
    }

    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, TranslateError> {
        Ok(intersection_as_conj(l, r))
    }

    fn on_universal(&mut self) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("universal program is not ICPDL".into()))
    }

    fn on_conj(&mut self, _: ConjProgram) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("conjunctive program is not ICPDL".into()))
    }
}

struct ElimIntersection;

impl Rewrite for ElimIntersection {
    type Error = std::convert::Infallible;

    fn on_loop(&mut self, p: Program) -> Result<Formula, Self::Error> {
        Ok(Formula::loop_of(p))
    }

    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, Self::Error> {
        Ok(intersection_as_conj(l, r))
    }

    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, Self::Error> {
        Ok(Program::conj(c))
    }
}
