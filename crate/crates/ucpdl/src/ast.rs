//! Shared expression tree for every dialect of the family.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned identifier: propositions, atomic programs, relation names and variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

/// Variables of conjunctive programs and UNTC formulas share the name type.
pub type Var = Name;

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names starting with `$` are produced by translations and cannot be parsed.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('$')
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(Name),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Diamond(Box<Program>),
    Loop(Box<Program>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Epsilon,
    Universal,
    Atomic(Name),
    Converse(Name),
    Union(Box<Program>, Box<Program>),
    Compose(Box<Program>, Box<Program>),
    Star(Box<Program>),
    Test(Box<Formula>),
    Intersect(Box<Program>, Box<Program>),
    Conj(Box<ConjProgram>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    P { program: Program, x: Var, y: Var },
    R { relation: Name, args: Vec<Var> },
}

/// Conjunctive program `C[source, target]`; atoms form a set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjProgram {
    pub atoms: BTreeSet<Atom>,
    pub source: Var,
    pub target: Var,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expression {
    Formula(Formula),
    Program(Program),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("program is not an ICPDL program: contains {0}")]
    NotIcpdl(&'static str),
    #[error("variable {0} does not occur in the atoms of the conjunctive program")]
    DanglingVariable(Var),
    #[error("relation atom {relation} needs at least 3 arguments, got {arity}")]
    RelationArity { relation: Name, arity: usize },
}

impl Formula {
    pub fn prop(p: impl Into<Name>) -> Self {
        Formula::Prop(p.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    /// Derived disjunction `!(!l & !r)`.
    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(l), Formula::not(r)))
    }

    pub fn diamond(p: Program) -> Self {
        Formula::Diamond(Box::new(p))
    }

    pub fn loop_of(p: Program) -> Self {
        Formula::Loop(Box::new(p))
    }

    /// `true`, encoded as `<eps>`.
    pub fn top() -> Self {
        Formula::diamond(Program::Epsilon)
    }

    pub fn bottom() -> Self {
        Formula::not(Formula::top())
    }

    /// Left-nested conjunction; the empty conjunction is `<eps>`.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Self {
        fs.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Self {
        fs.into_iter().reduce(Formula::or).unwrap_or_else(Formula::bottom)
    }
}

impl Program {
    pub fn atomic(a: impl Into<Name>) -> Self {
        Program::Atomic(a.into())
    }

    pub fn converse(a: impl Into<Name>) -> Self {
        Program::Converse(a.into())
    }

    pub fn union(l: Program, r: Program) -> Self {
        Program::Union(Box::new(l), Box::new(r))
    }

    pub fn compose(l: Program, r: Program) -> Self {
        Program::Compose(Box::new(l), Box::new(r))
    }

    pub fn intersect(l: Program, r: Program) -> Self {
        Program::Intersect(Box::new(l), Box::new(r))
    }

    pub fn star(p: Program) -> Self {
        Program::Star(Box::new(p))
    }

    /// `p ; p*`
    pub fn plus(p: Program) -> Self {
        Program::compose(p.clone(), Program::star(p))
    }

    pub fn test(f: Formula) -> Self {
        Program::Test(Box::new(f))
    }

    pub fn conj(c: ConjProgram) -> Self {
        Program::Conj(Box::new(c))
    }

    pub fn union_all(ps: impl IntoIterator<Item = Program>) -> Option<Self> {
        ps.into_iter().reduce(Program::union)
    }

    pub fn intersect_all(ps: impl IntoIterator<Item = Program>) -> Option<Self> {
        ps.into_iter().reduce(Program::intersect)
    }

    pub fn compose_all(ps: impl IntoIterator<Item = Program>) -> Option<Self> {
        ps.into_iter().reduce(Program::compose)
    }

    /// Direct children in program position.
    pub fn subprograms(&self) -> Vec<&Program> {
        match self {
            Program::Union(l, r) | Program::Compose(l, r) | Program::Intersect(l, r) => vec![l, r],
            Program::Star(p) => vec![p],
            Program::Conj(c) => c.p_atoms().map(|(p, _, _)| p).collect(),
            _ => Vec::new(),
        }
    }
}

impl Atom {
    pub fn p(program: Program, x: impl Into<Var>, y: impl Into<Var>) -> Self {
        Atom::P { program, x: x.into(), y: y.into() }
    }

    pub fn r(relation: impl Into<Name>, args: Vec<Var>) -> Result<Self, AstError> {
        let relation = relation.into();
        if args.len() < 3 {
            return Err(AstError::RelationArity { relation, arity: args.len() });
        }
        Ok(Atom::R { relation, args })
    }

    pub fn vars(&self) -> Vec<&Var> {
        match self {
            Atom::P { x, y, .. } => vec![x, y],
            Atom::R { args, .. } => args.iter().collect(),
        }
    }
}

impl ConjProgram {
    pub fn new(
        atoms: impl IntoIterator<Item = Atom>,
        source: impl Into<Var>,
        target: impl Into<Var>,
    ) -> Result<Self, AstError> {
        let c = ConjProgram {
            atoms: atoms.into_iter().collect(),
            source: source.into(),
            target: target.into(),
        };
        let vars = c.vars();
        for v in [&c.source, &c.target] {
            if !vars.contains(v) {
                return Err(AstError::DanglingVariable(v.clone()));
            }
        }
        for a in &c.atoms {
            if let Atom::R { relation, args } = a {
                if args.len() < 3 {
                    return Err(AstError::RelationArity {
                        relation: relation.clone(),
                        arity: args.len(),
                    });
                }
            }
        }
        Ok(c)
    }

    /// Variables in name order.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(|a| a.vars().into_iter().cloned()).collect()
    }

    pub fn p_atoms(&self) -> impl Iterator<Item = (&Program, &Var, &Var)> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::P { program, x, y } => Some((program, x, y)),
            Atom::R { .. } => None,
        })
    }

    pub fn r_atoms(&self) -> impl Iterator<Item = (&Name, &[Var])> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::R { relation, args } => Some((relation, args.as_slice())),
            Atom::P { .. } => None,
        })
    }
}

impl From<Formula> for Expression {
    fn from(f: Formula) -> Self {
        Expression::Formula(f)
    }
}

impl From<Program> for Expression {
    fn from(p: Program) -> Self {
        Expression::Program(p)
    }
}

impl Expression {
    /// Direct children.
    pub fn children(&self) -> Vec<Expression> {
        match self {
            Expression::Formula(f) => match f {
                Formula::Prop(_) => vec![],
                Formula::Not(g) => vec![(**g).clone().into()],
                Formula::And(l, r) => vec![(**l).clone().into(), (**r).clone().into()],
                Formula::Diamond(p) | Formula::Loop(p) => vec![(**p).clone().into()],
            },
            Expression::Program(p) => match p {
                Program::Test(f) => vec![(**f).clone().into()],
                other => other.subprograms().into_iter().cloned().map(Into::into).collect(),
            },
        }
    }

    /// Visit every node, pre-order, without cloning.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(Node<'a>)) {
        match self {
            Expression::Formula(f) => walk_formula(f, visit),
            Expression::Program(p) => walk_program(p, visit),
        }
    }
}

/// Borrowed view of a node during traversal.
#[derive(Clone, Copy, Debug)]
pub enum Node<'a> {
    Formula(&'a Formula),
    Program(&'a Program),
}

pub fn walk_formula<'a>(f: &'a Formula, visit: &mut impl FnMut(Node<'a>)) {
    visit(Node::Formula(f));
    match f {
        Formula::Prop(_) => {}
        Formula::Not(g) => walk_formula(g, visit),
        Formula::And(l, r) => {
            walk_formula(l, visit);
            walk_formula(r, visit);
        }
        Formula::Diamond(p) | Formula::Loop(p) => walk_program(p, visit),
    }
}

pub fn walk_program<'a>(p: &'a Program, visit: &mut impl FnMut(Node<'a>)) {
    visit(Node::Program(p));
    match p {
        Program::Test(f) => walk_formula(f, visit),
        other => {
            for c in other.subprograms() {
                walk_program(c, visit);
            }
        }
    }
}

/// Smallest set containing `e` and closed under taking subexpressions,
/// including the programs of p-atoms inside conjunctive programs.
pub fn subexpressions(e: &Expression) -> BTreeSet<Expression> {
    let mut out = BTreeSet::new();
    e.walk(&mut |n| {
        out.insert(match n {
            Node::Formula(f) => Expression::Formula(f.clone()),
            Node::Program(p) => Expression::Program(p.clone()),
        });
    });
    out
}

/// Program denoting the converse relation.
pub fn reverse(p: &Program) -> Result<Program, AstError> {
    Ok(match p {
        Program::Epsilon | Program::Test(_) => p.clone(),
        Program::Atomic(a) => Program::Converse(a.clone()),
        Program::Converse(a) => Program::Atomic(a.clone()),
        Program::Union(l, r) => Program::union(reverse(l)?, reverse(r)?),
        Program::Intersect(l, r) => Program::intersect(reverse(l)?, reverse(r)?),
        Program::Compose(l, r) => Program::compose(reverse(r)?, reverse(l)?),
        Program::Star(q) => Program::star(reverse(q)?),
        Program::Universal => return Err(AstError::NotIcpdl("the universal program")),
        Program::Conj(_) => return Err(AstError::NotIcpdl("a conjunctive program")),
    })
}

/// Atomic program names occurring anywhere below `e`, converses included.
pub fn atomic_programs(e: &Expression) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    e.walk(&mut |n| {
        if let Node::Program(Program::Atomic(a) | Program::Converse(a)) = n {
            out.insert(a.clone());
        }
    });
    out
}

pub fn propositions(e: &Expression) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    e.walk(&mut |n| {
        if let Node::Formula(Formula::Prop(p)) = n {
            out.insert(p.clone());
        }
    });
    out
}

/// Higher-arity relation names with their arities.
pub fn relation_names(e: &Expression) -> BTreeSet<(Name, usize)> {
    let mut out = BTreeSet::new();
    e.walk(&mut |n| {
        if let Node::Program(Program::Conj(c)) = n {
            for (r, args) in c.r_atoms() {
                out.insert((r.clone(), args.len()));
            }
        }
    });
    out
}

pub fn contains_conj(e: &Expression) -> bool {
    let mut found = false;
    e.walk(&mut |n| found |= matches!(n, Node::Program(Program::Conj(_))));
    found
}
