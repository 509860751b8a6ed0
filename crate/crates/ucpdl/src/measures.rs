//! Size and width measures, and dialect membership.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{contains_conj, ConjProgram, Expression, Formula, Name, Node, Program};
use crate::graph::underlying_graphs;
use crate::treedecomp::treewidth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Measures {
    pub pdl_size: usize,
    pub cq_width: usize,
    /// Zero when the expression contains conjunctive programs; see `iwidth_defined`.
    pub i_width: usize,
    pub iwidth_defined: bool,
    pub nesting_depth: usize,
    pub star_depth: usize,
    pub expr_tree_width: usize,
}

pub fn measures(e: &Expression) -> Measures {
    let defined = !contains_conj(e);
    Measures {
        pdl_size: pdl_size(e),
        cq_width: cq_width(e),
        i_width: if defined { i_width(e) } else { 0 },
        iwidth_defined: defined,
        nesting_depth: nesting_depth(e),
        star_depth: star_depth(e),
        expr_tree_width: expr_tree_width(e),
    }
}

pub fn pdl_size(e: &Expression) -> usize {
    match e {
        Expression::Formula(f) => formula_size(f),
        Expression::Program(p) => program_size(p),
    }
}

fn formula_size(f: &Formula) -> usize {
    match f {
        Formula::Prop(_) => 1,
        Formula::Not(g) => 1 + formula_size(g),
        Formula::And(l, r) => formula_size(l) + formula_size(r),
        Formula::Diamond(p) | Formula::Loop(p) => 1 + program_size(p),
    }
}

pub fn program_size(p: &Program) -> usize {
    match p {
        Program::Epsilon | Program::Universal | Program::Atomic(_) | Program::Converse(_) => 1,
        Program::Star(q) => 1 + program_size(q),
        Program::Test(f) => 1 + formula_size(f),
        Program::Union(l, r) | Program::Compose(l, r) | Program::Intersect(l, r) => {
            program_size(l) + program_size(r)
        }
        Program::Conj(c) => {
            c.r_atoms().map(|(_, args)| args.len()).sum::<usize>()
                + c.p_atoms().map(|(q, _, _)| 1 + program_size(q)).sum::<usize>()
        }
    }
}

/// Conjunctive width of a single program; intersections add up.
pub fn program_cq_width(p: &Program) -> usize {
    match p {
        Program::Epsilon
        | Program::Universal
        | Program::Atomic(_)
        | Program::Converse(_)
        | Program::Test(_) => 1,
        Program::Union(l, r) | Program::Compose(l, r) => program_cq_width(l).max(program_cq_width(r)),
        Program::Star(q) => program_cq_width(q),
        Program::Intersect(l, r) => program_cq_width(l) + program_cq_width(r),
        Program::Conj(c) => conj_cq_width(c),
    }
}

pub fn conj_cq_width(c: &ConjProgram) -> usize {
    c.r_atoms().map(|(_, args)| args.len()).sum::<usize>()
        + c.p_atoms().map(|(q, _, _)| program_cq_width(q)).sum::<usize>()
}

/// Maximum conjunctive width of any program inside `e`, or 1 when there is none.
pub fn cq_width(e: &Expression) -> usize {
    let mut best = 1;
    e.walk(&mut |n| {
        if let Node::Program(p) = n {
            best = best.max(program_cq_width(p));
        }
    });
    best
}

fn program_i_width(p: &Program) -> usize {
    match p {
        Program::Union(l, r) | Program::Compose(l, r) => program_i_width(l).max(program_i_width(r)),
        Program::Star(q) => program_i_width(q),
        Program::Intersect(l, r) => program_i_width(l) + program_i_width(r),
        Program::Conj(_) => 0,
        _ => 1,
    }
}

/// Maximum intersection width of any program inside `e`, or 1 when there is none.
pub fn i_width(e: &Expression) -> usize {
    let mut best = 1;
    e.walk(&mut |n| {
        if let Node::Program(p) = n {
            best = best.max(program_i_width(p));
        }
    });
    best
}

pub fn nesting_depth(e: &Expression) -> usize {
    fn f(x: &Formula) -> usize {
        match x {
            Formula::Prop(_) => 0,
            Formula::Not(g) => f(g),
            Formula::And(l, r) => f(l).max(f(r)),
            Formula::Diamond(q) | Formula::Loop(q) => p(q),
        }
    }
    fn p(x: &Program) -> usize {
        match x {
            Program::Test(g) => 1 + f(g),
            other => other.subprograms().into_iter().map(p).max().unwrap_or(0),
        }
    }
    match e {
        Expression::Formula(x) => f(x),
        Expression::Program(x) => p(x),
    }
}

pub fn star_depth(e: &Expression) -> usize {
    fn f(x: &Formula) -> usize {
        match x {
            Formula::Prop(_) => 0,
            Formula::Not(g) => f(g),
            Formula::And(l, r) => f(l).max(f(r)),
            Formula::Diamond(q) | Formula::Loop(q) => p(q),
        }
    }
    fn p(x: &Program) -> usize {
        match x {
            Program::Star(q) => 1 + p(q),
            Program::Test(g) => f(g),
            other => other.subprograms().into_iter().map(p).max().unwrap_or(0),
        }
    }
    match e {
        Expression::Formula(x) => f(x),
        Expression::Program(x) => p(x),
    }
}

/// Tree-width of the full underlying graph of a conjunctive program.
pub fn conj_tree_width(c: &ConjProgram) -> usize {
    treewidth(&underlying_graphs(c).gfull).unwrap_or(usize::MAX)
}

pub fn expr_tree_width(e: &Expression) -> usize {
    let mut best = 0;
    e.walk(&mut |n| {
        if let Node::Program(Program::Conj(c)) = n {
            best = best.max(conj_tree_width(c));
        }
    });
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    Pdl,
    Cpdl,
    LoopCpdl,
    Icpdl,
    CpdlPlus,
    UcpdlPlus,
    IcpdlPlus,
    /// CPDL⁺ with every conjunctive program of tree-width at most `k`.
    CpdlPlusTw(usize),
    /// As `CpdlPlusTw` with intersection allowed.
    IcpdlPlusTw(usize),
    /// UCPDL⁺ with intersection.
    IucpdlPlus,
    /// Every construct, including loop alongside conjunctive programs.
    Any,
}

#[derive(Clone, Copy, Debug, Default)]
struct Allowed {
    converse: bool,
    loops: bool,
    intersect: bool,
    conj: bool,
    universal: bool,
    tw: Option<usize>,
}

impl Dialect {
    fn allowed(self) -> Allowed {
        let cpdl = Allowed { converse: true, ..Allowed::default() };
        let plus = Allowed { conj: true, ..cpdl };
        match self {
            Dialect::Pdl => Allowed::default(),
            Dialect::Cpdl => cpdl,
            Dialect::LoopCpdl => Allowed { loops: true, ..cpdl },
            Dialect::Icpdl => Allowed { intersect: true, ..cpdl },
            Dialect::CpdlPlus => plus,
            Dialect::UcpdlPlus => Allowed { universal: true, ..plus },
            Dialect::IcpdlPlus => Allowed { intersect: true, ..plus },
            Dialect::CpdlPlusTw(k) => Allowed { tw: Some(k), ..plus },
            Dialect::IcpdlPlusTw(k) => Allowed { tw: Some(k), intersect: true, ..plus },
            Dialect::IucpdlPlus => Allowed { universal: true, intersect: true, ..plus },
            Dialect::Any => Allowed { universal: true, intersect: true, loops: true, ..plus },
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Pdl => write!(f, "PDL"),
            Dialect::Cpdl => write!(f, "CPDL"),
            Dialect::LoopCpdl => write!(f, "loop-CPDL"),
            Dialect::Icpdl => write!(f, "ICPDL"),
            Dialect::CpdlPlus => write!(f, "CPDL+"),
            Dialect::UcpdlPlus => write!(f, "UCPDL+"),
            Dialect::IcpdlPlus => write!(f, "ICPDL+"),
            Dialect::CpdlPlusTw(k) => write!(f, "CPDL+(TW{k})"),
            Dialect::IcpdlPlusTw(k) => write!(f, "ICPDL+(TW{k})"),
            Dialect::IucpdlPlus => write!(f, "IUCPDL+"),
            Dialect::Any => write!(f, "any"),
        }
    }
}

/// First node of `e` not permitted in `d`, described in words.
pub fn dialect_violation(e: &Expression, d: Dialect) -> Option<String> {
    let allow = d.allowed();
    let mut found: Option<String> = None;
    e.walk(&mut |n| {
        if found.is_some() {
            return;
        }
        found = match n {
            Node::Formula(Formula::Loop(_)) if !allow.loops => Some("loop".into()),
            Node::Program(Program::Converse(a)) if !allow.converse => Some(format!("converse -{a}")),
            Node::Program(Program::Intersect(..)) if !allow.intersect => Some("intersection".into()),
            Node::Program(Program::Universal) if !allow.universal => Some("universal program U".into()),
            Node::Program(Program::Conj(_)) if !allow.conj => Some("conjunctive program".into()),
            Node::Program(Program::Conj(c)) => {
                let g = underlying_graphs(c);
                if !allow.universal && !g.gc.is_connected() {
                    Some("conjunctive program with disconnected atoms".into())
                } else {
                    match allow.tw {
                        Some(k) if conj_tree_width(c) > k => {
                            Some(format!("conjunctive program of tree-width above {k}"))
                        }
                        _ => None,
                    }
                }
            }
            _ => None,
        };
    });
    found
}

pub fn classify_dialect(e: &Expression, d: Dialect) -> bool {
    dialect_violation(e, d).is_none()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Proposition,
    Program,
    Relation(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Proposition => write!(f, "proposition"),
            Role::Program => write!(f, "atomic program"),
            Role::Relation(n) => write!(f, "{n}-ary relation"),
        }
    }
}

/// A name used in two different roles, if any.
pub fn role_conflict(e: &Expression) -> Option<(Name, Role, Role)> {
    let mut roles: BTreeMap<Name, Role> = BTreeMap::new();
    let mut conflict = None;
    let mut note = |name: &Name, role: Role| {
        if conflict.is_some() {
            return;
        }
        match roles.get(name) {
            Some(&prev) if prev != role => conflict = Some((name.clone(), prev, role)),
            Some(_) => {}
            None => {
                roles.insert(name.clone(), role);
            }
        }
    };
    e.walk(&mut |n| match n {
        Node::Formula(Formula::Prop(p)) => note(p, Role::Proposition),
        Node::Program(Program::Atomic(a) | Program::Converse(a)) => note(a, Role::Program),
        Node::Program(Program::Conj(c)) => {
            for (r, args) in c.r_atoms() {
                note(r, Role::Relation(args.len()));
            }
        }
        _ => {}
    });
    conflict
}
