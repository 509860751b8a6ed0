//! Unary-negation first-order logic with binary transitive closure.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Name, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UntcFormula {
    Rel(Name, Vec<Var>),
    Eq(Var, Var),
    And(Box<UntcFormula>, Box<UntcFormula>),
    Or(Box<UntcFormula>, Box<UntcFormula>),
    Exists(Vec<Var>, Box<UntcFormula>),
    /// Negation of a formula with at most one free variable.
    Not(Box<UntcFormula>),
    /// `[TC_{u,v} body](x, y)`: at least one `body` step from `x` to `y`.
    Tc { u: Var, v: Var, body: Box<UntcFormula>, x: Var, y: Var },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UntcError {
    #[error("negated formula has free variables {0:?}; at most one is allowed")]
    NegationArity(Vec<Var>),
    #[error("transitive-closure body must have free variables exactly {{{u}, {v}}}, found {found:?}")]
    TcBody { u: Var, v: Var, found: Vec<Var> },
    #[error("transitive closure binds the same variable {0} twice")]
    TcSameVars(Var),
    #[error("relation {0} needs at least one argument")]
    EmptyRelation(Name),
    #[error("quantifier without variables")]
    EmptyQuantifier,
}

impl UntcFormula {
    pub fn rel(r: impl Into<Name>, args: &[&str]) -> Self {
        UntcFormula::Rel(r.into(), args.iter().map(|&a| Var::new(a)).collect())
    }

    pub fn eq(x: impl Into<Var>, y: impl Into<Var>) -> Self {
        UntcFormula::Eq(x.into(), y.into())
    }

    pub fn and(l: UntcFormula, r: UntcFormula) -> Self {
        UntcFormula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: UntcFormula, r: UntcFormula) -> Self {
        UntcFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn not(f: UntcFormula) -> Self {
        UntcFormula::Not(Box::new(f))
    }

    /// `exists vars. body`; an empty variable list returns `body` unchanged.
    pub fn exists(vars: Vec<Var>, body: UntcFormula) -> Self {
        if vars.is_empty() {
            body
        } else {
            UntcFormula::Exists(vars, Box::new(body))
        }
    }

    pub fn tc(u: impl Into<Var>, v: impl Into<Var>, body: UntcFormula, x: impl Into<Var>, y: impl Into<Var>) -> Self {
        UntcFormula::Tc { u: u.into(), v: v.into(), body: Box::new(body), x: x.into(), y: y.into() }
    }

    pub fn and_all(fs: impl IntoIterator<Item = UntcFormula>) -> Option<Self> {
        fs.into_iter().reduce(UntcFormula::and)
    }

    pub fn or_all(fs: impl IntoIterator<Item = UntcFormula>) -> Option<Self> {
        fs.into_iter().reduce(UntcFormula::or)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            UntcFormula::Rel(_, args) => args.iter().cloned().collect(),
            UntcFormula::Eq(x, y) => [x.clone(), y.clone()].into_iter().collect(),
            UntcFormula::And(l, r) | UntcFormula::Or(l, r) => {
                let mut s = l.free_vars();
                s.extend(r.free_vars());
                s
            }
            UntcFormula::Exists(vs, body) => {
                let mut s = body.free_vars();
                for v in vs {
                    s.remove(v);
                }
                s
            }
            UntcFormula::Not(body) => body.free_vars(),
            UntcFormula::Tc { x, y, .. } => [x.clone(), y.clone()].into_iter().collect(),
        }
    }

    /// Every variable occurring free or bound.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, s: &mut BTreeSet<Var>) {
        match self {
            UntcFormula::Rel(_, args) => s.extend(args.iter().cloned()),
            UntcFormula::Eq(x, y) => {
                s.insert(x.clone());
                s.insert(y.clone());
            }
            UntcFormula::And(l, r) | UntcFormula::Or(l, r) => {
                l.collect_vars(s);
                r.collect_vars(s);
            }
            UntcFormula::Exists(vs, body) => {
                s.extend(vs.iter().cloned());
                body.collect_vars(s);
            }
            UntcFormula::Not(body) => body.collect_vars(s),
            UntcFormula::Tc { u, v, body, x, y } => {
                s.extend([u.clone(), v.clone(), x.clone(), y.clone()]);
                body.collect_vars(s);
            }
        }
    }

    /// Structural well-formedness: unary negation and closed closure bodies.
    pub fn validate(&self) -> Result<(), UntcError> {
        match self {
            UntcFormula::Rel(r, args) if args.is_empty() => Err(UntcError::EmptyRelation(r.clone())),
            UntcFormula::Rel(..) | UntcFormula::Eq(..) => Ok(()),
            UntcFormula::And(l, r) | UntcFormula::Or(l, r) => {
                l.validate()?;
                r.validate()
            }
            UntcFormula::Exists(vs, body) => {
                if vs.is_empty() {
                    return Err(UntcError::EmptyQuantifier);
                }
                body.validate()
            }
            UntcFormula::Not(body) => {
                let fv = body.free_vars();
                if fv.len() > 1 {
                    return Err(UntcError::NegationArity(fv.into_iter().collect()));
                }
                body.validate()
            }
            UntcFormula::Tc { u, v, body, .. } => {
                if u == v {
                    return Err(UntcError::TcSameVars(u.clone()));
                }
                let fv = body.free_vars();
                if fv != [u.clone(), v.clone()].into_iter().collect() {
                    return Err(UntcError::TcBody { u: u.clone(), v: v.clone(), found: fv.into_iter().collect() });
                }
                body.validate()
            }
        }
    }

    /// Node count, used to bound rewriting.
    pub fn node_count(&self) -> usize {
        match self {
            UntcFormula::Rel(..) | UntcFormula::Eq(..) => 1,
            UntcFormula::And(l, r) | UntcFormula::Or(l, r) => 1 + l.node_count() + r.node_count(),
            UntcFormula::Exists(_, b) | UntcFormula::Not(b) => 1 + b.node_count(),
            UntcFormula::Tc { body, .. } => 1 + body.node_count(),
        }
    }
}

/// Size: arity for relation atoms, one per equality, quantified variable,
/// negation and closure, summed over connectives.
pub fn untc_size(f: &UntcFormula) -> usize {
    match f {
        UntcFormula::Rel(_, args) => args.len(),
        UntcFormula::Eq(..) => 1,
        UntcFormula::And(l, r) | UntcFormula::Or(l, r) => untc_size(l) + untc_size(r),
        UntcFormula::Exists(vs, body) => vs.len() + untc_size(body),
        UntcFormula::Not(body) => 1 + untc_size(body),
        UntcFormula::Tc { body, .. } => 1 + untc_size(body),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables() {
        let f = UntcFormula::exists(
            vec!["z".into()],
            UntcFormula::and(UntcFormula::rel("a", &["x", "z"]), UntcFormula::rel("b", &["z", "y"])),
        );
        assert_eq!(f.free_vars(), ["x".into(), "y".into()].into_iter().collect());
        let t = UntcFormula::tc("u", "v", UntcFormula::rel("a", &["u", "v"]), "x", "x");
        assert_eq!(t.free_vars().len(), 1);
    }

    #[test]
    fn validation() {
        let bad = UntcFormula::not(UntcFormula::rel("a", &["x", "y"]));
        assert!(matches!(bad.validate(), Err(UntcError::NegationArity(_))));
        let open = UntcFormula::tc("u", "v", UntcFormula::rel("a", &["u", "w"]), "x", "y");
        assert!(matches!(open.validate(), Err(UntcError::TcBody { .. })));
        let ok = UntcFormula::not(UntcFormula::exists(vec!["y".into()], UntcFormula::rel("a", &["x", "y"])));
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn sizes() {
        assert_eq!(untc_size(&UntcFormula::rel("R", &["x", "y", "z"])), 3);
        let f = UntcFormula::exists(vec!["z".into()], UntcFormula::and(UntcFormula::eq("x", "z"), UntcFormula::rel("p", &["z"])));
        assert_eq!(untc_size(&f), 1 + 1 + 1);
    }
}
