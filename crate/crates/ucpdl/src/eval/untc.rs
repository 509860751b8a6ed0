//! Direct first-order evaluation of UNTC formulas.

use std::collections::{BTreeSet, HashMap};

use super::{EvalError, PairSet};
use crate::ast::Var;
use crate::measures::Role;
use crate::structure::{Structure, World};
use crate::untc::UntcFormula;

/// Partial assignment of worlds to variables.
pub type Assignment = HashMap<Var, World>;

/// Truth of `f` under `nu`, which must bind every free variable.
pub fn eval_untc(k: &Structure, f: &UntcFormula, nu: &Assignment) -> Result<bool, EvalError> {
    UntcEval { k, closures: HashMap::new() }.holds(f, &mut nu.clone())
}

/// All tuples over `vars` satisfying `f`; `vars` must cover its free variables.
pub fn untc_relation(k: &Structure, f: &UntcFormula, vars: &[Var]) -> Result<BTreeSet<Vec<World>>, EvalError> {
    let mut ev = UntcEval { k, closures: HashMap::new() };
    let mut out = BTreeSet::new();
    let mut nu = Assignment::new();
    let mut tuple = vec![0; vars.len()];
    ev.relation(f, vars, 0, &mut tuple, &mut nu, &mut out)?;
    Ok(out)
}

struct UntcEval<'k> {
    k: &'k Structure,
    /// Closure bodies have exactly two free variables, so their relation is assignment independent.
    closures: HashMap<*const UntcFormula, PairSet>,
}

impl UntcEval<'_> {
    fn relation(
        &mut self,
        f: &UntcFormula,
        vars: &[Var],
        i: usize,
        tuple: &mut Vec<World>,
        nu: &mut Assignment,
        out: &mut BTreeSet<Vec<World>>,
    ) -> Result<(), EvalError> {
        if i == vars.len() {
            if self.holds(f, nu)? {
                out.insert(tuple.clone());
            }
            return Ok(());
        }
        for w in 0..self.k.len() {
            if let Some(&bound) = nu.get(&vars[i]) {
                if bound != w {
                    continue;
                }
                tuple[i] = w;
                return self.relation(f, vars, i + 1, tuple, nu, out);
            }
            tuple[i] = w;
            nu.insert(vars[i].clone(), w);
            self.relation(f, vars, i + 1, tuple, nu, out)?;
            nu.remove(&vars[i]);
        }
        Ok(())
    }

    fn lookup(nu: &Assignment, v: &Var) -> Result<World, EvalError> {
        nu.get(v).copied().ok_or_else(|| EvalError::UnboundVariable(v.clone()))
    }

    fn holds(&mut self, f: &UntcFormula, nu: &mut Assignment) -> Result<bool, EvalError> {
        Ok(match f {
            UntcFormula::Rel(r, args) => {
                let ws = args.iter().map(|a| Self::lookup(nu, a)).collect::<Result<Vec<_>, _>>()?;
                self.fact(r, &ws)?
            }
            UntcFormula::Eq(x, y) => Self::lookup(nu, x)? == Self::lookup(nu, y)?,
            UntcFormula::And(l, r) => self.holds(l, nu)? && self.holds(r, nu)?,
            UntcFormula::Or(l, r) => self.holds(l, nu)? || self.holds(r, nu)?,
            UntcFormula::Not(b) => !self.holds(b, nu)?,
            UntcFormula::Exists(vs, body) => {
                let saved: Vec<Option<World>> = vs.iter().map(|v| nu.get(v).copied()).collect();
                let found = self.exists(vs, 0, body, nu)?;
                for (v, s) in vs.iter().zip(saved) {
                    match s {
                        Some(w) => nu.insert(v.clone(), w),
                        None => nu.remove(v),
                    };
                }
                found
            }
            UntcFormula::Tc { u, v, body, x, y } => {
                let (a, b) = (Self::lookup(nu, x)?, Self::lookup(nu, y)?);
                let key = &**body as *const UntcFormula;
                if !self.closures.contains_key(&key) {
                    let n = self.k.len();
                    let mut step = PairSet::empty(n);
                    let mut inner = Assignment::new();
                    for c in 0..n {
                        for d in 0..n {
                            inner.insert(u.clone(), c);
                            inner.insert(v.clone(), d);
                            if self.holds(body, &mut inner)? {
                                step.insert(c, d);
                            }
                        }
                    }
                    self.closures.insert(key, step.plus());
                }
                self.closures[&key].contains(a, b)
            }
        })
    }

    fn exists(&mut self, vs: &[Var], i: usize, body: &UntcFormula, nu: &mut Assignment) -> Result<bool, EvalError> {
        if i == vs.len() {
            return self.holds(body, nu);
        }
        for w in 0..self.k.len() {
            nu.insert(vs[i].clone(), w);
            if self.exists(vs, i + 1, body, nu)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn fact(&self, r: &crate::ast::Name, ws: &[World]) -> Result<bool, EvalError> {
        let used = match ws.len() {
            1 => Role::Proposition,
            2 => Role::Program,
            n => Role::Relation(n),
        };
        let mismatch = |declared| EvalError::ArityMismatch { name: r.clone(), used, declared };
        if let Some(set) = self.k.unary().get(r) {
            return if ws.len() == 1 { Ok(set.contains(&ws[0])) } else { Err(mismatch(Role::Proposition)) };
        }
        if let Some(set) = self.k.binary().get(r) {
            return if ws.len() == 2 { Ok(set.contains(&(ws[0], ws[1]))) } else { Err(mismatch(Role::Program)) };
        }
        if let Some(rel) = self.k.higher().get(r) {
            return if ws.len() == rel.arity {
                Ok(rel.tuples.contains(ws))
            } else {
                Err(mismatch(Role::Relation(rel.arity)))
            };
        }
        Ok(false)
    }
}
