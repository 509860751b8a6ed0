//! Conjunctive programs of tree-width two into ICPDL.

use std::collections::BTreeSet;

use super::{Rewrite, TranslateError};
use crate::ast::{reverse, Atom, ConjProgram, Formula, Program, Var};
use crate::graph::underlying_graphs;
use crate::treedecomp::{bag_vars, clique_complete, normalize_rooted, TdError};

fn p_atoms(atoms: &BTreeSet<Atom>) -> Result<Vec<(&Program, &Var, &Var)>, TranslateError> {
    atoms
        .iter()
        .map(|a| match a {
            Atom::P { program, x, y } => Ok((program, x, y)),
            Atom::R { relation, .. } => {
                Err(TranslateError::PreconditionViolation(format!("relation atom {relation} is not a program atom")))
            }
        })
        .collect()
}

/// `Π_{z1 z2}`: every atom between the two variables, reversed when it points back.
fn pi_pair(atoms: &[(&Program, &Var, &Var)], z1: &Var, z2: &Var) -> Result<Program, TranslateError> {
    let mut parts = Vec::new();
    for &(p, a, b) in atoms {
        if a == z1 && b == z2 {
            parts.push(p.clone());
        }
    }
    for &(p, a, b) in atoms {
        if a == z2 && b == z1 {
            parts.push(reverse(p).map_err(|e| TranslateError::PreconditionViolation(e.to_string()))?);
        }
    }
    Program::intersect_all(parts)
        .ok_or_else(|| TranslateError::PreconditionViolation(format!("no atom joins {z1} and {z2}")))
}

/// `Π_z`: a test for every self-loop atom on `z`, `<eps>?` when there is none.
fn pi_single(atoms: &[(&Program, &Var, &Var)], z: &Var) -> Program {
    let loops = atoms
        .iter()
        .filter(|(_, a, b)| *a == z && *b == z)
        .map(|(p, _, _)| Formula::diamond(Program::intersect((*p).clone(), Program::Epsilon)));
    Program::test(Formula::and_all(loops))
}

/// ICPDL program equivalent to `C[x,y]` for a clique `C` over at most three variables.
pub fn lemita_program(atoms: &BTreeSet<Atom>, x: &Var, y: &Var) -> Result<Program, TranslateError> {
    let list = p_atoms(atoms)?;
    let vars: BTreeSet<Var> = list.iter().flat_map(|&(_, a, b)| [a.clone(), b.clone()]).collect();
    if vars.len() > 3 {
        return Err(TranslateError::PreconditionViolation(format!("{} variables; at most 3 allowed", vars.len())));
    }
    for v in [x, y] {
        if !vars.contains(v) {
            return Err(TranslateError::PreconditionViolation(format!("{v} does not occur in the atoms")));
        }
    }
    for &(p, _, _) in &list {
        if crate::ast::contains_conj(&p.clone().into()) {
            return Err(TranslateError::PreconditionViolation("atom program is not ICPDL".into()));
        }
    }
    let vs: Vec<&Var> = vars.iter().collect();
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            if !list.iter().any(|&(_, u, v)| (u == *a && v == *b) || (u == *b && v == *a)) {
                return Err(TranslateError::PreconditionViolation(format!("atoms do not form a clique: {a} and {b} unjoined")));
            }
        }
    }
    if x == y {
        return match vs.iter().find(|v| **v != x) {
            None => Ok(pi_single(&list, x)),
            Some(other) => Ok(Program::test(Formula::diamond(two_point(&list, &vars, x, other)?))),
        };
    }
    two_point(&list, &vars, x, y)
}

fn two_point(
    list: &[(&Program, &Var, &Var)],
    vars: &BTreeSet<Var>,
    x: &Var,
    y: &Var,
) -> Result<Program, TranslateError> {
    let middle = match vars.iter().find(|v| *v != x && *v != y) {
        None => pi_pair(list, x, y)?,
        Some(z) => Program::intersect(
            pi_pair(list, x, y)?,
            Program::compose(Program::compose(pi_pair(list, x, z)?, pi_single(list, z)), pi_pair(list, z, y)?),
        ),
    };
    Ok(Program::compose(Program::compose(pi_single(list, x), middle), pi_single(list, y)))
}

/// Folds a conjunctive program of ICPDL atoms into a single ICPDL program.
fn fold_decomposition(c: &ConjProgram) -> Result<Program, TranslateError> {
    let (completed, td) = clique_complete(c, 2).map_err(|e| match e {
        TdError::WidthExceeded { found, bound } => TranslateError::WidthExceeded { found, bound },
        other => TranslateError::ShapeViolation(other.to_string()),
    })?;
    let vars: Vec<Var> = completed.vars().into_iter().collect();
    let index = |v: &Var| vars.iter().position(|w| w == v).expect("endpoint occurs");
    let td = normalize_rooted(&td, (index(&c.source), index(&c.target)))
        .map_err(|e| TranslateError::ShapeViolation(e.to_string()))?;
    let mut atoms = completed.atoms.clone();
    for node in td.post_order() {
        let Some(parent) = td.parent[node] else { continue };
        let bag = bag_vars(&completed, &td.bags[node]);
        let shared: Vec<Var> = bag_vars(&completed, &td.bags[parent]).intersection(&bag).cloned().collect();
        let (inside, rest): (BTreeSet<Atom>, BTreeSet<Atom>) =
            atoms.into_iter().partition(|a| a.vars().into_iter().all(|v| bag.contains(v)));
        let folded = match shared.as_slice() {
            [z1] => Atom::p(lemita_program(&inside, z1, z1)?, z1.clone(), z1.clone()),
            [z1, z2] => Atom::p(lemita_program(&inside, z1, z2)?, z1.clone(), z2.clone()),
            _ => return Err(TranslateError::ShapeViolation("leaf bag shares no variable with its parent".into())),
        };
        atoms = rest;
        atoms.insert(folded);
    }
    lemita_program(&atoms, &c.source, &c.target)
}

struct Tw2;

impl Rewrite for Tw2 {
    type Error = TranslateError;

    fn on_loop(&mut self, _: Program) -> Result<Formula, TranslateError> {
        Err(TranslateError::DialectViolation("loop is not ICPDL+".into()))
    }

    fn on_universal(&mut self) -> Result<Program, TranslateError> {
        Err(TranslateError::DialectViolation("universal program is not ICPDL+".into()))
    }

    fn on_intersect(&mut self, l: Program, r: Program) -> Result<Program, TranslateError> {
        Ok(Program::intersect(l, r))
    }

    fn on_conj(&mut self, c: ConjProgram) -> Result<Program, TranslateError> {
        if c.r_atoms().next().is_some() {
            // Relation atoms of arity three or more are empty on Kripke structures.
            return Ok(Program::test(Formula::bottom()));
        }
        let g = underlying_graphs(&c);
        if !g.gc.is_connected() {
            return Err(TranslateError::ShapeViolation("conjunctive program is not connected".into()));
        }
        fold_decomposition(&c)
    }
}

/// ICPDL⁺(TW₂) to ICPDL, innermost conjunctive programs first.
pub fn tw2_to_icpdl(f: &Formula) -> Result<Formula, TranslateError> {
    Tw2.formula(f)
}

pub fn tw2_to_icpdl_program(p: &Program) -> Result<Program, TranslateError> {
    Tw2.program(p)
}
