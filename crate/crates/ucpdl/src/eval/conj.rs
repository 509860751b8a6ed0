//! Conjunctive-program evaluation: exhaustive enumeration and decomposition joins.

use std::collections::{BTreeSet, HashSet};

use super::{ConjMode, EvalError, EvalOptions, Evaluator, PairSet};
use crate::ast::{Atom, Name, Var};
use crate::graph::UGraph;
use crate::measures::Role;
use crate::structure::{Structure, World};
use crate::treedecomp::{decompose, MAX_EXACT_VERTICES};

/// Satisfying assignments of `atoms` projected onto `out`.
pub fn eval_conj(
    k: &Structure,
    atoms: &BTreeSet<Atom>,
    out: &[Var],
    mode: ConjMode,
) -> Result<BTreeSet<Vec<World>>, EvalError> {
    Evaluator::new(k, EvalOptions { mode, ..EvalOptions::default() }).conj(atoms, out)
}

enum Check<'a> {
    Pair { rel: usize, x: usize, y: usize },
    Tuple { tuples: Option<&'a BTreeSet<Vec<World>>>, args: Vec<usize> },
    Table { vars: Vec<usize>, rows: HashSet<Vec<World>> },
}

impl Check<'_> {
    fn vars(&self) -> Vec<usize> {
        match self {
            Check::Pair { x, y, .. } => vec![*x, *y],
            Check::Tuple { args, .. } => args.clone(),
            Check::Table { vars, .. } => vars.clone(),
        }
    }

    fn holds(&self, rels: &[PairSet], vals: &[World]) -> bool {
        match self {
            Check::Pair { rel, x, y } => rels[*rel].contains(vals[*x], vals[*y]),
            Check::Tuple { tuples, args } => {
                tuples.is_some_and(|t| t.contains(&args.iter().map(|&a| vals[a]).collect::<Vec<_>>()))
            }
            Check::Table { vars, rows } => rows.contains(&vars.iter().map(|&v| vals[v]).collect::<Vec<_>>()),
        }
    }
}

struct Problem<'a> {
    n: usize,
    vars: Vec<Var>,
    rels: Vec<PairSet>,
    transposed: Vec<PairSet>,
    checks: Vec<Check<'a>>,
    budget: usize,
}

pub(super) fn evaluate(
    ev: &mut Evaluator<'_>,
    atoms: &BTreeSet<Atom>,
    out: &[Var],
) -> Result<BTreeSet<Vec<World>>, EvalError> {
    let k = ev.structure();
    let vars: Vec<Var> = atoms.iter().flat_map(|a| a.vars().into_iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let idx = |v: &Var| vars.binary_search(v).ok();
    let out_idx = out
        .iter()
        .map(|v| idx(v).ok_or_else(|| EvalError::UnknownOutputVariable(v.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rels = Vec::new();
    let mut checks = Vec::new();
    for atom in atoms {
        match atom {
            Atom::P { program, x, y } => {
                rels.push(ev.program(program)?);
                checks.push(Check::Pair { rel: rels.len() - 1, x: idx(x).expect("var"), y: idx(y).expect("var") });
            }
            Atom::R { relation, args } => {
                check_relation(k, relation, args.len())?;
                let tuples = k.higher().get(relation).map(|r| &r.tuples);
                checks.push(Check::Tuple { tuples, args: args.iter().map(|a| idx(a).expect("var")).collect() });
            }
        }
    }
    let transposed = rels.iter().map(PairSet::transpose).collect();
    let mut problem = Problem { n: k.len(), vars, rels, transposed, checks, budget: ev.options().budget };
    match ev.options().mode {
        ConjMode::Brute => Ok(brute(&problem, &out_idx)),
        ConjMode::Decomp => decomp(&mut problem, &out_idx),
    }
}

fn check_relation(k: &Structure, name: &Name, arity: usize) -> Result<(), EvalError> {
    let used = Role::Relation(arity);
    let declared = if k.unary().contains_key(name) {
        Some(Role::Proposition)
    } else if k.binary().contains_key(name) {
        Some(Role::Program)
    } else {
        k.higher().get(name).map(|r| Role::Relation(r.arity))
    };
    match declared {
        Some(d) if d != used => Err(EvalError::ArityMismatch { name: name.clone(), used, declared: d }),
        _ => Ok(()),
    }
}

/// Every assignment in lexicographic order, no pruning.
fn brute(p: &Problem<'_>, out: &[usize]) -> BTreeSet<Vec<World>> {
    let mut result = BTreeSet::new();
    let m = p.vars.len();
    if p.n == 0 && m > 0 {
        return result;
    }
    let mut vals = vec![0; m];
    loop {
        if p.checks.iter().all(|c| c.holds(&p.rels, &vals)) {
            result.insert(out.iter().map(|&v| vals[v]).collect());
        }
        let mut i = 0;
        while i < m {
            vals[i] += 1;
            if vals[i] < p.n {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
        if i == m {
            return result;
        }
    }
}

fn decomp(p: &mut Problem<'_>, out: &[usize]) -> Result<BTreeSet<Vec<World>>, EvalError> {
    let m = p.vars.len();
    if m > MAX_EXACT_VERTICES {
        return Err(EvalError::TooManyVariables(m));
    }
    let mut g = UGraph::new(m);
    for c in &p.checks {
        let vs = c.vars();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    for (i, &u) in out.iter().enumerate() {
        for &v in &out[i + 1..] {
            g.add_edge(u, v);
        }
    }
    let mut td = decompose(&g).map_err(|_| EvalError::TooManyVariables(m))?;
    td.merge_redundant();
    let root = (0..td.bags.len())
        .find(|&b| out.iter().all(|v| td.bags[b].contains(v)))
        .expect("clique on output variables lies in one bag");
    td.reroot(root);
    // every check constrains each bag covering its variables
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); td.bags.len()];
    for (ci, c) in p.checks.iter().enumerate() {
        let vs = c.vars();
        for (b, bag) in td.bags.iter().enumerate() {
            if vs.iter().all(|v| bag.contains(v)) {
                assigned[b].push(ci);
            }
        }
    }
    let mut spent = 0usize;
    let mut relations: Vec<Option<Vec<Vec<World>>>> = vec![None; td.bags.len()];
    for node in td.post_order() {
        let bag: Vec<usize> = td.bags[node].iter().copied().collect();
        let mut local: Vec<usize> = assigned[node].clone();
        for child in td.children(node).collect::<Vec<_>>() {
            let child_bag: Vec<usize> = td.bags[child].iter().copied().collect();
            let shared: Vec<usize> = child_bag.iter().copied().filter(|v| td.bags[node].contains(v)).collect();
            let pos: Vec<usize> = shared.iter().map(|v| child_bag.binary_search(v).expect("shared")).collect();
            let rows: HashSet<Vec<World>> = relations[child]
                .take()
                .expect("child evaluated")
                .into_iter()
                .map(|t| pos.iter().map(|&i| t[i]).collect())
                .collect();
            if rows.is_empty() {
                return Ok(BTreeSet::new());
            }
            p.checks.push(Check::Table { vars: shared, rows });
            local.push(p.checks.len() - 1);
        }
        let rel = enumerate_bag(p, &bag, &local, &mut spent)?;
        relations[node] = Some(rel);
    }
    let root_bag: Vec<usize> = td.bags[td.root].iter().copied().collect();
    let pos: Vec<usize> = out.iter().map(|v| root_bag.binary_search(v).expect("output in root")).collect();
    Ok(relations[td.root]
        .take()
        .expect("root evaluated")
        .into_iter()
        .map(|t| pos.iter().map(|&i| t[i]).collect())
        .collect())
}

/// Satisfying assignments of the bag variables (in sorted order) for the given checks.
fn enumerate_bag(
    p: &Problem<'_>,
    bag: &[usize],
    local: &[usize],
    spent: &mut usize,
) -> Result<Vec<Vec<World>>, EvalError> {
    // order variables so each one is reachable through a pair check when possible
    let mut order: Vec<usize> = Vec::with_capacity(bag.len());
    let mut source: Vec<Option<(usize, usize, bool)>> = Vec::new();
    while order.len() < bag.len() {
        let mut pick = None;
        'outer: for &ci in local {
            if let Check::Pair { rel, x, y } = p.checks[ci] {
                if order.contains(&x) && !order.contains(&y) {
                    pick = Some((y, Some((rel, x, true))));
                    break 'outer;
                }
                if order.contains(&y) && !order.contains(&x) {
                    pick = Some((x, Some((rel, y, false))));
                    break 'outer;
                }
            }
        }
        let (v, src) = pick.unwrap_or_else(|| {
            let v = *bag
                .iter()
                .filter(|v| !order.contains(v))
                .max_by_key(|&&v| (local.iter().filter(|&&ci| p.checks[ci].vars().contains(&v)).count(), usize::MAX - v))
                .expect("unassigned variable");
            (v, None)
        });
        order.push(v);
        source.push(src);
    }
    let mut complete_at: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for &ci in local {
        let last = p.checks[ci]
            .vars()
            .iter()
            .map(|v| order.iter().position(|o| o == v).expect("check inside bag"))
            .max()
            .unwrap_or(0);
        complete_at[last].push(ci);
    }
    let mut vals = vec![0; p.vars.len()];
    let mut rows = Vec::new();
    let mut ctx = BagSearch { p, order: &order, source: &source, complete_at: &complete_at, bag, spent };
    ctx.search(0, &mut vals, &mut rows)?;
    Ok(rows)
}

struct BagSearch<'p, 'a> {
    p: &'p Problem<'a>,
    order: &'p [usize],
    source: &'p [Option<(usize, usize, bool)>],
    complete_at: &'p [Vec<usize>],
    bag: &'p [usize],
    spent: &'p mut usize,
}

impl BagSearch<'_, '_> {
    fn search(&mut self, depth: usize, vals: &mut [World], rows: &mut Vec<Vec<World>>) -> Result<(), EvalError> {
        if depth == self.order.len() {
            rows.push(self.bag.iter().map(|&v| vals[v]).collect());
            return Ok(());
        }
        let var = self.order[depth];
        let candidates: Vec<World> = match self.source[depth] {
            Some((rel, other, true)) => self.p.rels[rel].successors(vals[other]).collect(),
            Some((rel, other, false)) => self.p.transposed[rel].successors(vals[other]).collect(),
            None => (0..self.p.n).collect(),
        };
        for w in candidates {
            vals[var] = w;
            if self.complete_at[depth].iter().all(|&ci| self.p.checks[ci].holds(&self.p.rels, vals)) {
                *self.spent += 1;
                if *self.spent > self.p.budget {
                    return Err(EvalError::BudgetExceeded(self.p.budget));
                }
                self.search(depth + 1, vals, rows)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Program;
    use crate::eval::eval_program;

    fn atoms(list: &[(&str, &str, &str)]) -> BTreeSet<Atom> {
        list.iter().map(|(a, x, y)| Atom::p(Program::atomic(*a), *x, *y)).collect()
    }

    fn vars(vs: &[&str]) -> Vec<Var> {
        vs.iter().map(|&v| Var::new(v)).collect()
    }

    #[test]
    fn two_parallel_atoms_intersect() {
        let mut k = Structure::numbered(3);
        k.add_binary("a", 0, 1);
        k.add_binary("a", 1, 2);
        k.add_binary("b", 0, 1);
        k.add_binary("b", 2, 2);
        let c = atoms(&[("a", "x", "y"), ("b", "x", "y")]);
        for mode in [ConjMode::Brute, ConjMode::Decomp] {
            let got = eval_conj(&k, &c, &vars(&["x", "y"]), mode).unwrap();
            assert_eq!(got, BTreeSet::from([vec![0, 1]]));
        }
        let inter = eval_program(&k, &Program::intersect(Program::atomic("a"), Program::atomic("b"))).unwrap();
        assert_eq!(inter.to_set(), [(0, 1)].into_iter().collect());
    }

    #[test]
    fn unsatisfiable_is_empty() {
        let k = Structure::numbered(2);
        let c = atoms(&[("a", "x", "y")]);
        assert!(eval_conj(&k, &c, &vars(&["x"]), ConjMode::Decomp).unwrap().is_empty());
    }

    #[test]
    fn triangle_on_three_cycle() {
        let mut k = Structure::numbered(3);
        k.add_binary("a", 0, 1);
        k.add_binary("a", 1, 2);
        k.add_binary("a", 2, 0);
        let c = atoms(&[("a", "x", "y"), ("a", "y", "z"), ("a", "z", "x")]);
        for mode in [ConjMode::Brute, ConjMode::Decomp] {
            let got = eval_conj(&k, &c, &vars(&["x"]), mode).unwrap();
            assert_eq!(got, BTreeSet::from([vec![0], vec![1], vec![2]]));
        }
    }

    #[test]
    fn relation_atoms() {
        let mut k = Structure::numbered(3);
        k.add_tuple("R", vec![0, 1, 2]).unwrap();
        let c: BTreeSet<Atom> =
            [Atom::r("R", vars(&["x", "y", "z"])).unwrap(), Atom::p(Program::Epsilon, "z", "w")].into_iter().collect();
        for mode in [ConjMode::Brute, ConjMode::Decomp] {
            let got = eval_conj(&k, &c, &vars(&["w", "x"]), mode).unwrap();
            assert_eq!(got, BTreeSet::from([vec![2, 0]]));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let k = Structure::numbered(30);
        let c = atoms(&[("a", "x", "y")]);
        let mut ev = Evaluator::new(&k, EvalOptions { mode: ConjMode::Decomp, budget: 10 });
        let c: BTreeSet<Atom> = c.into_iter().chain([Atom::p(Program::Universal, "x", "z")]).collect();
        assert!(matches!(ev.conj(&c, &vars(&["x", "z"])), Err(EvalError::BudgetExceeded(10))));
    }

    #[test]
    fn unknown_output_variable() {
        let k = Structure::numbered(1);
        assert!(matches!(
            eval_conj(&k, &atoms(&[("a", "x", "y")]), &vars(&["q"]), ConjMode::Brute),
            Err(EvalError::UnknownOutputVariable(_))
        ));
    }
}
