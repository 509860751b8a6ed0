mod common;

use common::{ConjShape, Gen, Lang};
use proptest::prelude::*;
use rand::Rng;
use ucpdl::ast::{atomic_programs, contains_conj, reverse, Atom, ConjProgram, Expression, Formula, Name, Program};
use ucpdl::eval::{eval_formula, eval_program, ConjMode, EvalOptions, Evaluator, PairSet, WorldSet};
use ucpdl::games::{self, Game, GameKind, DEFAULT_ARENA_CAP};
use ucpdl::graph::UGraph;
use ucpdl::measures::{cq_width, expr_tree_width, i_width, measures, Dialect};
use ucpdl::satredux::{self, SatError, DEFAULT_SHAPE_BUDGET};
use ucpdl::structure::Structure;
use ucpdl::syntax::{self, Sort};
use ucpdl::treedecomp::{clique_complete, decompose, validate, TdError};

fn any_lang() -> Lang {
    Lang {
        loops: true,
        universal: true,
        conj: Some(ConjShape::Connected { vars: 4, atoms: 4 }),
        relations: true,
        ..Lang::icpdl()
    }
}

fn pairs(k: &Structure, p: &Program) -> PairSet {
    eval_program(k, p).unwrap()
}

fn worlds(k: &Structure, f: &Formula) -> WorldSet {
    eval_formula(k, f).unwrap()
}

/// Structure interpreting exactly the atomic programs `names`.
fn structure_over(g: &mut Gen, names: &[Name], max_worlds: usize) -> Structure {
    let n = 1 + g.below(max_worlds);
    let mut k = Structure::numbered(n);
    for a in names {
        k.declare_binary(a.clone());
        for u in 0..n {
            for v in 0..n {
                if g.chance(0.3) {
                    k.add_binary(a.clone(), u, v);
                }
            }
        }
    }
    k.declare_unary("p");
    for w in 0..n {
        if g.chance(0.4) {
            k.add_unary("p", w);
        }
    }
    k
}

fn random_graph(g: &mut Gen, max: usize) -> UGraph {
    let n = 1 + g.below(max);
    let mut graph = UGraph::new(n);
    let density = g.rng.gen_range(0.1..0.7);
    for u in 0..n {
        for v in u + 1..n {
            if g.chance(density) {
                graph.add_edge(u, v);
            }
        }
    }
    graph
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reverse_is_an_involution(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let p = g.program(&Lang::icpdl(), 4);
        prop_assert_eq!(reverse(&reverse(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn reverse_denotes_the_converse(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang::icpdl();
        let p = g.program(&lang, 4);
        let k = g.structure(&lang, 6);
        let expected = pairs(&k, &p).transpose();
        prop_assert_eq!(pairs(&k, &reverse(&p).unwrap()), expected);
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = any_lang();
        let e: Expression = if g.chance(0.5) { g.formula(&lang, 6).into() } else { g.program(&lang, 6).into() };
        let text = syntax::print(&e);
        prop_assert_eq!(&text, &syntax::print(&e.clone()));
        let sort = if matches!(e, Expression::Formula(_)) { Sort::Formula } else { Sort::Program };
        let back = syntax::parse_as(&text, Dialect::Any, Some(sort)).unwrap();
        prop_assert_eq!(measures(&back), measures(&e));
        prop_assert_eq!(back, e);
    }

    #[test]
    fn tree_width_is_at_most_cq_width(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang { universal: true, ..Lang::cpdl_plus() };
        let e: Expression = g.formula(&lang, 4).into();
        prop_assert!(expr_tree_width(&e) <= cq_width(&e));
    }

    #[test]
    fn distance_is_a_metric_on_components(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        g.density = (0.02, 0.2);
        let k = g.structure(&Lang::PDL, 8);
        let names = k.worlds().to_vec();
        let d = |u: &str, v: &str| k.distance(u, v).unwrap();
        for u in &names {
            prop_assert_eq!(d(u, u), Some(0));
            for v in &names {
                prop_assert_eq!(d(u, v), d(v, u));
                prop_assert_eq!(d(u, v) == Some(0), u == v);
                for w in &names {
                    if let (Some(uv), Some(vw)) = (d(u, v), d(v, w)) {
                        prop_assert!(d(u, w).unwrap() <= uv + vw);
                    }
                }
            }
        }
    }

    #[test]
    fn saving_and_loading_preserves_structures(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let k = g.structure(&Lang { relations: true, ..Lang::PDL }, 6);
        let back = Structure::load(k.save().as_bytes()).unwrap();
        prop_assert_eq!(back.gaifman(), k.gaifman());
        prop_assert_eq!(back, k);
    }

    #[test]
    fn decompositions_validate(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let graph = random_graph(&mut g, 9);
        let td = decompose(&graph).unwrap();
        prop_assert!(validate(&graph, &td));
    }

    #[test]
    fn clique_completion_preserves_denotation(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang { props: 1, conj: Some(ConjShape::Connected { vars: 4, atoms: 5 }), ..Lang::icpdl() };
        let c = g.conj(&lang, 2);
        let (completed, td) = match clique_complete(&c, 3) {
            Ok(x) => x,
            Err(TdError::Disconnected) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(td.width <= 3);
        let names: Vec<Name> = atomic_programs(&Program::conj(c.clone()).into()).into_iter().collect();
        let k = structure_over(&mut g, &names, 6);
        prop_assert_eq!(pairs(&k, &Program::conj(completed)), pairs(&k, &Program::conj(c)));
    }

    #[test]
    fn brute_and_decomposition_agree(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang { conj: Some(ConjShape::Connected { vars: 4, atoms: 5 }), ..Lang::icpdl() };
        let c = g.conj(&lang, 3);
        let k = g.structure(&lang, 6);
        let p = Program::conj(c);
        let run = |mode| Evaluator::new(&k, EvalOptions { mode, ..Default::default() }).program(&p).unwrap();
        prop_assert_eq!(run(ConjMode::Brute), run(ConjMode::Decomp));
    }

    #[test]
    fn intersection_laws(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang::icpdl();
        let (l, r) = (g.program(&lang, 3), g.program(&lang, 3));
        let k = g.structure(&lang, 6);
        let meet = pairs(&k, &l).intersection(&pairs(&k, &r));
        prop_assert_eq!(&pairs(&k, &Program::intersect(l.clone(), r.clone())), &meet);
        let c = ConjProgram::new([Atom::p(l, "x", "y"), Atom::p(r, "x", "y")], "x", "y").unwrap();
        prop_assert_eq!(&pairs(&k, &Program::conj(c)), &meet);
    }

    #[test]
    fn loop_holds_on_the_diagonal(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang::icpdl();
        let p = g.program(&lang, 4);
        let k = g.structure(&lang, 6);
        let rel = pairs(&k, &p);
        let expected = WorldSet::from_worlds(k.len(), (0..k.len()).filter(|&u| rel.contains(u, u)));
        prop_assert_eq!(worlds(&k, &Formula::loop_of(p)), expected);
    }

    #[test]
    fn star_is_a_fixpoint(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang::icpdl();
        let p = g.program(&lang, 3);
        let k = g.structure(&lang, 6);
        let star = Program::star(p.clone());
        let unfolded = Program::union(Program::Epsilon, Program::compose(p, star.clone()));
        prop_assert_eq!(pairs(&k, &star), pairs(&k, &unfolded));
    }

    #[test]
    fn solved_arenas_are_locally_consistent(seed in any::<u64>(), bisim in any::<bool>(), universal in any::<bool>()) {
        let mut g = Gen::new(seed);
        let lang = Lang { programs: 1, props: 1, ..Lang::PDL };
        let (a, b) = (g.structure(&lang, 3), g.structure(&lang, 3));
        let game = Game::new(GameKind::new(bisim, universal), 2, &a, &b, DEFAULT_ARENA_CAP).unwrap();
        let start = game.start(&[g.below(a.len())], &[g.below(b.len())]).unwrap();
        let region = game.solve(&start).unwrap();
        prop_assert!(region.is_consistent());
    }

    #[test]
    fn simulation_transfers_positive_formulas(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let kripke = Lang { programs: 1, props: 1, ..Lang::PDL };
        let a = g.structure(&kripke, 3);
        // A copy with extra edges and labels always simulates the original.
        let mut b = a.clone();
        for _ in 0..g.below(3) {
            let (u, v) = (g.below(b.len()), g.below(b.len()));
            b.add_binary("a", u, v);
            b.add_unary("p", u);
        }
        let u = g.below(a.len());
        prop_assert!(games::k_simulates(&a, &[u], &b, &[u], 3, false, DEFAULT_ARENA_CAP).unwrap());
        let lang = Lang {
            positive: true,
            programs: 1,
            props: 1,
            conj: Some(ConjShape::Connected { vars: 3, atoms: 3 }),
            ..Lang::cpdl()
        };
        for _ in 0..8 {
            let f = g.formula(&lang, 4);
            if worlds(&a, &f).contains(u) {
                prop_assert!(worlds(&b, &f).contains(u), "{} holds in the original but not in the extension", f);
            }
        }
    }

    #[test]
    fn tree_translation_width(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let lang = Lang { programs: 2, props: 1, conj: Some(ConjShape::Connected { vars: 3, atoms: 3 }), ..Lang::icpdl() };
        let c = g.conj(&lang, 1);
        match satredux::tree_translate(&c, DEFAULT_SHAPE_BUDGET) {
            Ok(p) => {
                let e: Expression = p.into();
                prop_assert!(!contains_conj(&e));
                let inner: usize = c.p_atoms().map(|(q, _, _)| i_width(&q.clone().into())).sum();
                prop_assert!(i_width(&e) <= inner + 1);
            }
            Err(SatError::BlowupExceeded(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
