use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucpdl::ast::Program;
use ucpdl::eval::{eval_program, ConjMode, EvalOptions, Evaluator};
use ucpdl::measures::Dialect;
use ucpdl::par;
use ucpdl::satredux::{tree_translate, DEFAULT_SHAPE_BUDGET};
use ucpdl::structure::Structure;
use ucpdl::syntax::parse_program;

fn random_structure(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Structure {
    let mut k = Structure::numbered(n);
    for a in ["a", "b"] {
        k.declare_binary(a);
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(density) {
                    k.add_binary(a, u, v);
                }
            }
        }
    }
    for w in 0..n {
        if rng.gen_bool(0.5) {
            k.add_unary("p", w);
        }
    }
    k
}

fn program(text: &str) -> Program {
    parse_program(text, Dialect::Any).unwrap()
}

fn structure_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let structures: Vec<Structure> = (0..64).map(|_| random_structure(&mut rng, 24, 0.15)).collect();
    let p = program("(a ; -b)* & (b + p?)* ; {a(x,y), b(y,z), a(z,x)}[x,y]");
    let mut group = c.benchmark_group("evaluate_64_structures");
    group.bench_function("par_map", |b| b.iter(|| par::map(&structures, |k| eval_program(k, &p).unwrap().len())));
    group.bench_function("sequential", |b| {
        b.iter(|| structures.iter().map(|k| eval_program(k, &p).unwrap().len()).collect::<Vec<_>>())
    });
    group.finish();
}

fn conj_modes(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = program("{a(x1,x2), b(x2,x3), a(x3,x4), b(x4,x5), (a + b)*(x1,x5)}[x1,x5]");
    let mut group = c.benchmark_group("conjunctive_evaluation");
    for n in [6, 10] {
        let k = random_structure(&mut rng, n, 0.3);
        for mode in [ConjMode::Brute, ConjMode::Decomp] {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), n), &k, |b, k| {
                b.iter(|| Evaluator::new(k, EvalOptions { mode, ..Default::default() }).program(black_box(&p)).unwrap())
            });
        }
    }
    group.finish();
}

fn tree_translation(c: &mut Criterion) {
    let Program::Conj(conj) = program("{(a ; b*)(x,y), b(y,z), (a + -b)(x,z)}[x,z]") else { unreachable!() };
    c.bench_function(&format!("tree_translate_3_atoms_parallel_{}", par::is_parallel()), |b| {
        b.iter(|| tree_translate(black_box(&conj), DEFAULT_SHAPE_BUDGET).unwrap())
    });
}

criterion_group!(benches, structure_batch, conj_modes, tree_translation);
criterion_main!(benches);
