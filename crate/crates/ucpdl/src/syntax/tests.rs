use super::*;
use crate::ast::{Atom, ConjProgram, Expression, Formula, Program};
use crate::measures::Dialect;
use crate::untc::UntcFormula;

const ALL: Dialect = Dialect::Any;

fn roundtrip(e: &Expression) {
    let text = print(e);
    let hint = match e {
        Expression::Formula(_) => Sort::Formula,
        Expression::Program(_) => Sort::Program,
    };
    assert_eq!(&parse_as(&text, ALL, Some(hint)).unwrap(), e, "{text}");
}

#[test]
fn precedence() {
    let p = parse_program("a ; b* + c & d", ALL).unwrap();
    let expected = Program::union(
        Program::compose(Program::atomic("a"), Program::star(Program::atomic("b"))),
        Program::intersect(Program::atomic("c"), Program::atomic("d")),
    );
    assert_eq!(p, expected);
}

#[test]
fn ambiguous_input_defaults_to_formula() {
    assert!(matches!(parse("a & b", ALL).unwrap(), Expression::Formula(_)));
    assert!(matches!(parse_as("a & b", ALL, Some(Sort::Program)).unwrap(), Expression::Program(_)));
    assert!(matches!(parse("a & b*", ALL).unwrap(), Expression::Program(_)));
}

#[test]
fn conjunctive_program_with_relation_atom() {
    let p = parse_program("{a(x,y), R(x,y,z), <p>?(z,z)}[x,y]", ALL).unwrap();
    let Program::Conj(c) = &p else { panic!() };
    assert_eq!(c.atoms.len(), 3);
    assert_eq!(c.r_atoms().count(), 1);
    roundtrip(&p.into());
}

#[test]
fn derived_connectives_roundtrip() {
    for e in [
        Formula::or(Formula::prop("p"), Formula::prop("q")),
        Formula::bottom(),
        Formula::not(Formula::and(Formula::prop("p"), Formula::not(Formula::prop("q")))),
        Formula::loop_of(Program::compose(Program::converse("a"), Program::Universal)),
    ] {
        roundtrip(&e.into());
    }
}

#[test]
fn nested_tests_roundtrip() {
    let c = ConjProgram::new(
        [Atom::p(Program::star(Program::test(Formula::not(Formula::prop("p")))), "x", "y")],
        "x",
        "y",
    )
    .unwrap();
    let p = Program::compose(Program::conj(c), Program::union(Program::Epsilon, Program::atomic("b")));
    roundtrip(&p.into());
}

#[test]
fn errors_carry_positions() {
    match parse("<a", ALL) {
        Err(SyntaxError::Parse { line: 1, col: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(parse("p ; q", ALL).is_ok());
    assert!(parse_formula("a*", ALL).is_err());
}

#[test]
fn dialect_is_enforced() {
    assert!(matches!(parse("<a & b>", Dialect::Pdl), Err(SyntaxError::Dialect(_))));
    assert!(parse("<a & b>", Dialect::Icpdl).is_ok());
}

#[test]
fn role_conflicts_are_rejected() {
    assert!(matches!(parse("a & <a>", ALL), Err(SyntaxError::Dialect(_))));
}

#[test]
fn untc_roundtrip() {
    let f = UntcFormula::and(
        UntcFormula::exists(vec!["z".into()], UntcFormula::rel("a", &["x", "z"])),
        UntcFormula::not(UntcFormula::exists(
            vec!["y".into()],
            UntcFormula::tc("u", "v", UntcFormula::rel("b", &["u", "v"]), "x", "y"),
        )),
    );
    let text = print_untc(&f);
    assert_eq!(parse_untc(&text).unwrap(), f, "{text}");
    let g = parse_untc("exists y. R(x,y,y) & x=y | p(x)").unwrap();
    assert!(matches!(g, UntcFormula::Exists(..)));
}
