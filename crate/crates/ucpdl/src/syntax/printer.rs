use crate::ast::{Atom, ConjProgram, Expression, Formula, Program};
use crate::untc::UntcFormula;

const UNION: u8 = 0;
const INTER: u8 = 1;
const COMP: u8 = 2;
const PREFIX: u8 = 3;
const POSTFIX: u8 = 4;

fn wrap(own: u8, required: u8, s: String) -> String {
    if own < required {
        format!("({s})")
    } else {
        s
    }
}

fn formula(f: &Formula, required: u8) -> String {
    match f {
        Formula::Prop(p) => p.to_string(),
        Formula::Diamond(p) if **p == Program::Epsilon => "true".into(),
        Formula::Not(g) if **g == Formula::top() => "false".into(),
        Formula::Not(g) => match &**g {
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Not(a), Formula::Not(b)) => {
                    wrap(UNION, required, format!("{} + {}", formula(a, UNION), formula(b, INTER)))
                }
                _ => wrap(PREFIX, required, format!("!{}", formula(g, PREFIX))),
            },
            _ => wrap(PREFIX, required, format!("!{}", formula(g, PREFIX))),
        },
        Formula::And(l, r) => wrap(INTER, required, format!("{} & {}", formula(l, INTER), formula(r, COMP))),
        Formula::Diamond(p) => format!("<{}>", program(p, UNION)),
        Formula::Loop(p) => format!("loop({})", program(p, UNION)),
    }
}

fn program(p: &Program, required: u8) -> String {
    match p {
        Program::Epsilon => "eps".into(),
        Program::Universal => "U".into(),
        Program::Atomic(a) => a.to_string(),
        Program::Converse(a) => format!("-{a}"),
        Program::Union(l, r) => wrap(UNION, required, format!("{} + {}", program(l, UNION), program(r, INTER))),
        Program::Intersect(l, r) => {
            wrap(INTER, required, format!("{} & {}", program(l, INTER), program(r, COMP)))
        }
        Program::Compose(l, r) => wrap(COMP, required, format!("{} ; {}", program(l, COMP), program(r, PREFIX))),
        Program::Star(q) => wrap(POSTFIX, required, format!("{}*", program(q, POSTFIX))),
        Program::Test(f) => wrap(POSTFIX, required, format!("{}?", formula(f, POSTFIX))),
        Program::Conj(c) => conj(c),
    }
}

fn conj(c: &ConjProgram) -> String {
    let atoms: Vec<String> = c
        .atoms
        .iter()
        .map(|a| match a {
            Atom::P { program: p, x, y } => format!("{}({x},{y})", program(p, POSTFIX)),
            Atom::R { relation, args } => {
                let args: Vec<&str> = args.iter().map(|v| v.as_str()).collect();
                format!("{relation}({})", args.join(","))
            }
        })
        .collect();
    format!("{{{}}}[{},{}]", atoms.join(", "), c.source, c.target)
}

pub fn print_formula(f: &Formula) -> String {
    formula(f, UNION)
}

pub fn print_program(p: &Program) -> String {
    program(p, UNION)
}

pub fn print(e: &Expression) -> String {
    match e {
        Expression::Formula(f) => print_formula(f),
        Expression::Program(p) => print_program(p),
    }
}

const U_OR: u8 = 0;
const U_AND: u8 = 1;
const U_UNARY: u8 = 2;

/// `tail` is false when text follows at the same nesting, which forces an open-ended
/// `exists` into parentheses.
fn untc(f: &UntcFormula, required: u8, tail: bool) -> String {
    let paren = |own: u8| own < required;
    match f {
        UntcFormula::Rel(r, args) => {
            let args: Vec<&str> = args.iter().map(|v| v.as_str()).collect();
            format!("{r}({})", args.join(","))
        }
        UntcFormula::Eq(x, y) => format!("{x}={y}"),
        UntcFormula::Tc { u, v, body, x, y } => format!("tc[{u},{v}]({})({x},{y})", untc(body, U_OR, true)),
        UntcFormula::Or(l, r) => {
            let inner_tail = tail || paren(U_OR);
            let s = format!("{} | {}", untc(l, U_OR, false), untc(r, U_AND, inner_tail));
            wrap(U_OR, required, s)
        }
        UntcFormula::And(l, r) => {
            let inner_tail = tail || paren(U_AND);
            let s = format!("{} & {}", untc(l, U_AND, false), untc(r, U_UNARY, inner_tail));
            wrap(U_AND, required, s)
        }
        UntcFormula::Not(b) => format!("!{}", untc(b, U_UNARY, tail)),
        UntcFormula::Exists(vs, body) => {
            let vs: Vec<&str> = vs.iter().map(|v| v.as_str()).collect();
            let s = format!("exists {}. {}", vs.join(","), untc(body, U_OR, true));
            if tail {
                s
            } else {
                format!("({s})")
            }
        }
    }
}

pub fn print_untc(f: &UntcFormula) -> String {
    untc(f, U_OR, true)
}
