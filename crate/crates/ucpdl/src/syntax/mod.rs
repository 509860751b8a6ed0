//! Concrete text syntax for expressions and UNTC formulas.
//!
//! Expression grammar, loosest first: `+` or `|` (union, disjunction), `&` (intersection,
//! conjunction), `;`, prefix `!`, postfix `*` and `?`. Primaries are identifiers, `-a`,
//! `true`, `false`, `eps`, `U`, `<π>`, `loop(π)`, `{atoms}[x,y]` and parenthesized terms.
//! An atom is `π(x,y)` or `R(x1,...,xn)` with `n >= 3`.
//!
//! UNTC grammar: `|`, `&`, then `!φ`, `exists x,y. φ`, `R(x,...)`, `x=y`,
//! `tc[u,v](φ)(x,y)`.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

pub use parser::{parse, parse_as, parse_formula, parse_program, parse_untc};
pub use printer::{print, print_formula, print_program, print_untc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{0}")]
    Dialect(String),
}

impl SyntaxError {
    pub fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        SyntaxError::Parse { line, col, message: message.into() }
    }
}

/// Formula or program, for inputs like `a & b` that read both ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Formula,
    Program,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Formula => "formula",
            Sort::Program => "program",
        })
    }
}

impl fmt::Display for crate::ast::Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for crate::ast::Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}

impl fmt::Display for crate::ast::Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for crate::untc::UntcFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_untc(self))
    }
}

#[cfg(test)]
mod tests;
