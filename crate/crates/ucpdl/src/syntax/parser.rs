use super::lexer::{tokenize, Spanned, Tok};
use super::{Sort, SyntaxError};
use crate::ast::{Atom, ConjProgram, Expression, Formula, Name, Program, Var};
use crate::measures::{dialect_violation, role_conflict, Dialect};
use crate::untc::UntcFormula;

const KEYWORDS: &[&str] = &["true", "false", "eps", "U", "loop"];

/// Sort-agnostic tree; identifiers get their role from the position they end up in.
#[derive(Debug, Clone)]
enum Raw {
    Ident(Name),
    True,
    False,
    Eps,
    Univ,
    Conv(Name),
    Not(Box<Raw>),
    Diamond(Box<Raw>),
    Loop(Box<Raw>),
    Union(Box<Raw>, Box<Raw>),
    Inter(Box<Raw>, Box<Raw>),
    Comp(Box<Raw>, Box<Raw>),
    Star(Box<Raw>),
    Test(Box<Raw>),
    Conj(Vec<RawAtom>, Var, Var),
}

#[derive(Debug, Clone)]
enum RawAtom {
    P(Raw, Var, Var),
    R(Name, Vec<Var>),
}

#[derive(Debug, Clone)]
struct Located {
    raw: Raw,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let (l, c) = self.here();
        SyntaxError::parse(l, c, message)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<Name, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && s != "tc" && s != "exists" => {
                self.bump();
                Ok(Name::from(s))
            }
            other => Err(self.error(format!("expected an identifier, found {}", other.describe()))),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::End => Ok(()),
            other => Err(self.error(format!("unexpected {}", other.describe()))),
        }
    }

    fn located(&self, raw: Raw, at: (usize, usize)) -> Located {
        Located { raw, line: at.0, col: at.1 }
    }

    fn union(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        let mut left = self.inter()?;
        while matches!(self.peek(), Tok::Plus | Tok::Bar) {
            self.bump();
            let right = self.inter()?;
            left = self.located(Raw::Union(Box::new(left.raw), Box::new(right.raw)), at);
        }
        Ok(left)
    }

    fn inter(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        let mut left = self.comp()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.comp()?;
            left = self.located(Raw::Inter(Box::new(left.raw), Box::new(right.raw)), at);
        }
        Ok(left)
    }

    fn comp(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        let mut left = self.prefix()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let right = self.prefix()?;
            left = self.located(Raw::Comp(Box::new(left.raw), Box::new(right.raw)), at);
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        if *self.peek() == Tok::Bang {
            self.bump();
            let inner = self.prefix()?;
            return Ok(self.located(Raw::Not(Box::new(inner.raw)), at));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    e = self.located(Raw::Star(Box::new(e.raw)), at);
                }
                Tok::Question => {
                    self.bump();
                    e = self.located(Raw::Test(Box::new(e.raw)), at);
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<Located, SyntaxError> {
        let at = self.here();
        let raw = match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.bump();
                    Raw::True
                }
                "false" => {
                    self.bump();
                    Raw::False
                }
                "eps" => {
                    self.bump();
                    Raw::Eps
                }
                "U" => {
                    self.bump();
                    Raw::Univ
                }
                "loop" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let inner = self.union()?;
                    self.expect(Tok::RParen)?;
                    Raw::Loop(Box::new(inner.raw))
                }
                _ => Raw::Ident(self.ident()?),
            },
            Tok::Minus => {
                self.bump();
                Raw::Conv(self.ident()?)
            }
            Tok::LAngle => {
                self.bump();
                let inner = self.union()?;
                self.expect(Tok::RAngle)?;
                Raw::Diamond(Box::new(inner.raw))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.union()?;
                self.expect(Tok::RParen)?;
                inner.raw
            }
            Tok::LBrace => self.conj()?,
            other => return Err(self.error(format!("expected an expression, found {}", other.describe()))),
        };
        Ok(self.located(raw, at))
    }

    fn conj(&mut self) -> Result<Raw, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let mut atoms = vec![self.atom()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            atoms.push(self.atom()?);
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::LBracket)?;
        let s = self.ident()?;
        self.expect(Tok::Comma)?;
        let t = self.ident()?;
        self.expect(Tok::RBracket)?;
        Ok(Raw::Conj(atoms, s, t))
    }

    fn atom(&mut self) -> Result<RawAtom, SyntaxError> {
        let at = self.here();
        let program = self.union()?;
        self.expect(Tok::LParen)?;
        let mut args = vec![self.ident()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.ident()?);
        }
        self.expect(Tok::RParen)?;
        match (program.raw, args.len()) {
            (raw, 2) => {
                let y = args.pop().expect("two");
                let x = args.pop().expect("two");
                Ok(RawAtom::P(raw, x, y))
            }
            (Raw::Ident(r), n) if n >= 3 => Ok(RawAtom::R(r, args)),
            (_, n) => Err(SyntaxError::parse(
                at.0,
                at.1,
                format!("atom has {n} argument(s); program atoms take 2, relation atoms at least 3"),
            )),
        }
    }
}

fn sort_error(l: &Located, expected: Sort, found: &str) -> SyntaxError {
    SyntaxError::parse(l.line, l.col, format!("expected a {expected}, found {found}"))
}

fn to_formula(raw: Raw, at: &Located) -> Result<Formula, SyntaxError> {
    Ok(match raw {
        Raw::Ident(p) => Formula::Prop(p),
        Raw::True => Formula::top(),
        Raw::False => Formula::bottom(),
        Raw::Not(f) => Formula::not(to_formula(*f, at)?),
        Raw::Diamond(p) => Formula::diamond(to_program(*p, at)?),
        Raw::Loop(p) => Formula::loop_of(to_program(*p, at)?),
        Raw::Union(l, r) => Formula::or(to_formula(*l, at)?, to_formula(*r, at)?),
        Raw::Inter(l, r) => Formula::and(to_formula(*l, at)?, to_formula(*r, at)?),
        Raw::Eps | Raw::Univ | Raw::Conv(_) | Raw::Comp(..) | Raw::Star(_) | Raw::Test(_) | Raw::Conj(..) => {
            return Err(sort_error(at, Sort::Formula, "a program"))
        }
    })
}

fn to_program(raw: Raw, at: &Located) -> Result<Program, SyntaxError> {
    Ok(match raw {
        Raw::Ident(a) => Program::Atomic(a),
        Raw::Eps => Program::Epsilon,
        Raw::Univ => Program::Universal,
        Raw::Conv(a) => Program::Converse(a),
        Raw::Union(l, r) => Program::union(to_program(*l, at)?, to_program(*r, at)?),
        Raw::Inter(l, r) => Program::intersect(to_program(*l, at)?, to_program(*r, at)?),
        Raw::Comp(l, r) => Program::compose(to_program(*l, at)?, to_program(*r, at)?),
        Raw::Star(p) => Program::star(to_program(*p, at)?),
        Raw::Test(f) => Program::test(to_formula(*f, at)?),
        Raw::Conj(atoms, s, t) => {
            let atoms = atoms
                .into_iter()
                .map(|a| match a {
                    RawAtom::P(p, x, y) => Ok(Atom::p(to_program(p, at)?, x, y)),
                    RawAtom::R(r, args) => Atom::r(r, args).map_err(|e| SyntaxError::parse(at.line, at.col, e.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Program::conj(
                ConjProgram::new(atoms, s, t).map_err(|e| SyntaxError::parse(at.line, at.col, e.to_string()))?,
            )
        }
        Raw::True | Raw::False | Raw::Not(_) | Raw::Diamond(_) | Raw::Loop(_) => {
            return Err(sort_error(at, Sort::Program, "a formula"))
        }
    })
}

/// Sorts a raw tree can take at top level.
fn admissible(raw: &Raw) -> (bool, bool) {
    match raw {
        Raw::Ident(_) => (true, true),
        Raw::True | Raw::False | Raw::Not(_) | Raw::Diamond(_) | Raw::Loop(_) => (true, false),
        Raw::Eps | Raw::Univ | Raw::Conv(_) | Raw::Comp(..) | Raw::Star(_) | Raw::Test(_) | Raw::Conj(..) => {
            (false, true)
        }
        Raw::Union(l, r) | Raw::Inter(l, r) => {
            let (lf, lp) = admissible(l);
            let (rf, rp) = admissible(r);
            (lf && rf, lp && rp)
        }
    }
}

/// Parses an expression. Top-level text readable both ways (`a & b`) follows `hint`,
/// defaulting to a formula.
pub fn parse_as(text: &str, dialect: Dialect, hint: Option<Sort>) -> Result<Expression, SyntaxError> {
    let mut p = Parser::new(text)?;
    let located = p.union()?;
    p.finish()?;
    let (as_formula, as_program) = admissible(&located.raw);
    let sort = match (as_formula, as_program, hint) {
        (true, true, Some(h)) => h,
        (true, true, None) | (true, false, _) => Sort::Formula,
        (false, true, _) => Sort::Program,
        (false, false, _) => Sort::Formula,
    };
    let raw = located.raw.clone();
    let e: Expression = match sort {
        Sort::Formula => to_formula(raw, &located)?.into(),
        Sort::Program => to_program(raw, &located)?.into(),
    };
    if let Some((name, a, b)) = role_conflict(&e) {
        return Err(SyntaxError::Dialect(format!("{name} used both as {a} and as {b}")));
    }
    if let Some(v) = dialect_violation(&e, dialect) {
        return Err(SyntaxError::Dialect(format!("{v} is not allowed in {dialect}")));
    }
    Ok(e)
}

pub fn parse(text: &str, dialect: Dialect) -> Result<Expression, SyntaxError> {
    parse_as(text, dialect, None)
}

pub fn parse_formula(text: &str, dialect: Dialect) -> Result<Formula, SyntaxError> {
    match parse_as(text, dialect, Some(Sort::Formula))? {
        Expression::Formula(f) => Ok(f),
        Expression::Program(_) => Err(SyntaxError::parse(1, 1, "expected a formula, found a program")),
    }
}

pub fn parse_program(text: &str, dialect: Dialect) -> Result<Program, SyntaxError> {
    match parse_as(text, dialect, Some(Sort::Program))? {
        Expression::Program(p) => Ok(p),
        Expression::Formula(_) => Err(SyntaxError::parse(1, 1, "expected a program, found a formula")),
    }
}

impl Parser {
    fn untc_or(&mut self) -> Result<UntcFormula, SyntaxError> {
        let mut left = self.untc_and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            left = UntcFormula::or(left, self.untc_and()?);
        }
        Ok(left)
    }

    fn untc_and(&mut self) -> Result<UntcFormula, SyntaxError> {
        let mut left = self.untc_unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            left = UntcFormula::and(left, self.untc_unary()?);
        }
        Ok(left)
    }

    fn untc_unary(&mut self) -> Result<UntcFormula, SyntaxError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(UntcFormula::not(self.untc_unary()?));
        }
        if self.is_keyword("exists") {
            self.bump();
            let mut vars = vec![self.untc_ident()?];
            loop {
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                        vars.push(self.untc_ident()?);
                    }
                    Tok::Ident(_) => vars.push(self.untc_ident()?),
                    _ => break,
                }
            }
            self.expect(Tok::Dot)?;
            let body = self.untc_or()?;
            return Ok(UntcFormula::Exists(vars, Box::new(body)));
        }
        self.untc_primary()
    }

    fn untc_ident(&mut self) -> Result<Name, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if s != "tc" && s != "exists" => {
                self.bump();
                Ok(Name::from(s))
            }
            other => Err(self.error(format!("expected an identifier, found {}", other.describe()))),
        }
    }

    fn untc_primary(&mut self) -> Result<UntcFormula, SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.untc_or()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.is_keyword("tc") && *self.peek_at(1) == Tok::LBracket {
            self.bump();
            self.expect(Tok::LBracket)?;
            let u = self.untc_ident()?;
            self.expect(Tok::Comma)?;
            let v = self.untc_ident()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::LParen)?;
            let body = self.untc_or()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::LParen)?;
            let x = self.untc_ident()?;
            self.expect(Tok::Comma)?;
            let y = self.untc_ident()?;
            self.expect(Tok::RParen)?;
            return Ok(UntcFormula::Tc { u, v, body: Box::new(body), x, y });
        }
        let name = self.untc_ident()?;
        match self.peek() {
            Tok::Equals => {
                self.bump();
                Ok(UntcFormula::Eq(name, self.untc_ident()?))
            }
            Tok::LParen => {
                self.bump();
                let mut args = vec![self.untc_ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.untc_ident()?);
                }
                self.expect(Tok::RParen)?;
                Ok(UntcFormula::Rel(name, args))
            }
            other => Err(self.error(format!("expected '(' or '=', found {}", other.describe()))),
        }
    }
}

pub fn parse_untc(text: &str) -> Result<UntcFormula, SyntaxError> {
    let mut p = Parser::new(text)?;
    let f = p.untc_or()?;
    p.finish()?;
    f.validate().map_err(|e| SyntaxError::Dialect(e.to_string()))?;
    Ok(f)
}
