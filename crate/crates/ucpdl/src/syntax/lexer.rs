use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LAngle,
    RAngle,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Amp,
    Plus,
    Bar,
    Star,
    Question,
    Bang,
    Minus,
    Equals,
    Dot,
    End,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::End => "end of input".into(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Amp => "&",
            Tok::Plus => "+",
            Tok::Bar => "|",
            Tok::Star => "*",
            Tok::Question => "?",
            Tok::Bang => "!",
            Tok::Minus => "-",
            Tok::Equals => "=",
            Tok::Dot => ".",
            Tok::Ident(_) | Tok::End => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, cl) = (line, col);
        let advance = |ch: char, line: &mut usize, col: &mut usize| {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while let Some(&d) = chars.peek() {
                if d == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(s), line: l, col: cl });
            continue;
        }
        let tok = match c {
            '<' => Tok::LAngle,
            '>' => Tok::RAngle,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '&' => Tok::Amp,
            '+' => Tok::Plus,
            '|' => Tok::Bar,
            '*' => Tok::Star,
            '?' => Tok::Question,
            '!' => Tok::Bang,
            '-' => Tok::Minus,
            '=' => Tok::Equals,
            '.' => Tok::Dot,
            '$' => {
                return Err(SyntaxError::parse(l, cl, "names starting with '$' are reserved"));
            }
            other => return Err(SyntaxError::parse(l, cl, format!("unexpected character {other:?}"))),
        };
        chars.next();
        advance(c, &mut line, &mut col);
        out.push(Spanned { tok, line: l, col: cl });
    }
    out.push(Spanned { tok: Tok::End, line, col });
    Ok(out)
}
