//! Radial potentials written as small arithmetic expressions in `r`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | "r" | "exp" "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-r^2` is `-(r^2)` and `2^3^2` is `2^9`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialExpr {
    Number(f64),
    R,
    Neg(Box<PotentialExpr>),
    Add(Box<PotentialExpr>, Box<PotentialExpr>),
    Sub(Box<PotentialExpr>, Box<PotentialExpr>),
    Mul(Box<PotentialExpr>, Box<PotentialExpr>),
    Div(Box<PotentialExpr>, Box<PotentialExpr>),
    Pow(Box<PotentialExpr>, Box<PotentialExpr>),
    Exp(Box<PotentialExpr>),
}

impl PotentialExpr {
    /// The zero potential.
    pub fn zero() -> Self {
        PotentialExpr::Number(0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        use PotentialExpr::*;
        match self {
            Number(v) => *v,
            R => r,
            Neg(a) => -a.eval(r),
            Add(a, b) => a.eval(r) + b.eval(r),
            Sub(a, b) => a.eval(r) - b.eval(r),
            Mul(a, b) => a.eval(r) * b.eval(r),
            Div(a, b) => a.eval(r) / b.eval(r),
            Pow(a, b) => a.eval(r).powf(b.eval(r)),
            Exp(a) => a.eval(r).exp(),
        }
    }

    /// True for a literal zero, which lets callers skip quadrature.
    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialExpr::Number(v) if *v == 0.0)
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(f, "{v:e}")
    } else {
        write!(f, "{v}")
    }
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PotentialExpr::*;
        match self {
            Number(v) => write_number(f, *v),
            R => f.write_str("r"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, b) => write!(f, "({a} ^ {b})"),
            Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl FromStr for PotentialExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_potential(s)
    }
}

/// Syntax error with a 1-based position and the tokens that would have
/// been accepted there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.column, self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, "; expected {}", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::InvalidPotential(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    R,
    Exp,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::R => "`r`".into(),
            Tok::Exp => "`exp`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const OPERAND: &[&str] = &["number", "`r`", "`exp`", "`(`", "`-`"];
const OPERATOR: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let (start_line, start_col) = (line, column);
        if ch == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            i += 1;
            column += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when digits follow, so `2e` stays an error
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lexeme: String = chars[begin..i].iter().collect();
            let value = lexeme.parse::<f64>().map_err(|_| ParseError {
                line: start_line,
                column: start_col,
                message: format!("malformed number `{lexeme}`"),
                expected: vec![],
            })?;
            column += i - begin;
            out.push(Spanned {
                tok: Tok::Num(value),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            let tok = match word.as_str() {
                "r" => Tok::R,
                "exp" => Tok::Exp,
                _ => {
                    return Err(ParseError {
                        line: start_line,
                        column: start_col,
                        message: format!("unknown identifier `{word}`"),
                        expected: OPERAND.to_vec(),
                    })
                }
            };
            column += i - begin;
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(ParseError {
            line: start_line,
            column: start_col,
            message: format!("unexpected character `{ch}`"),
            expected: vec![],
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<PotentialExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = PotentialExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = PotentialExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<PotentialExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = PotentialExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = PotentialExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<PotentialExpr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(PotentialExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<PotentialExpr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            return Ok(PotentialExpr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<PotentialExpr, ParseError> {
        match self.peek().tok {
            Tok::Num(v) => {
                self.bump();
                Ok(PotentialExpr::Number(v))
            }
            Tok::R => {
                self.bump();
                Ok(PotentialExpr::R)
            }
            Tok::Exp => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.expr()?;
                self.close()?;
                Ok(PotentialExpr::Exp(Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close()?;
                Ok(inner)
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn close(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`+`", "`-`", "`*`", "`/`", "`^`", "`)`"]))
        }
    }
}

/// Parse a potential such as `7.5*r^2*exp(-r)`.
pub fn parse_potential(text: &str) -> Result<PotentialExpr, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    if parser.peek().tok == Tok::End {
        let mut err = parser.error(OPERAND);
        err.message = "empty expression".into();
        return Err(err);
    }
    let expr = parser.expr()?;
    if parser.peek().tok != Tok::End {
        let mut err = parser.error(OPERATOR);
        if parser.peek().tok == Tok::RParen {
            err.message = "unbalanced `)`".into();
        }
        return Err(err);
    }
    Ok(expr)
}
