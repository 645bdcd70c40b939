use std::fmt;

use super::{Assignment, FormulaError, Var};

/// An arbitrary propositional formula over the variables of the query.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Var(Var),
    Const(bool),
    Not(Box<BoolExpr>),
    /// At least one child.
    And(Vec<BoolExpr>),
    /// At least one child.
    Or(Vec<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(index: u32) -> BoolExpr {
        BoolExpr::Var(Var::new(index))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(children: Vec<BoolExpr>) -> BoolExpr {
        assert!(!children.is_empty(), "And needs at least one child");
        BoolExpr::And(children)
    }

    pub fn or(children: Vec<BoolExpr>) -> BoolExpr {
        assert!(!children.is_empty(), "Or needs at least one child");
        BoolExpr::Or(children)
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Iff(Box::new(a), Box::new(b))
    }

    /// Largest variable index occurring in the expression (0 if none).
    pub fn max_var(&self) -> u32 {
        match self {
            BoolExpr::Var(v) => v.get(),
            BoolExpr::Const(_) => 0,
            BoolExpr::Not(e) => e.max_var(),
            BoolExpr::And(cs) | BoolExpr::Or(cs) => {
                cs.iter().map(BoolExpr::max_var).max().unwrap_or(0)
            }
            BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BoolExpr::Var(_) | BoolExpr::Const(_) => 0,
            BoolExpr::Not(e) => 1 + e.depth(),
            BoolExpr::And(cs) | BoolExpr::Or(cs) => {
                1 + cs.iter().map(BoolExpr::depth).max().unwrap_or(0)
            }
            BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn evaluate(&self, nu: &Assignment) -> Result<bool, FormulaError> {
        Ok(match self {
            BoolExpr::Var(v) => nu.try_get(*v)?,
            BoolExpr::Const(b) => *b,
            BoolExpr::Not(e) => !e.evaluate(nu)?,
            BoolExpr::And(cs) => {
                for c in cs {
                    if !c.evaluate(nu)? {
                        return Ok(false);
                    }
                }
                true
            }
            BoolExpr::Or(cs) => {
                for c in cs {
                    if c.evaluate(nu)? {
                        return Ok(true);
                    }
                }
                false
            }
            BoolExpr::Implies(a, b) => !a.evaluate(nu)? || b.evaluate(nu)?,
            BoolExpr::Iff(a, b) => a.evaluate(nu)? == b.evaluate(nu)?,
        })
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Var(v) => write!(f, "{v}"),
            BoolExpr::Const(true) => write!(f, "T"),
            BoolExpr::Const(false) => write!(f, "F"),
            BoolExpr::Not(e) => write!(f, "!{e}"),
            BoolExpr::And(cs) | BoolExpr::Or(cs) => {
                let op = if matches!(self, BoolExpr::And(_)) {
                    " & "
                } else {
                    " | "
                };
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            BoolExpr::Implies(a, b) => write!(f, "({a} -> {b})"),
            BoolExpr::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Token {
    Num(u32),
    True,
    False,
    Not,
    Minus,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn qerr(position: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Query {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u32 = text[start..i]
                    .parse()
                    .map_err(|_| qerr(start, "variable index too large"))?;
                if n == 0 {
                    return Err(qerr(start, "variable index 0 is not allowed"));
                }
                out.push((start, Token::Num(n)));
                continue;
            }
            b'T' => Token::True,
            b'F' => Token::False,
            b'!' | b'~' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Implies
            }
            b'-' => Token::Minus,
            b'<' if text[i..].starts_with("<->") => {
                i += 2;
                Token::Iff
            }
            _ => return Err(qerr(start, format!("unexpected character `{}`", c as char))),
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn iff(&mut self) -> Result<BoolExpr, FormulaError> {
        let mut lhs = self.implies()?;
        while self.peek() == Some(Token::Iff) {
            self.pos += 1;
            let rhs = self.implies()?;
            lhs = BoolExpr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<BoolExpr, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(Token::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(BoolExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<BoolExpr, FormulaError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(Token::Or) {
            self.pos += 1;
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            BoolExpr::Or(items)
        })
    }

    fn and(&mut self) -> Result<BoolExpr, FormulaError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(Token::And) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            BoolExpr::And(items)
        })
    }

    fn unary(&mut self) -> Result<BoolExpr, FormulaError> {
        let at = self.offset();
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(BoolExpr::not(self.unary()?))
            }
            Some(Token::Minus) => {
                self.pos += 1;
                match self.peek() {
                    Some(Token::Num(n)) => {
                        self.pos += 1;
                        Ok(BoolExpr::not(BoolExpr::var(n)))
                    }
                    _ => Err(qerr(
                        self.offset(),
                        "`-` must be followed by a variable index",
                    )),
                }
            }
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(BoolExpr::var(n))
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(BoolExpr::Const(true))
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(BoolExpr::Const(false))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.iff()?;
                if self.peek() != Some(Token::RParen) {
                    return Err(qerr(self.offset(), "expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(t) => Err(qerr(at, format!("unexpected token {t:?}"))),
            None => Err(qerr(at, "unexpected end of input")),
        }
    }
}

/// Parses a query formula.
///
/// Precedence from lowest to highest: `<->`, `->` (right associative), `|`,
/// `&`, `!`. Atoms are positive integers and the constants `T` and `F`;
/// `-n` abbreviates `!n`.
pub fn parse_query(text: &str) -> Result<BoolExpr, FormulaError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let e = p.iff()?;
    if p.pos != p.tokens.len() {
        return Err(qerr(p.offset(), "trailing input"));
    }
    Ok(e)
}
