//! Parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | name | '(' expr ')'
//! name   := u<i> | u<i>_x | u<i>_xx | u<i>_x<k> | p<i>[_x...] | r<a> | c<k>
//! ```
//!
//! Division is allowed only by expressions that reduce to a nonzero rational
//! function of the field variables without parameters. Printing a
//! [`DiffPoly`] and parsing the output gives back the same value.

use std::collections::BTreeMap;

use super::diffpoly::DiffPoly;
use super::ratfunc::RatFunc;
use super::{KernelError, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {msg}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(num_bigint::BigInt),
    Name(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let col = i + 1;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((col, Tok::Int(text.parse().expect("digits"))));
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Name(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((col, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(ParseError { column: col, msg: format!("unexpected character '{ch}'") });
        }
    }
    Ok(out)
}

/// Splits `base_suffix` into the base name and its x-derivative order.
fn split_jet(name: &str) -> Option<(&str, usize)> {
    let Some(pos) = name.find('_') else {
        return Some((name, 0));
    };
    let (base, suffix) = (&name[..pos], &name[pos + 1..]);
    let order = if !suffix.is_empty() && suffix.chars().all(|c| c == 'x') {
        suffix.len()
    } else {
        let digits = suffix.strip_prefix('x')?;
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()?
    };
    Some((base, order))
}

fn indexed(base: &str, prefix: char) -> Option<usize> {
    let rest = base.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse::<usize>().ok().filter(|&k| k >= 1 && k <= u16::MAX as usize).map(|k| k - 1)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    aliases: &'a BTreeMap<String, String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, column: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column, msg: msg.into() })
    }

    fn lift<T>(&self, column: usize, r: Result<T, KernelError>) -> Result<T, ParseError> {
        r.or_else(|e| self.err(column, e.to_string()))
    }

    fn expr(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            let col = self.column();
            self.pos += 1;
            let rhs_col = self.column();
            let rhs = self.unary()?;
            if op == '*' {
                acc = self.lift(col, acc.checked_mul(&rhs))?;
            } else {
                let Some(d) = rhs.as_ratfunc() else {
                    return self.err(rhs_col, "divisor must be a function of u1..un only");
                };
                let inv = self.lift(rhs_col, RatFunc::one().checked_div(&d))?;
                acc = acc.scale(&inv);
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<DiffPoly, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<DiffPoly, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            let col = self.column();
            self.pos += 1;
            let ecol = self.column();
            let Some(Tok::Int(e)) = self.peek().cloned() else {
                return self.err(ecol, "expected a non-negative integer exponent");
            };
            self.pos += 1;
            let Ok(e) = u32::try_from(e) else {
                return self.err(ecol, "exponent too large");
            };
            return self.lift(col, base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                Ok(DiffPoly::constant(Rat::from_integer(k)))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                self.name(col, &name)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err(self.column(), "expected ')'"),
                }
            }
            Some(Tok::Op(c)) => self.err(col, format!("unexpected '{c}'")),
            None => self.err(col, "unexpected end of input"),
        }
    }

    fn name(&self, col: usize, name: &str) -> Result<DiffPoly, ParseError> {
        let Some((base, order)) = split_jet(name) else {
            return self.err(col, format!("malformed jet suffix in '{name}'"));
        };
        let base = self.aliases.get(base).map_or(base, String::as_str);
        if let Some(i) = indexed(base, 'u') {
            return Ok(DiffPoly::u(i, order));
        }
        if let Some(i) = indexed(base, 'p') {
            return Ok(DiffPoly::p(i, order));
        }
        if let Some(a) = indexed(base, 'r') {
            if order > 0 {
                return self.err(col, "nonlocal variables carry no x-derivatives");
            }
            return Ok(DiffPoly::r(a));
        }
        if let Some(k) = indexed(base, 'c') {
            if order > 0 {
                return self.err(col, "parameters carry no x-derivatives");
            }
            return Ok(DiffPoly::param(k));
        }
        self.err(col, format!("unknown name '{name}'"))
    }
}

/// Parses an expression with the given base-name aliases (e.g. `rho` → `u1`).
pub fn parse_with_aliases(s: &str, aliases: &BTreeMap<String, String>) -> Result<DiffPoly, ParseError> {
    let toks = lex(s)?;
    let end = s.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, end, aliases };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err(p.column(), "unexpected trailing input");
    }
    Ok(e)
}

pub fn parse(s: &str) -> Result<DiffPoly, ParseError> {
    parse_with_aliases(s, &BTreeMap::new())
}

/// Parses an expression that must be a rational function of `u1..un` and parameters.
pub fn parse_ratfunc(s: &str) -> Result<RatFunc, ParseError> {
    parse(s)?
        .as_ratfunc()
        .ok_or_else(|| ParseError { column: 1, msg: "expected a function of u1..un without jets".into() })
}
