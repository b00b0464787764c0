//! Parser for algebra elements such as `x1^2 + 0.3*x1^3` or `(1-2i)*x1*x2 - x2`.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := [complex ['*']] factor (['*'] factor)*
//! factor := 'x' int ['^' int]
//! ```
//!
//! Complex coefficients are decimals, an imaginary part written `bi`, or a
//! parenthesized `(a+bi)`. Positions in errors are 0-based character offsets.

use std::collections::BTreeMap;

use hyperforge::{AlgebraElement, WideComplex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("constant term at position {pos}: elements have no constant term")]
    ConstantTerm { pos: usize },
    #[error(transparent)]
    Element(#[from] hyperforge::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermExpr {
    pub coeff: WideComplex,
    /// `(k, e)` for `x_k^e`, as written.
    pub factors: Vec<(usize, u32)>,
    /// Character offset where the term starts.
    pub pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementExpr {
    pub source: String,
    pub terms: Vec<TermExpr>,
}

impl ElementExpr {
    /// Highest generator index used.
    pub fn generators(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.0))
            .max()
            .unwrap_or(1)
    }

    /// The exponent-map form; duplicate monomials are summed.
    pub fn exponent_map(&self) -> BTreeMap<Vec<u32>, WideComplex> {
        let k = self.generators();
        let mut out: BTreeMap<Vec<u32>, WideComplex> = BTreeMap::new();
        for t in &self.terms {
            let mut beta = vec![0; k];
            for &(g, e) in &t.factors {
                beta[g - 1] += e;
            }
            let slot = out.entry(beta).or_insert(WideComplex::ZERO);
            *slot = *slot + t.coeff;
        }
        out
    }

    pub fn to_element(&self) -> Result<AlgebraElement, ParseError> {
        Ok(AlgebraElement::new(self.generators(), self.exponent_map())?)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos,
            msg: msg.into(),
        })
    }

    fn integer(&mut self, what: &str) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, format!("expected {what}"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .or_else(|_| self.err(start, format!("{what} out of range")))
    }

    /// Decimal digits with an optional fraction and exponent, starting at `self.pos`.
    fn decimal(&mut self) -> Option<String> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.chars.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos > s
        };
        let int = digits(self);
        let mut frac = false;
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            frac = digits(self);
        }
        if !int && !frac {
            self.pos = start;
            return None;
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn coefficient(&mut self) -> Result<Option<WideComplex>, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                let open = self.pos;
                let close = (open..self.chars.len())
                    .find(|&p| self.chars[p] == ')')
                    .map_or_else(|| self.err(open, "unclosed parenthesis"), Ok)?;
                let inner: String = self.chars[open..=close].iter().collect();
                let z = WideComplex::parse(&inner)
                    .or_else(|_| self.err(open, format!("invalid complex literal {inner}")))?;
                self.pos = close + 1;
                Ok(Some(z))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Some(WideComplex::i()))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let text = self
                    .decimal()
                    .map_or_else(|| self.err(start, "malformed number"), Ok)?;
                let value: f64 = text
                    .parse()
                    .or_else(|_| self.err(start, "malformed number"))?;
                if !value.is_finite() {
                    return self.err(start, "number out of range");
                }
                if self.chars.get(self.pos) == Some(&'i') {
                    self.pos += 1;
                    return Ok(Some(WideComplex::new(0.0, value)));
                }
                Ok(Some(WideComplex::real(value)))
            }
            _ => Ok(None),
        }
    }

    fn factor(&mut self) -> Result<(usize, u32), ParseError> {
        if self.peek() != Some('x') {
            return self.err(self.pos, "expected a generator x<k>");
        }
        self.pos += 1;
        let kpos = self.pos;
        if !self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            return self.err(kpos, "expected a generator index after 'x'");
        }
        let k = self.integer("generator index")?;
        if k == 0 {
            return self.err(kpos, "generators are numbered from 1");
        }
        let mut e = 1;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let epos = self.pos;
            let v = self.integer("exponent")?;
            if v == 0 || v > u32::MAX as u64 {
                return self.err(epos, "exponent must be a positive integer");
            }
            e = v as u32;
        }
        Ok((k as usize, e))
    }

    fn term(&mut self, sign: f64) -> Result<TermExpr, ParseError> {
        let pos = {
            self.skip_ws();
            self.pos
        };
        let coeff = self.coefficient()?;
        let mut factors = Vec::new();
        if coeff.is_some() && self.peek() == Some('*') {
            self.pos += 1;
            if self.peek() != Some('x') {
                return self.err(self.pos, "expected a generator after '*'");
            }
        }
        while self.peek() == Some('x') {
            factors.push(self.factor()?);
            if self.peek() == Some('*') {
                self.pos += 1;
                if self.peek() != Some('x') {
                    return self.err(self.pos, "expected a generator after '*'");
                }
            }
        }
        if factors.is_empty() {
            return match coeff {
                Some(_) => Err(ParseError::ConstantTerm { pos }),
                None => match self.peek() {
                    Some(c) => self.err(self.pos, format!("unexpected '{c}'")),
                    None => self.err(self.pos, "expected a term"),
                },
            };
        }
        let c = coeff.unwrap_or(WideComplex::ONE) * WideComplex::real(sign);
        Ok(TermExpr {
            coeff: c,
            factors,
            pos,
        })
    }
}

pub fn parse_element(text: &str) -> Result<ElementExpr, ParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let mut terms = Vec::new();
    let mut sign = 1.0;
    match p.peek() {
        Some('-') => {
            sign = -1.0;
            p.pos += 1;
        }
        Some('+') => p.pos += 1,
        None => return p.err(0, "empty expression"),
        _ => {}
    }
    loop {
        terms.push(p.term(sign)?);
        match p.peek() {
            None => break,
            Some('+') => sign = 1.0,
            Some('-') => sign = -1.0,
            Some(c) => return p.err(p.pos, format!("unexpected '{c}'")),
        }
        p.pos += 1;
    }
    Ok(ElementExpr {
        source: text.to_string(),
        terms,
    })
}

/// Parses and converts in one step.
pub fn parse_to_element(text: &str) -> Result<AlgebraElement, ParseError> {
    parse_element(text)?.to_element()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> WideComplex {
        WideComplex::real(x)
    }

    #[test]
    fn examples() {
        let e = parse_element("x1^2 + 0.3*x1^3").unwrap();
        let want: BTreeMap<Vec<u32>, WideComplex> =
            [(vec![2], c(1.0)), (vec![3], c(0.3))].into_iter().collect();
        assert_eq!(e.exponent_map(), want);
        let e = parse_element("x1*x2").unwrap();
        assert_eq!(
            e.exponent_map(),
            [(vec![1, 1], c(1.0))].into_iter().collect()
        );
        assert!(matches!(
            parse_element("1 + x1"),
            Err(ParseError::ConstantTerm { pos: 0 })
        ));
    }

    #[test]
    fn coefficients() {
        let e = parse_element("-(1-2i)*x2 + 2i x1x1 - x1^2").unwrap();
        let m = e.exponent_map();
        assert_eq!(m[&vec![0, 1]], WideComplex::new(-1.0, 2.0));
        assert_eq!(m[&vec![2, 0]], WideComplex::new(-1.0, 2.0));
        assert_eq!(parse_element("1.5e-1x1").unwrap().terms[0].coeff, c(0.15));
    }

    #[test]
    fn syntax_positions() {
        let pos = |s: &str| match parse_element(s) {
            Err(ParseError::Syntax { pos, .. }) => pos,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(pos("x1 + "), 5);
        assert_eq!(pos("x1 ^ "), 5);
        assert_eq!(pos("x0"), 1);
        assert_eq!(pos("x1 $ x2"), 3);
        assert_eq!(pos("x1^0"), 3);
        assert_eq!(pos("(1+ x1"), 0);
        assert_eq!(pos(""), 0);
        assert_eq!(pos("2*"), 2);
    }

    #[test]
    fn cancellation_is_degenerate() {
        assert!(matches!(
            parse_to_element("x1 - x1"),
            Err(ParseError::Element(hyperforge::Error::Degenerate(_)))
        ));
    }
}
