//! Text syntax for chain descriptors and elements.
//!
//! ```text
//! chain := "fin(" INT ")" | "omega" | "omegastar"
//!        | "pow(" chain "," elem "," chain ")"
//!        | "le0(" chain "," elem ")" | "lt0(" chain "," elem ")"
//!        | "solve1(" chain "," elem ")" | "solve2(" … ")" | "solve3(" … ")"
//!        | "hprod(" chain "," elem (";" chain "," elem)* ")"
//! elem  := "f" INT | "n" INT | "s" INT | "{" [pair ("," pair)*] "}"
//!        | "stage(" INT "," elem ")" | "tup(" elem ("," elem)* ")"
//! pair  := elem ":" elem
//! ```
//!
//! Whitespace between tokens is ignored. `hprod` and `tup` cover the finite
//! heterogeneous products.

use std::fmt;

use thiserror::Error;

use crate::chain::{ChainDesc, Elem, EqKind};
use crate::error::ChainError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Invariant(#[from] ChainError),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "E_SYNTAX",
            ParseError::Invariant(e) => e.code(),
        }
    }
}

/// Parses a chain expression and checks its construction invariants.
pub fn parse_chain(text: &str) -> Result<ChainDesc, ParseError> {
    let mut p = Parser::new(text);
    let c = p.chain()?;
    p.end()?;
    c.validate()?;
    Ok(c)
}

/// Parses an element literal. Membership is not checked here.
pub fn parse_elem(text: &str) -> Result<Elem, ParseError> {
    let mut p = Parser::new(text);
    let e = p.elem()?;
    p.end()?;
    Ok(e)
}

pub fn format_chain(c: &ChainDesc) -> String {
    c.to_string()
}

pub fn format_elem(e: &Elem) -> String {
    e.to_string()
}

impl fmt::Display for ChainDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainDesc::Fin(n) => write!(f, "fin({n})"),
            ChainDesc::Omega => f.write_str("omega"),
            ChainDesc::OmegaStar => f.write_str("omegastar"),
            ChainDesc::Pow { base, zero, exp } => write!(f, "pow({base}, {zero}, {exp})"),
            ChainDesc::SegLe { of, bound } => write!(f, "le0({of}, {bound})"),
            ChainDesc::SegLt { of, bound } => write!(f, "lt0({of}, {bound})"),
            ChainDesc::HetProd(factors) => {
                f.write_str("hprod(")?;
                for (i, (c, z)) in factors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{c}, {z}")?;
                }
                f.write_str(")")
            }
            ChainDesc::Fix { kind, base, zero } => {
                write!(f, "solve{}({base}, {zero})", kind.number())
            }
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::FinIdx(i) => write!(f, "f{i}"),
            Elem::Nat(i) => write!(f, "n{i}"),
            Elem::StarIdx(k) => write!(f, "s{k}"),
            Elem::Map(pairs) => {
                f.write_str("{")?;
                for (i, (k, v)) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                f.write_str("}")
            }
            Elem::Stage(n, inner) => write!(f, "stage({n}, {inner})"),
            Elem::Tuple(values) => {
                f.write_str("tup(")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{}'", byte as char))
        }
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            self.error("trailing input")
        } else {
            Ok(())
        }
    }

    fn word(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a keyword");
        }
        // ASCII-only slice of valid UTF-8
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default())
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected an integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        digits.parse().or_else(|_| {
            self.pos = start;
            self.error("integer out of range")
        })
    }

    fn chain(&mut self) -> Result<ChainDesc, ParseError> {
        let start = self.pos;
        let word = self.word()?;
        match word {
            "fin" => {
                self.expect(b'(')?;
                let n = self.int()?;
                self.expect(b')')?;
                Ok(ChainDesc::Fin(n))
            }
            "omega" => Ok(ChainDesc::Omega),
            "omegastar" => Ok(ChainDesc::OmegaStar),
            "pow" => {
                self.expect(b'(')?;
                let base = self.chain()?;
                self.expect(b',')?;
                let zero = self.elem()?;
                self.expect(b',')?;
                let exp = self.chain()?;
                self.expect(b')')?;
                Ok(ChainDesc::Pow {
                    base: Box::new(base),
                    zero,
                    exp: Box::new(exp),
                })
            }
            "le" | "lt" => {
                if self.int()? != 0 {
                    self.pos = start;
                    return self.error("expected le0 or lt0");
                }
                self.expect(b'(')?;
                let of = Box::new(self.chain()?);
                self.expect(b',')?;
                let bound = self.elem()?;
                self.expect(b')')?;
                Ok(if word == "le" {
                    ChainDesc::SegLe { of, bound }
                } else {
                    ChainDesc::SegLt { of, bound }
                })
            }
            "solve" => {
                let at = self.pos;
                let kind = u8::try_from(self.int()?)
                    .ok()
                    .and_then(EqKind::from_number);
                let Some(kind) = kind else {
                    self.pos = at;
                    return self.error("expected solve1, solve2 or solve3");
                };
                self.expect(b'(')?;
                let base = self.chain()?;
                self.expect(b',')?;
                let zero = self.elem()?;
                self.expect(b')')?;
                Ok(ChainDesc::Fix {
                    kind,
                    base: Box::new(base),
                    zero,
                })
            }
            "hprod" => {
                self.expect(b'(')?;
                let mut factors = Vec::new();
                loop {
                    let c = self.chain()?;
                    self.expect(b',')?;
                    let z = self.elem()?;
                    factors.push((c, z));
                    if !self.eat(b';') {
                        break;
                    }
                }
                self.expect(b')')?;
                Ok(ChainDesc::HetProd(factors))
            }
            other => {
                self.pos = start;
                self.error(format!("unknown chain constructor '{other}'"))
            }
        }
    }

    fn elem(&mut self) -> Result<Elem, ParseError> {
        if self.eat(b'{') {
            let mut pairs = Vec::new();
            if !self.eat(b'}') {
                loop {
                    let k = self.elem()?;
                    self.expect(b':')?;
                    let v = self.elem()?;
                    pairs.push((k, v));
                    if self.eat(b'}') {
                        break;
                    }
                    self.expect(b',')?;
                }
            }
            return Ok(Elem::Map(pairs));
        }
        let start = self.pos;
        let word = self.word()?;
        match word {
            "f" => Ok(Elem::FinIdx(self.int()?)),
            "n" => Ok(Elem::Nat(self.int()?)),
            "s" => Ok(Elem::StarIdx(self.int()?)),
            "stage" => {
                self.expect(b'(')?;
                let at = self.pos;
                let Ok(n) = u32::try_from(self.int()?) else {
                    self.pos = at;
                    return self.error("stage number out of range");
                };
                self.expect(b',')?;
                let inner = self.elem()?;
                self.expect(b')')?;
                Ok(Elem::stage(n, inner))
            }
            "tup" => {
                self.expect(b'(')?;
                let mut values = vec![self.elem()?];
                while self.eat(b',') {
                    values.push(self.elem()?);
                }
                self.expect(b')')?;
                Ok(Elem::Tuple(values))
            }
            other => {
                self.pos = start;
                self.error(format!("unknown element form '{other}'"))
            }
        }
    }
}
