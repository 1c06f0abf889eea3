//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' signed-integer)?
//! atom   := integer | constant-name | variable-name | '(' expr ')'
//! ```
//!
//! A leading unary minus is additionally accepted so that every string the
//! canonical printer emits re-parses. Division is only accepted when the
//! divisor reduces to a single power-times-coefficient term.

use std::sync::Arc;

use num_bigint::BigInt;

use super::coefficient::Coefficient;
use super::function::SymbolicFunction;
use super::{SymExprError, SymbolTable};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(Tok, usize)>, SymExprError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while lx.pos < lx.src.len() {
            let start = lx.pos;
            let b = lx.src[lx.pos];
            match b {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    lx.pos += 1;
                }
                b'+' => out.push((Tok::Plus, lx.bump())),
                b'-' => out.push((Tok::Minus, lx.bump())),
                b'*' => out.push((Tok::Star, lx.bump())),
                b'/' => out.push((Tok::Slash, lx.bump())),
                b'^' => out.push((Tok::Caret, lx.bump())),
                b'(' => out.push((Tok::LParen, lx.bump())),
                b')' => out.push((Tok::RParen, lx.bump())),
                b'0'..=b'9' => {
                    while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                        lx.pos += 1;
                    }
                    let s = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    out.push((Tok::Int(s.parse().unwrap()), start));
                }
                b'A'..=b'Z' | b'a'..=b'z' => {
                    while lx.pos < lx.src.len()
                        && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                    {
                        lx.pos += 1;
                    }
                    let s = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap();
                    out.push((Tok::Ident(s.to_string()), start));
                }
                _ => {
                    return Err(SymExprError::Syntax {
                        position: start,
                        message: format!("unexpected character '{}'", b as char),
                    })
                }
            }
        }
        Ok(out)
    }

    fn bump(&mut self) -> usize {
        let p = self.pos;
        self.pos += 1;
        p
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    table: Arc<SymbolTable>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), SymExprError> {
        let pos = self.pos();
        match self.advance() {
            Some(got) if got == t => Ok(()),
            _ => Err(SymExprError::Syntax {
                position: pos,
                message: format!("expected {:?}", t),
            }),
        }
    }

    fn expr(&mut self) -> Result<SymbolicFunction, SymExprError> {
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            self.advance();
            negate = true;
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.advance();
                    let rhs = self.term()?;
                    acc = acc.add(&rhs);
                }
                Some(Tok::Minus) => {
                    self.advance();
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SymbolicFunction, SymExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.advance();
                    let rhs = self.factor()?;
                    acc = acc.mul(&rhs);
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.advance();
                    let rhs = self.factor()?;
                    acc = acc.div(&rhs).map_err(|e| match e {
                        SymExprError::NotMonomialDivisor => SymExprError::Syntax {
                            position: pos,
                            message:
                                "divisor is not a single power-times-coefficient term".into(),
                        },
                        other => other,
                    })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SymbolicFunction, SymExprError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.advance();
            let pos = self.pos();
            let mut sign = 1i64;
            if self.peek() == Some(&Tok::Minus) {
                self.advance();
                sign = -1;
            } else if self.peek() == Some(&Tok::Plus) {
                self.advance();
            }
            match self.advance() {
                Some(Tok::Int(n)) => {
                    let e: i64 = n.try_into().map_err(|_| SymExprError::Syntax {
                        position: pos,
                        message: "exponent out of range".into(),
                    })?;
                    let e32 = i32::try_from(sign * e).map_err(|_| SymExprError::Syntax {
                        position: pos,
                        message: "exponent out of range".into(),
                    })?;
                    return base.pow(e32);
                }
                _ => {
                    return Err(SymExprError::Syntax {
                        position: pos,
                        message: "expected integer exponent after '^'".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SymbolicFunction, SymExprError> {
        let pos = self.pos();
        match self.advance() {
            Some(Tok::Int(n)) => Ok(SymbolicFunction::constant(Coefficient::from_int(
                &self.table,
                n,
            ))),
            Some(Tok::Ident(name)) => {
                if name == self.table.variable() {
                    Ok(SymbolicFunction::xpow(&self.table, 1))
                } else if self.table.index_of(&name).is_some() {
                    Ok(SymbolicFunction::constant(
                        Coefficient::symbol(&self.table, &name).unwrap(),
                    ))
                } else {
                    Err(SymExprError::UnknownIdentifier {
                        name,
                        position: pos,
                    })
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(SymExprError::Syntax {
                position: pos,
                message: "expected integer, identifier, or '('".into(),
            }),
        }
    }
}

/// Parse `text` into a [`SymbolicFunction`] over `table`.
pub fn parse_expr(
    text: &str,
    table: &Arc<SymbolTable>,
) -> Result<SymbolicFunction, SymExprError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        table: table.clone(),
        end: text.len(),
    };
    let f = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(SymExprError::Syntax {
            position: p.pos(),
            message: "trailing input".into(),
        });
    }
    Ok(f)
}
