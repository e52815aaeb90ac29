use thiserror::Error;

use super::{Alias, BinOp, Node, PropensityExpr, TextRange};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind} at column {}", .pos + 1)]
pub struct ExprError {
    pub kind: ExprErrorKind,
    /// 0-based char offset into the rate text.
    pub pos: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("empty alias")]
    EmptyAlias,
    #[error("malformed alias `{0}`")]
    MalformedAlias(String),
    #[error("unknown alias kind `{0}`")]
    UnknownAliasKind(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("`{0}` takes {1} arguments")]
    Arity(&'static str, usize),
    #[error("bare name `{0}`; refer to parameters and entities through aliases")]
    BareName(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Alias(Alias),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char)
}

fn lex(text: &str) -> Result<Vec<(Tok, TextRange)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |kind, pos| Err(ExprError { kind, pos });
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' | '-' | '*' | '/' => {
                i += 1;
                Tok::Op(c)
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '<' => {
                let Some(end) = chars[i..].iter().position(|&c| c == '>') else {
                    return err(ExprErrorKind::Expected("`>` closing the alias"), i);
                };
                let body: String = chars[i + 1..i + end].iter().collect();
                i += end + 1;
                Tok::Alias(parse_alias(&body, start)?)
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
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
                let s: String = chars[start..i].iter().collect();
                match s.parse::<f64>() {
                    Ok(v) => Tok::Num(v),
                    Err(_) => return err(ExprErrorKind::BadNumber(s), start),
                }
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => return err(ExprErrorKind::UnexpectedChar(other), i),
        };
        toks.push((
            tok,
            TextRange {
                start,
                len: i - start,
            },
        ));
    }
    Ok(toks)
}

fn parse_alias(body: &str, pos: usize) -> Result<Alias, ExprError> {
    let err = |kind| Err(ExprError { kind, pos });
    let Some((kind, rest)) = body.split_once(':') else {
        return err(ExprErrorKind::MalformedAlias(body.trim().to_string()));
    };
    let rest = rest.trim();
    if rest.is_empty() {
        return err(ExprErrorKind::EmptyAlias);
    }
    match kind.trim() {
        "par" => {
            let Some((arc_ref, property)) = rest.split_once('.') else {
                return err(ExprErrorKind::MalformedAlias(rest.to_string()));
            };
            let (arc_ref, property) = (arc_ref.trim(), property.trim());
            if !valid_ident(arc_ref) || !valid_ident(property) {
                return err(ExprErrorKind::MalformedAlias(rest.to_string()));
            }
            Ok(Alias::Param {
                arc_ref: arc_ref.into(),
                property: property.into(),
            })
        }
        "ent" | "log" if !valid_ident(rest) => err(ExprErrorKind::MalformedAlias(rest.to_string())),
        "ent" => Ok(Alias::Entity {
            arc_ref: rest.into(),
        }),
        "log" => Ok(Alias::Logic { id: rest.into() }),
        other => err(ExprErrorKind::UnknownAliasKind(other.to_string())),
    }
}

struct Parser {
    toks: Vec<(Tok, TextRange)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, r)| r.start)
    }

    fn next(&mut self) -> Option<(Tok, TextRange)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn fail<T>(&self, kind: ExprErrorKind) -> Result<T, ExprError> {
        Err(ExprError {
            kind,
            pos: self.here(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else if self.peek().is_none() {
            self.fail(ExprErrorKind::UnexpectedEnd)
        } else {
            self.fail(ExprErrorKind::Expected(what))
        }
    }

    fn sum(&mut self) -> Result<PropensityExpr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            let (_, range) = self.next().unwrap();
            let rhs = self.product()?;
            lhs = Node::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                range,
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<PropensityExpr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            let (_, range) = self.next().unwrap();
            let rhs = self.unary()?;
            lhs = Node::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                range,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<PropensityExpr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<PropensityExpr, ExprError> {
        let at = self.here();
        match self.next() {
            Some((Tok::Num(v), _)) => Ok(Node::Num(v)),
            Some((Tok::Alias(a), _)) => Ok(Node::Leaf(a)),
            Some((Tok::LParen, _)) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => {
                if self.peek() != Some(&Tok::LParen) {
                    return Err(ExprError {
                        kind: ExprErrorKind::BareName(name),
                        pos: at,
                    });
                }
                if name != "threshold" {
                    return Err(ExprError {
                        kind: ExprErrorKind::UnknownBuiltin(name),
                        pos: at,
                    });
                }
                self.pos += 1;
                let mut args = vec![self.sum()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.sum()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != 2 {
                    return Err(ExprError {
                        kind: ExprErrorKind::Arity("threshold", 2),
                        pos: at,
                    });
                }
                let limit = args.pop().unwrap();
                let signal = args.pop().unwrap();
                Ok(Node::threshold(signal, limit))
            }
            None => Err(ExprError {
                kind: ExprErrorKind::UnexpectedEnd,
                pos: at,
            }),
            Some(_) => Err(ExprError {
                kind: ExprErrorKind::Expected("an operand"),
                pos: at,
            }),
        }
    }
}

/// Parse rate text. `*` and `/` bind tighter than `+` and `-`; all binary
/// operators are left-associative.
pub fn parse_expr(text: &str) -> Result<PropensityExpr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let e = p.sum()?;
    if p.peek().is_some() {
        return p.fail(ExprErrorKind::Expected("an operator or end of expression"));
    }
    Ok(e)
}
