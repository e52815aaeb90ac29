//! Parser for the Bio-PEPA subset emitted by [`super::render`].
//!
//! ```text
//! file      = { location | parameter | rate | species } model ;
//! location  = "location" ID ":" "size" "=" NUM "," "type" "=" "compartment" ";" ;
//! parameter = ID "=" [ "-" ] NUM ";" ;
//! rate      = "kineticLawOf" ID ":" expr ";" ;
//! species   = ID "=" term { "+" term } ";" ;
//! term      = "(" ID "," NUM ")" op ID ;
//! op        = "<<" | ">>" | "(+)" | "(-)" | "(.)" ;
//! model     = ID "[" NUM "]" { "<*>" ID "[" NUM "]" } ;
//! ```

use std::collections::{BTreeMap, BTreeSet};

use super::BioPepaOperator;
use crate::diagnostic::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Op(BioPepaOperator),
    Coop,
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line_no = li as u32 + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = |len: usize| SourceSpan::new(line_no, i as u32 + 1, len as u32);
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let rest2: String = chars[i..chars.len().min(i + 2)].iter().collect();
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if rest.starts_with("//") {
                break;
            }
            let (tok, len) = if let Some(op) = BioPepaOperator::from_token(&rest) {
                (Tok::Op(op), 3)
            } else if rest == "<*>" {
                (Tok::Coop, 3)
            } else if let Some(op) = BioPepaOperator::from_token(&rest2) {
                (Tok::Op(op), 2)
            } else if c.is_ascii_alphabetic() || c == '_' {
                let n = chars[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                    .count();
                (Tok::Ident(chars[i..i + n].iter().collect()), n)
            } else if c.is_ascii_digit() || c == '.' {
                let mut n = 0;
                while i + n < chars.len() {
                    let d = chars[i + n];
                    let sign =
                        (d == '-' || d == '+') && n > 0 && matches!(chars[i + n - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || sign {
                        n += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..i + n].iter().collect();
                match s.parse() {
                    Ok(v) => (Tok::Num(v), n),
                    Err(_) => {
                        diags.push(Diagnostic::error(
                            Code::Syntax,
                            span(n),
                            format!("invalid number `{s}`"),
                        ));
                        i += n;
                        continue;
                    }
                }
            } else if "=;:,()[]+-*/".contains(c) {
                (Tok::Punct(c), 1)
            } else {
                diags.push(Diagnostic::error(
                    Code::UnexpectedChar,
                    span(1),
                    format!("unexpected character `{c}`"),
                ));
                i += 1;
                continue;
            };
            out.push(Token {
                tok,
                span: span(len),
            });
            i += len;
        }
    }
    let last = text.lines().count().max(1) as u32;
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(last + 1, 1, 0),
    });
    out
}

struct Checker {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    params: BTreeMap<String, SourceSpan>,
    rates: BTreeMap<String, SourceSpan>,
    /// identifiers used in rate bodies
    rate_refs: Vec<(String, SourceSpan)>,
    species: BTreeMap<String, SourceSpan>,
    /// reactions referenced by species terms
    term_refs: Vec<(String, SourceSpan)>,
    model: Vec<(String, SourceSpan)>,
}

struct Fail;

impl Checker {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail(&mut self, what: &str) -> Fail {
        let found = match self.peek() {
            Tok::Eof => "end of file".to_string(),
            t => format!("{t:?}"),
        };
        self.diags.push(Diagnostic::error(
            Code::Syntax,
            self.span(),
            format!("expected {what}, found {found}"),
        ));
        Fail
    }

    fn punct(&mut self, c: char) -> Result<(), Fail> {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), Fail> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.fail("an identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Fail> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.fail(&format!("`{kw}`"))),
        }
    }

    fn number(&mut self) -> Result<f64, Fail> {
        match *self.peek() {
            Tok::Num(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.fail("a number")),
        }
    }

    fn define(&mut self, table: Table, name: String, span: SourceSpan) {
        let clash = match table {
            Table::Rate => self.rates.contains_key(&name),
            Table::Param | Table::Species => {
                self.params.contains_key(&name) || self.species.contains_key(&name)
            }
        };
        if clash {
            self.diags.push(Diagnostic::error(
                Code::DuplicateDefinition,
                span,
                format!("`{name}` is defined more than once"),
            ));
            return;
        }
        match table {
            Table::Param => self.params.insert(name, span),
            Table::Rate => self.rates.insert(name, span),
            Table::Species => self.species.insert(name, span),
        };
    }

    fn skip_statement(&mut self) {
        while !matches!(self.peek(), Tok::Punct(';') | Tok::Eof) {
            self.bump();
        }
        self.bump();
    }

    fn file(&mut self) {
        loop {
            let res = match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::Eof, _) => {
                    self.fail("a model component");
                    return;
                }
                (Tok::Ident(kw), _) if kw == "location" => self.location(),
                (Tok::Ident(kw), _) if kw == "kineticLawOf" => self.rate(),
                (Tok::Ident(_), Tok::Punct('=')) => self.definition(),
                (Tok::Ident(_), Tok::Punct('[')) => {
                    if self.model_line().is_ok() && *self.peek() != Tok::Eof {
                        self.fail("end of file after the model component");
                    }
                    return;
                }
                _ => Err(self.fail("a definition or the model component")),
            };
            if res.is_err() {
                self.skip_statement();
            }
        }
    }

    fn location(&mut self) -> Result<(), Fail> {
        self.bump();
        self.ident()?;
        self.punct(':')?;
        self.keyword("size")?;
        self.punct('=')?;
        self.number()?;
        self.punct(',')?;
        self.keyword("type")?;
        self.punct('=')?;
        self.keyword("compartment")?;
        self.punct(';')
    }

    fn rate(&mut self) -> Result<(), Fail> {
        self.bump();
        let (name, span) = self.ident()?;
        self.punct(':')?;
        self.expr()?;
        self.punct(';')?;
        self.define(Table::Rate, name, span);
        Ok(())
    }

    fn definition(&mut self) -> Result<(), Fail> {
        let (name, span) = self.ident()?;
        self.punct('=')?;
        match self.peek() {
            Tok::Num(_) | Tok::Punct('-') => {
                if *self.peek() == Tok::Punct('-') {
                    self.bump();
                }
                self.number()?;
                self.punct(';')?;
                self.define(Table::Param, name, span);
            }
            _ => {
                loop {
                    self.punct('(')?;
                    let (reaction, rspan) = self.ident()?;
                    self.punct(',')?;
                    let k = self.number()?;
                    if k < 1.0 || k.fract() != 0.0 {
                        self.diags.push(Diagnostic::error(
                            Code::Syntax,
                            rspan,
                            format!("stoichiometry {k} is not a positive integer"),
                        ));
                    }
                    self.punct(')')?;
                    if !matches!(self.peek(), Tok::Op(_)) {
                        return Err(self.fail("a species operator"));
                    }
                    self.bump();
                    let (target, tspan) = self.ident()?;
                    if target != name {
                        self.diags.push(Diagnostic::error(
                            Code::Syntax,
                            tspan,
                            format!("term continues as `{target}` inside component `{name}`"),
                        ));
                    }
                    self.term_refs.push((reaction, rspan));
                    if *self.peek() == Tok::Punct('+') {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.punct(';')?;
                self.define(Table::Species, name, span);
            }
        }
        Ok(())
    }

    fn model_line(&mut self) -> Result<(), Fail> {
        loop {
            let (name, span) = self.ident()?;
            self.punct('[')?;
            self.number()?;
            self.punct(']')?;
            self.model.push((name, span));
            if *self.peek() == Tok::Coop {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn expr(&mut self) -> Result<(), Fail> {
        self.term()?;
        while matches!(self.peek(), Tok::Punct('+' | '-')) {
            self.bump();
            self.term()?;
        }
        Ok(())
    }

    fn term(&mut self) -> Result<(), Fail> {
        self.unary()?;
        while matches!(self.peek(), Tok::Punct('*' | '/')) {
            self.bump();
            self.unary()?;
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<(), Fail> {
        if *self.peek() == Tok::Punct('-') {
            self.bump();
            return self.unary();
        }
        match self.peek().clone() {
            Tok::Num(_) => {
                self.bump();
                Ok(())
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                if *self.peek() == Tok::Punct('(') {
                    if name != "threshold" {
                        self.diags.push(Diagnostic::error(
                            Code::UndeclaredName,
                            span,
                            format!("unknown function `{name}`"),
                        ));
                    }
                    self.bump();
                    self.expr()?;
                    while *self.peek() == Tok::Punct(',') {
                        self.bump();
                        self.expr()?;
                    }
                    self.punct(')')
                } else {
                    self.rate_refs.push((name, span));
                    Ok(())
                }
            }
            Tok::Punct('(') => {
                self.bump();
                self.expr()?;
                self.punct(')')
            }
            _ => Err(self.fail("an operand")),
        }
    }

    fn cross_check(&mut self) {
        for (name, span) in std::mem::take(&mut self.rate_refs) {
            if !self.params.contains_key(&name) && !self.species.contains_key(&name) {
                self.diags.push(Diagnostic::error(
                    Code::UndeclaredName,
                    span,
                    format!("`{name}` is neither a parameter nor a species"),
                ));
            }
        }
        for (name, span) in std::mem::take(&mut self.term_refs) {
            if !self.rates.contains_key(&name) {
                self.diags.push(Diagnostic::error(
                    Code::UndefinedRate,
                    span,
                    format!("reaction `{name}` has no kineticLawOf"),
                ));
            }
        }
        let in_model: BTreeSet<&str> = self.model.iter().map(|(n, _)| n.as_str()).collect();
        for (name, span) in &self.model {
            if !self.species.contains_key(name) {
                self.diags.push(Diagnostic::error(
                    Code::MissingComponent,
                    *span,
                    format!("model component lists `{name}`, which has no species component"),
                ));
            }
        }
        if in_model.len() != self.model.len() {
            self.diags.push(Diagnostic::error(
                Code::DuplicateDefinition,
                self.model[0].1,
                "model component lists a species twice",
            ));
        }
        for (name, span) in &self.species {
            if !in_model.contains(name.as_str()) {
                self.diags.push(Diagnostic::error(
                    Code::MissingComponent,
                    *span,
                    format!("species `{name}` is missing from the model component"),
                ));
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Table {
    Param,
    Rate,
    Species,
}

/// Re-parse emitted Bio-PEPA text and check that every name used is
/// declared. Returns an empty list for well-formed output.
pub fn check_output(text: &str) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let toks = lex(text, &mut diags);
    let mut c = Checker {
        toks,
        pos: 0,
        diags,
        params: BTreeMap::new(),
        rates: BTreeMap::new(),
        rate_refs: Vec::new(),
        species: BTreeMap::new(),
        term_refs: Vec::new(),
        model: Vec::new(),
    };
    c.file();
    c.cross_check();
    c.diags.sort_by_key(|d| d.span);
    c.diags
}
