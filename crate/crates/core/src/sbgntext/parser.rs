use std::collections::BTreeSet;

use super::lexer::{tokenize, Token, TokenKind};
use crate::diagnostic::{has_errors, Code, Diagnostic, SourceSpan};
use crate::model::{
    Arc, ArcType, Compartment, Document, EntityPoolNode, EpnType, LogicInput, LogicKind,
    LogicalOperator, ModelError, NodeRef, ProcessNode, ProcessType, QuantitativeProperty,
};

/// Prefix of automatically assigned arc ids.
pub const ARC_ID_PREFIX: &str = "st";

/// Parse model text into a [`Document`].
///
/// All lexical and syntax errors are collected; the parser resynchronises
/// at the next top-level statement after an error. Arcs declared without an
/// id get `st<N>`, where `N` is the arc's 1-based position among all arc
/// statements.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        doc: Document::new(),
        arc_ordinal: 0,
    };
    p.file();
    diags.append(&mut p.diags);
    diags.sort_by_key(|d| d.span);
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(p.doc)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    doc: Document,
    arc_ordinal: usize,
}

/// Marker for an error that has already been reported.
struct Reported;

type PResult<T> = Result<T, Reported>;

struct Attr {
    name: String,
    span: SourceSpan,
}

/// Tracks which attributes a block has seen.
struct Block {
    seen: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, code: Code, span: SourceSpan, msg: impl Into<String>) -> Reported {
        self.diags.push(Diagnostic::error(code, span, msg));
        Reported
    }

    fn expected(&mut self, what: &str) -> Reported {
        let t = self.peek().clone();
        self.error(
            Code::Syntax,
            t.span,
            format!("expected {what}, found {}", t.kind.describe()),
        )
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<SourceSpan> {
        if self.peek().kind == kind {
            Ok(self.bump().span)
        } else {
            Err(self.expected(what))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().kind.clone() {
            TokenKind::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.expected(what)),
        }
    }

    fn number(&mut self) -> PResult<(f64, SourceSpan)> {
        match self.peek().kind {
            TokenKind::Number(v) => Ok((v, self.bump().span)),
            _ => Err(self.expected("a number")),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().kind.clone() {
            TokenKind::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.expected("a quoted string")),
        }
    }

    fn keyword<T: std::str::FromStr>(&mut self, what: &str) -> PResult<T> {
        let (name, span) = self.ident(what)?;
        name.parse::<T>().map_err(|_| {
            self.error(
                Code::InvalidValue,
                span,
                format!("`{name}` is not a valid {what}"),
            )
        })
    }

    /// Skip to just past the `}` closing the current statement, or to the
    /// next statement keyword at depth zero.
    fn recover(&mut self, mut depth: usize) {
        loop {
            match &self.peek().kind {
                TokenKind::Eof => return,
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    if depth <= 1 {
                        self.bump();
                        return;
                    }
                    depth -= 1;
                }
                TokenKind::Ident(k) if depth == 0 && is_statement_keyword(k) => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn file(&mut self) {
        while self.peek().kind != TokenKind::Eof {
            let t = self.peek().clone();
            let TokenKind::Ident(kw) = &t.kind else {
                self.expected("`compartment`, `entity`, `process`, `arc` or `logic`");
                self.bump();
                self.recover(0);
                continue;
            };
            if !is_statement_keyword(kw) {
                self.expected("`compartment`, `entity`, `process`, `arc` or `logic`");
                self.bump();
                self.recover(0);
                continue;
            }
            let kw = kw.clone();
            self.bump();
            let mut depth = 0;
            let res = match kw.as_str() {
                "compartment" => self.compartment(t.span, &mut depth),
                "entity" => self.entity(t.span, &mut depth),
                "process" => self.process(t.span, &mut depth),
                "arc" => self.arc(t.span, &mut depth),
                _ => self.logic(t.span, &mut depth),
            };
            if res.is_err() {
                self.recover(depth);
            }
        }
    }

    fn open(&mut self, depth: &mut usize) -> PResult<Block> {
        self.expect(TokenKind::LBrace, "`{`")?;
        *depth = 1;
        Ok(Block {
            seen: BTreeSet::new(),
        })
    }

    /// Next `name:` inside a block, or `None` at the closing brace.
    fn attr(&mut self, block: &mut Block, depth: &mut usize) -> PResult<Option<Attr>> {
        if self.peek().kind == TokenKind::RBrace {
            self.bump();
            *depth = 0;
            return Ok(None);
        }
        let (name, span) = self.ident("an attribute name or `}`")?;
        if name != "input" && !block.seen.insert(name.clone()) {
            return Err(self.error(
                Code::DuplicateAttribute,
                span,
                format!("attribute `{name}` given twice"),
            ));
        }
        if name != "params" {
            self.expect(TokenKind::Colon, "`:`")?;
        }
        Ok(Some(Attr { name, span }))
    }

    fn unknown_attr(&mut self, attr: &Attr, stmt: &str) -> Reported {
        self.error(
            Code::UnknownAttribute,
            attr.span,
            format!("unknown attribute `{}` in {stmt}", attr.name),
        )
    }

    fn missing(&mut self, span: SourceSpan, stmt: &str, id: &str, attr: &str) -> Reported {
        self.error(
            Code::MissingAttribute,
            span,
            format!("{stmt} `{id}` is missing `{attr}`"),
        )
    }

    fn insert(&mut self, res: Result<(), ModelError>, node: NodeRef, span: SourceSpan) {
        match res {
            Ok(()) => {
                self.doc.spans.insert(node, span);
            }
            Err(e) => {
                self.error(Code::DuplicateId, span, e.to_string());
            }
        }
    }

    fn compartment(&mut self, kw: SourceSpan, depth: &mut usize) -> PResult<()> {
        let (id, _) = self.ident("a compartment id")?;
        let mut block = self.open(depth)?;
        let mut name = None;
        while let Some(attr) = self.attr(&mut block, depth)? {
            match attr.name.as_str() {
                "name" => name = Some(self.string()?),
                _ => return Err(self.unknown_attr(&attr, "compartment")),
            }
        }
        let name = name.unwrap_or_else(|| id.clone());
        let res = self.doc.add_compartment(Compartment {
            id: id.clone(),
            name,
        });
        self.insert(res, NodeRef::Compartment(id), kw);
        Ok(())
    }

    fn entity(&mut self, kw: SourceSpan, depth: &mut usize) -> PResult<()> {
        let (id, _) = self.ident("an entity id")?;
        let mut block = self.open(depth)?;
        let mut epn_type = EpnType::Unspecified;
        let mut count = None;
        let mut compartment = None;
        while let Some(attr) = self.attr(&mut block, depth)? {
            match attr.name.as_str() {
                "type" => epn_type = self.keyword("entity type")?,
                "count" => {
                    let (v, span) = self.number()?;
                    if v < 0.0 {
                        self.error(
                            Code::NegativeCount,
                            span,
                            format!("entity `{id}` has negative count {v}"),
                        );
                    }
                    count = Some(v);
                }
                "compartment" => compartment = Some(self.ident("a compartment id")?.0),
                _ => return Err(self.unknown_attr(&attr, "entity")),
            }
        }
        if epn_type.is_unbounded() {
            count = None;
        }
        let res = self.doc.add_entity(EntityPoolNode {
            id: id.clone(),
            epn_type,
            initial_molecule_count: count,
            compartment,
        });
        self.insert(res, NodeRef::Entity(id), kw);
        Ok(())
    }

    fn process(&mut self, kw: SourceSpan, depth: &mut usize) -> PResult<()> {
        let (id, _) = self.ident("a process id")?;
        let mut block = self.open(depth)?;
        let mut process_type = ProcessType::Process;
        let mut reversible = false;
        let mut forward = None;
        let mut backward = None;
        while let Some(attr) = self.attr(&mut block, depth)? {
            match attr.name.as_str() {
                "type" => process_type = self.keyword("process type")?,
                "reversible" => {
                    let (v, span) = self.ident("`true` or `false`")?;
                    reversible = match v.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => {
                            return Err(self.error(
                                Code::InvalidValue,
                                span,
                                "expected `true` or `false`",
                            ))
                        }
                    };
                }
                "rate" => forward = Some(self.string()?),
                "rate_backward" => backward = Some(self.string()?),
                _ => return Err(self.unknown_attr(&attr, "process")),
            }
        }
        let Some(propensity_forward) = forward else {
            return Err(self.missing(kw, "process", &id, "rate"));
        };
        let res = self.doc.add_process(ProcessNode {
            id: id.clone(),
            process_type,
            reversible,
            propensity_forward,
            propensity_backward: backward,
        });
        self.insert(res, NodeRef::Process(id), kw);
        Ok(())
    }

    fn arc(&mut self, kw: SourceSpan, depth: &mut usize) -> PResult<()> {
        self.arc_ordinal += 1;
        let arc_id = match self.peek().kind.clone() {
            TokenKind::Ident(s) => {
                self.bump();
                s
            }
            _ => format!("{ARC_ID_PREFIX}{}", self.arc_ordinal),
        };
        let mut block = self.open(depth)?;
        let mut kind = None;
        let mut entity = None;
        let mut process = None;
        let mut manual = None;
        let mut stoichiometry = 1u32;
        let mut props: Vec<(QuantitativeProperty, SourceSpan)> = Vec::new();
        while let Some(attr) = self.attr(&mut block, depth)? {
            match attr.name.as_str() {
                "kind" => kind = Some(self.keyword::<ArcType>("arc kind")?),
                "entity" => entity = Some(self.ident("an entity id")?.0),
                "process" => process = Some(self.ident("a process id")?.0),
                "ref" => manual = Some(self.ident("a manual arc ref")?.0),
                "stoichiometry" => {
                    let (v, span) = self.number()?;
                    if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                        return Err(self.error(
                            Code::InvalidValue,
                            span,
                            format!("stoichiometry must be a positive integer, got {v}"),
                        ));
                    }
                    stoichiometry = v as u32;
                }
                "params" => {
                    self.expect(TokenKind::LBrace, "`{`")?;
                    *depth += 1;
                    while self.peek().kind != TokenKind::RBrace {
                        let (name, span) = self.ident("a property name or `}`")?;
                        self.expect(TokenKind::Eq, "`=`")?;
                        let (value, _) = self.number()?;
                        if props.iter().any(|(p, _)| p.name == name) {
                            return Err(self.error(
                                Code::DuplicateId,
                                span,
                                format!("property `{name}` given twice on arc `{arc_id}`"),
                            ));
                        }
                        props.push((QuantitativeProperty { name, value }, span));
                    }
                    self.bump();
                    *depth -= 1;
                }
                _ => return Err(self.unknown_attr(&attr, "arc")),
            }
        }
        let (Some(arc_type), Some(entity), Some(process)) = (kind, entity, process) else {
            let which = ["kind", "entity", "process"]
                .into_iter()
                .filter(|a| !block.seen.contains(*a))
                .collect::<Vec<_>>()
                .join("`, `");
            return Err(self.missing(kw, "arc", &arc_id, &which));
        };
        let res = self.doc.add_arc(Arc {
            arc_id: arc_id.clone(),
            manual_equation_arc_id: manual,
            arc_type,
            entity,
            process,
            stoichiometry,
        });
        let ok = res.is_ok();
        self.insert(res, NodeRef::Arc(arc_id.clone()), kw);
        if ok {
            for (prop, _) in props {
                self.doc.add_property(&arc_id, prop).expect("checked above");
            }
        }
        Ok(())
    }

    fn logic(&mut self, kw: SourceSpan, depth: &mut usize) -> PResult<()> {
        let (id, _) = self.ident("a logic operator id")?;
        let mut block = self.open(depth)?;
        let mut kind = None;
        let mut inputs = Vec::new();
        let mut low = 0.0;
        let mut high = 1.0;
        while let Some(attr) = self.attr(&mut block, depth)? {
            match attr.name.as_str() {
                "op" => kind = Some(self.keyword::<LogicKind>("logic operator")?),
                "input" => {
                    let (source, _) = self.ident("an entity or operator id")?;
                    if self.peek().kind == TokenKind::Ge {
                        self.bump();
                        let (threshold, _) = self.number()?;
                        inputs.push(LogicInput::Entity {
                            id: source,
                            threshold,
                        });
                    } else {
                        inputs.push(LogicInput::Operator(source));
                    }
                }
                "low" => low = self.number()?.0,
                "high" => high = self.number()?.0,
                _ => return Err(self.unknown_attr(&attr, "logic")),
            }
        }
        let Some(kind) = kind else {
            return Err(self.missing(kw, "logic", &id, "op"));
        };
        let res = self.doc.add_logic(LogicalOperator {
            id: id.clone(),
            kind,
            inputs,
            output_low: low,
            output_high: high,
        });
        self.insert(res, NodeRef::Logic(id), kw);
        Ok(())
    }
}

fn is_statement_keyword(s: &str) -> bool {
    matches!(s, "compartment" | "entity" | "process" | "arc" | "logic")
}
