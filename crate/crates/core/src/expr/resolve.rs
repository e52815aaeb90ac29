use std::collections::BTreeMap;

use thiserror::Error;

use super::{parse_expr, Alias, BinOp, ExprError, Node, PropensityExpr, ResolvedExpr, Symbol};
use crate::diagnostic::Code;
use crate::model::{Document, LogicInput, LogicKind, LogicalOperator, ProcessNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolveError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ExprError),
    #[error("process `{process}` has no arc with ref `{arc_ref}`")]
    UnknownManualArcRef { process: String, arc_ref: String },
    #[error("arc `{arc_id}` (ref `{arc_ref}`) has no property `{property}`")]
    UnknownProperty {
        arc_id: String,
        arc_ref: String,
        property: String,
    },
    #[error("ref `{arc_ref}` points at unbounded pool `{entity}`, which has no count")]
    UnboundedEntity { arc_ref: String, entity: String },
    #[error("unknown logic operator `{0}`")]
    UnknownLogic(String),
    #[error("logic operator `{0}` depends on itself")]
    CyclicLogic(String),
}

impl ResolveError {
    pub fn code(&self) -> Code {
        match self {
            ResolveError::Syntax(_) => Code::RateSyntax,
            ResolveError::UnknownManualArcRef { .. } => Code::UnknownManualArcRef,
            ResolveError::UnknownProperty { .. } => Code::UnknownProperty,
            ResolveError::UnboundedEntity { .. } => Code::InvalidValue,
            ResolveError::UnknownLogic(_) => Code::DanglingLogicRef,
            ResolveError::CyclicLogic(_) => Code::CyclicLogic,
        }
    }
}

/// Replace arc-local aliases with global names.
///
/// `<par: m.p>` becomes `<ArcID>_p` and `<ent: m>` the id of the arc's
/// entity, where the arc is the one of `process` whose manual ref is `m`.
/// Lookups never leave the process's own arcs. `<log: g>` is replaced by
/// the lowered arithmetic of operator `g`.
pub fn resolve(
    expr: &PropensityExpr,
    process: &ProcessNode,
    doc: &Document,
) -> Result<ResolvedExpr, ResolveError> {
    let local: BTreeMap<&str, &crate::model::Arc> = doc
        .arcs
        .values()
        .filter(|a| a.process == process.id)
        .filter_map(|a| a.manual_equation_arc_id.as_deref().map(|m| (m, a)))
        .collect();
    let arc_for = |arc_ref: &str| {
        local
            .get(arc_ref)
            .copied()
            .ok_or_else(|| ResolveError::UnknownManualArcRef {
                process: process.id.clone(),
                arc_ref: arc_ref.to_string(),
            })
    };

    expr.try_map(&mut |alias| match alias {
        Alias::Param { arc_ref, property } => {
            let arc = arc_for(arc_ref)?;
            if doc.property(&arc.arc_id, property).is_none() {
                return Err(ResolveError::UnknownProperty {
                    arc_id: arc.arc_id.clone(),
                    arc_ref: arc_ref.clone(),
                    property: property.clone(),
                });
            }
            Ok(Node::Leaf(Symbol::Param(parameter_name(
                &arc.arc_id,
                property,
            ))))
        }
        Alias::Entity { arc_ref } => {
            let arc = arc_for(arc_ref)?;
            if doc
                .entities
                .get(&arc.entity)
                .is_some_and(|e| e.epn_type.is_unbounded())
            {
                return Err(ResolveError::UnboundedEntity {
                    arc_ref: arc_ref.clone(),
                    entity: arc.entity.clone(),
                });
            }
            Ok(Node::Leaf(Symbol::Entity(arc.entity.clone())))
        }
        Alias::Logic { id } => {
            let op = doc
                .logic_operators
                .get(id)
                .ok_or_else(|| ResolveError::UnknownLogic(id.clone()))?;
            lower_logic(op, doc)
        }
    })
}

/// Parse and resolve in one step.
pub fn resolve_text(
    text: &str,
    process: &ProcessNode,
    doc: &Document,
) -> Result<ResolvedExpr, ResolveError> {
    resolve(&parse_expr(text)?, process, doc)
}

/// Global Bio-PEPA parameter name for an arc property.
pub fn parameter_name(arc_id: &str, property: &str) -> String {
    format!("{arc_id}_{property}")
}

/// Lower a logic operator network into arithmetic.
///
/// Entity inputs become `threshold(entity, input_threshold)`; AND is the
/// product of its inputs, NOT is `1 - input`, OR is `threshold(sum, 1)`.
/// The resulting 0/1 value `b` is scaled to `low + b * (high - low)`.
pub fn lower_logic(op: &LogicalOperator, doc: &Document) -> Result<ResolvedExpr, ResolveError> {
    let b = boolean(op, doc, &mut Vec::new())?;
    let low = Node::num(op.output_low);
    let span = Node::num(op.output_high - op.output_low);
    Ok(Node::binary(
        BinOp::Add,
        low,
        Node::binary(BinOp::Mul, b, span),
    ))
}

fn boolean(
    op: &LogicalOperator,
    doc: &Document,
    stack: &mut Vec<String>,
) -> Result<ResolvedExpr, ResolveError> {
    if stack.contains(&op.id) {
        return Err(ResolveError::CyclicLogic(op.id.clone()));
    }
    stack.push(op.id.clone());
    let mut inputs = Vec::with_capacity(op.inputs.len());
    for input in &op.inputs {
        inputs.push(match input {
            LogicInput::Entity { id, threshold } => Node::threshold(
                Node::Leaf(Symbol::Entity(id.clone())),
                Node::num(*threshold),
            ),
            LogicInput::Operator(id) => {
                let inner = doc
                    .logic_operators
                    .get(id)
                    .ok_or_else(|| ResolveError::UnknownLogic(id.clone()))?;
                boolean(inner, doc, stack)?
            }
        });
    }
    stack.pop();
    let mut it = inputs.into_iter();
    let first = it.next().unwrap_or(Node::num(0.0));
    Ok(match op.kind {
        LogicKind::And => it.fold(first, |acc, x| Node::binary(BinOp::Mul, acc, x)),
        LogicKind::Not => Node::binary(BinOp::Sub, Node::num(1.0), first),
        LogicKind::Or => {
            let sum = it.fold(first, |acc, x| Node::binary(BinOp::Add, acc, x));
            Node::threshold(sum, Node::num(1.0))
        }
    })
}

/// Returns the id of an operator on a cycle, if the operator graph has one.
pub fn check_logic_acyclic(doc: &Document) -> Result<(), String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        id: &'a str,
        doc: &'a Document,
        marks: &mut BTreeMap<&'a str, Mark>,
    ) -> Result<(), String> {
        match marks.get(id) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => return Err(id.to_string()),
            None => {}
        }
        marks.insert(id, Mark::Open);
        if let Some(op) = doc.logic_operators.get(id) {
            for input in &op.inputs {
                if let LogicInput::Operator(next) = input {
                    visit(next, doc, marks)?;
                }
            }
        }
        marks.insert(id, Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for id in doc.logic_operators.keys() {
        visit(id, doc, &mut marks)?;
    }
    Ok(())
}
