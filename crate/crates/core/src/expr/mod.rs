//! Propensity-function expressions.
//!
//! Rate text is parsed into a [`PropensityExpr`] whose leaves are arc-local
//! aliases (`<par: enz.kcat>`, `<ent: enz>`) or logic-gate references
//! (`<log: gate>`). [`resolve`] rewrites those into global parameter names
//! and entity ids, giving a [`ResolvedExpr`] that can be evaluated or
//! rendered into Bio-PEPA.

mod parse;
mod resolve;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use parse::{parse_expr, ExprError, ExprErrorKind};
pub use resolve::{
    check_logic_acyclic, lower_logic, parameter_name, resolve, resolve_text, ResolveError,
};

/// Character range inside the rate text. `start` is a 0-based char offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TextRange {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Arithmetic tree, generic over the kind of leaf symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Node<L> {
    Num(f64),
    Leaf(L),
    Neg(Box<Node<L>>),
    Binary {
        op: BinOp,
        lhs: Box<Node<L>>,
        rhs: Box<Node<L>>,
        /// Operator position, reported on division by zero.
        range: TextRange,
    },
    /// `threshold(signal, limit)`: 1 when signal >= limit, else 0.
    Threshold(Box<Node<L>>, Box<Node<L>>),
}

/// Leaves of an unresolved expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alias {
    /// `<par: arc_ref.property>`
    Param { arc_ref: String, property: String },
    /// `<ent: arc_ref>`
    Entity { arc_ref: String },
    /// `<log: operator_id>`
    Logic { id: String },
}

/// Leaves of a resolved expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    /// Global parameter name `<ArcID>_<property>`.
    Param(String),
    /// Entity pool id.
    Entity(String),
}

pub type PropensityExpr = Node<Alias>;
pub type ResolvedExpr = Node<Symbol>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at column {}", .0.start + 1)]
    DivideByZero(TextRange),
    #[error("unbound name `{0}`")]
    Unbound(String),
}

impl<L> Node<L> {
    pub fn num(v: f64) -> Self {
        Node::Num(v)
    }

    pub fn binary(op: BinOp, lhs: Node<L>, rhs: Node<L>) -> Self {
        Node::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            range: TextRange::default(),
        }
    }

    pub fn threshold(signal: Node<L>, limit: Node<L>) -> Self {
        Node::Threshold(Box::new(signal), Box::new(limit))
    }

    /// Visit every leaf, left to right.
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Node::Num(_) => {}
            Node::Leaf(l) => out.push(l),
            Node::Neg(x) => x.collect_leaves(out),
            Node::Binary { lhs, rhs, .. } | Node::Threshold(lhs, rhs) => {
                lhs.collect_leaves(out);
                rhs.collect_leaves(out);
            }
        }
    }

    /// Rewrite leaves, possibly into whole subtrees.
    pub fn try_map<M, E>(
        &self,
        f: &mut impl FnMut(&L) -> Result<Node<M>, E>,
    ) -> Result<Node<M>, E> {
        Ok(match self {
            Node::Num(v) => Node::Num(*v),
            Node::Leaf(l) => f(l)?,
            Node::Neg(x) => Node::Neg(Box::new(x.try_map(f)?)),
            Node::Binary {
                op,
                lhs,
                rhs,
                range,
            } => Node::Binary {
                op: *op,
                lhs: Box::new(lhs.try_map(f)?),
                rhs: Box::new(rhs.try_map(f)?),
                range: *range,
            },
            Node::Threshold(s, t) => {
                Node::Threshold(Box::new(s.try_map(f)?), Box::new(t.try_map(f)?))
            }
        })
    }

    /// Evaluate with a leaf lookup. `None` from the lookup is an unbound
    /// name.
    pub fn eval_with(
        &self,
        leaf: &mut impl FnMut(&L) -> Result<f64, EvalError>,
    ) -> Result<f64, EvalError> {
        Ok(match self {
            Node::Num(v) => *v,
            Node::Leaf(l) => leaf(l)?,
            Node::Neg(x) => -x.eval_with(leaf)?,
            Node::Binary {
                op,
                lhs,
                rhs,
                range,
            } => {
                let a = lhs.eval_with(leaf)?;
                let b = rhs.eval_with(leaf)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivideByZero(*range));
                        }
                        a / b
                    }
                }
            }
            Node::Threshold(s, t) => {
                let s = s.eval_with(leaf)?;
                let t = t.eval_with(leaf)?;
                threshold(s, t)
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Binary { op, .. } => op.precedence(),
            Node::Neg(_) => 3,
            Node::Num(v) if *v < 0.0 => 3,
            _ => 4,
        }
    }
}

/// 1 when `signal >= limit`, else 0.
pub fn threshold(signal: f64, limit: f64) -> f64 {
    if signal >= limit {
        1.0
    } else {
        0.0
    }
}

/// Name lookup used by [`eval`].
pub trait Lookup {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Lookup for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Lookup for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl<F: Fn(&str) -> Option<f64>> Lookup for F {
    fn lookup(&self, name: &str) -> Option<f64> {
        self(name)
    }
}

/// Evaluate a resolved expression against species counts and parameter
/// values.
pub fn eval(
    expr: &ResolvedExpr,
    state: &impl Lookup,
    params: &impl Lookup,
) -> Result<f64, EvalError> {
    expr.eval_with(&mut |sym| match sym {
        Symbol::Entity(id) => state
            .lookup(id)
            .ok_or_else(|| EvalError::Unbound(id.clone())),
        Symbol::Param(name) => params
            .lookup(name)
            .ok_or_else(|| EvalError::Unbound(name.clone())),
    })
}

impl ResolvedExpr {
    /// Entity ids read by the expression.
    pub fn entities(&self) -> BTreeSet<&str> {
        self.leaves()
            .into_iter()
            .filter_map(|s| match s {
                Symbol::Entity(id) => Some(id.as_str()),
                Symbol::Param(_) => None,
            })
            .collect()
    }

    pub fn params(&self) -> BTreeSet<&str> {
        self.leaves()
            .into_iter()
            .filter_map(|s| match s {
                Symbol::Param(p) => Some(p.as_str()),
                Symbol::Entity(_) => None,
            })
            .collect()
    }
}

impl PropensityExpr {
    pub fn param_aliases(&self) -> usize {
        self.leaves()
            .iter()
            .filter(|l| matches!(l, Alias::Param { .. }))
            .count()
    }

    pub fn entity_aliases(&self) -> usize {
        self.leaves()
            .iter()
            .filter(|l| matches!(l, Alias::Entity { .. }))
            .count()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(s) | Symbol::Entity(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for Alias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alias::Param { arc_ref, property } => write!(f, "<par: {arc_ref}.{property}>"),
            Alias::Entity { arc_ref } => write!(f, "<ent: {arc_ref}>"),
            Alias::Logic { id } => write!(f, "<log: {id}>"),
        }
    }
}

/// Renders with the minimum parentheses that reproduce the same tree:
/// left-associative chains print flat, a right operand of equal precedence
/// is always parenthesised.
impl<L: fmt::Display> fmt::Display for Node<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Leaf(l) => write!(f, "{l}"),
            Node::Neg(x) => {
                if x.precedence() < 4 {
                    write!(f, "-({x})")
                } else {
                    write!(f, "-{x}")
                }
            }
            Node::Binary { op, lhs, rhs, .. } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Node::Threshold(s, t) => write!(f, "threshold({s}, {t})"),
        }
    }
}
