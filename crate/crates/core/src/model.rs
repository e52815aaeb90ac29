//! Process Flow Abstraction domain model.
//!
//! A [`Document`] holds entity pools ("tanks"), processes ("pumps"), the arcs
//! wiring them together and the quantitative properties attached to arcs.
//! Every collection is keyed and ordered, so iteration order (and therefore
//! generated code) is stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic, SourceSpan};
use crate::expr;

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    _ => Err(()),
                }
            }
        }
    };
}

keyword_enum!(
    /// Entity pool node categories.
    EpnType {
        Unspecified,
        SimpleChemical,
        Macromolecule,
        NucleicAcidFeature,
        Complex,
        Source,
        Sink,
        PerturbingAgent,
    }
);

keyword_enum!(
    /// Process node categories. Quantitatively they all behave the same.
    ProcessType {
        Process,
        Association,
        Dissociation,
        Omitted,
        Uncertain,
        Observable,
    }
);

keyword_enum!(ArcType {
    Consumption,
    Production,
    LeftHandSide,
    RightHandSide,
    Modulation,
    Stimulation,
    Catalysis,
    Inhibition,
    NecessaryStimulation,
});

keyword_enum!(LogicKind { And, Or, Not });

impl EpnType {
    /// Source and Sink pools are unbounded and carry no count.
    pub fn is_unbounded(self) -> bool {
        matches!(self, EpnType::Source | EpnType::Sink)
    }
}

impl ArcType {
    pub fn is_modifier(self) -> bool {
        matches!(
            self,
            ArcType::Modulation
                | ArcType::Stimulation
                | ArcType::Catalysis
                | ArcType::Inhibition
                | ArcType::NecessaryStimulation
        )
    }

    /// Arcs on the input side of the forward direction.
    pub fn is_consuming_side(self) -> bool {
        matches!(self, ArcType::Consumption | ArcType::LeftHandSide)
    }

    pub fn is_producing_side(self) -> bool {
        matches!(self, ArcType::Production | ArcType::RightHandSide)
    }

    pub fn is_reversible_only(self) -> bool {
        matches!(self, ArcType::LeftHandSide | ArcType::RightHandSide)
    }

    pub fn is_irreversible_only(self) -> bool {
        matches!(self, ArcType::Consumption | ArcType::Production)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityPoolNode {
    pub id: String,
    pub epn_type: EpnType,
    /// Molecule count; for perturbing agents an arbitrary magnitude. `None`
    /// for Source and Sink.
    pub initial_molecule_count: Option<f64>,
    pub compartment: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessNode {
    pub id: String,
    pub process_type: ProcessType,
    pub reversible: bool,
    pub propensity_forward: String,
    pub propensity_backward: Option<String>,
}

impl ProcessNode {
    /// Name of the forward reaction: the process id, or `<id>_F` when
    /// reversible.
    pub fn forward_name(&self) -> String {
        if self.reversible {
            format!("{}{FORWARD_SUFFIX}", self.id)
        } else {
            self.id.clone()
        }
    }

    /// `<id>_B` for reversible processes.
    pub fn backward_name(&self) -> Option<String> {
        self.reversible
            .then(|| format!("{}{BACKWARD_SUFFIX}", self.id))
    }
}

/// A typed link between one entity pool and one process. The arc's
/// quantitative properties live in [`Document::properties`] under
/// `(arc_id, name)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub arc_id: String,
    pub manual_equation_arc_id: Option<String>,
    pub arc_type: ArcType,
    pub entity: String,
    pub process: String,
    pub stoichiometry: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantitativeProperty {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogicInput {
    /// An entity pool, switched on when its count reaches `threshold`.
    Entity { id: String, threshold: f64 },
    /// The boolean result of another operator.
    Operator(String),
}

impl LogicInput {
    pub fn source(&self) -> &str {
        match self {
            LogicInput::Entity { id, .. } => id,
            LogicInput::Operator(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalOperator {
    pub id: String,
    pub kind: LogicKind,
    pub inputs: Vec<LogicInput>,
    pub output_low: f64,
    pub output_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compartment {
    pub id: String,
    pub name: String,
}

/// Key into the span table recorded by the parser.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Entity(String),
    Process(String),
    Arc(String),
    Logic(String),
    Compartment(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("identifier `{0}` is already defined")]
    DuplicateId(String),
    #[error("property `{1}` defined twice on arc `{0}`")]
    DuplicateProperty(String, String),
    #[error("invalid override `{0}`: {1}")]
    BadOverride(String, String),
}

/// The validated in-memory model.
///
/// Entity, process, arc, logic and compartment ids share one namespace.
/// Equality ignores the recorded source spans.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub entities: BTreeMap<String, EntityPoolNode>,
    pub processes: BTreeMap<String, ProcessNode>,
    pub arcs: BTreeMap<String, Arc>,
    pub properties: BTreeMap<(String, String), QuantitativeProperty>,
    pub logic_operators: BTreeMap<String, LogicalOperator>,
    pub compartments: BTreeMap<String, Compartment>,
    pub spans: BTreeMap<NodeRef, SourceSpan>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities
            && self.processes == other.processes
            && self.arcs == other.arcs
            && self.properties == other.properties
            && self.logic_operators == other.logic_operators
            && self.compartments == other.compartments
    }
}

impl Document {
    pub fn new() -> Self {
        Document::default()
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.entities.contains_key(id)
            || self.processes.contains_key(id)
            || self.arcs.contains_key(id)
            || self.logic_operators.contains_key(id)
            || self.compartments.contains_key(id)
    }

    fn claim(&self, id: &str) -> Result<(), ModelError> {
        if self.contains_id(id) {
            Err(ModelError::DuplicateId(id.to_string()))
        } else {
            Ok(())
        }
    }

    pub fn add_entity(&mut self, e: EntityPoolNode) -> Result<(), ModelError> {
        self.claim(&e.id)?;
        self.entities.insert(e.id.clone(), e);
        Ok(())
    }

    pub fn add_process(&mut self, p: ProcessNode) -> Result<(), ModelError> {
        self.claim(&p.id)?;
        self.processes.insert(p.id.clone(), p);
        Ok(())
    }

    pub fn add_arc(&mut self, a: Arc) -> Result<(), ModelError> {
        self.claim(&a.arc_id)?;
        self.arcs.insert(a.arc_id.clone(), a);
        Ok(())
    }

    pub fn add_property(
        &mut self,
        arc_id: &str,
        prop: QuantitativeProperty,
    ) -> Result<(), ModelError> {
        let key = (arc_id.to_string(), prop.name.clone());
        if self.properties.contains_key(&key) {
            return Err(ModelError::DuplicateProperty(key.0, key.1));
        }
        self.properties.insert(key, prop);
        Ok(())
    }

    pub fn add_logic(&mut self, op: LogicalOperator) -> Result<(), ModelError> {
        self.claim(&op.id)?;
        self.logic_operators.insert(op.id.clone(), op);
        Ok(())
    }

    pub fn add_compartment(&mut self, c: Compartment) -> Result<(), ModelError> {
        self.claim(&c.id)?;
        self.compartments.insert(c.id.clone(), c);
        Ok(())
    }

    pub fn span_of(&self, node: &NodeRef) -> SourceSpan {
        self.spans.get(node).copied().unwrap_or_default()
    }

    /// Properties stored on one arc, ordered by name.
    pub fn properties_of<'a>(
        &'a self,
        arc_id: &'a str,
    ) -> impl Iterator<Item = &'a QuantitativeProperty> + 'a {
        let lo = (arc_id.to_string(), String::new());
        self.properties
            .range(lo..)
            .take_while(move |((a, _), _)| a == arc_id)
            .map(|(_, p)| p)
    }

    pub fn property(&self, arc_id: &str, name: &str) -> Option<&QuantitativeProperty> {
        self.properties.get(&(arc_id.to_string(), name.to_string()))
    }

    /// All arcs attached to process `pid`, ordered by arc id.
    pub fn arcs_of_process(&self, pid: &str) -> Result<Vec<&Arc>, ModelError> {
        if !self.processes.contains_key(pid) {
            return Err(ModelError::UnknownProcess(pid.to_string()));
        }
        Ok(self.arcs.values().filter(|a| a.process == pid).collect())
    }

    /// All arcs attached to entity `eid`, ordered by arc id.
    pub fn arcs_of_entity(&self, eid: &str) -> Result<Vec<&Arc>, ModelError> {
        if !self.entities.contains_key(eid) {
            return Err(ModelError::UnknownEntity(eid.to_string()));
        }
        Ok(self.arcs.values().filter(|a| a.entity == eid).collect())
    }

    /// Apply a `target.field=value` override.
    ///
    /// `entity.count=N` replaces an entity's initial count; `arc.name=V`
    /// replaces an existing quantitative property on an arc.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ModelError> {
        let bad = |why: &str| ModelError::BadOverride(spec.to_string(), why.to_string());
        let (lhs, rhs) = spec
            .split_once('=')
            .ok_or_else(|| bad("expected `target.field=value`"))?;
        let (target, field) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| bad("expected `target.field` before `=`"))?;
        let value: f64 = rhs
            .trim()
            .parse()
            .map_err(|_| bad("value is not a number"))?;
        if let Some(entity) = self.entities.get_mut(target) {
            if field != "count" {
                return Err(bad("entities only accept the `count` field"));
            }
            if entity.epn_type.is_unbounded() {
                return Err(bad("Source and Sink pools have no count"));
            }
            entity.initial_molecule_count = Some(value);
            return Ok(());
        }
        if self.arcs.contains_key(target) {
            let key = (target.to_string(), field.to_string());
            return match self.properties.get_mut(&key) {
                Some(p) => {
                    p.value = value;
                    Ok(())
                }
                None => Err(bad("arc has no such property")),
            };
        }
        Err(bad("no entity or arc with that id"))
    }

    /// Check every structural rule. Returns an empty list iff the document
    /// is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }
}

pub const FORWARD_SUFFIX: &str = "_F";
pub const BACKWARD_SUFFIX: &str = "_B";

/// Check every structural rule of `doc`.
///
/// Runs in three phases: reference integrity, local node rules, then
/// whole-model rules (reaction sides, logic cycles, rate resolution). The
/// last phase only runs when the first two are clean so that one broken
/// reference yields one diagnostic.
pub fn validate(doc: &Document) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let span = |n: NodeRef| doc.span_of(&n);

    if doc.processes.is_empty() {
        out.push(Diagnostic::error(
            Code::NoProcesses,
            SourceSpan::start(),
            "model defines no processes",
        ));
    }

    // references
    for arc in doc.arcs.values() {
        let s = span(NodeRef::Arc(arc.arc_id.clone()));
        if !doc.entities.contains_key(&arc.entity) {
            out.push(
                Diagnostic::error(
                    Code::DanglingEntityRef,
                    s,
                    format!(
                        "arc `{}` references unknown entity `{}`",
                        arc.arc_id, arc.entity
                    ),
                )
                .with_subject(&arc.arc_id),
            );
        }
        if !doc.processes.contains_key(&arc.process) {
            out.push(
                Diagnostic::error(
                    Code::DanglingProcessRef,
                    s,
                    format!(
                        "arc `{}` references unknown process `{}`",
                        arc.arc_id, arc.process
                    ),
                )
                .with_subject(&arc.arc_id),
            );
        }
    }
    for e in doc.entities.values() {
        if let Some(c) = &e.compartment {
            if !doc.compartments.contains_key(c) {
                out.push(
                    Diagnostic::error(
                        Code::DanglingCompartmentRef,
                        span(NodeRef::Entity(e.id.clone())),
                        format!("entity `{}` references unknown compartment `{c}`", e.id),
                    )
                    .with_subject(&e.id),
                );
            }
        }
    }
    for op in doc.logic_operators.values() {
        for input in &op.inputs {
            let (ok, code) = match input {
                LogicInput::Entity { id, .. } => {
                    (doc.entities.contains_key(id), Code::DanglingEntityRef)
                }
                LogicInput::Operator(id) => {
                    (doc.logic_operators.contains_key(id), Code::DanglingLogicRef)
                }
            };
            if !ok {
                out.push(
                    Diagnostic::error(
                        code,
                        span(NodeRef::Logic(op.id.clone())),
                        format!(
                            "logic operator `{}` references unknown `{}`",
                            op.id,
                            input.source()
                        ),
                    )
                    .with_subject(&op.id),
                );
            }
        }
    }

    local_rules(doc, &mut out);

    if out.iter().any(Diagnostic::is_error) {
        return out;
    }
    model_rules(doc, &mut out);
    out
}

fn local_rules(doc: &Document, out: &mut Vec<Diagnostic>) {
    for e in doc.entities.values() {
        let s = doc.span_of(&NodeRef::Entity(e.id.clone()));
        match (e.epn_type.is_unbounded(), e.initial_molecule_count) {
            (false, None) => out.push(
                Diagnostic::error(
                    Code::MissingCount,
                    s,
                    format!("entity `{}` of type {} needs a count", e.id, e.epn_type),
                )
                .with_subject(&e.id),
            ),
            (false, Some(n)) if n < 0.0 || !n.is_finite() => out.push(
                Diagnostic::error(
                    Code::NegativeCount,
                    s,
                    format!("entity `{}` has invalid count {n}", e.id),
                )
                .with_subject(&e.id),
            ),
            (false, Some(n)) if e.epn_type != EpnType::PerturbingAgent && n.fract() != 0.0 => out
                .push(
                    Diagnostic::error(
                        Code::NonIntegerCount,
                        s,
                        format!("entity `{}` has non-integer molecule count {n}", e.id),
                    )
                    .with_subject(&e.id),
                ),
            _ => {}
        }
    }

    for p in doc.processes.values() {
        let s = doc.span_of(&NodeRef::Process(p.id.clone()));
        if p.id.ends_with(FORWARD_SUFFIX) || p.id.ends_with(BACKWARD_SUFFIX) {
            out.push(
                Diagnostic::error(
                    Code::ReservedSuffix,
                    s,
                    format!(
                        "process id `{}` ends with a reserved `_F`/`_B` suffix",
                        p.id
                    ),
                )
                .with_subject(&p.id),
            );
        }
        match (p.reversible, p.propensity_backward.is_some()) {
            (true, false) => out.push(
                Diagnostic::error(
                    Code::MissingBackwardPropensity,
                    s,
                    format!("reversible process `{}` has no backward rate", p.id),
                )
                .with_subject(&p.id),
            ),
            (false, true) => out.push(
                Diagnostic::error(
                    Code::UnexpectedBackwardPropensity,
                    s,
                    format!("irreversible process `{}` has a backward rate", p.id),
                )
                .with_subject(&p.id),
            ),
            _ => {}
        }
    }

    let mut refs: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for arc in doc.arcs.values() {
        let s = doc.span_of(&NodeRef::Arc(arc.arc_id.clone()));
        if let Some(m) = &arc.manual_equation_arc_id {
            if let Some(prev) = refs.insert((arc.process.as_str(), m.as_str()), &arc.arc_id) {
                out.push(
                    Diagnostic::error(
                        Code::DuplicateManualRef,
                        s,
                        format!(
                            "arcs `{prev}` and `{}` of process `{}` share ref `{m}`",
                            arc.arc_id, arc.process
                        ),
                    )
                    .with_subject(&arc.arc_id),
                );
            }
        }
        let Some(p) = doc.processes.get(&arc.process) else {
            continue;
        };
        let mismatch = (p.reversible && arc.arc_type.is_irreversible_only())
            || (!p.reversible && arc.arc_type.is_reversible_only());
        if mismatch {
            out.push(
                Diagnostic::error(
                    Code::ArcDirectionMismatch,
                    s,
                    format!(
                        "{} arc `{}` cannot attach to {} process `{}`",
                        arc.arc_type,
                        arc.arc_id,
                        if p.reversible {
                            "reversible"
                        } else {
                            "irreversible"
                        },
                        p.id
                    ),
                )
                .with_subject(&arc.arc_id),
            );
        }
    }

    for op in doc.logic_operators.values() {
        let s = doc.span_of(&NodeRef::Logic(op.id.clone()));
        let n = op.inputs.len();
        let arity_ok = match op.kind {
            LogicKind::Not => n == 1,
            LogicKind::And | LogicKind::Or => n >= 2,
        };
        if !arity_ok {
            out.push(
                Diagnostic::error(
                    Code::LogicArity,
                    s,
                    format!("{} operator `{}` has {n} inputs", op.kind, op.id),
                )
                .with_subject(&op.id),
            );
        }
        if op.output_low.partial_cmp(&op.output_high) != Some(std::cmp::Ordering::Less) {
            out.push(
                Diagnostic::error(
                    Code::LogicOutputRange,
                    s,
                    format!("logic operator `{}` needs low < high output level", op.id),
                )
                .with_subject(&op.id),
            );
        }
        for input in &op.inputs {
            if let LogicInput::Entity { id, threshold } = input {
                if !(threshold.is_finite() && *threshold >= 0.0) {
                    out.push(
                        Diagnostic::error(
                            Code::LogicThreshold,
                            s,
                            format!(
                                "input `{id}` of `{}` has invalid threshold {threshold}",
                                op.id
                            ),
                        )
                        .with_subject(&op.id),
                    );
                }
            }
        }
    }
}

fn model_rules(doc: &Document, out: &mut Vec<Diagnostic>) {
    if let Err(cycle) = expr::check_logic_acyclic(doc) {
        out.push(
            Diagnostic::error(
                Code::CyclicLogic,
                doc.span_of(&NodeRef::Logic(cycle.clone())),
                format!("logic operator `{cycle}` depends on itself"),
            )
            .with_subject(cycle),
        );
        return;
    }

    let mut read: BTreeSet<String> = BTreeSet::new();
    for p in doc.processes.values() {
        let s = doc.span_of(&NodeRef::Process(p.id.clone()));
        let arcs: Vec<&Arc> = doc.arcs.values().filter(|a| a.process == p.id).collect();
        if !arcs.iter().any(|a| a.arc_type.is_consuming_side()) {
            out.push(
                Diagnostic::error(
                    Code::NoReactantSide,
                    s,
                    format!("process `{}` has no consuming-side arc", p.id),
                )
                .with_subject(&p.id),
            );
        }
        if !arcs.iter().any(|a| a.arc_type.is_producing_side()) {
            out.push(
                Diagnostic::error(
                    Code::NoProductSide,
                    s,
                    format!("process `{}` has no producing-side arc", p.id),
                )
                .with_subject(&p.id),
            );
        }
        let rates = std::iter::once(&p.propensity_forward).chain(p.propensity_backward.as_ref());
        for text in rates {
            match expr::parse_expr(text)
                .map_err(expr::ResolveError::from)
                .and_then(|e| expr::resolve(&e, p, doc))
            {
                Ok(resolved) => read.extend(resolved.entities().into_iter().map(str::to_string)),
                Err(err) => out.push(
                    Diagnostic::error(err.code(), s, format!("rate of process `{}`: {err}", p.id))
                        .with_subject(&p.id),
                ),
            }
        }
    }

    for e in doc.entities.values() {
        if !read.contains(&e.id) && !doc.arcs.values().any(|a| a.entity == e.id) {
            out.push(
                Diagnostic::error(
                    Code::IsolatedEntity,
                    doc.span_of(&NodeRef::Entity(e.id.clone())),
                    format!("entity `{}` takes part in no process", e.id),
                )
                .with_subject(&e.id),
            );
        }
    }
}
