//! Process Flow Abstraction models: parsing, validation, Bio-PEPA
//! generation and simulation.
//!
//! ```
//! let doc = pfa_core::sbgntext::parse(pfa_core::corpus::MAPK).unwrap();
//! assert!(doc.validate().is_empty());
//! let text = pfa_core::biopepa::render(&pfa_core::biopepa::generate(&doc).unwrap());
//! assert!(pfa_core::biopepa::check_output(&text).is_empty());
//! ```

pub mod biopepa;
pub mod corpus;
pub mod diagnostic;
pub mod expr;
pub mod model;
pub mod sbgntext;
pub mod sim;

pub use diagnostic::{Code, Diagnostic, Severity, SourceSpan};
pub use model::{
    Arc, ArcType, Compartment, Document, EntityPoolNode, EpnType, LogicInput, LogicKind,
    LogicalOperator, ModelError, ProcessNode, ProcessType, QuantitativeProperty,
};
