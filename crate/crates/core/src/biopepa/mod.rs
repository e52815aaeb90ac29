//! Bio-PEPA code generation.
//!
//! [`generate`] walks the document three times (entities, processes,
//! quantitative properties) to build a [`BioPepaModel`]; [`render`] prints it
//! in the concrete syntax of the Bio-PEPA Eclipse plug-in and
//! [`check_output`] re-parses emitted text as a self-check.

mod check;
mod generate;
mod render;

use std::fmt;

pub use check::check_output;
pub use generate::{gen_parameters, gen_rate, generate, map_arcs_for_entity, GenError};
pub use render::render;

use crate::expr::ResolvedExpr;

/// Role of a species in a reaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BioPepaOperator {
    Reactant,
    Product,
    Activator,
    Inhibitor,
    Modifier,
}

impl BioPepaOperator {
    pub const ALL: [BioPepaOperator; 5] = [
        BioPepaOperator::Reactant,
        BioPepaOperator::Product,
        BioPepaOperator::Activator,
        BioPepaOperator::Inhibitor,
        BioPepaOperator::Modifier,
    ];

    pub fn token(self) -> &'static str {
        match self {
            BioPepaOperator::Reactant => "<<",
            BioPepaOperator::Product => ">>",
            BioPepaOperator::Activator => "(+)",
            BioPepaOperator::Inhibitor => "(-)",
            BioPepaOperator::Modifier => "(.)",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.token() == tok)
    }
}

impl fmt::Display for BioPepaOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One `(reaction, stoichiometry) op` prefix in a species component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub reaction: String,
    pub stoichiometry: u32,
    pub op: BioPepaOperator,
}

impl Term {
    pub fn new(reaction: impl Into<String>, stoichiometry: u32, op: BioPepaOperator) -> Self {
        Term {
            reaction: reaction.into(),
            stoichiometry,
            op,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesComponent {
    pub name: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalRate {
    pub reaction: String,
    pub expr: ResolvedExpr,
}

/// Generated Bio-PEPA system: compartments, parameters, functional rates,
/// species components and the cooperating model component with initial
/// amounts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BioPepaModel {
    pub compartments: Vec<String>,
    pub parameters: Vec<(String, f64)>,
    pub rates: Vec<FunctionalRate>,
    pub species_components: Vec<SpeciesComponent>,
    pub model_component: Vec<(String, f64)>,
}
