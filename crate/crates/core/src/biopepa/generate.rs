use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{BioPepaModel, BioPepaOperator, FunctionalRate, SpeciesComponent, Term};
use crate::expr::{resolve_text, ResolveError};
use crate::model::{ArcType, Document, ModelError, ProcessNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("model defines no processes")]
    NoProcesses,
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("process `{process}`: {source}")]
    Resolve {
        process: String,
        #[source]
        source: ResolveError,
    },
    #[error("parameter name `{0}` generated twice")]
    ParameterCollision(String),
}

/// Translate a validated document into a Bio-PEPA model.
///
/// Entities become species components and model-component entries (Source
/// and Sink pools are left out), processes become functional rates, and
/// every arc property becomes a parameter `<ArcID>_<name>`.
pub fn generate(doc: &Document) -> Result<BioPepaModel, GenError> {
    if doc.processes.is_empty() {
        return Err(GenError::NoProcesses);
    }
    let parameters = gen_parameters(doc)?;

    let mut rates = Vec::new();
    // reaction -> entities read by its rate but not linked to it by any arc
    let mut implicit: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for p in doc.processes.values() {
        let linked: BTreeSet<&str> = doc
            .arcs
            .values()
            .filter(|a| a.process == p.id)
            .map(|a| a.entity.as_str())
            .collect();
        for rate in gen_rate(doc, p)? {
            for e in rate.expr.entities() {
                if !linked.contains(e) {
                    implicit
                        .entry(e.to_string())
                        .or_default()
                        .push(rate.reaction.clone());
                }
            }
            rates.push(rate);
        }
    }

    let mut species_components = Vec::new();
    let mut model_component = Vec::new();
    for e in doc.entities.values().filter(|e| !e.epn_type.is_unbounded()) {
        let mut terms = map_arcs_for_entity(doc, &e.id)?;
        if let Some(extra) = implicit.get(&e.id) {
            terms.extend(
                extra
                    .iter()
                    .map(|r| Term::new(r.clone(), 1, BioPepaOperator::Modifier)),
            );
        }
        species_components.push(SpeciesComponent {
            name: e.id.clone(),
            terms,
        });
        model_component.push((e.id.clone(), e.initial_molecule_count.unwrap_or(0.0)));
    }

    Ok(BioPepaModel {
        compartments: doc.compartments.keys().cloned().collect(),
        parameters,
        rates,
        species_components,
        model_component,
    })
}

/// Species-component terms contributed by the arcs of entity `eid`, in arc
/// id order.
///
/// Left/right-hand-side arcs of a reversible process yield a reactant and a
/// product term, one for each direction. Modifier arcs on a reversible
/// process annotate both directions.
pub fn map_arcs_for_entity(doc: &Document, eid: &str) -> Result<Vec<Term>, ModelError> {
    use BioPepaOperator::*;
    let mut out = Vec::new();
    for arc in doc.arcs_of_entity(eid)? {
        let k = arc.stoichiometry;
        let pid = arc.process.as_str();
        let reversible = doc.processes.get(pid).is_some_and(|p| p.reversible);
        let fwd = format!("{pid}_F");
        let bwd = format!("{pid}_B");
        let modifier = |op| {
            if reversible {
                vec![Term::new(fwd.clone(), 1, op), Term::new(bwd.clone(), 1, op)]
            } else {
                vec![Term::new(pid, 1, op)]
            }
        };
        out.extend(match arc.arc_type {
            ArcType::Consumption => vec![Term::new(pid, k, Reactant)],
            ArcType::Production => vec![Term::new(pid, k, Product)],
            ArcType::LeftHandSide => {
                vec![
                    Term::new(fwd.clone(), k, Reactant),
                    Term::new(bwd.clone(), k, Product),
                ]
            }
            ArcType::RightHandSide => {
                vec![
                    Term::new(fwd.clone(), k, Product),
                    Term::new(bwd.clone(), k, Reactant),
                ]
            }
            ArcType::Modulation | ArcType::NecessaryStimulation => modifier(Modifier),
            ArcType::Stimulation | ArcType::Catalysis => modifier(Activator),
            ArcType::Inhibition => modifier(Inhibitor),
        });
    }
    Ok(out)
}

/// One `(<ArcID>_<name>, value)` pair per quantitative property, sorted by
/// name.
pub fn gen_parameters(doc: &Document) -> Result<Vec<(String, f64)>, GenError> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for ((arc_id, name), prop) in &doc.properties {
        let key = crate::expr::parameter_name(arc_id, name);
        if out.insert(key.clone(), prop.value).is_some() {
            return Err(GenError::ParameterCollision(key));
        }
    }
    Ok(out.into_iter().collect())
}

/// Resolved rate(s) of a process: one for an irreversible process, forward
/// and backward (`_F`, `_B`) for a reversible one.
pub fn gen_rate(doc: &Document, process: &ProcessNode) -> Result<Vec<FunctionalRate>, GenError> {
    let wrap = |source| GenError::Resolve {
        process: process.id.clone(),
        source,
    };
    let mut out = vec![FunctionalRate {
        reaction: process.forward_name(),
        expr: resolve_text(&process.propensity_forward, process, doc).map_err(wrap)?,
    }];
    if let (Some(name), Some(text)) = (process.backward_name(), &process.propensity_backward) {
        out.push(FunctionalRate {
            reaction: name,
            expr: resolve_text(text, process, doc).map_err(wrap)?,
        });
    }
    Ok(out)
}
