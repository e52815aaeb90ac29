//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use pfa_core::model::{
    Arc, ArcType, Compartment, Document, EntityPoolNode, EpnType, LogicInput, LogicKind,
    LogicalOperator, ProcessNode, ProcessType, QuantitativeProperty,
};
use pfa_core::sbgntext::parse;
use pfa_core::sim::ReactionNetwork;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn mapk() -> Document {
    parse(pfa_core::corpus::MAPK).expect("corpus parses")
}

pub fn mapk_net(e1: f64) -> ReactionNetwork {
    let mut net = ReactionNetwork::compile(&mapk()).unwrap();
    net.set_initial("m_E1", e1).unwrap();
    net
}

pub fn net_of(text: &str) -> ReactionNetwork {
    let doc = parse(text).unwrap_or_else(|d| panic!("{d:?}"));
    let diags = doc.validate();
    assert!(diags.is_empty(), "{diags:?}");
    ReactionNetwork::compile(&doc).unwrap()
}

/// The three conserved MAPK pools with their totals.
pub const MAPK_POOLS: [(&[&str], f64); 3] = [
    (&["m_MAPKKK", "m_MAPKKK_act"], 150.0),
    (&["m_MAPKK", "m_MAPKK_P", "m_MAPKK_PP"], 3000.0),
    (&["m_MAPK", "m_MAPK_P", "m_MAPK_PP"], 7500.0),
];

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

fn value(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..3) {
        0 => rng.random_range(1..1000) as f64,
        1 => rng.random_range(0.001..10.0),
        _ => rng.random_range(1e-6..1e6),
    }
}

/// A random valid document. Each process gets a consuming and a producing
/// arc with mass-action style rates, some get a modifier or a logic gate.
pub fn random_document(seed: u64) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doc = Document::new();

    let ncomp = rng.random_range(0..3);
    for i in 0..ncomp {
        let name = pick(
            &mut rng,
            &[
                "cytosol",
                "the \"nucleus\"",
                "back\\slash",
                "outer\tmembrane",
            ],
        );
        doc.add_compartment(Compartment {
            id: format!("c{i}"),
            name: name.into(),
        })
        .unwrap();
    }

    let nent = rng.random_range(2..8);
    let mut bounded = Vec::new();
    for i in 0..nent {
        let ty = if i < 2 {
            EpnType::Macromolecule
        } else {
            pick(&mut rng, EpnType::ALL)
        };
        let count = if ty.is_unbounded() {
            None
        } else if ty == EpnType::PerturbingAgent {
            Some(rng.random_range(0..400) as f64 / 4.0)
        } else {
            Some(rng.random_range(0..5000) as f64)
        };
        let compartment =
            (ncomp > 0 && rng.random_bool(0.5)).then(|| format!("c{}", rng.random_range(0..ncomp)));
        let id = format!("E{i}");
        if !ty.is_unbounded() {
            bounded.push(id.clone());
        }
        doc.add_entity(EntityPoolNode {
            id,
            epn_type: ty,
            initial_molecule_count: count,
            compartment,
        })
        .unwrap();
    }
    let entity_ids: Vec<String> = doc.entities.keys().cloned().collect();
    let is_bounded = |id: &str, doc: &Document| !doc.entities[id].epn_type.is_unbounded();

    let gate = (rng.random_bool(0.3)).then(|| {
        let kind = pick(&mut rng, &[LogicKind::And, LogicKind::Or, LogicKind::Not]);
        let n = if kind == LogicKind::Not {
            1
        } else {
            rng.random_range(2..4)
        };
        let inputs = (0..n)
            .map(|_| LogicInput::Entity {
                id: bounded[rng.random_range(0..bounded.len())].clone(),
                threshold: rng.random_range(0..50) as f64,
            })
            .collect();
        let low = rng.random_range(0..3) as f64;
        LogicalOperator {
            id: "g0".into(),
            kind,
            inputs,
            output_low: low,
            output_high: low + 1.5,
        }
    });

    let nproc = rng.random_range(1..5);
    let mut arc_n = 0;
    let mut next_arc = |rng: &mut ChaCha8Rng| -> String {
        arc_n += 1;
        if rng.random_bool(0.5) {
            format!("st{arc_n}")
        } else {
            format!("a{arc_n}")
        }
    };
    let mut linked = std::collections::BTreeSet::new();
    for p in 0..nproc {
        let pid = format!("P{p}");
        let reversible = rng.random_bool(0.3);
        let (lhs_kind, rhs_kind) = if reversible {
            (ArcType::LeftHandSide, ArcType::RightHandSide)
        } else {
            (ArcType::Consumption, ArcType::Production)
        };
        let mut add_arc =
            |doc: &mut Document, rng: &mut ChaCha8Rng, kind, entity: String, r: Option<&str>| {
                let id = next_arc(rng);
                let stoich = if kind == lhs_kind || kind == rhs_kind {
                    rng.random_range(1..4)
                } else {
                    1
                };
                doc.add_arc(Arc {
                    arc_id: id.clone(),
                    manual_equation_arc_id: r.map(str::to_string),
                    arc_type: kind,
                    entity: entity.clone(),
                    process: pid.clone(),
                    stoichiometry: stoich,
                })
                .unwrap();
                id
            };
        let sub = entity_ids[rng.random_range(0..entity_ids.len())].clone();
        let prod = entity_ids[rng.random_range(0..entity_ids.len())].clone();
        linked.insert(sub.clone());
        linked.insert(prod.clone());
        let a = add_arc(&mut doc, &mut rng, lhs_kind, sub.clone(), Some("a"));
        doc.add_property(
            &a,
            QuantitativeProperty {
                name: "k".into(),
                value: value(&mut rng),
            },
        )
        .unwrap();
        let b = add_arc(&mut doc, &mut rng, rhs_kind, prod.clone(), Some("b"));
        let mut rate = if is_bounded(&sub, &doc) {
            "<par: a.k> * <ent: a>".to_string()
        } else {
            "<par: a.k>".to_string()
        };
        if rng.random_bool(0.4) {
            let m = bounded[rng.random_range(0..bounded.len())].clone();
            linked.insert(m.clone());
            let kind = pick(
                &mut rng,
                &[
                    ArcType::Modulation,
                    ArcType::Stimulation,
                    ArcType::Catalysis,
                    ArcType::Inhibition,
                    ArcType::NecessaryStimulation,
                ],
            );
            let mid = add_arc(&mut doc, &mut rng, kind, m, Some("m"));
            doc.add_property(
                &mid,
                QuantitativeProperty {
                    name: "Km".into(),
                    value: value(&mut rng),
                },
            )
            .unwrap();
            rate = format!("{rate} * <ent: m> / (<par: m.Km> + <ent: m>)");
        }
        if p == 0 && gate.is_some() {
            rate = format!("({rate}) * <log: g0>");
        }
        let backward = reversible.then(|| {
            if is_bounded(&prod, &doc) {
                "<par: b.kr> * <ent: b>".to_string()
            } else {
                "<par: b.kr>".to_string()
            }
        });
        if reversible {
            doc.add_property(
                &b,
                QuantitativeProperty {
                    name: "kr".into(),
                    value: value(&mut rng),
                },
            )
            .unwrap();
        }
        doc.add_process(ProcessNode {
            id: pid,
            process_type: pick(&mut rng, ProcessType::ALL),
            reversible,
            propensity_forward: rate,
            propensity_backward: backward,
        })
        .unwrap();
    }
    if let Some(g) = gate {
        for input in &g.inputs {
            linked.insert(input.source().to_string());
        }
        doc.add_logic(g).unwrap();
    }
    // keep every entity connected
    for id in entity_ids {
        if !linked.contains(&id) {
            let aid = next_arc(&mut rng);
            doc.add_arc(Arc {
                arc_id: aid,
                manual_equation_arc_id: None,
                arc_type: ArcType::Modulation,
                entity: id,
                process: "P0".into(),
                stoichiometry: 1,
            })
            .unwrap();
        }
    }
    doc
}
