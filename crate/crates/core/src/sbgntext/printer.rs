use std::fmt::Write;

use crate::model::{Document, LogicInput};

pub const HEADER: &str = "# Process Flow Abstraction model\n";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text: sections in the order compartments, entities, processes,
/// arcs, logic; items sorted by id; one attribute per line, two-space
/// indent.
pub fn print(doc: &Document) -> String {
    let mut out = String::from(HEADER);
    // `write!` into a String cannot fail.
    let block = |out: &mut String, head: String, lines: Vec<String>| {
        out.push('\n');
        let _ = writeln!(out, "{head} {{");
        for l in lines {
            let _ = writeln!(out, "  {l}");
        }
        out.push_str("}\n");
    };

    for c in doc.compartments.values() {
        block(
            &mut out,
            format!("compartment {}", c.id),
            vec![format!("name: {}", quote(&c.name))],
        );
    }
    for e in doc.entities.values() {
        let mut lines = vec![format!("type: {}", e.epn_type)];
        if let Some(n) = e.initial_molecule_count {
            lines.push(format!("count: {n}"));
        }
        if let Some(c) = &e.compartment {
            lines.push(format!("compartment: {c}"));
        }
        block(&mut out, format!("entity {}", e.id), lines);
    }
    for p in doc.processes.values() {
        let mut lines = vec![
            format!("type: {}", p.process_type),
            format!("reversible: {}", p.reversible),
            format!("rate: {}", quote(&p.propensity_forward)),
        ];
        if let Some(b) = &p.propensity_backward {
            lines.push(format!("rate_backward: {}", quote(b)));
        }
        block(&mut out, format!("process {}", p.id), lines);
    }
    for a in doc.arcs.values() {
        let mut lines = vec![
            format!("kind: {}", a.arc_type),
            format!("entity: {}", a.entity),
            format!("process: {}", a.process),
        ];
        if let Some(m) = &a.manual_equation_arc_id {
            lines.push(format!("ref: {m}"));
        }
        lines.push(format!("stoichiometry: {}", a.stoichiometry));
        let props: Vec<_> = doc.properties_of(&a.arc_id).collect();
        if !props.is_empty() {
            lines.push("params {".into());
            for p in props {
                lines.push(format!("  {} = {}", p.name, p.value));
            }
            lines.push("}".into());
        }
        block(&mut out, format!("arc {}", a.arc_id), lines);
    }
    for op in doc.logic_operators.values() {
        let mut lines = vec![format!("op: {}", op.kind)];
        for input in &op.inputs {
            lines.push(match input {
                LogicInput::Entity { id, threshold } => format!("input: {id} >= {threshold}"),
                LogicInput::Operator(id) => format!("input: {id}"),
            });
        }
        lines.push(format!("low: {}", op.output_low));
        lines.push(format!("high: {}", op.output_high));
        block(&mut out, format!("logic {}", op.id), lines);
    }
    out
}
