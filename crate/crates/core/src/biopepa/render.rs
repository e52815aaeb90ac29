use std::fmt::Write;

use super::BioPepaModel;

pub const HEADER: &str = "// Bio-PEPA model generated from a Process Flow Abstraction model\n";

/// Print a model in the fixed section order: compartments (when present),
/// parameters, functional rates, species components, model component.
///
/// The output is LF-terminated UTF-8 and a pure function of the model.
pub fn render(model: &BioPepaModel) -> String {
    let mut out = String::from(HEADER);
    // `write!` into a String cannot fail.
    if !model.compartments.is_empty() {
        out.push('\n');
        for c in &model.compartments {
            let _ = writeln!(out, "location {c} : size = 1, type = compartment;");
        }
    }
    if !model.parameters.is_empty() {
        out.push('\n');
        for (name, value) in &model.parameters {
            let _ = writeln!(out, "{name} = {value};");
        }
    }
    out.push('\n');
    for rate in &model.rates {
        let _ = writeln!(out, "kineticLawOf {} : {};", rate.reaction, rate.expr);
    }
    out.push('\n');
    for sc in &model.species_components {
        let terms: Vec<String> = sc
            .terms
            .iter()
            .map(|t| format!("({}, {}) {} {}", t.reaction, t.stoichiometry, t.op, sc.name))
            .collect();
        let _ = writeln!(out, "{} = {};", sc.name, terms.join(" + "));
    }
    out.push('\n');
    let model_line: Vec<String> = model
        .model_component
        .iter()
        .map(|(s, n)| format!("{s}[{n}]"))
        .collect();
    out.push_str(&model_line.join(" <*> "));
    out.push('\n');
    out
}
