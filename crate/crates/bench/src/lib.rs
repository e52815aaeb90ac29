//! Shared fixtures for the benchmarks.

use pfa_core::sbgntext::parse;
use pfa_core::sim::ReactionNetwork;
use pfa_core::Document;

pub fn mapk_document() -> Document {
    parse(pfa_core::corpus::MAPK).expect("bundled corpus parses")
}

/// MAPK network with the input stimulus set to `e1`.
pub fn mapk_network(e1: f64) -> ReactionNetwork {
    let mut net = ReactionNetwork::compile(&mapk_document()).expect("bundled corpus compiles");
    net.set_initial(pfa_core::corpus::MAPK_INPUT, e1)
        .expect("input species exists");
    net
}
