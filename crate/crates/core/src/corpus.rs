//! Bundled example models.

/// Three-level MAPK cascade with Michaelis-Menten kinetics.
pub const MAPK: &str = include_str!("../corpus/mapk.pfa");

/// Output species of the MAPK cascade.
pub const MAPK_OUTPUT: &str = "m_MAPK_PP";
/// Input stimulus of the MAPK cascade.
pub const MAPK_INPUT: &str = "m_E1";
