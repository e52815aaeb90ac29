//! The `.pfa` text format: a block syntax for Process Flow Abstraction
//! models.
//!
//! ```text
//! entity m_MAPK { type: Macromolecule count: 7500 }
//! process K_act { rate: "<par: enz.kcat> * <ent: enz> * <ent: sub> / (<par: enz.Km> + <ent: sub>)" }
//! arc { kind: Consumption entity: m_MAPK process: K_act ref: sub }
//! arc { kind: Stimulation entity: m_MAPKK_PP process: K_act ref: enz params { kcat = 10 Km = 300 } }
//! ```
//!
//! The full grammar is in `docs/pfa-format.md`.

mod lexer;
mod parser;
mod printer;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, ARC_ID_PREFIX};
pub use printer::{print, HEADER};
