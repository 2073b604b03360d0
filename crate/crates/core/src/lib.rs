//! Authorship attribution and attribution evasion for a C++ subset.

pub mod attrib;
pub mod corpus;
pub mod eval;
pub mod frontend;
pub mod interp;
pub mod mcts;
pub mod pairgen;
pub mod synth;
pub mod transforms;
