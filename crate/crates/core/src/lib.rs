//! Temporal question answering datasets: generation from time-scoped facts,
//! a symbolic solver, context rendering, span masking, and scoring.

pub mod config;
pub mod corpus;
pub mod eval;
pub mod facts;
pub mod jsonl;
pub mod questions;
pub mod reasoner;
pub mod rng;
pub mod templates;
pub mod time;
pub mod synth;
