pub mod annotate;
pub mod classify;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod label;
pub mod lexsent;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use label::Label;
