//! Artificial-life soups of self-modifying programs.

pub mod analysis;
pub mod config;
pub mod experiment;
pub mod lang;
pub mod longtape;
pub mod render;
pub mod replicators;
pub mod rng;
pub mod snapshot;
pub mod soup;
pub mod substrate;
pub mod trace;

pub use substrate::{execute, ExecReport, HaltReason, LanguageId, TracerToken};
