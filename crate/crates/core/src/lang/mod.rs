//! Interpreters for the supported instruction sets.

pub mod bff;
pub mod forth;
pub mod subleq;
