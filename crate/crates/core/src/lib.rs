//! Compositional-generalization test suites for in-context learning.
//!
//! The crate generates paired sentence / logical-form data from a small
//! controlled grammar, builds held-out test categories, selects in-context
//! examples by structural matching, and evaluates completion models.

pub mod cli;
pub mod grammar;
pub mod harness;
pub mod scoring;
pub mod selector;
pub mod suite;
pub mod tree;
