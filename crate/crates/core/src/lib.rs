//! Formal-language recognition experiments for self-attention networks:
//! counter and regular language catalog, dataset generation, exact
//! hand-constructed transformers, a small neural training stack and the
//! experiment harness around it.

pub mod constructions;
pub mod error;
pub mod generators;
pub mod harness;
pub mod lang;
pub mod neural;
pub mod rng;

pub use error::{Error, Result};
