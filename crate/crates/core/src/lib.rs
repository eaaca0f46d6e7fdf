//! Entailment datasets for a small artificial language: the language itself,
//! its first-order translation, a prover that labels sentence pairs with one of
//! seven relations, and dataset tooling.

pub mod data;
pub mod fol;
pub mod lang;
pub mod prover;
pub mod relation;

pub use lang::{Language, Sentence, SlotPolicy};
pub use relation::Relation;
