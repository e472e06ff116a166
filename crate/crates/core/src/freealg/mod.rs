//! Free associative algebras with rewriting presentations.
//!
//! Words are ordered by weighted degree, then lexicographically by generator
//! precedence. A [`Presentation`] holds rewrite rules whose right-hand sides are
//! strictly smaller than their left-hand sides, so reduction always terminates.

mod element;
mod morphism;
mod presentation;

use thiserror::Error;

pub use element::{multiply, Element, GenId, Word};
pub use morphism::Morphism;
pub use presentation::{
    Ambiguity, Generator, Presentation, PresentationBuilder, RelationCheck, RewriteRule, DEFAULT_STEP_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("rewrite step limit of {0} exceeded")]
    StepLimit(usize),
    #[error("presentation has no star structure")]
    NoStar,
    #[error("duplicate generator name {0}")]
    DuplicateGenerator(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("invalid star structure: {0}")]
    InvalidStar(String),
    #[error("no image given for generator {0}")]
    MissingImage(String),
}
