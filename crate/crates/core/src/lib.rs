//! Exact engine for q-deformed Heisenberg algebras: coefficient rings, a
//! noncommutative rewriting core with confluence checking, the catalog of
//! presentations, h-adic realizations, finite representations, q-difference
//! operators and the SO_q(N) differential calculus.

pub mod catalog;
pub mod coeff;
pub mod fock;
pub mod freealg;
pub mod linalg;
pub mod qdiff;
pub mod soq;
pub mod syntax;
pub mod weyl;
