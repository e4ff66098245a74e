//! Chains, lexicographic powers, and fixed-point solutions of the equations
//! `Γ ≃ (Δ^Γ)^{≤0}`, `Γ ≃ Δ^Γ` and `Γ ≃ (Δ^Γ)^{<0}`, with brute-force
//! oracles and refuters for purported embeddings.

pub mod chain;
pub mod error;
pub mod fixpoint;
pub mod lexpow;
pub mod oracle;
pub mod refuter;
pub mod sample;
pub mod syntax;

pub use chain::{compare, member, Card, ChainDesc, Elem, EqKind, ExtBool, Lookup};
pub use error::{ChainError, Result};
pub use syntax::{format_chain, format_elem, parse_chain, parse_elem, ParseError};
