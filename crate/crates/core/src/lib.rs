//! Arithmetic of monoids of zero-sum sequences over finite abelian groups.
//!
//! The crate enumerates minimal zero-sum sequences, factors zero-sum
//! sequences into them, and computes the invariants built on top: the
//! Davenport constant, sets of lengths and distances, catenary degrees, the
//! invariant `ℸ(G)` and refined elasticities. It also carries exhaustive
//! checkers for the known characterizations of these invariants on small
//! groups, and a model Krull monoid used to test the transfer to block
//! monoids.

pub mod atoms;
pub mod error;
pub mod factorization;
pub mod group;
pub mod invariants;
pub mod krull;
pub mod limits;
pub mod orbits;
pub mod report;
pub mod sequence;
pub mod verify;

pub use atoms::{enumerate_atoms, is_atom, AtomSet};
pub use error::{Error, Result};
pub use factorization::{Factorization, FactorizationSet};
pub use group::{Automorphism, ElementSet, Group, GroupElement, GroupSpec};
pub use limits::{Budget, Limits};
pub use sequence::Sequence;
