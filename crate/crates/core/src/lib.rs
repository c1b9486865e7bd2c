//! Exact finite probability measure algebras carrying measure-preserving
//! actions of free groups.
//!
//! Everything is finite and exact: atoms carry rational masses, automorphisms
//! are mass-preserving atom permutations, and every distance is computed as a
//! [`Rational`]. The atomless ambient algebra is reached only through explicit
//! refinements.
//!
//! - [`algebra`]: algebras, events, generated partitions, the metrics `d` and `d_P`.
//! - [`action`]: `F_k`-actions, invariant structure, the uniform metric `∂`.
//! - [`modeltheory`]: distances between types over a base tuple, independence deficiencies.
//! - [`constructions`]: partition matching, EPPA, ergodization, profinite quotients, conjugacy search.
//! - [`audit`]: the existential-closedness conditions evaluated on finite actions.
//! - [`cli`]: the command-line driver.

// Errors carry exact rationals for reporting; boxing them buys nothing at this scale.
#![allow(clippy::result_large_err)]

pub mod action;
pub mod algebra;
pub mod audit;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod lp;
pub mod modeltheory;
pub mod perm;
pub mod rational;

pub use action::{FkAction, Word};
pub use algebra::{Event, EventTuple, MeasuredAlgebra};
pub use error::{Error, Result};
pub use perm::Perm;
pub use rational::Rational;
