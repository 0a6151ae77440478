//! Schrödinger evolution of subspaces: frame propagation, gauge sections,
//! the Anandan equation and the holonomic/dynamical split of the resulting
//! time-evolution matrix, with closed-form Λ-system oracles.

// `!(x <= tol)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod holonomy;
pub mod lambda;
pub mod matkit;
pub mod random;

pub use dynamics::{FramePath, Hamiltonian, HamiltonianSpec, TimeGrid};
pub use error::{Error, Result};
pub use frames::{SectionPath, SectionRule};
pub use holonomy::{Classification, DecompositionReport};
pub use lambda::{LambdaCase, LambdaParams};
pub use matkit::{ComplexMatrix, Tolerances, C64};
