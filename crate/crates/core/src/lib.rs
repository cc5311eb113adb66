//! Exact neutral-fermion Fock space computations: spin Hurwitz numbers,
//! double Hodge integrals and equivariant spin Gromov-Witten invariants of
//! the projective line.

pub mod error;
pub mod scalars;
pub mod series;
pub mod partitions;
pub mod fock;
pub mod hurwitz;
pub mod hodge;
pub mod dressing;
pub mod gw;
pub mod verify;

pub use error::{Error, Result};
