//! Constructive solution of the truncated matrix Hamburger moment problem.
//!
//! Starting from Hermitian moments `S_0, ..., S_{2n}` on `C^d` the crate builds
//! the Gram space of the block Hankel kernel, the symmetric shift operator on
//! it, its Cayley transform, and evaluates the Nevanlinna-type linear
//! fractional description of the Stieltjes transforms `R(z) = ∫ dF(t)/(t - z)`
//! of solutions indexed by constant Schur parameters. The `reconstruct` module
//! turns transforms back into measures and moments.

pub mod cayley;
pub mod cli;
pub mod error;
pub mod gramspace;
pub mod io;
pub mod l2space;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod nevanlinna;
pub mod reconstruct;

pub use cayley::{CayleyData, PhiSpec, SchurParameter};
pub use error::{Error, ErrorClass, Result};
pub use gramspace::{EmbeddingI, EmbeddingK, GramSpace, GramVector, ShiftOperator};
pub use l2space::{DiscreteMatrixMeasure, L2Element};
pub use model::MomentModel;
pub use moments::{BlockHankel, MomentSequence, SolvabilityReport, Tolerances};
pub use nevanlinna::{BlockSet, NevanlinnaValue};
pub use reconstruct::ReconstructedDistribution;

pub use num_complex::Complex64;
