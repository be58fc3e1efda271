//! Deterministic transformations between finite sets of pure quantum states.
//!
//! Given initial states `|psi1_j>` and final states `|psi2_j>`, the crate
//! decides whether a completely positive, trace-preserving map sends every
//! `|psi1_j>` to `|psi2_j>`, builds explicit Kraus operators when one exists,
//! and tests whether such a map keeps superpositions pure (which forces the
//! two sets to be related by a unitary).
//!
//! Modules, bottom-up:
//! - [`numerics`]: Hermitian eigensolver, PSD tests and factorization, solves.
//! - [`states`]: state sets, Gram matrices, independence, dual states.
//! - [`feasibility`]: the ratio matrix `M` and the feasibility verdict.
//! - [`synthesis`]: Kraus operators, channel application, Choi matrices.
//! - [`coherence`]: purity probes and unitary extraction.
//! - [`io`] and [`cli`]: JSON/CSV formats and the command-line front end.

pub mod cli;
pub mod coherence;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod numerics;
pub mod states;
pub mod synthesis;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, Tolerances};
pub use states::StateSet;
