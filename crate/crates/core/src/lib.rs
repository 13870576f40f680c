//! Sampling operators, sparse recovery in levels, stability probes and small
//! neural reconstruction networks for subsampled Fourier and Walsh data.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certify;
pub mod error;
pub mod instability;
pub mod io;
pub mod linalg;
pub mod neural;
pub mod operators;
pub mod optimal;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
