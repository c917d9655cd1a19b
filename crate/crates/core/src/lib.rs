//! Low-rank tensor approximation and projection-based model order reduction.
//!
//! The crate is organised bottom-up: [`linalg`] and [`tensor`] hold the dense
//! kernels, [`formats`] the CP/Tucker/TT representations, [`order2`] and
//! [`greedy`] the subspace constructions, [`rom`] affine parametric models and
//! their reduced counterparts, [`solver`] the low-rank solvers for
//! tensor-structured systems and [`regression`] fitting from samples.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod formats;
pub mod generators;
pub mod greedy;
pub mod linalg;
pub mod lrtf;
pub mod order2;
pub mod probe;
pub mod regression;
pub mod rom;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use tensor::DenseTensor;
