//! Rank-structured tensor formats: canonical (CP), Tucker and tensor train.

mod cp;
mod tt;
mod tucker;

pub use cp::CpTensor;
pub use tt::{tt_svd, TtTensor};
pub use tucker::{hosvd, TuckerTensor};

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::tensor::{checked_len, DenseTensor};

/// Default limit on the number of entries a low-rank tensor may expand to.
pub const DEFAULT_DENSE_CAP: usize = 10_000_000;

/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "TENSORMOR_DENSE_CAP";

/// Dense-materialization cap, read from `TENSORMOR_DENSE_CAP` when set.
pub fn dense_cap() -> usize {
    std::env::var(DENSE_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_DENSE_CAP)
}

pub(crate) fn check_dense_cap(shape: &[usize], cap: usize) -> Result<()> {
    let requested = checked_len(shape).unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::Capacity { requested, cap });
    }
    Ok(())
}

pub(crate) fn check_index(shape: &[usize], idx: &[usize]) -> Result<()> {
    if idx.len() != shape.len() {
        return Err(Error::invalid(format!("index of length {} for an order-{} tensor", idx.len(), shape.len())));
    }
    for (k, (&i, &n)) in idx.iter().zip(shape).enumerate() {
        if i >= n {
            return Err(Error::invalid(format!("index {i} out of range for mode {k} of size {n}")));
        }
    }
    Ok(())
}

/// Number of singular values of the `modes` unfolding at or above
/// `tol · σ₁` (ties kept). Values below the numerical-zero floor never count.
pub fn alpha_rank(t: &DenseTensor, modes: &[usize], tol: f64) -> Result<usize> {
    let m = t.matricize(modes)?;
    Ok(svd(&m.matrix).rank(tol))
}
