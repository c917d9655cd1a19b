use web_time::Instant;

use serde::{Deserialize, Serialize};

use super::{IterationRecord, KroneckerOperator, SolveTrace};
use crate::error::{Error, Result};
use crate::formats::TtTensor;
use crate::linalg::{self, Cholesky};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSize {
    Fixed(f64),
    /// `2 / (λ_min + λ_max)` from dense spectral estimates.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichardsonOptions {
    pub step: StepSize,
    /// Relative truncation tolerance ε of Π_ε.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop once ‖A u − b‖ ≤ target · ‖b‖.
    pub target_residual: f64,
}

impl Default for RichardsonOptions {
    fn default() -> Self {
        Self { step: StepSize::Auto, epsilon: 1e-8, max_iter: 5000, target_residual: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Target,
    Stagnation,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct RichardsonOutcome {
    pub solution: TtTensor,
    pub trace: SolveTrace,
    pub stop: StopReason,
    pub step: f64,
    /// Largest relative residual among the last ten iterations.
    pub plateau: f64,
}

/// Extreme eigenvalue information of a symmetric positive definite operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    /// Inverse-power estimate (an upper bound on λ_min).
    pub lambda_min: f64,
    /// Power-iteration estimate (a lower bound on λ_max).
    pub lambda_max: f64,
    /// Guaranteed upper bound on λ_max (Gershgorin, capped by ‖A‖_F).
    pub lambda_max_bound: f64,
}

const SPECTRAL_ITERATIONS: usize = 30;

/// Dense spectral estimates by 30 power and inverse-power iterations; the
/// Cholesky factorization doubles as the positive-definiteness check.
pub fn estimate_spectrum(a: &KroneckerOperator) -> Result<Spectrum> {
    let m = a.to_matrix()?;
    let n = m.rows();
    let chol = Cholesky::new(&m)?;
    let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
    let normalize = |v: &mut Vec<f64>| {
        let s = linalg::norm2(v);
        v.iter_mut().for_each(|x| *x /= s);
    };

    let mut x = start.clone();
    normalize(&mut x);
    let mut lambda_max = 0.0;
    for _ in 0..SPECTRAL_ITERATIONS {
        let mut y = m.matvec(&x);
        lambda_max = linalg::dot(&x, &y);
        normalize(&mut y);
        x = y;
    }
    let mut x = start;
    normalize(&mut x);
    let mut mu = 0.0;
    for _ in 0..SPECTRAL_ITERATIONS {
        let mut y = chol.solve(&x);
        mu = linalg::dot(&x, &y);
        normalize(&mut y);
        x = y;
    }
    let gershgorin = (0..n).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(Spectrum {
        lambda_min: 1.0 / mu,
        lambda_max,
        lambda_max_bound: gershgorin.min(m.frobenius_norm()).max(lambda_max),
    })
}

/// Auto step `2 / (λ_min + λ̄_max)` with λ̄_max the guaranteed upper bound.
pub fn auto_step(a: &KroneckerOperator) -> Result<f64> {
    let s = estimate_spectrum(a)?;
    Ok(2.0 / (s.lambda_min + s.lambda_max_bound))
}

/// Truncated Richardson iteration `u ← Π_ε(u + α (b − A u))` from u = 0.
///
/// Residual norms are taken on the residual rounded at ε/10; the record of
/// the returned iterate uses the exact residual. Stops on the target
/// residual, on stagnation (relative change below ε/10 over five
/// iterations) or after `max_iter` updates; growth by ×10 over ten
/// iterations is reported as divergence.
pub fn truncated_richardson(
    a: &KroneckerOperator,
    b: &TtTensor,
    opts: &RichardsonOptions,
) -> Result<RichardsonOutcome> {
    if b.shape() != a.shape() {
        return Err(Error::invalid("right-hand side shape differs from the operator"));
    }
    if !(opts.epsilon >= 0.0) {
        return Err(Error::invalid("truncation tolerance must be nonnegative"));
    }
    let step = match opts.step {
        StepSize::Fixed(s) if s > 0.0 && s.is_finite() => s,
        StepSize::Fixed(s) => return Err(Error::invalid(format!("step size must be positive, got {s}"))),
        StepSize::Auto => auto_step(a)?,
    };
    let start = Instant::now();
    let bnorm = b.norm();
    let mut u = TtTensor::zeros(&b.shape())?;
    let mut trace = SolveTrace::default();
    let mut rel: Vec<f64> = Vec::new();
    let trunc = opts.epsilon / 10.0;

    let mut k = 0;
    let stop = loop {
        let r = b.sub(&a.apply(&u)?)?.round(trunc);
        let res = r.norm();
        let relres = if bnorm > 0.0 { res / bnorm } else { res };
        rel.push(relres);
        trace.records.push(IterationRecord {
            iteration: k,
            ranks: u.ranks(),
            residual: res,
            functional: res * res,
            seconds: start.elapsed().as_secs_f64(),
        });
        if !res.is_finite() || (k >= 10 && relres > 10.0 * rel[k - 10]) {
            return Err(Error::Divergence { iteration: k, residual: res, trace: Box::new(trace) });
        }
        if relres <= opts.target_residual {
            break StopReason::Target;
        }
        if opts.epsilon > 0.0 && k >= 5 && (relres - rel[k - 5]).abs() < trunc * rel[k - 5] {
            break StopReason::Stagnation;
        }
        if k >= opts.max_iter {
            break StopReason::MaxIter;
        }
        u = u.add(&r.scaled(step))?.round(opts.epsilon);
        k += 1;
    };

    let exact = b.sub(&a.apply(&u)?)?.norm();
    if let Some(last) = trace.records.last_mut() {
        last.residual = exact;
        last.functional = exact * exact;
    }
    if let Some(last) = rel.last_mut() {
        *last = if bnorm > 0.0 { exact / bnorm } else { exact };
    }
    let plateau = rel.iter().rev().take(10).copied().fold(0.0, f64::max);
    Ok(RichardsonOutcome { solution: u, trace, stop, step, plateau })
}
