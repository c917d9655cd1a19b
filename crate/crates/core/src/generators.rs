//! Benchmark problems: a parametric diffusion model with an affine operator
//! and a few closed-form functions of d parameters with known rank structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{check_dense_cap, dense_cap, CpTensor};
use crate::linalg::Matrix;
use crate::rom::{
    AffineModel, AffineOperator, AffineVector, CoefficientFunction, ParameterDomain, StabilityBounds, TermBounds,
};
use crate::tensor::DenseTensor;

/// Lower end of every parameter interval of the diffusion model.
pub const DIFFUSION_LOWER: f64 = 0.1;

/// `-(κ(x;ξ) u')' = 1` on (0, 1) with homogeneous Dirichlet conditions,
/// linear finite elements on M interior nodes and
/// `κ = 1 + Σ_ν ξ_ν 1_{Ω_ν}` for d contiguous subdomains Ω_ν.
///
/// The operator is `A_0 + Σ_ν ξ_ν A_ν` with `A_0` the unit-diffusion
/// stiffness and `A_ν` the stiffness restricted to the elements of Ω_ν, so
/// `A(ξ)` is SPD with `α(ξ) ≥ λ_min(A_0)` and
/// `β(ξ) ≤ λ_max(A_0) + Σ λ_max(A_ν)` for ξ ∈ [0.1, 1]^d.
pub fn diffusion_affine(m: usize, d: usize) -> Result<AffineModel> {
    if m < 2 || d == 0 || d > m + 1 {
        return Err(Error::invalid(format!("diffusion model needs M ≥ 2 and 1 ≤ d ≤ M + 1, got M = {m}, d = {d}")));
    }
    check_dense_cap(&[m, m], dense_cap())?;
    let h = 1.0 / (m + 1) as f64;
    let elements = m + 1;
    let mut blocks = vec![Matrix::zeros(m, m); d];
    for e in 0..elements {
        let block = &mut blocks[e * d / elements];
        // element e joins nodes e and e + 1; node k is unknown k − 1
        let nodes = [e.checked_sub(1), (e < m).then_some(e)];
        for (a, na) in nodes.iter().enumerate() {
            for (b, nb) in nodes.iter().enumerate() {
                if let (Some(i), Some(j)) = (na, nb) {
                    block[(*i, *j)] += if a == b { 1.0 / h } else { -1.0 / h };
                }
            }
        }
    }
    let a0 = blocks.iter().fold(Matrix::zeros(m, m), |mut acc, b| {
        acc.add_scaled(1.0, b);
        acc
    });
    let sin2 = |k: usize| (k as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2);
    let mut terms = vec![TermBounds { lambda_min: 4.0 / h * sin2(1), lambda_max: 4.0 / h * sin2(m) }];
    for b in &blocks {
        let diag: Vec<f64> = (0..m).map(|i| b[(i, i)]).collect();
        let off: Vec<f64> = (1..m).map(|i| b[(i, i - 1)]).collect();
        terms.push(TermBounds { lambda_min: 0.0, lambda_max: tridiagonal_max_eigenvalue(&diag, &off) });
    }
    let bounds = StabilityBounds {
        alpha_lb: terms[0].lambda_min,
        beta_ub: terms.iter().map(|t| t.lambda_max).sum(),
        terms: Some(terms),
    };
    let mut matrices = vec![a0];
    matrices.extend(blocks);
    let mut coefficients = vec![CoefficientFunction::constant(1.0)];
    coefficients.extend((0..d).map(CoefficientFunction::linear));
    let operator = AffineOperator::new(matrices, coefficients)?;
    let rhs = AffineVector::new(vec![vec![h; m]], vec![CoefficientFunction::constant(1.0)])?;
    let domain = ParameterDomain::uniform_box(vec![DIFFUSION_LOWER; d], vec![1.0; d])?;
    AffineModel::new(operator, rhs, domain, Some(bounds))
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection inside the Gershgorin interval.
fn tridiagonal_max_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < off.len() { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..diag.len()).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..diag.len()).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    // eigenvalues strictly below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &a) in diag.iter().enumerate() {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = a - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (a.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let n = diag.len();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Closed-form test functions on a box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `Σ_ν g_ν(ξ_ν)` with `g_ν(x) = sin((ν+1)x + ν)`.
    AdditiveFn { d: usize },
    /// `∏_ν (1 + ½ sin((ν+1)ξ_ν))`.
    RankOneFn { d: usize },
    /// `(c + ‖ξ‖²)^{1/2}`.
    MultiquadricFn {
        d: usize,
        #[serde(default = "default_c")]
        c: f64,
    },
}

fn default_c() -> f64 {
    1.0
}

fn additive_term(nu: usize, x: f64) -> f64 {
    ((nu + 1) as f64 * x + nu as f64).sin()
}

fn rank_one_factor(nu: usize, x: f64) -> f64 {
    1.0 + 0.5 * ((nu + 1) as f64 * x).sin()
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match *self {
            TestFunction::AdditiveFn { d } | TestFunction::RankOneFn { d } | TestFunction::MultiquadricFn { d, .. } => {
                d
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::invalid("test functions need d ≥ 1"));
        }
        if let TestFunction::MultiquadricFn { c, .. } = *self {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid("multiquadric shift c must be positive"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match *self {
            TestFunction::AdditiveFn { .. } => xi.iter().enumerate().map(|(nu, &x)| additive_term(nu, x)).sum(),
            TestFunction::RankOneFn { .. } => xi.iter().enumerate().map(|(nu, &x)| rank_one_factor(nu, x)).product(),
            TestFunction::MultiquadricFn { c, .. } => (c + xi.iter().map(|x| x * x).sum::<f64>()).sqrt(),
        }
    }

    fn check_grids(&self, grids: &[Vec<f64>]) -> Result<()> {
        self.validate()?;
        if grids.len() != self.dim() || grids.iter().any(Vec::is_empty) {
            return Err(Error::invalid(format!("need {} nonempty grids, got {}", self.dim(), grids.len())));
        }
        Ok(())
    }

    /// Values on the tensor grid `grids[0] × … × grids[d−1]`.
    pub fn on_grid(&self, grids: &[Vec<f64>]) -> Result<DenseTensor> {
        self.check_grids(grids)?;
        let shape: Vec<usize> = grids.iter().map(Vec::len).collect();
        check_dense_cap(&shape, dense_cap())?;
        let mut point = vec![0.0; grids.len()];
        DenseTensor::from_fn(shape, |idx| {
            for (p, (g, &i)) in point.iter_mut().zip(grids.iter().zip(idx)) {
                *p = g[i];
            }
            self.eval(&point)
        })
    }

    /// Exact canonical representation on a grid where one exists: d terms for
    /// the additive function, one for the rank-one function.
    pub fn cp_on_grid(&self, grids: &[Vec<f64>]) -> Result<Option<CpTensor>> {
        self.check_grids(grids)?;
        let ones = |g: &Vec<f64>| vec![1.0; g.len()];
        let terms: Vec<(f64, Vec<Vec<f64>>)> = match *self {
            TestFunction::AdditiveFn { d } => (0..d)
                .map(|nu| {
                    let vecs = grids
                        .iter()
                        .enumerate()
                        .map(
                            |(mu, g)| {
                                if mu == nu {
                                    g.iter().map(|&x| additive_term(nu, x)).collect()
                                } else {
                                    ones(g)
                                }
                            },
                        )
                        .collect();
                    (1.0, vecs)
                })
                .collect(),
            TestFunction::RankOneFn { .. } => vec![(
                1.0,
                grids.iter().enumerate().map(|(nu, g)| g.iter().map(|&x| rank_one_factor(nu, x)).collect()).collect(),
            )],
            TestFunction::MultiquadricFn { .. } => return Ok(None),
        };
        CpTensor::from_terms(&terms).map(Some)
    }
}

/// `n` equispaced points on `[lower, upper]`, endpoints included.
pub fn uniform_grid(n: usize, lower: f64, upper: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lower + upper)],
        _ => (0..n).map(|i| lower + (upper - lower) * i as f64 / (n - 1) as f64).collect(),
    }
}
