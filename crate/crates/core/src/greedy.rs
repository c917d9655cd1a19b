//! Greedy subspace construction: strong greedy (empirical interpolation) on
//! snapshots, weak greedy driven by a residual indicator, interpolation
//! functionals at magic points, and empirical affine approximation of
//! parameter-dependent operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Matrix};
use crate::order2::{ErrorReport, NormKind, SnapshotSet, Subspace};
use crate::rom::{AffineModel, AffineOperator, CoefficientFunction, ReducedModel};

/// Remainders below this fraction of a vector's norm count as linearly
/// dependent.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Candidate parameter points with optional weights ω(ξ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSet {
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl TrainSet {
    pub fn new(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a train set needs at least one point"));
        }
        if let Some(w) = &weights {
            if w.len() != points.len() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::invalid("train weights must be positive, one per point"));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::invalid(format!("train points {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { points, weights })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[k])
    }
}

/// Outcome of a greedy construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyResult {
    /// Selected candidate indices in selection order.
    pub selected: Vec<usize>,
    pub subspace: Subspace,
    /// Record m holds the largest indicator value over the train set for
    /// the m-dimensional space (m = 0 … achieved dimension).
    pub report: ErrorReport,
    /// Suboptimality constant γ of each step, when it is known.
    pub gamma: Option<f64>,
    /// True when selection stopped early on linear dependence.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl GreedyResult {
    pub fn max_errors(&self) -> Vec<f64> {
        self.report.errors()
    }
}

fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best
}

/// Strong greedy on a snapshot set: each step adds the snapshot with the
/// largest projection error onto the current space (ties to the lowest
/// index). Errors are recomputed from fresh projections at every step.
pub fn strong_greedy(s: &SnapshotSet, m: usize) -> Result<GreedyResult> {
    if m > s.len() {
        return Err(Error::invalid(format!("m = {m} exceeds the {} snapshots", s.len())));
    }
    let start = web_time::Instant::now();
    let snapshots: Vec<Vec<f64>> = (0..s.len()).map(|k| s.column(k)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    let mut report = ErrorReport::default();
    let mut degenerate = false;
    let mut warnings = Vec::new();
    let scale = snapshots.iter().map(|u| linalg::norm2(u)).fold(0.0, f64::max);
    loop {
        let errors: Vec<f64> = snapshots.iter().map(|u| remainder_norm(&basis, u)).collect();
        let (k, e) = argmax(&errors).expect("nonempty set");
        report.push(basis.len(), e, NormKind::Linf, start.elapsed().as_secs_f64());
        if basis.len() == m {
            break;
        }
        if e <= BREAKDOWN_TOL * scale {
            degenerate = true;
            warnings.push(format!("snapshot set exhausted at dimension {}", basis.len()));
            break;
        }
        match linalg::orthonormalize_against(&basis, &snapshots[k], BREAKDOWN_TOL) {
            Some((q, _)) => {
                basis.push(q);
                selected.push(k);
            }
            None => {
                degenerate = true;
                warnings.push(format!("candidate {k} is linearly dependent at dimension {}", basis.len()));
                break;
            }
        }
    }
    Ok(GreedyResult {
        selected,
        subspace: Subspace::from_vectors(s.dim(), &basis)?,
        report,
        gamma: Some(1.0),
        degenerate,
        warnings,
    })
}

fn remainder_norm(basis: &[Vec<f64>], u: &[f64]) -> f64 {
    let mut r = u.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = linalg::dot(q, &r);
            linalg::axpy(-c, q, &mut r);
        }
    }
    linalg::norm2(&r)
}

/// Indicator Δ(u_j(ξ); ξ) driving the weak greedy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Indicator {
    /// The true best-approximation error ‖u(ξ) − P u(ξ)‖, from full solves.
    Exact,
    /// The Euclidean norm of the minimal-residual Galerkin residual.
    Residual,
}

/// Weak greedy: step j+1 selects the maximizer of ω(ξ)·Δ(u_j(ξ); ξ) over
/// the train set and adds the full solution there.
///
/// With the residual indicator and stability bounds α ≤ α(ξ), β(ξ) ≤ β on the
/// model, the selected point satisfies the γ-inequality with γ = (α/β)².
pub fn weak_greedy(model: &AffineModel, indicator: Indicator, train: &TrainSet, m: usize) -> Result<GreedyResult> {
    if m > train.len() {
        return Err(Error::invalid(format!("m = {m} exceeds the {} train points", train.len())));
    }
    let start = web_time::Instant::now();
    let mut warnings = Vec::new();
    let mut excluded = vec![false; train.len()];

    let truths: Option<Vec<Option<Vec<f64>>>> = match indicator {
        Indicator::Exact => Some(
            train
                .points()
                .iter()
                .enumerate()
                .map(|(k, xi)| match model.full_solve(xi) {
                    Ok(u) => Some(u),
                    Err(e) => {
                        warnings.push(format!("train point {k} excluded: {e}"));
                        excluded[k] = true;
                        None
                    }
                })
                .collect(),
        ),
        Indicator::Residual => None,
    };

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    let mut report = ErrorReport::default();
    let mut degenerate = false;
    loop {
        let values: Vec<f64> = match &truths {
            Some(u) => u
                .iter()
                .enumerate()
                .map(|(k, u)| u.as_ref().map_or(f64::NAN, |u| train.weight(k) * remainder_norm(&basis, u)))
                .collect(),
            None => {
                let sub = Subspace::from_vectors(model.dim(), &basis)?;
                let rm = ReducedModel::build(model, &sub, None)?;
                train
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(k, xi)| {
                        if excluded[k] {
                            return f64::NAN;
                        }
                        match rm.solve(xi) {
                            Ok(sol) => train.weight(k) * sol.residual,
                            Err(e) => {
                                warnings.push(format!("train point {k} excluded: {e}"));
                                excluded[k] = true;
                                f64::NAN
                            }
                        }
                    })
                    .collect()
            }
        };
        let Some((k, e)) = argmax(&values) else {
            return Err(Error::Degenerate {
                step: basis.len(),
                context: "indicator failed at every train point".into(),
            });
        };
        report.push(basis.len(), e, NormKind::Linf, start.elapsed().as_secs_f64());
        if basis.len() == m {
            break;
        }
        let u = match &truths {
            Some(u) => u[k].clone().expect("finite indicator implies a solution"),
            None => model.full_solve(&train.points()[k])?,
        };
        match linalg::orthonormalize_against(&basis, &u, BREAKDOWN_TOL) {
            Some((q, _)) => {
                basis.push(q);
                selected.push(k);
            }
            None => {
                degenerate = true;
                warnings.push(format!("selected point {k} adds no new direction at dimension {}", basis.len()));
                break;
            }
        }
    }

    let gamma = match indicator {
        Indicator::Exact => Some(1.0),
        Indicator::Residual => model.bounds.as_ref().map(|b| (b.alpha_lb / b.beta_ub).powi(2)),
    };
    if gamma.is_none() {
        warnings.push("model declares no stability bounds; γ is unavailable".into());
    }
    Ok(GreedyResult {
        selected,
        subspace: Subspace::from_vectors(model.dim(), &basis)?,
        report,
        gamma,
        degenerate,
        warnings,
    })
}

/// Interpolation functionals φ_i(v) built from entry evaluations at magic
/// points, dual to a basis w_1 … w_m: φ_i(w_j) = δ_ij.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Interpolation {
    basis: Matrix,
    /// Entry indices p_1 … p_m.
    pub points: Vec<usize>,
    /// `B[i][j] = w_j[p_i]`, lower triangular up to the greedy ordering.
    pub matrix: Matrix,
    pub condition: f64,
}

impl Interpolation {
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    /// Interpolation coefficients `c = B⁻¹ v[P]` from the magic-point values.
    pub fn coefficients_from_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::invalid("one value per magic point is required"));
        }
        Ok(Lu::new(&self.matrix)?.solve(values))
    }

    /// Functional values φ(v) = B⁻¹ v[P].
    pub fn functionals(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.basis.rows() {
            return Err(Error::invalid("vector length differs from the basis vectors"));
        }
        let vals: Vec<f64> = self.points.iter().map(|&p| v[p]).collect();
        self.coefficients_from_values(&vals)
    }

    /// The interpolant `Σ φ_i(v) w_i`.
    pub fn interpolate(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.basis.matvec(&self.functionals(v)?))
    }
}

/// Greedy magic-point selection: p_1 maximizes |w_1|, and p_j maximizes the
/// interpolation residual of w_j on the previous points (ties to the lowest
/// index).
pub fn geim_functionals(basis: &[Vec<f64>]) -> Result<Interpolation> {
    let first = basis.first().ok_or_else(|| Error::invalid("at least one basis vector is required"))?;
    let n = first.len();
    if basis.iter().any(|w| w.len() != n) {
        return Err(Error::invalid("basis vectors must share a length"));
    }
    let mut points: Vec<usize> = Vec::new();
    for (j, w) in basis.iter().enumerate() {
        let r = if j == 0 {
            w.clone()
        } else {
            let b = Matrix::from_fn(j, j, |i, l| basis[l][points[i]]);
            let rhs: Vec<f64> = points.iter().map(|&p| w[p]).collect();
            let c = Lu::new(&b)?.solve(&rhs);
            let mut r = w.clone();
            for (l, cl) in c.iter().enumerate() {
                linalg::axpy(-cl, &basis[l], &mut r);
            }
            r
        };
        let abs: Vec<f64> = r.iter().map(|x| x.abs()).collect();
        let (p, v) =
            argmax(&abs).ok_or_else(|| Error::Degenerate { step: j, context: "non-finite residual".into() })?;
        if v <= BREAKDOWN_TOL * linalg::norm2(w).max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate {
                step: j,
                context: format!("basis vector {j} is interpolated exactly by the previous ones"),
            });
        }
        points.push(p);
    }
    let m = basis.len();
    let matrix = Matrix::from_fn(m, m, |i, j| basis[j][points[i]]);
    let condition = linalg::condition_number(&matrix);
    Ok(Interpolation { basis: Matrix::from_cols(basis)?, points, matrix, condition })
}

/// Empirical affine approximation `A(ξ) ≈ Σ_{i≤L} α_i(ξ) A_i`.
#[derive(Clone, Debug)]
pub struct AffineApproximation {
    /// Terms A_i with tabulated coefficients over the train points.
    pub operator: AffineOperator,
    /// Train indices whose samples span the terms.
    pub selected: Vec<usize>,
    /// Magic entries as (row, column) pairs.
    pub entries: Vec<(usize, usize)>,
    pub interpolation: Interpolation,
    /// True when the sample family has rank below the requested L.
    pub degenerate: bool,
}

impl AffineApproximation {
    /// α(ξ) from the entries of A(ξ) at the magic positions.
    pub fn coefficients_for(&self, a: &Matrix) -> Result<Vec<f64>> {
        let vals: Vec<f64> = self.entries.iter().map(|&(i, j)| a[(i, j)]).collect();
        self.interpolation.coefficients_from_values(&vals)
    }
}

/// Builds an affine approximation of sampled operators A(ξᵏ): strong greedy
/// on the vectorized samples picks L terms, magic entries make the
/// coefficients interpolatory, and α_i is tabulated at every train point.
pub fn affine_approximate(samples: &[Matrix], train: &TrainSet, l: usize) -> Result<AffineApproximation> {
    if samples.len() != train.len() {
        return Err(Error::invalid("one operator sample per train point is required"));
    }
    if l == 0 || l > samples.len() {
        return Err(Error::invalid(format!("L = {l} must lie in 1..={}", samples.len())));
    }
    let (rows, cols) = samples[0].shape();
    if samples.iter().any(|a| a.shape() != (rows, cols)) {
        return Err(Error::invalid("operator samples must share a shape"));
    }
    let vecs = Matrix::from_cols(&samples.iter().map(|a| a.as_slice().to_vec()).collect::<Vec<_>>())?;
    let snaps = SnapshotSet::uniform(vecs, train.points().to_vec())?;
    let g = strong_greedy(&snaps, l)?;
    let q = g.subspace.basis().columns();
    let interpolation = geim_functionals(&q)?;
    let entries: Vec<(usize, usize)> = interpolation.points.iter().map(|&p| (p / cols, p % cols)).collect();

    let k = samples.len();
    let mut table = vec![Vec::with_capacity(k); q.len()];
    for a in samples {
        let vals: Vec<f64> = entries.iter().map(|&(i, j)| a[(i, j)]).collect();
        for (t, c) in table.iter_mut().zip(interpolation.coefficients_from_values(&vals)?) {
            t.push(c);
        }
    }
    let matrices = q.iter().map(|v| Matrix::from_vec(rows, cols, v.clone())).collect::<Result<Vec<_>>>()?;
    let coefficients = table
        .into_iter()
        .map(|values| CoefficientFunction::Tabulated { points: train.points().to_vec(), values })
        .collect();
    Ok(AffineApproximation {
        operator: AffineOperator::new(matrices, coefficients)?,
        selected: g.selected,
        entries,
        interpolation,
        degenerate: g.degenerate,
    })
}
