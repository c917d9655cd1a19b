use super::FeatureBasis;
use crate::error::{Error, Result};
use crate::formats::{check_dense_cap, dense_cap};
use crate::linalg::Matrix;
use crate::tensor::DenseTensor;

/// How a function is turned into a coefficient tensor on a tensor grid.
#[derive(Clone, Debug, PartialEq)]
pub enum GridMode {
    /// Nodal values `U[k] = f(ξ¹_{k₁}, …, ξᵈ_{k_d})`.
    Interpolation { grids: Vec<Vec<f64>> },
    /// Discrete L² projection `c_j = Σ_k ω_k f(ξ_k) φ_j(ξ_k)` with tensorized
    /// quadrature weights.
    Quadrature { grids: Vec<Vec<f64>>, weights: Vec<Vec<f64>> },
}

impl GridMode {
    /// Tensorized Gauss rule with `points[ν]` nodes per dimension on the
    /// basis intervals, weights summing to one.
    pub fn gauss(basis: &FeatureBasis, points: &[usize]) -> Result<GridMode> {
        if points.len() != basis.dim() {
            return Err(Error::invalid("one point count per dimension is required"));
        }
        let (grids, weights) = basis.families.iter().zip(points).map(|(f, &n)| f.gauss_rule(n)).unzip();
        Ok(GridMode::Quadrature { grids, weights })
    }

    fn grids(&self) -> &[Vec<f64>] {
        match self {
            GridMode::Interpolation { grids } | GridMode::Quadrature { grids, .. } => grids,
        }
    }
}

/// Evaluates `f` on the tensor grid, returning nodal values or projection
/// coefficients over `basis` depending on the mode.
pub fn grid_project(f: impl Fn(&[f64]) -> f64, basis: &FeatureBasis, mode: &GridMode) -> Result<DenseTensor> {
    let grids = mode.grids();
    if grids.len() != basis.dim() {
        return Err(Error::invalid(format!("{} grids for a {}-dimensional basis", grids.len(), basis.dim())));
    }
    let shape: Vec<usize> = grids.iter().map(Vec::len).collect();
    if shape.contains(&0) {
        return Err(Error::invalid("grids must be nonempty"));
    }
    check_dense_cap(&shape, dense_cap()).map_err(|e| match e {
        Error::Capacity { requested, cap } => Error::Capacity { requested, cap },
        e => e,
    })?;
    let mut point = vec![0.0; grids.len()];
    let values = DenseTensor::from_fn(shape, |idx| {
        for (p, (g, &i)) in point.iter_mut().zip(grids.iter().zip(idx)) {
            *p = g[i];
        }
        f(&point)
    })?;
    if values.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("function is not finite on the grid"));
    }
    match mode {
        GridMode::Interpolation { .. } => Ok(values),
        GridMode::Quadrature { grids, weights } => {
            if weights.iter().zip(grids).any(|(w, g)| w.len() != g.len()) {
                return Err(Error::invalid("one quadrature weight per grid node is required"));
            }
            let mut t = values;
            for (nu, ((fam, g), w)) in basis.families.iter().zip(grids).zip(weights).enumerate() {
                // (n_ν × q_ν) matrix φ_j(x_q) ω_q
                let evals: Vec<Vec<f64>> = g.iter().map(|&x| fam.eval(x)).collect();
                let p = Matrix::from_fn(fam.len(), g.len(), |j, q| evals[q][j] * w[q]);
                t = t.mode_product(nu, &p)?;
            }
            Ok(t)
        }
    }
}
