use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar coefficient function α(ξ) of an affine term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientFunction {
    Constant {
        value: f64,
    },
    /// `scale · ∏_ν ξ_ν^{e_ν}`.
    Monomial {
        exponents: Vec<u32>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale · ξ_dim + offset`.
    Affine {
        dim: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `exp(rate · ξ_dim)`.
    Exp {
        dim: usize,
        rate: f64,
    },
    /// `1 / (shift + ξ_dim)`.
    Reciprocal {
        dim: usize,
        shift: f64,
    },
    /// Values at fixed parameter points. Off the table the value of the
    /// nearest point (Euclidean) is returned.
    Tabulated {
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

/// A univariate factor of a separable coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Univariate {
    Power(u32),
    Affine { scale: f64, offset: f64 },
    Exp(f64),
    Reciprocal(f64),
}

impl Univariate {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Univariate::Power(e) => x.powi(e as i32),
            Univariate::Affine { scale, offset } => scale * x + offset,
            Univariate::Exp(rate) => (rate * x).exp(),
            Univariate::Reciprocal(shift) => 1.0 / (shift + x),
        }
    }
}

/// `scale · ∏_ν f_ν(ξ_ν)` with `None` standing for the constant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Separable {
    pub scale: f64,
    pub factors: Vec<Option<Univariate>>,
}

impl CoefficientFunction {
    pub fn constant(value: f64) -> Self {
        CoefficientFunction::Constant { value }
    }

    /// `ξ_dim`.
    pub fn linear(dim: usize) -> Self {
        CoefficientFunction::Affine { dim, scale: 1.0, offset: 0.0 }
    }

    /// Checks that the descriptor is well formed for parameters in ℝᵈ.
    pub fn validate(&self, d: usize) -> Result<()> {
        let dim_ok = |dim: usize| {
            if dim < d {
                Ok(())
            } else {
                Err(Error::invalid(format!("coefficient refers to ξ_{dim} but d = {d}")))
            }
        };
        match self {
            CoefficientFunction::Constant { value } if !value.is_finite() => {
                Err(Error::invalid("non-finite constant coefficient"))
            }
            CoefficientFunction::Constant { .. } => Ok(()),
            CoefficientFunction::Monomial { exponents, .. } if exponents.len() != d => {
                Err(Error::invalid(format!("monomial has {} exponents for d = {d}", exponents.len())))
            }
            CoefficientFunction::Monomial { .. } => Ok(()),
            CoefficientFunction::Affine { dim, .. }
            | CoefficientFunction::Exp { dim, .. }
            | CoefficientFunction::Reciprocal { dim, .. } => dim_ok(*dim),
            CoefficientFunction::Tabulated { points, values } => {
                if points.is_empty() || points.len() != values.len() {
                    return Err(Error::invalid("tabulated coefficient needs one value per point"));
                }
                if points.iter().any(|p| p.len() != d) {
                    return Err(Error::invalid("tabulated point dimension differs from d"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            CoefficientFunction::Constant { value } => *value,
            CoefficientFunction::Monomial { exponents, scale } => {
                scale * exponents.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product::<f64>()
            }
            CoefficientFunction::Affine { dim, scale, offset } => scale * xi[*dim] + offset,
            CoefficientFunction::Exp { dim, rate } => (rate * xi[*dim]).exp(),
            CoefficientFunction::Reciprocal { dim, shift } => 1.0 / (shift + xi[*dim]),
            CoefficientFunction::Tabulated { points, values } => {
                let dist = |p: &[f64]| p.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (k, p) in points.iter().enumerate() {
                    let dk = dist(p);
                    if dk < best_d {
                        best_d = dk;
                        best = k;
                    }
                }
                values[best]
            }
        }
    }

    /// Product-over-dimensions form, or the reason it does not exist.
    pub fn separable(&self, d: usize) -> std::result::Result<Separable, String> {
        let mut factors = vec![None; d];
        let scale = match self {
            CoefficientFunction::Constant { value } => *value,
            CoefficientFunction::Monomial { exponents, scale } => {
                for (f, &e) in factors.iter_mut().zip(exponents) {
                    if e > 0 {
                        *f = Some(Univariate::Power(e));
                    }
                }
                *scale
            }
            CoefficientFunction::Affine { dim, scale, offset } => {
                factors[*dim] = Some(Univariate::Affine { scale: *scale, offset: *offset });
                1.0
            }
            CoefficientFunction::Exp { dim, rate } => {
                factors[*dim] = Some(Univariate::Exp(*rate));
                1.0
            }
            CoefficientFunction::Reciprocal { dim, shift } => {
                factors[*dim] = Some(Univariate::Reciprocal(*shift));
                1.0
            }
            CoefficientFunction::Tabulated { .. } => {
                return Err("tabulated coefficients are not products of univariate functions".into())
            }
        };
        Ok(Separable { scale, factors })
    }
}
