//! Affine parametric linear models `A(ξ) u = b(ξ)` and minimal-residual
//! Galerkin reduced models with offline/online separation.

mod coeff;
mod model;
mod reduced;

pub use coeff::{CoefficientFunction, Separable, Univariate};
pub use model::{AffineModel, AffineOperator, AffineVector, Measure, ParameterDomain, StabilityBounds, TermBounds};
pub use reduced::{ReducedModel, ReducedSolution};
