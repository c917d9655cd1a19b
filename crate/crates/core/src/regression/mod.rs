//! Low-rank approximation of functions from point evaluations: CP-ALS least
//! squares over tensorized polynomial features, cross-validation, and
//! full-grid interpolation/projection.

mod basis;
mod cp_als;
mod cv;
mod grid;

pub use basis::{gauss_legendre, FamilyKind, FeatureBasis, UnivariateFamily};
pub use cp_als::{cp_als_fit, AlsInit, AlsOptions, CpModel, FitReport, SampleSet};
pub use cv::{cross_validate, CvEntry, CvReport};
pub use grid::{grid_project, GridMode};
