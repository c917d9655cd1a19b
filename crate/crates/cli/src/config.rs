//! Experiment configuration files.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tensormor_core::generators::{diffusion_affine, TestFunction};
use tensormor_core::greedy::Indicator;
use tensormor_core::regression::{AlsInit, FamilyKind};
use tensormor_core::rom::AffineModel;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pod,
    StrongGreedy,
    WeakGreedy,
    Rom,
    Richardson,
    Pgd,
    Regress,
    Ttsvd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pod => "pod",
            Method::StrongGreedy => "strong-greedy",
            Method::WeakGreedy => "weak-greedy",
            Method::Rom => "rom",
            Method::Richardson => "richardson",
            Method::Pgd => "pgd",
            Method::Regress => "regress",
            Method::Ttsvd => "ttsvd",
        }
    }

    /// Methods with a random step, which therefore need a seed.
    pub fn randomized(self) -> bool {
        !matches!(self, Method::Richardson | Method::Ttsvd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Benchmark problem: a parametrized linear system or a function of d
/// variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    /// 1D diffusion with d piecewise-constant conductivity blocks, size m.
    DiffusionAffine {
        m: usize,
        d: usize,
    },
    AdditiveFn {
        d: usize,
    },
    RankOneFn {
        d: usize,
    },
    MultiquadricFn {
        d: usize,
        #[serde(default = "one")]
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::DiffusionAffine { .. } => "diffusion-affine",
            Problem::AdditiveFn { .. } => "additive-fn",
            Problem::RankOneFn { .. } => "rank-one-fn",
            Problem::MultiquadricFn { .. } => "multiquadric-fn",
        }
    }

    pub fn model(&self) -> CliResult<AffineModel> {
        match *self {
            Problem::DiffusionAffine { m, d } => {
                if m == 0 || d == 0 {
                    return Err(CliError::Config("diffusion-affine needs m ≥ 1 and d ≥ 1".into()));
                }
                Ok(diffusion_affine(m, d)?)
            }
            _ => Err(CliError::Config(format!(
                "{} is a function generator; this method needs diffusion-affine",
                self.name()
            ))),
        }
    }

    pub fn function(&self) -> CliResult<TestFunction> {
        let f = match *self {
            Problem::AdditiveFn { d } => TestFunction::AdditiveFn { d },
            Problem::RankOneFn { d } => TestFunction::RankOneFn { d },
            Problem::MultiquadricFn { d, c } => TestFunction::MultiquadricFn { d, c },
            Problem::DiffusionAffine { .. } => {
                return Err(CliError::Config(
                    "diffusion-affine is an operator generator; this method needs a function".into(),
                ))
            }
        };
        f.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must agree with the method given on the command line when present.
    #[serde(default)]
    pub method: Option<Method>,
    pub problem: Problem,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub options: serde_json::Value,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Write measured seconds into CSV columns. Off by default so reruns are
    /// byte-identical.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Method-specific options; absent options take their defaults.
    pub fn options<T: for<'de> Deserialize<'de>>(&self) -> CliResult<T> {
        let v = if self.options.is_null() { serde_json::json!({}) } else { self.options.clone() };
        serde_json::from_value(v).map_err(|e| CliError::Config(format!("options: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotOptions {
    /// Number of train parameters K.
    pub train_size: usize,
    /// Target dimension.
    pub m: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakGreedyOptions {
    pub train_size: usize,
    pub m: usize,
    #[serde(default = "residual_indicator")]
    pub indicator: Indicator,
}

fn residual_indicator() -> Indicator {
    Indicator::Residual
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomOptions {
    pub train_size: usize,
    pub m: usize,
    pub test_size: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RichardsonConfig {
    /// Parameter grid points per dimension.
    pub grid: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_target")]
    pub target_residual: f64,
    /// Fixed step; the spectral estimate is used when absent.
    #[serde(default)]
    pub step: Option<f64>,
}

fn default_epsilon() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    5000
}

fn default_target() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdConfig {
    pub grid: usize,
    pub max_rank: usize,
    #[serde(default = "default_inner_sweeps")]
    pub inner_sweeps: usize,
    #[serde(default = "default_pgd_tol")]
    pub tol: f64,
}

fn default_inner_sweeps() -> usize {
    50
}

fn default_pgd_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    pub ranks: Vec<usize>,
    #[serde(default = "zero_ridge")]
    pub ridges: Vec<f64>,
    pub folds: usize,
}

fn zero_ridge() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressConfig {
    pub train_size: usize,
    #[serde(default)]
    pub test_size: usize,
    pub degree: usize,
    #[serde(default = "legendre")]
    pub family: FamilyKind,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub init: AlsInit,
    #[serde(default = "minus_one")]
    pub lower: f64,
    #[serde(default = "one")]
    pub upper: f64,
    /// Select rank and ridge by cross-validation before the final fit.
    #[serde(default)]
    pub cv: Option<CvConfig>,
}

fn legendre() -> FamilyKind {
    FamilyKind::Legendre
}

fn default_rank() -> usize {
    1
}

fn default_sweeps() -> usize {
    100
}

fn default_restarts() -> usize {
    1
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TtsvdConfig {
    /// Uniform grid points per dimension.
    pub points: usize,
    pub tol: f64,
    #[serde(default)]
    pub max_rank: Option<usize>,
    #[serde(default = "minus_one")]
    pub lower: f64,
    #[serde(default = "one")]
    pub upper: f64,
}
