use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FeatureBasis;
use crate::error::{Error, Result};
use crate::formats::CpTensor;
use crate::linalg::{self, svd, Matrix};
use crate::tensor::{next_index, DenseTensor};

/// Point evaluations (ξᵏ, yᵏ) of a function of d parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(Error::invalid("a sample set needs K ≥ 1 points with one value each"));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("sample points must share a positive dimension"));
        }
        if points.iter().flatten().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        Ok(Self { points, values })
    }

    /// Evaluates `f` at the given points.
    pub fn from_fn(points: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = points.iter().map(|p| f(p)).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<SampleSet> {
        SampleSet::new(
            idx.iter().map(|&i| self.points[i].clone()).collect(),
            idx.iter().map(|&i| self.values[i]).collect(),
        )
    }

    /// CSV with header `xi_1,…,xi_d,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("xi_{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (p, y) in self.points.iter().zip(&self.values) {
            let row: Vec<String> = p.iter().chain(std::iter::once(y)).map(|v| format!("{v:e}")).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let d = headers.len().saturating_sub(1);
        let expected: Vec<String> = (1..=d).map(|i| format!("xi_{i}")).chain(std::iter::once("y".into())).collect();
        if d == 0 || headers.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Format(format!("sample header must be xi_1,…,xi_d,y, got {headers:?}")));
        }
        let mut points = Vec::new();
        let mut values = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let nums = row
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            values.push(nums[d]);
            points.push(nums[..d].to_vec());
        }
        Self::new(points, values)
    }
}

/// `v(ξ) = Σ_i a_i ∏_ν (Σ_k V_iᵛ[k] φ_kᵛ(ξ_ν))`: a CP tensor of coefficients
/// over a feature basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CpModel {
    pub basis: FeatureBasis,
    pub coefficients: CpTensor,
}

impl CpModel {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let c = &self.coefficients;
        let feats: Vec<Vec<f64>> = self.basis.families.iter().zip(xi).map(|(f, &x)| f.eval(x)).collect();
        (0..c.rank())
            .map(|i| {
                c.weights()[i]
                    * c.factors()
                        .iter()
                        .zip(&feats)
                        .map(|(f, phi)| (0..phi.len()).map(|k| f[(k, i)] * phi[k]).sum::<f64>())
                        .product::<f64>()
            })
            .sum()
    }

    pub fn rmse(&self, samples: &SampleSet) -> f64 {
        let k = samples.len() as f64;
        (samples.points().iter().zip(samples.values()).map(|(p, y)| (y - self.eval(p)).powi(2)).sum::<f64>() / k).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlsOptions {
    pub rank: usize,
    /// Ridge weight λ on the squared factor norms.
    #[serde(default)]
    pub ridge: f64,
    pub sweeps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Relative objective change below which sweeping stops.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub init: AlsInit,
    /// Independent runs; the one with the lowest final objective is kept.
    /// Runs after the first start from seeded random factors.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

/// Starting factors for ALS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlsInit {
    /// Least-squares start when the full tensor-product basis has at most
    /// `min(K, FULL_INIT_LIMIT)` functions and its K-row design fits under the
    /// dense cap, random otherwise.
    #[default]
    Auto,
    /// Standard normal entries from the seeded generator.
    Random,
}

/// Largest full coefficient count for which the least-squares start is used.
pub const FULL_INIT_LIMIT: usize = 1024;

fn default_restarts() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-14
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            rank: 1,
            ridge: 0.0,
            sweeps: 100,
            seed: 0,
            tol: default_tol(),
            init: AlsInit::Auto,
            restarts: default_restarts(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub rank: usize,
    pub ridge: f64,
    pub seed: u64,
    pub sweeps: usize,
    /// Run (0-based) that produced the model and how it was started.
    pub run: usize,
    pub start: String,
    pub train_rmse: f64,
    pub validation_rmse: Option<f64>,
    /// K divided by the number of free parameters r·Σn_ν.
    pub sample_ratio: f64,
    /// `(1/K)‖y − v‖² + λ Σ_ν ‖Vᵛ‖²` after every mode update.
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Alternating least squares for a rank-r CP model over `basis`.
///
/// Each mode update solves the ridge-regularized least-squares problem for
/// that mode's n_ν×r factor with the others fixed, through the minimum-norm
/// pseudo-inverse, so the objective never increases within a run.
pub fn cp_als_fit(
    samples: &SampleSet,
    basis: &FeatureBasis,
    opts: &AlsOptions,
    holdout: Option<&SampleSet>,
) -> Result<(CpModel, FitReport)> {
    let d = basis.dim();
    if samples.dim() != d {
        return Err(Error::invalid(format!("samples have dimension {}, the basis {d}", samples.dim())));
    }
    if opts.rank == 0 {
        return Err(Error::invalid("rank must be at least 1"));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("at least one run is required"));
    }
    if !(opts.ridge >= 0.0 && opts.ridge.is_finite()) {
        return Err(Error::invalid("ridge weight must be nonnegative"));
    }
    for p in samples.points() {
        basis.check_point(p)?;
    }
    let r = opts.rank;
    let k = samples.len();
    let sizes = basis.sizes();
    // features[ν] is K×n_ν
    let features: Vec<Matrix> = basis
        .families
        .iter()
        .enumerate()
        .map(|(nu, f)| Matrix::from_fn(k, f.len(), |s, j| f.eval(samples.points()[s][nu])[j]))
        .collect();

    let free: usize = r * sizes.iter().sum::<usize>();
    let ratio = k as f64 / free as f64;
    let mut warnings = Vec::new();
    if ratio < 3.0 {
        warnings.push(format!("only {ratio:.2} samples per free parameter (K = {k}, {free} parameters)"));
    }

    let full: usize = sizes.iter().product();
    let mut best: Option<(usize, &str, Run)> = None;
    for run in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(run as u64));
        let least_squares = run == 0
            && opts.init == AlsInit::Auto
            && full <= k.min(FULL_INIT_LIMIT)
            && k * full <= crate::formats::dense_cap();
        let (start, label) = if least_squares {
            (least_squares_start(&features, samples.values(), &sizes, r, &mut rng)?, "least-squares")
        } else {
            (random_factors(&sizes, r, &mut rng), "random")
        };
        let out = als_run(&features, samples.values(), opts, start)?;
        if best.as_ref().is_none_or(|(_, _, b)| out.objective() < b.objective()) {
            best = Some((run, label, out));
        }
    }
    let (run, label, out) = best.expect("at least one run");
    warnings.extend(out.warnings);
    let coefficients = CpTensor::new(vec![1.0; r], out.factors)?.normalized();
    let model = CpModel { basis: basis.clone(), coefficients };
    let train_rmse = model.rmse(samples);
    let validation_rmse = holdout.map(|h| model.rmse(h));
    let report = FitReport {
        rank: r,
        ridge: opts.ridge,
        seed: opts.seed,
        sweeps: out.sweeps,
        run,
        start: label.to_string(),
        train_rmse,
        validation_rmse,
        sample_ratio: ratio,
        objective_trace: out.trace,
        warnings,
    };
    Ok((model, report))
}

struct Run {
    factors: Vec<Matrix>,
    trace: Vec<f64>,
    sweeps: usize,
    warnings: Vec<String>,
}

impl Run {
    fn objective(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn random_factors(sizes: &[usize], r: usize, rng: &mut ChaCha8Rng) -> Vec<Matrix> {
    sizes.iter().map(|&n| Matrix::from_fn(n, r, |_, _| StandardNormal.sample(rng))).collect()
}

/// Fits the full tensor-product coefficient tensor by least squares and
/// starts each factor from the leading left singular vectors of its
/// unfolding. Columns beyond n_ν are random.
fn least_squares_start(
    features: &[Matrix],
    y: &[f64],
    sizes: &[usize],
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Matrix>> {
    let k = y.len();
    let full: usize = sizes.iter().product();
    let mut design = Matrix::zeros(k, full);
    let mut idx = vec![0; sizes.len()];
    for c in 0..full {
        for s in 0..k {
            design[(s, c)] = idx.iter().enumerate().map(|(nu, &j)| features[nu][(s, j)]).product();
        }
        next_index(&mut idx, sizes);
    }
    let coef = DenseTensor::new(sizes.to_vec(), linalg::lstsq(&design, y)?)?;
    let d = sizes.len();
    (0..d)
        .map(|nu| {
            let n = sizes[nu];
            let u = if d == 1 {
                Matrix::from_vec(n, 1, coef.data().to_vec())?
            } else {
                svd(&coef.matricize(&[nu])?.matrix).u
            };
            Ok(Matrix::from_fn(n, r, |j, i| if i < u.cols() { u[(j, i)] } else { StandardNormal.sample(rng) }))
        })
        .collect()
}

fn als_run(features: &[Matrix], y: &[f64], opts: &AlsOptions, mut factors: Vec<Matrix>) -> Result<Run> {
    let d = features.len();
    let k = y.len();
    let r = opts.rank;
    let sizes: Vec<usize> = features.iter().map(Matrix::cols).collect();
    // projections[ν] = Φᵛ Vᵛ (K×r)
    let mut proj: Vec<Matrix> = features.iter().zip(&factors).map(|(f, v)| f.matmul(v)).collect();
    let ridge_rows = (k as f64 * opts.ridge).sqrt();
    let penalty = |fs: &[Matrix]| opts.ridge * fs.iter().map(|f| f.frobenius_norm().powi(2)).sum::<f64>();
    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut sweeps = 0;
    let mut prev = f64::INFINITY;
    // objective at roundoff level of the data
    let floor = 1e-28 * y.iter().map(|v| v * v).sum::<f64>() / k as f64;
    for _ in 0..opts.sweeps {
        sweeps += 1;
        for mu in 0..d {
            let n = sizes[mu];
            let cols = n * r;
            let extra = if opts.ridge > 0.0 { cols } else { 0 };
            let mut design = Matrix::zeros(k + extra, cols);
            for s in 0..k {
                for i in 0..r {
                    let c: f64 = (0..d).filter(|&nu| nu != mu).map(|nu| proj[nu][(s, i)]).product();
                    for j in 0..n {
                        design[(s, i * n + j)] = c * features[mu][(s, j)];
                    }
                }
            }
            for c in 0..extra {
                design[(k + c, c)] = ridge_rows;
            }
            let mut rhs = y.to_vec();
            rhs.resize(k + extra, 0.0);
            let (x, rank) = linalg::lstsq_with_rank(&design, &rhs)?;
            if rank < cols && warnings.is_empty() {
                warnings.push(format!(
                    "mode {mu} subproblem is rank deficient ({rank} < {cols}); using the minimum-norm solution"
                ));
            }
            factors[mu] = Matrix::from_fn(n, r, |j, i| x[i * n + j]);
            proj[mu] = features[mu].matmul(&factors[mu]);
            let fit: f64 = (0..k)
                .map(|s| {
                    let v: f64 = (0..r).map(|i| (0..d).map(|nu| proj[nu][(s, i)]).product::<f64>()).sum();
                    (y[s] - v).powi(2)
                })
                .sum::<f64>()
                / k as f64;
            trace.push(fit + penalty(&factors));
        }
        let obj = *trace.last().unwrap();
        let change = (prev - obj).abs() / prev.max(f64::MIN_POSITIVE);
        prev = obj;
        if obj <= floor || change < opts.tol {
            break;
        }
    }
    Ok(Run { factors, trace, sweeps, warnings })
}
