use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::CoefficientFunction;
use crate::error::{Error, Result};
use crate::linalg::{self, svd, Lu, Matrix};
use crate::lrtf;
use crate::tensor::DenseTensor;

/// Probability measure on the parameter box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Measure {
    Uniform,
    /// Independent normals per dimension restricted to the box.
    GaussianTruncated {
        mean: Vec<f64>,
        std: Vec<f64>,
    },
    /// Discrete measure on user-supplied points.
    Quadrature {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

/// Product of intervals `[lower_ν, upper_ν]` with a measure tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "uniform")]
    pub measure: Measure,
}

fn uniform() -> Measure {
    Measure::Uniform
}

impl ParameterDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, measure: Measure) -> Result<Self> {
        let dom = Self { lower, upper, measure };
        dom.validate()?;
        Ok(dom)
    }

    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(lower, upper, Measure::Uniform)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 || self.upper.len() != d {
            return Err(Error::invalid("parameter box needs matching nonempty bounds"));
        }
        if self.lower.iter().zip(&self.upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::invalid("parameter box bounds must be finite with lower ≤ upper"));
        }
        match &self.measure {
            Measure::Uniform => Ok(()),
            Measure::GaussianTruncated { mean, std } => {
                if mean.len() != d || std.len() != d || std.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::invalid("truncated gaussian needs d means and positive deviations"));
                }
                Ok(())
            }
            Measure::Quadrature { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(Error::invalid("quadrature measure needs one weight per point"));
                }
                if weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(Error::invalid("quadrature weights must be positive"));
                }
                for p in points {
                    self.check(p)?;
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn check(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim() {
            return Err(Error::Domain(format!("parameter has {} components, the domain has {}", xi.len(), self.dim())));
        }
        for (nu, ((&x, &a), &b)) in xi.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
            if !(x >= a - slack && x <= b + slack) {
                return Err(Error::Domain(format!("ξ_{nu} = {x} lies outside [{a}, {b}]")));
            }
        }
        Ok(())
    }

    /// `k` points drawn from the measure with a seeded generator.
    pub fn sample(&self, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        match &self.measure {
            Measure::Uniform => Ok((0..k)
                .map(|_| {
                    (0..d)
                        .map(|nu| {
                            let (a, b) = (self.lower[nu], self.upper[nu]);
                            a + (b - a) * rng.random::<f64>()
                        })
                        .collect()
                })
                .collect()),
            Measure::GaussianTruncated { mean, std } => {
                let mut out = Vec::with_capacity(k);
                for _ in 0..k {
                    let mut p = Vec::with_capacity(d);
                    for nu in 0..d {
                        let normal = Normal::new(mean[nu], std[nu]).map_err(|e| Error::invalid(e.to_string()))?;
                        let mut tries = 0;
                        let x = loop {
                            let x = normal.sample(&mut rng);
                            if x >= self.lower[nu] && x <= self.upper[nu] {
                                break x;
                            }
                            tries += 1;
                            if tries > 10_000 {
                                return Err(Error::invalid(format!(
                                    "truncated gaussian in dimension {nu} has negligible mass on the box"
                                )));
                            }
                        };
                        p.push(x);
                    }
                    out.push(p);
                }
                Ok(out)
            }
            Measure::Quadrature { points, weights } => {
                let dist = WeightedIndex::new(weights).map_err(|e| Error::invalid(e.to_string()))?;
                Ok((0..k).map(|_| points[dist.sample(&mut rng)].clone()).collect())
            }
        }
    }
}

/// `A(ξ) = Σ_i α_i(ξ) A_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineOperator {
    pub matrices: Vec<Matrix>,
    pub coefficients: Vec<CoefficientFunction>,
}

/// `b(ξ) = Σ_i β_i(ξ) b_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineVector {
    pub vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<CoefficientFunction>,
}

impl AffineOperator {
    pub fn new(matrices: Vec<Matrix>, coefficients: Vec<CoefficientFunction>) -> Result<Self> {
        if matrices.is_empty() || matrices.len() != coefficients.len() {
            return Err(Error::invalid("an affine operator needs L ≥ 1 terms, one coefficient each"));
        }
        let m = matrices[0].rows();
        if matrices.iter().any(|a| a.rows() != m || a.cols() != m) {
            return Err(Error::invalid("all affine terms must be square of the same size"));
        }
        Ok(Self { matrices, coefficients })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn coefficients_at(&self, xi: &[f64]) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.eval(xi)).collect()
    }

    pub fn assemble_with(&self, alpha: &[f64]) -> Matrix {
        let mut a = Matrix::zeros(self.dim(), self.dim());
        for (m, &c) in self.matrices.iter().zip(alpha) {
            if c != 0.0 {
                a.add_scaled(c, m);
            }
        }
        a
    }
}

impl AffineVector {
    pub fn new(vectors: Vec<Vec<f64>>, coefficients: Vec<CoefficientFunction>) -> Result<Self> {
        if vectors.is_empty() || vectors.len() != coefficients.len() {
            return Err(Error::invalid("an affine vector needs R ≥ 1 terms, one coefficient each"));
        }
        let m = vectors[0].len();
        if vectors.iter().any(|v| v.len() != m) {
            return Err(Error::invalid("all affine vector terms must have the same length"));
        }
        Ok(Self { vectors, coefficients })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn coefficients_at(&self, xi: &[f64]) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.eval(xi)).collect()
    }

    pub fn assemble_with(&self, beta: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.dim()];
        for (v, &c) in self.vectors.iter().zip(beta) {
            linalg::axpy(c, v, &mut b);
        }
        b
    }
}

/// Extreme-eigenvalue information of symmetric affine terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Uniform coercivity/continuity bounds `α_LB ≤ α(ξ)`, `β(ξ) ≤ β_UB` over the
/// domain, optionally with per-term eigenvalue bounds for sharper values at a
/// given ξ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    pub alpha_lb: f64,
    pub beta_ub: f64,
    #[serde(default)]
    pub terms: Option<Vec<TermBounds>>,
}

/// Parametric linear model `A(ξ) u = b(ξ)` with affine operator and rhs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineModel {
    pub operator: AffineOperator,
    pub rhs: AffineVector,
    pub domain: ParameterDomain,
    #[serde(default)]
    pub bounds: Option<StabilityBounds>,
}

impl AffineModel {
    pub fn new(
        operator: AffineOperator,
        rhs: AffineVector,
        domain: ParameterDomain,
        bounds: Option<StabilityBounds>,
    ) -> Result<Self> {
        if operator.dim() != rhs.dim() {
            return Err(Error::invalid(format!(
                "operator of size {} with a right-hand side of length {}",
                operator.dim(),
                rhs.dim()
            )));
        }
        domain.validate()?;
        let d = domain.dim();
        for c in operator.coefficients.iter().chain(&rhs.coefficients) {
            c.validate(d)?;
        }
        if let Some(b) = &bounds {
            if !(b.alpha_lb > 0.0 && b.beta_ub >= b.alpha_lb) {
                return Err(Error::invalid("stability bounds need 0 < α_LB ≤ β_UB"));
            }
            if b.terms.as_ref().is_some_and(|t| t.len() != operator.len()) {
                return Err(Error::invalid("per-term bounds must match the operator terms"));
            }
        }
        Ok(Self { operator, rhs, domain, bounds })
    }

    /// Full dimension M.
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn assemble(&self, xi: &[f64]) -> Result<(Matrix, Vec<f64>)> {
        self.domain.check(xi)?;
        let a = self.operator.assemble_with(&self.operator.coefficients_at(xi));
        let b = self.rhs.assemble_with(&self.rhs.coefficients_at(xi));
        if a.as_slice().iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("assembly at {xi:?} is not finite")));
        }
        Ok((a, b))
    }

    /// Solution u(ξ) of the full model by LU with partial pivoting.
    pub fn full_solve(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.assemble(xi)?;
        let ill =
            |context: String| Error::Breakdown { context, pivot: None, condition: Some(linalg::condition_number(&a)) };
        let lu = match Lu::new(&a) {
            Ok(lu) => lu,
            Err(Error::Breakdown { context, pivot, .. }) => {
                return Err(Error::Breakdown {
                    context: format!("singular assembly at {xi:?}: {context}"),
                    pivot,
                    condition: Some(linalg::condition_number(&a)),
                })
            }
            Err(e) => return Err(e),
        };
        let u = lu.solve(&b);
        let bn = linalg::norm2(&b);
        let res = linalg::norm2(&linalg::sub(&a.matvec(&u), &b));
        if bn > 0.0 && !(res <= 1e-10 * bn) {
            return Err(ill(format!("ill-conditioned assembly at {xi:?}: relative residual {:e}", res / bn)));
        }
        Ok(u)
    }

    /// `(α(ξ), β(ξ))` bounds from the declared stability information:
    /// per-term eigenvalue sums when every coefficient is nonnegative at ξ,
    /// the uniform bounds otherwise.
    pub fn bounds_at(&self, xi: &[f64]) -> Option<(f64, f64)> {
        let b = self.bounds.as_ref()?;
        if let Some(terms) = &b.terms {
            let alpha = self.operator.coefficients_at(xi);
            if alpha.iter().all(|&c| c >= 0.0) {
                let lo: f64 = alpha.iter().zip(terms).map(|(c, t)| c * t.lambda_min).sum();
                let hi: f64 = alpha.iter().zip(terms).map(|(c, t)| c * t.lambda_max).sum();
                if lo > 0.0 {
                    return Some((lo.max(b.alpha_lb), hi.min(b.beta_ub)));
                }
            }
        }
        Some((b.alpha_lb, b.beta_ub))
    }

    /// `(σ_min, σ_max)` of the assembled operator: the Euclidean inf-sup and
    /// continuity constants at ξ. Dense; desk scale only.
    pub fn stability_at(&self, xi: &[f64]) -> Result<(f64, f64)> {
        let (a, _) = self.assemble(xi)?;
        let s = svd(&a).singular_values;
        Ok((*s.last().unwrap(), s[0]))
    }

    /// Reads a model description: JSON whose matrices and vectors are LRTF
    /// files named relative to the JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file: ModelFile = serde_json::from_slice(&fs::read(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut matrices = Vec::new();
        let mut a_coef = Vec::new();
        for t in file.operator {
            matrices.push(lrtf::read_matrix(dir.join(&t.matrix))?);
            a_coef.push(t.coefficient);
        }
        let mut vectors = Vec::new();
        let mut b_coef = Vec::new();
        for t in file.rhs {
            let v = lrtf::read_tensor(dir.join(&t.vector))?;
            if v.order() != 1 {
                return Err(Error::Format(format!("{} is not an order-1 tensor", t.vector.display())));
            }
            vectors.push(v.into_data());
            b_coef.push(t.coefficient);
        }
        Self::new(AffineOperator::new(matrices, a_coef)?, AffineVector::new(vectors, b_coef)?, file.domain, file.bounds)
    }

    /// Writes `<stem>.json` plus one LRTF file per term into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut operator = Vec::new();
        for (i, (m, c)) in self.operator.matrices.iter().zip(&self.operator.coefficients).enumerate() {
            let name = PathBuf::from(format!("{stem}_A{i}.lrtf"));
            fs::write(dir.join(&name), lrtf::encode_matrix(m))?;
            operator.push(OperatorTerm { matrix: name, coefficient: c.clone() });
        }
        let mut rhs = Vec::new();
        for (i, (v, c)) in self.rhs.vectors.iter().zip(&self.rhs.coefficients).enumerate() {
            let name = PathBuf::from(format!("{stem}_b{i}.lrtf"));
            fs::write(dir.join(&name), lrtf::encode(&DenseTensor::new(vec![v.len()], v.clone())?))?;
            rhs.push(VectorTerm { vector: name, coefficient: c.clone() });
        }
        let file = ModelFile { operator, rhs, domain: self.domain.clone(), bounds: self.bounds.clone() };
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, serde_json::to_vec_pretty(&file)?)?;
        Ok(path)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    operator: Vec<OperatorTerm>,
    rhs: Vec<VectorTerm>,
    domain: ParameterDomain,
    #[serde(default)]
    bounds: Option<StabilityBounds>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorTerm {
    matrix: PathBuf,
    coefficient: CoefficientFunction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorTerm {
    vector: PathBuf,
    coefficient: CoefficientFunction,
}
