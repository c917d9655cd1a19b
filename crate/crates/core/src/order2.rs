//! Order-two reduction: POD of weighted snapshots, orthogonal projection and
//! the mean-square width surrogate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, svd, Cholesky, Matrix};

/// Snapshots u(ξ¹) … u(ξᴷ) as the columns of an M×K matrix, with positive
/// quadrature weights and the parameter points they were computed at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSet {
    vectors: Matrix,
    weights: Vec<f64>,
    params: Vec<Vec<f64>>,
}

impl SnapshotSet {
    pub fn new(vectors: Matrix, weights: Vec<f64>, params: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.cols();
        if k == 0 {
            return Err(Error::invalid("a snapshot set needs at least one column"));
        }
        if weights.len() != k || params.len() != k {
            return Err(Error::invalid(format!(
                "{k} snapshots but {} weights and {} parameter points",
                weights.len(),
                params.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("snapshot weights must be positive and finite, got {w}")));
        }
        if vectors.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("snapshots contain non-finite entries"));
        }
        Ok(Self { vectors, weights, params })
    }

    /// Uniform weights 1/K: the empirical correlation operator.
    pub fn uniform(vectors: Matrix, params: Vec<Vec<f64>>) -> Result<Self> {
        let k = vectors.cols();
        Self::new(vectors, vec![1.0 / k.max(1) as f64; k], params)
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k)
    }

    /// Snapshot matrix with column k scaled by √ω_k.
    pub fn scaled_matrix(&self) -> Matrix {
        let mut m = self.vectors.clone();
        m.scale_cols(&self.weights.iter().map(|w| w.sqrt()).collect::<Vec<_>>());
        m
    }
}

/// An m-dimensional subspace given by a basis orthonormal in the Euclidean
/// inner product, or in `(x, y)_W = xᵀ W y` when a weight matrix is attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    basis: Matrix,
    inner: Option<Matrix>,
}

const ORTHO_TOL: f64 = 1e-10;

impl Subspace {
    pub fn new(basis: Matrix) -> Result<Self> {
        let defect = basis.orthonormality_defect();
        if !(defect <= ORTHO_TOL) {
            return Err(Error::invalid(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { basis, inner: None })
    }

    /// Basis orthonormal with respect to the SPD matrix `w`.
    pub fn with_inner(basis: Matrix, w: Matrix) -> Result<Self> {
        if w.rows() != basis.rows() || !w.is_square() {
            return Err(Error::invalid("inner-product matrix does not match the basis"));
        }
        let gram = basis.t_matmul(&w.matmul(&basis));
        let defect = Matrix::identity(basis.cols()).scaled(-1.0);
        let mut diff = gram;
        diff.add_scaled(1.0, &defect);
        if !(diff.max_abs() <= ORTHO_TOL) {
            return Err(Error::invalid("basis is not W-orthonormal"));
        }
        Ok(Self { basis, inner: Some(w) })
    }

    /// The zero subspace of ℝᴹ.
    pub fn empty(ambient: usize) -> Self {
        Self { basis: Matrix::zeros(ambient, 0), inner: None }
    }

    /// Orthonormalizes `vectors` (Gram–Schmidt twice), dropping any vector
    /// whose remainder falls below `1e-12` of its norm.
    pub fn from_vectors(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::invalid("vector length differs from the ambient dimension"));
            }
            if let Some((q, _)) = linalg::orthonormalize_against(&cols, v, 1e-12) {
                cols.push(q);
            }
        }
        if cols.is_empty() {
            return Ok(Self::empty(ambient));
        }
        Self::new(Matrix::from_cols(&cols)?)
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn inner(&self) -> Option<&Matrix> {
        self.inner.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    /// Leading `m` basis vectors.
    pub fn truncated(&self, m: usize) -> Subspace {
        Subspace { basis: self.basis.leading_cols(m.min(self.dim())), inner: self.inner.clone() }
    }

    /// Coordinates `Vᵀ W x` of the orthogonal projection.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ambient() {
            return Err(Error::invalid(format!(
                "vector of length {} projected onto a subspace of ℝ^{}",
                x.len(),
                self.ambient()
            )));
        }
        Ok(match &self.inner {
            Some(w) => self.basis.t_matvec(&w.matvec(x)),
            None => self.basis.t_matvec(x),
        })
    }

    pub fn lift(&self, coefficients: &[f64]) -> Vec<f64> {
        self.basis.matvec(coefficients)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.dim() == 0 {
            if x.len() != self.ambient() {
                return Err(Error::invalid("dimension mismatch"));
            }
            return Ok(vec![0.0; x.len()]);
        }
        Ok(self.lift(&self.coefficients(x)?))
    }

    /// Norm induced by the subspace inner product.
    pub fn norm(&self, x: &[f64]) -> f64 {
        match &self.inner {
            Some(w) => linalg::dot(x, &w.matvec(x)).max(0.0).sqrt(),
            None => linalg::norm2(x),
        }
    }

    pub fn projection_error(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(self.norm(&linalg::sub(x, &p)))
    }
}

/// Which norm over the parameter set an error value aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// Weighted mean-square over the samples.
    #[serde(rename = "2")]
    L2,
    /// Maximum over the samples.
    #[serde(rename = "inf")]
    Linf,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L2 => "2",
            NormKind::Linf => "inf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "2" => Some(NormKind::L2),
            "inf" => Some(NormKind::Linf),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub m: usize,
    pub error: f64,
    pub p: NormKind,
    pub seconds: f64,
}

/// Per-dimension error records, dimensions strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub records: Vec<ErrorRecord>,
}

impl ErrorReport {
    pub fn push(&mut self, m: usize, error: f64, p: NormKind, seconds: f64) {
        debug_assert!(self.records.last().is_none_or(|r| r.m < m));
        debug_assert!(error >= 0.0);
        self.records.push(ErrorRecord { m, error, p, seconds });
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    pub fn get(&self, m: usize) -> Option<&ErrorRecord> {
        self.records.iter().find(|r| r.m == m)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV with header `m,error,p,seconds`. When `timings` is false the
    /// seconds column is written as 0 so reruns produce identical bytes.
    pub fn write_csv<W: Write>(&self, out: W, timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "error", "p", "seconds"])?;
        for r in &self.records {
            let secs = if timings { r.seconds } else { 0.0 };
            w.write_record([r.m.to_string(), format!("{:e}", r.error), r.p.as_str().to_string(), format!("{secs:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["m", "error", "p", "seconds"] {
            return Err(Error::Format(format!("unexpected error-report header {headers:?}")));
        }
        let mut report = ErrorReport::default();
        for row in rdr.records() {
            let row = row?;
            let parse = |i: usize| -> Result<f64> {
                row[i].trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number {:?}: {e}", &row[i])))
            };
            let m =
                row[0].trim().parse::<usize>().map_err(|e| Error::Format(format!("bad rank {:?}: {e}", &row[0])))?;
            let p =
                NormKind::parse(row[2].trim()).ok_or_else(|| Error::Format(format!("bad norm kind {:?}", &row[2])))?;
            if report.records.last().is_some_and(|r| r.m >= m) {
                return Err(Error::Format("ranks must be strictly increasing".into()));
            }
            report.records.push(ErrorRecord { m, error: parse(1)?, p, seconds: parse(3)? });
        }
        Ok(report)
    }
}

fn check_m(s: &SnapshotSet, m: usize) -> Result<()> {
    let limit = s.dim().min(s.len());
    if m > limit {
        return Err(Error::invalid(format!("m = {m} exceeds min(M, K) = {limit}")));
    }
    Ok(())
}

/// Tail norms `sqrt(Σ_{i>m} σ_i²)` for m = 0 … m_max.
fn tails(sv: &[f64], m_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; m_max + 1];
    let mut acc = 0.0;
    for i in (0..sv.len()).rev() {
        acc += sv[i] * sv[i];
        if i <= m_max {
            out[i] = acc.sqrt();
        }
    }
    out
}

/// POD basis of dimension m: the dominant eigenspace of the weighted
/// correlation operator, computed from the SVD of the √ω-scaled snapshots.
///
/// The report holds the mean-square error for every dimension 1 … m.
pub fn pod(s: &SnapshotSet, m: usize) -> Result<(Subspace, ErrorReport)> {
    check_m(s, m)?;
    let start = web_time::Instant::now();
    let f = svd(&s.scaled_matrix());
    let basis = Subspace::new(f.u.leading_cols(m))?;
    let t = tails(&f.singular_values, m);
    let secs = start.elapsed().as_secs_f64();
    let mut report = ErrorReport::default();
    for (k, e) in t.iter().enumerate().skip(1) {
        report.push(k, *e, NormKind::L2, secs);
    }
    Ok((basis, report))
}

/// POD in the inner product `(x, y)_W = xᵀ W y`, W symmetric positive
/// definite. With `W = L Lᵀ` the SVD of `Lᵀ X √ω` gives `U`, and the returned
/// basis `L⁻ᵀ U` is W-orthonormal.
pub fn pod_weighted(s: &SnapshotSet, m: usize, w: &Matrix) -> Result<(Subspace, ErrorReport)> {
    check_m(s, m)?;
    if w.rows() != s.dim() {
        return Err(Error::invalid("inner-product matrix size differs from the snapshot length"));
    }
    let start = web_time::Instant::now();
    let chol = Cholesky::new(w)?;
    let lt = chol.factor().transpose();
    let f = svd(&lt.matmul(&s.scaled_matrix()));
    let cols: Vec<Vec<f64>> = (0..m).map(|i| chol.solve_upper(&f.u.col(i))).collect();
    let basis = if m == 0 { Matrix::zeros(s.dim(), 0) } else { Matrix::from_cols(&cols)? };
    let sub = Subspace::with_inner(basis, w.clone())?;
    let t = tails(&f.singular_values, m);
    let secs = start.elapsed().as_secs_f64();
    let mut report = ErrorReport::default();
    for (k, e) in t.iter().enumerate().skip(1) {
        report.push(k, *e, NormKind::L2, secs);
    }
    Ok((sub, report))
}

/// Mean-square width surrogate `d_m⁽²⁾ = sqrt(Σ_{i>m} σ_i²)` of the weighted
/// snapshots for m = 0 … m_max.
pub fn width_l2(s: &SnapshotSet, m_max: usize) -> Result<ErrorReport> {
    check_m(s, m_max)?;
    let start = web_time::Instant::now();
    let f = svd(&s.scaled_matrix());
    let secs = start.elapsed().as_secs_f64();
    let mut report = ErrorReport::default();
    for (k, e) in tails(&f.singular_values, m_max).into_iter().enumerate() {
        report.push(k, e, NormKind::L2, secs);
    }
    Ok(report)
}

/// Projection errors ‖u(ξᵏ) − P u(ξᵏ)‖ for every snapshot.
pub fn projection_errors(s: &SnapshotSet, v: &Subspace) -> Result<Vec<f64>> {
    (0..s.len()).map(|k| v.projection_error(&s.column(k))).collect()
}

/// `sqrt(Σ_k ω_k ‖u(ξᵏ) − P u(ξᵏ)‖²)`.
pub fn mean_square_error(s: &SnapshotSet, v: &Subspace) -> Result<f64> {
    let e = projection_errors(s, v)?;
    Ok(e.iter().zip(s.weights()).map(|(e, w)| w * e * e).sum::<f64>().sqrt())
}
