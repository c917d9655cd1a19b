use serde::{Deserialize, Serialize};

use super::{AffineModel, CoefficientFunction, ParameterDomain};
use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky, Matrix, NUMERICAL_ZERO};
use crate::order2::Subspace;
use crate::probe;

/// Minimal-residual Galerkin reduced model.
///
/// Every quantity involving the full dimension M is contracted offline; an
/// online solve at ξ only touches objects whose sizes depend on L, R and m.
///
/// The residual `A(ξ)Vs − b(ξ) = Z c(ξ, s)` is a combination of the columns
/// of `Z = [A_1V … A_LV b_1 … b_R]`. Offline, `LᵀZ = QT` is factored (with
/// `W = LLᵀ`), so online `‖A(ξ)Vs − b(ξ)‖_W = ‖T c‖` is evaluated without the
/// cancellation of the expanded quadratic form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedModel {
    basis: Subspace,
    domain: ParameterDomain,
    a_coefficients: Vec<CoefficientFunction>,
    b_coefficients: Vec<CoefficientFunction>,
    /// Triangular factor T, min(M, Lm+R) × (Lm+R).
    factor: Matrix,
    /// `G[i][j] = (A_i V)ᵀ W (A_j V)`.
    gram: Vec<Vec<Matrix>>,
    /// `h[i][j] = (A_i V)ᵀ W b_j`.
    cross: Vec<Vec<Vec<f64>>>,
    /// `c[i][j] = b_iᵀ W b_j`.
    rhs_gram: Vec<Vec<f64>>,
    bounds: Option<super::StabilityBounds>,
}

/// Online solution at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSolution {
    pub coefficients: Vec<f64>,
    /// Residual norm `‖A(ξ) V s − b(ξ)‖_W`.
    pub residual: f64,
    /// `sᵀ(Σα_iα_jG_ij)s − 2sᵀ(Σα_iβ_jh_ij) + Σβ_iβ_jc_ij` before clamping at
    /// zero. Cancellation makes it unreliable once Δ² nears ε‖b‖².
    pub residual_sq_raw: f64,
}

impl ReducedModel {
    /// Offline stage. `w` is an optional SPD residual weight (identity when
    /// absent).
    pub fn build(model: &AffineModel, basis: &Subspace, w: Option<&Matrix>) -> Result<Self> {
        let m_full = model.dim();
        if basis.ambient() != m_full {
            return Err(Error::invalid(format!(
                "basis lives in ℝ^{} but the model has dimension {m_full}",
                basis.ambient()
            )));
        }
        let lt = match w {
            Some(w) => {
                if w.rows() != m_full || !w.is_square() {
                    return Err(Error::invalid("residual weight has the wrong size"));
                }
                Some(Cholesky::new(w)?.factor().transpose())
            }
            None => None,
        };
        let to_w = |x: Matrix| match &lt {
            Some(lt) => lt.matmul(&x),
            None => x,
        };
        let v = basis.basis();
        let m = v.cols();
        // columns of Lᵀ A_i V and Lᵀ b_j
        let av: Vec<Matrix> = model.operator.matrices.iter().map(|a| to_w(a.matmul(v))).collect();
        let bv: Vec<Vec<f64>> = model
            .rhs
            .vectors
            .iter()
            .map(|b| match &lt {
                Some(lt) => lt.matvec(b),
                None => b.clone(),
            })
            .collect();
        let n_cols = av.len() * m + bv.len();
        let z = Matrix::from_fn(m_full, n_cols, |r, c| {
            let (block, off) = (c / m.max(1), c % m.max(1));
            if m > 0 && block < av.len() {
                av[block][(r, off)]
            } else {
                bv[c - av.len() * m][r]
            }
        });
        let factor = linalg::qr(&z).r;

        let gram = av.iter().map(|ai| av.iter().map(|aj| ai.t_matmul(aj)).collect()).collect();
        let cross = av.iter().map(|ai| bv.iter().map(|bj| ai.t_matvec(bj)).collect()).collect();
        let rhs_gram = bv.iter().map(|bi| bv.iter().map(|bj| linalg::dot(bi, bj)).collect()).collect();
        Ok(Self {
            basis: basis.clone(),
            domain: model.domain.clone(),
            a_coefficients: model.operator.coefficients.clone(),
            b_coefficients: model.rhs.coefficients.clone(),
            factor,
            gram,
            cross,
            rhs_gram,
            bounds: model.bounds.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Subspace {
        &self.basis
    }

    pub fn gram(&self, i: usize, j: usize) -> &Matrix {
        &self.gram[i][j]
    }

    pub fn bounds(&self) -> Option<&super::StabilityBounds> {
        self.bounds.as_ref()
    }

    fn coefficients(&self, xi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.domain.check(xi)?;
        let a: Vec<f64> = self.a_coefficients.iter().map(|c| c.eval(xi)).collect();
        let b: Vec<f64> = self.b_coefficients.iter().map(|c| c.eval(xi)).collect();
        probe::touch(a.len().max(b.len()));
        Ok((a, b))
    }

    /// `K = Σ α_i T_i` and `f = Σ β_j t_j`, so the residual is `‖K s − f‖`.
    fn compressed_system(&self, alpha: &[f64], beta: &[f64]) -> (Matrix, Vec<f64>) {
        let m = self.dim();
        let rows = self.factor.rows();
        probe::touch(rows.max(m));
        let l = alpha.len();
        let k = Matrix::from_fn(rows, m, |r, j| (0..l).map(|i| alpha[i] * self.factor[(r, i * m + j)]).sum());
        let f =
            (0..rows).map(|r| beta.iter().enumerate().map(|(j, b)| b * self.factor[(r, l * m + j)]).sum()).collect();
        (k, f)
    }

    fn gram_residual_sq(&self, s: &[f64], alpha: &[f64], beta: &[f64]) -> f64 {
        let m = self.dim();
        let mut g = Matrix::zeros(m, m);
        let mut h = vec![0.0; m];
        for (i, &ai) in alpha.iter().enumerate() {
            for (j, &aj) in alpha.iter().enumerate() {
                g.add_scaled(ai * aj, &self.gram[i][j]);
            }
            for (j, &bj) in beta.iter().enumerate() {
                linalg::axpy(ai * bj, &self.cross[i][j], &mut h);
            }
        }
        let mut c = 0.0;
        for (i, &bi) in beta.iter().enumerate() {
            for (j, &bj) in beta.iter().enumerate() {
                c += bi * bj * self.rhs_gram[i][j];
            }
        }
        linalg::dot(s, &g.matvec(s)) - 2.0 * linalg::dot(s, &h) + c
    }

    /// Online stage: minimizes `‖A(ξ) V s − b(ξ)‖_W` over s ∈ ℝᵐ.
    pub fn solve(&self, xi: &[f64]) -> Result<ReducedSolution> {
        let (alpha, beta) = self.coefficients(xi)?;
        let (k, f) = self.compressed_system(&alpha, &beta);
        let m = self.dim();
        let s = if m == 0 {
            Vec::new()
        } else {
            let qr = linalg::qr(&k);
            let diag: Vec<f64> = (0..m).map(|i| qr.r[(i, i)].abs()).collect();
            let top = diag.iter().cloned().fold(0.0, f64::max);
            if let Some(p) = diag.iter().position(|&d| !(d > NUMERICAL_ZERO * top)) {
                return Err(Error::Breakdown {
                    context: format!("reduced operator at {xi:?} is rank deficient"),
                    pivot: Some(p),
                    condition: Some(if diag[p] == 0.0 { f64::INFINITY } else { top / diag[p] }),
                });
            }
            let qtf = qr.q.t_matvec(&f);
            let mut s = vec![0.0; m];
            for i in (0..m).rev() {
                let acc: f64 = (i + 1..m).map(|j| qr.r[(i, j)] * s[j]).sum();
                s[i] = (qtf[i] - acc) / qr.r[(i, i)];
            }
            s
        };
        let residual = linalg::norm2(&linalg::sub(&k.matvec(&s), &f));
        let raw = self.gram_residual_sq(&s, &alpha, &beta);
        Ok(ReducedSolution { coefficients: s, residual, residual_sq_raw: raw })
    }

    /// Residual norm Δ of an arbitrary reduced coefficient vector, from the
    /// offline quantities only.
    pub fn residual_indicator(&self, s: &[f64], xi: &[f64]) -> Result<f64> {
        if s.len() != self.dim() {
            return Err(Error::invalid("coefficient vector length differs from the basis size"));
        }
        let (alpha, beta) = self.coefficients(xi)?;
        let (k, f) = self.compressed_system(&alpha, &beta);
        Ok(linalg::norm2(&linalg::sub(&k.matvec(s), &f)))
    }

    /// `V s` in the full space.
    pub fn lift(&self, s: &[f64]) -> Vec<f64> {
        self.basis.lift(s)
    }
}
