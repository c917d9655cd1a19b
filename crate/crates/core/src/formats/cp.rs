use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lrtf::{Reader, Writer};
use crate::tensor::DenseTensor;

use super::{check_dense_cap, check_index, dense_cap};

const MAGIC: &[u8; 4] = b"LRCP";

/// Canonical format `Σ_i a_i v_i¹ ⊗ … ⊗ v_iᵈ`.
///
/// Factor ν is an n_ν×r matrix whose column i holds v_iᵛ. Constructors that
/// normalize keep unit-norm columns and fold magnitudes into the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CpTensor {
    weights: Vec<f64>,
    factors: Vec<Matrix>,
}

impl CpTensor {
    pub fn new(weights: Vec<f64>, factors: Vec<Matrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a CP tensor needs at least one mode"));
        }
        let r = weights.len();
        for (nu, f) in factors.iter().enumerate() {
            if f.cols() != r {
                return Err(Error::invalid(format!("factor {nu} has {} columns for rank {r}", f.cols())));
            }
            if f.rows() == 0 {
                return Err(Error::invalid(format!("factor {nu} has no rows")));
            }
            if f.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("factor {nu} has non-finite entries")));
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(Self { weights, factors })
    }

    /// Builds a normalized CP tensor from elementary terms `(a_i, [v_i¹, …, v_iᵈ])`.
    pub fn from_terms(terms: &[(f64, Vec<Vec<f64>>)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::invalid("at least one term is required"))?;
        let shape: Vec<usize> = first.1.iter().map(Vec::len).collect();
        let mut factors: Vec<Matrix> = shape.iter().map(|&n| Matrix::zeros(n, terms.len())).collect();
        let mut weights = Vec::with_capacity(terms.len());
        for (i, (a, vecs)) in terms.iter().enumerate() {
            if vecs.len() != shape.len() || vecs.iter().zip(&shape).any(|(v, &n)| v.len() != n) {
                return Err(Error::invalid(format!("term {i} does not match the shape {shape:?}")));
            }
            let mut w = *a;
            for (nu, v) in vecs.iter().enumerate() {
                let n = linalg::norm2(v);
                if n == 0.0 {
                    w = 0.0;
                    let mut e = vec![0.0; v.len()];
                    e[0] = 1.0;
                    factors[nu].set_col(i, &e);
                } else {
                    w *= n;
                    let unit: Vec<f64> = v.iter().map(|x| x / n).collect();
                    factors[nu].set_col(i, &unit);
                }
            }
            weights.push(w);
        }
        Self::new(weights, factors)
    }

    /// Re-normalizes factor columns, folding their norms into the weights.
    pub fn normalized(mut self) -> Self {
        for f in self.factors.iter_mut() {
            for i in 0..self.weights.len() {
                let col = f.col(i);
                let n = linalg::norm2(&col);
                if n == 0.0 {
                    self.weights[i] = 0.0;
                    let mut e = vec![0.0; col.len()];
                    e[0] = 1.0;
                    f.set_col(i, &e);
                } else {
                    self.weights[i] *= n;
                    f.set_col(i, &col.iter().map(|x| x / n).collect::<Vec<_>>());
                }
            }
        }
        self
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::rows).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    /// Elementary term i as `(a_i, [v_i¹, …, v_iᵈ])`.
    pub fn term(&self, i: usize) -> (f64, Vec<Vec<f64>>) {
        (self.weights[i], self.factors.iter().map(|f| f.col(i)).collect())
    }

    pub fn eval(&self, idx: &[usize]) -> Result<f64> {
        check_index(&self.shape(), idx)?;
        Ok((0..self.rank())
            .map(|i| self.weights[i] * self.factors.iter().zip(idx).map(|(f, &k)| f[(k, i)]).product::<f64>())
            .sum())
    }

    /// `r + r·Σ n_ν` stored scalars.
    pub fn storage_count(&self) -> usize {
        self.rank() + self.rank() * self.shape().iter().sum::<usize>()
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_with_cap(dense_cap())
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        let shape = self.shape();
        check_dense_cap(&shape, cap)?;
        let mut out = DenseTensor::zeros(shape.clone())?.into_data();
        for i in 0..self.rank() {
            // outer product built mode by mode
            let mut acc = vec![self.weights[i]];
            for f in &self.factors {
                let col = f.col(i);
                let mut next = Vec::with_capacity(acc.len() * col.len());
                for a in &acc {
                    next.extend(col.iter().map(|c| a * c));
                }
                acc = next;
            }
            linalg::axpy(1.0, &acc, &mut out);
        }
        DenseTensor::new(shape, out)
    }

    /// Euclidean inner product of two CP tensors of the same shape.
    pub fn dot(&self, other: &CpTensor) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::invalid("shape mismatch in CP inner product"));
        }
        let mut total = 0.0;
        for i in 0..self.rank() {
            for j in 0..other.rank() {
                let mut p = self.weights[i] * other.weights[j];
                for (fa, fb) in self.factors.iter().zip(&other.factors) {
                    p *= (0..fa.rows()).map(|k| fa[(k, i)] * fb[(k, j)]).sum::<f64>();
                }
                total += p;
            }
        }
        Ok(total)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(MAGIC).u32(crate::lrtf::VERSION).u32(self.order() as u32);
        for n in self.shape() {
            w.u64(n as u64);
        }
        w.u64(self.rank() as u64).f64s(&self.weights);
        for f in &self.factors {
            w.tensor(&DenseTensor::from_matrix(f).expect("finite factor"));
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let d = r.u32()? as usize;
        let shape = (0..d).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let rank = r.usize()?;
        let weights = r.f64s(rank)?;
        let factors = (0..d).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let t = Self::new(weights, factors).map_err(|e| Error::Format(e.to_string()))?;
        if t.shape() != shape {
            return Err(Error::Format("header shape disagrees with the factors".into()));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_all_ones_evaluates_to_weight() {
        let t = CpTensor::new(vec![2.5], vec![Matrix::from_fn(3, 1, |_, _| 1.0), Matrix::from_fn(4, 1, |_, _| 1.0)])
            .unwrap();
        assert_eq!(t.eval(&[2, 3]).unwrap(), 2.5);
        assert_eq!(t.eval(&[0, 0]).unwrap(), 2.5);
        assert!(t.eval(&[3, 0]).is_err());
        assert!(t.eval(&[0]).is_err());
    }

    #[test]
    fn storage_count_formula() {
        let f = || Matrix::zeros(4, 2);
        let t = CpTensor::new(vec![1.0, 1.0], vec![f(), f(), f()]).unwrap();
        assert_eq!(t.storage_count(), 26);
    }

    #[test]
    fn from_terms_normalizes_columns() {
        let t = CpTensor::from_terms(&[(2.0, vec![vec![3.0, 4.0], vec![0.0, 2.0]])]).unwrap();
        assert!((t.weights()[0] - 20.0).abs() < 1e-14);
        assert!((linalg::norm2(&t.factors()[0].col(0)) - 1.0).abs() < 1e-15);
        assert!((t.eval(&[1, 1]).unwrap() - 2.0 * 4.0 * 2.0).abs() < 1e-13);
    }

    #[test]
    fn dense_cap_enforced() {
        let t = CpTensor::new(vec![1.0], vec![Matrix::zeros(10, 1), Matrix::zeros(10, 1)]).unwrap();
        assert!(matches!(t.to_dense_with_cap(99), Err(Error::Capacity { requested: 100, cap: 99 })));
        assert!(t.to_dense_with_cap(100).is_ok());
    }

    #[test]
    fn bytes_round_trip() {
        let t = CpTensor::from_terms(&[
            (1.0, vec![vec![1.0, 2.0], vec![0.5, 0.5, 1.0]]),
            (-3.0, vec![vec![0.0, 1.0], vec![1.0, 0.0, 0.0]]),
        ])
        .unwrap();
        let back = CpTensor::from_bytes(&t.to_bytes()).unwrap();
        assert_eq!(back, t);
    }
}
