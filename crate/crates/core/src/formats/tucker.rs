use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};
use crate::lrtf::{Reader, Writer};
use crate::tensor::DenseTensor;

use super::{check_dense_cap, check_index, dense_cap};

const MAGIC: &[u8; 4] = b"LRTK";
const ORTHO_TOL: f64 = 1e-10;

/// Tucker format: a core of size r₁×…×r_d and per-mode factors U_ν (n_ν×r_ν)
/// with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerTensor {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

impl TuckerTensor {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::invalid(format!("{} factors for an order-{} core", factors.len(), core.order())));
        }
        for (nu, (f, &r)) in factors.iter().zip(core.shape()).enumerate() {
            if f.cols() != r {
                return Err(Error::invalid(format!(
                    "factor {nu} has {} columns but the core mode has size {r}",
                    f.cols()
                )));
            }
            if f.rows() < r {
                return Err(Error::invalid(format!(
                    "factor {nu} is {}x{r}; Tucker ranks cannot exceed mode sizes",
                    f.rows()
                )));
            }
            let defect = f.orthonormality_defect();
            if !(defect <= ORTHO_TOL) {
                return Err(Error::invalid(format!("factor {nu} columns are not orthonormal (defect {defect:.3e})")));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::rows).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.shape().to_vec()
    }

    /// `∏ r_ν + Σ n_ν r_ν` stored scalars.
    pub fn storage_count(&self) -> usize {
        self.core.len() + self.factors.iter().map(|f| f.rows() * f.cols()).sum::<usize>()
    }

    pub fn eval(&self, idx: &[usize]) -> Result<f64> {
        check_index(&self.shape(), idx)?;
        // contract one mode at a time with the selected factor row
        let mut t = self.core.clone();
        for (f, &k) in self.factors.iter().zip(idx) {
            let row = Matrix::from_vec(1, f.cols(), f.row(k).to_vec())?;
            t = t.mode_product(0, &row)?;
            if t.order() > 1 {
                let shape = t.shape()[1..].to_vec();
                t = t.reshape(shape)?;
            }
        }
        Ok(t.data()[0])
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_with_cap(dense_cap())
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        check_dense_cap(&self.shape(), cap)?;
        let mut t = self.core.clone();
        for (nu, f) in self.factors.iter().enumerate() {
            t = t.mode_product(nu, f)?;
        }
        Ok(t)
    }

    pub fn norm(&self) -> f64 {
        self.core.norm()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(MAGIC).u32(crate::lrtf::VERSION).u32(self.order() as u32);
        for n in self.shape() {
            w.u64(n as u64);
        }
        for r in self.ranks() {
            w.u64(r as u64);
        }
        w.tensor(&self.core);
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
        let ranks = (0..d).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let core = r.tensor()?;
        let factors = (0..d).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let t = Self::new(core, factors).map_err(|e| Error::Format(e.to_string()))?;
        if t.shape() != shape || t.ranks() != ranks {
            return Err(Error::Format("header sizes disagree with the payload".into()));
        }
        Ok(t)
    }
}

/// Higher-order SVD truncated to the given multilinear ranks.
///
/// U_ν holds the leading r_ν left singular vectors of the mode-ν unfolding and
/// the core is the projection of `t` onto them. The squared error is bounded
/// by the sum over modes of the discarded squared singular values.
pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerTensor> {
    let d = t.order();
    if ranks.len() != d {
        return Err(Error::invalid(format!("{} ranks for an order-{d} tensor", ranks.len())));
    }
    let mut factors = Vec::with_capacity(d);
    for (nu, &r) in ranks.iter().enumerate() {
        let n = t.shape()[nu];
        if r == 0 || r > n {
            return Err(Error::invalid(format!("rank {r} invalid for mode {nu} of size {n}")));
        }
        let unfolding = if d == 1 { Matrix::from_vec(n, 1, t.data().to_vec())? } else { t.matricize(&[nu])?.matrix };
        factors.push(svd(&unfolding).u.leading_cols(r));
    }
    let mut core = t.clone();
    for (nu, f) in factors.iter().enumerate() {
        core = core.mode_product(nu, &f.transpose())?;
    }
    TuckerTensor::new(core, factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseTensor {
        DenseTensor::from_fn(vec![3, 4, 2], |i| {
            (1.0 + i[0] as f64).sin() + (i[1] as f64 * 0.7).cos() * (1.0 + i[2] as f64)
        })
        .unwrap()
    }

    #[test]
    fn full_rank_hosvd_is_exact() {
        let t = sample();
        let tk = hosvd(&t, &[3, 4, 2]).unwrap();
        let back = tk.to_dense().unwrap();
        assert!(back.sub(&t).unwrap().norm() < 1e-12 * t.norm());
        assert!((tk.norm() - t.norm()).abs() < 1e-12 * t.norm());
        let v = tk.eval(&[2, 1, 1]).unwrap();
        assert!((v - t.get(&[2, 1, 1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn storage_count_formula() {
        let tk = hosvd(&sample(), &[2, 2, 1]).unwrap();
        assert_eq!(tk.storage_count(), 4 + 6 + 8 + 2);
    }

    #[test]
    fn rejects_non_orthonormal_factor() {
        let core = DenseTensor::new(vec![1], vec![1.0]).unwrap();
        let f = Matrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(TuckerTensor::new(core, vec![f]).is_err());
    }

    #[test]
    fn bytes_round_trip() {
        let tk = hosvd(&sample(), &[2, 3, 2]).unwrap();
        assert_eq!(TuckerTensor::from_bytes(&tk.to_bytes()).unwrap(), tk);
    }
}
