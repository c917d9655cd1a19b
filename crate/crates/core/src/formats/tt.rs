use crate::error::{Error, Result};
use crate::linalg::{qr, svd, Matrix};
use crate::lrtf::{Reader, Writer};
use crate::tensor::DenseTensor;

use super::{check_dense_cap, check_index, dense_cap};

const MAGIC: &[u8; 4] = b"LRTT";

/// Tensor train: cores G_ν of shape (r_{ν-1}, n_ν, r_ν) with r₀ = r_d = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TtTensor {
    cores: Vec<DenseTensor>,
}

fn left_unfolding(core: &DenseTensor) -> Matrix {
    let s = core.shape();
    Matrix::from_vec(s[0] * s[1], s[2], core.data().to_vec()).expect("core layout")
}

fn right_unfolding(core: &DenseTensor) -> Matrix {
    let s = core.shape();
    Matrix::from_vec(s[0], s[1] * s[2], core.data().to_vec()).expect("core layout")
}

fn core_from(m: Matrix, shape: [usize; 3]) -> DenseTensor {
    DenseTensor::new(shape.to_vec(), m.into_vec()).expect("core layout")
}

impl TtTensor {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::invalid("a tensor train needs at least one core"));
        }
        let mut prev = 1;
        for (nu, c) in cores.iter().enumerate() {
            if c.order() != 3 {
                return Err(Error::invalid(format!("core {nu} has order {}, expected 3", c.order())));
            }
            if c.shape()[0] != prev {
                return Err(Error::invalid(format!(
                    "core {nu} has left rank {} but the previous right rank is {prev}",
                    c.shape()[0]
                )));
            }
            prev = c.shape()[2];
        }
        if prev != 1 {
            return Err(Error::invalid(format!("last core has right rank {prev}, expected 1")));
        }
        Ok(Self { cores })
    }

    /// Elementary tensor `v¹ ⊗ … ⊗ vᵈ` with all TT ranks 1.
    pub fn rank_one(vectors: &[Vec<f64>]) -> Result<Self> {
        let cores =
            vectors.iter().map(|v| DenseTensor::new(vec![1, v.len(), 1], v.clone())).collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::rank_one(&shape.iter().map(|&n| vec![0.0; n]).collect::<Vec<_>>())
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Interior ranks r₁ … r_{d-1}.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.order() - 1].iter().map(|c| c.shape()[2]).collect()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// `Σ r_{ν-1} n_ν r_ν` stored scalars.
    pub fn storage_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    pub fn eval(&self, idx: &[usize]) -> Result<f64> {
        check_index(&self.shape(), idx)?;
        let mut row = vec![1.0];
        for (c, &i) in self.cores.iter().zip(idx) {
            let s = c.shape();
            let (n, rr) = (s[1], s[2]);
            let mut next = vec![0.0; rr];
            for (a, &w) in row.iter().enumerate() {
                let base = (a * n + i) * rr;
                for (o, g) in next.iter_mut().zip(&c.data()[base..base + rr]) {
                    *o += w * g;
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_with_cap(dense_cap())
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        let shape = self.shape();
        check_dense_cap(&shape, cap)?;
        // running left partial product as a (∏n) × r matrix
        let mut acc = Matrix::identity(1);
        for c in &self.cores {
            let s = c.shape();
            let prod = acc.matmul(&right_unfolding(c));
            acc = Matrix::from_vec(prod.rows() * s[1], s[2], prod.into_vec())?;
        }
        DenseTensor::new(shape, acc.into_vec())
    }

    pub fn scaled(&self, c: f64) -> TtTensor {
        let mut cores = self.cores.clone();
        cores[0] = cores[0].scaled(c);
        TtTensor { cores }
    }

    /// Exact sum with ranks r_ν(a) + r_ν(b).
    pub fn add(&self, other: &TtTensor) -> Result<TtTensor> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!("shape mismatch in TT sum: {:?} vs {:?}", self.shape(), other.shape())));
        }
        let d = self.order();
        if d == 1 {
            let data: Vec<f64> = self.cores[0].data().iter().zip(other.cores[0].data()).map(|(a, b)| a + b).collect();
            return Self::new(vec![DenseTensor::new(self.cores[0].shape().to_vec(), data)?]);
        }
        let mut cores = Vec::with_capacity(d);
        for nu in 0..d {
            let (a, b) = (&self.cores[nu], &other.cores[nu]);
            let (sa, sb) = (a.shape(), b.shape());
            let n = sa[1];
            let rl = if nu == 0 { 1 } else { sa[0] + sb[0] };
            let rr = if nu == d - 1 { 1 } else { sa[2] + sb[2] };
            let (ol, or) = (if nu == 0 { 0 } else { sa[0] }, if nu == d - 1 { 0 } else { sa[2] });
            let mut data = vec![0.0; rl * n * rr];
            for l in 0..sa[0] {
                for i in 0..n {
                    for r in 0..sa[2] {
                        data[(l * n + i) * rr + r] = a.data()[(l * n + i) * sa[2] + r];
                    }
                }
            }
            for l in 0..sb[0] {
                for i in 0..n {
                    for r in 0..sb[2] {
                        data[((l + ol) * n + i) * rr + r + or] += b.data()[(l * n + i) * sb[2] + r];
                    }
                }
            }
            cores.push(DenseTensor::new(vec![rl, n, rr], data)?);
        }
        Self::new(cores)
    }

    pub fn sub(&self, other: &TtTensor) -> Result<TtTensor> {
        self.add(&other.scaled(-1.0))
    }

    /// Euclidean inner product by left-to-right contraction of the cores.
    pub fn dot(&self, other: &TtTensor) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::invalid("shape mismatch in TT inner product"));
        }
        let mut w = Matrix::identity(1);
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let (sa, sb) = (a.shape(), b.shape());
            let n = sa[1];
            let mut next = Matrix::zeros(sa[2], sb[2]);
            for i in 0..n {
                let ai = Matrix::from_fn(sa[0], sa[2], |l, r| a.data()[(l * n + i) * sa[2] + r]);
                let bi = Matrix::from_fn(sb[0], sb[2], |l, r| b.data()[(l * n + i) * sb[2] + r]);
                next.add_scaled(1.0, &ai.t_matmul(&w.matmul(&bi)));
            }
            w = next;
        }
        Ok(w[(0, 0)])
    }

    pub fn norm(&self) -> f64 {
        self.right_orthogonalized().cores[0].norm()
    }

    /// Equivalent train whose cores 2..d have orthonormal rows in their right
    /// unfoldings; the norm is then carried entirely by the first core.
    pub fn right_orthogonalized(&self) -> TtTensor {
        let mut cores = self.cores.clone();
        for nu in (1..cores.len()).rev() {
            let s = cores[nu].shape().to_vec();
            let f = qr(&right_unfolding(&cores[nu]).transpose());
            let k = f.q.cols();
            cores[nu] = core_from(f.q.transpose(), [k, s[1], s[2]]);
            let ps = cores[nu - 1].shape().to_vec();
            let merged = left_unfolding(&cores[nu - 1]).matmul(&f.r.transpose());
            cores[nu - 1] = core_from(merged, [ps[0], ps[1], k]);
        }
        TtTensor { cores }
    }

    /// Recompression to relative accuracy `tol`: the result satisfies
    /// `‖x - round(x)‖ ≤ tol · ‖x‖`.
    pub fn round(&self, tol: f64) -> TtTensor {
        self.round_capped(tol, usize::MAX)
    }

    /// As [`TtTensor::round`] with every rank additionally capped at
    /// `max_rank`; the accuracy guarantee no longer holds when the cap binds.
    pub fn round_capped(&self, tol: f64, max_rank: usize) -> TtTensor {
        let d = self.order();
        if d == 1 {
            return self.clone();
        }
        let mut cores = self.right_orthogonalized().cores;
        let delta = tol.max(0.0) * cores[0].norm() / ((d - 1) as f64).sqrt();
        for nu in 0..d - 1 {
            let s = cores[nu].shape().to_vec();
            let f = svd(&left_unfolding(&cores[nu]));
            let r = f.truncation_rank(delta).max(1).min(max_rank.max(1));
            cores[nu] = core_from(f.u.leading_cols(r), [s[0], s[1], r]);
            let mut sv = f.v.leading_cols(r).transpose();
            for (i, sigma) in f.singular_values.iter().take(r).enumerate() {
                for j in 0..sv.cols() {
                    sv[(i, j)] *= sigma;
                }
            }
            let ns = cores[nu + 1].shape().to_vec();
            let merged = sv.matmul(&right_unfolding(&cores[nu + 1]));
            cores[nu + 1] = core_from(merged, [r, ns[1], ns[2]]);
        }
        TtTensor { cores }
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
        for c in &self.cores {
            w.tensor(c);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let d = r.u32()? as usize;
        if d == 0 {
            return Err(Error::Format("order must be positive".into()));
        }
        let shape = (0..d).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let ranks = (0..d - 1).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let cores = (0..d).map(|_| r.tensor()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let t = Self::new(cores).map_err(|e| Error::Format(e.to_string()))?;
        if t.shape() != shape || t.ranks() != ranks {
            return Err(Error::Format("header sizes disagree with the cores".into()));
        }
        Ok(t)
    }
}

/// TT-SVD of a dense tensor with relative accuracy `tol`.
///
/// Each of the d−1 sequential truncations discards at most
/// `tol·‖t‖/√(d−1)` in Frobenius norm, so `‖t - tt‖ ≤ tol·‖t‖`. Ranks are
/// optionally capped at `max_rank`.
pub fn tt_svd(t: &DenseTensor, tol: f64, max_rank: Option<usize>) -> Result<TtTensor> {
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance must be nonnegative, got {tol}")));
    }
    let shape = t.shape().to_vec();
    let d = shape.len();
    if d == 1 {
        return TtTensor::new(vec![DenseTensor::new(vec![1, shape[0], 1], t.data().to_vec())?]);
    }
    let cap = max_rank.unwrap_or(usize::MAX).max(1);
    let delta = tol * t.norm() / ((d - 1) as f64).sqrt();
    let mut cores = Vec::with_capacity(d);
    let mut rest = t.data().to_vec();
    let mut r_prev = 1;
    for &n in shape.iter().take(d - 1) {
        let rows = r_prev * n;
        let c = Matrix::from_vec(rows, rest.len() / rows, rest)?;
        let f = svd(&c);
        let r = f.truncation_rank(delta).max(1).min(cap);
        cores.push(core_from(f.u.leading_cols(r), [r_prev, n, r]));
        let mut sv = f.v.leading_cols(r).transpose();
        for i in 0..r {
            let sigma = f.singular_values[i];
            for j in 0..sv.cols() {
                sv[(i, j)] *= sigma;
            }
        }
        rest = sv.into_vec();
        r_prev = r;
    }
    cores.push(DenseTensor::new(vec![r_prev, shape[d - 1], 1], rest)?);
    TtTensor::new(cores)
}
