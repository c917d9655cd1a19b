//! Dense order-d tensors in lexicographic layout (last mode fastest) and
//! their matricizations.
//!
//! Modes are indexed from 0 throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Advances `idx` to the next multi-index in lexicographic order. Returns
/// false after the last index (when `idx` wraps back to all zeros).
pub fn next_index(idx: &mut [usize], shape: &[usize]) -> bool {
    for k in (0..shape.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

pub(crate) fn checked_len(shape: &[usize]) -> Result<usize> {
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::invalid(format!("shape {shape:?} overflows the address space")))
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_shape(&shape)?;
        let len = checked_len(&shape)?;
        if data.len() != len {
            return Err(Error::invalid(format!("shape {shape:?} needs {len} entries, got {}", data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite entry at flat index {pos}")));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        validate_shape(&shape)?;
        let len = checked_len(&shape)?;
        Ok(Self { shape, data: vec![0.0; len] })
    }

    /// Fills a tensor by evaluating `f` at every multi-index in layout order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        validate_shape(&shape)?;
        let len = checked_len(&shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; shape.len()];
        loop {
            data.push(f(&idx));
            if !next_index(&mut idx, &shape) {
                break;
            }
        }
        Self::new(shape, data)
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Self::new(vec![m.rows(), m.cols()], m.as_slice().to_vec())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() {
            return Err(Error::invalid(format!("index of length {} for an order-{} tensor", idx.len(), self.order())));
        }
        let mut off = 0;
        for (k, (&i, &n)) in idx.iter().zip(&self.shape).enumerate() {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range for mode {k} of size {n}")));
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(idx)?])
    }

    pub fn norm(&self) -> f64 {
        linalg::norm2(&self.data)
    }

    pub fn dot(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(linalg::dot(&self.data, &other.data))
    }

    /// `self - other`, entrywise.
    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(Self { shape: self.shape.clone(), data: linalg::sub(&self.data, &other.data) })
    }

    pub fn scaled(&self, c: f64) -> DenseTensor {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|v| v * c).collect() }
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::invalid(format!("shape mismatch: {:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    /// Reinterprets the data under a new shape with the same entry count.
    pub fn reshape(self, shape: Vec<usize>) -> Result<DenseTensor> {
        Self::new(shape, self.data)
    }

    /// Order-2 view as a matrix; any other order is an invalid argument.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.order() != 2 {
            return Err(Error::invalid(format!("expected an order-2 tensor, got order {}", self.order())));
        }
        Matrix::from_vec(self.shape[0], self.shape[1], self.data.clone())
    }

    /// Unfolds the tensor with `row_modes` indexing rows (in the given order)
    /// and the remaining modes, ascending, indexing columns.
    pub fn matricize(&self, row_modes: &[usize]) -> Result<Matricization> {
        let d = self.order();
        if row_modes.is_empty() || row_modes.len() >= d {
            return Err(Error::invalid("row modes must be a nonempty proper subset of the tensor modes"));
        }
        let mut seen = vec![false; d];
        for &m in row_modes {
            if m >= d || seen[m] {
                return Err(Error::invalid(format!("row modes {row_modes:?} invalid for an order-{d} tensor")));
            }
            seen[m] = true;
        }
        let col_modes: Vec<usize> = (0..d).filter(|m| !seen[*m]).collect();
        let (rmap, nrows) = sub_strides(&self.shape, row_modes);
        let (cmap, ncols) = sub_strides(&self.shape, &col_modes);

        let mut out = vec![0.0; self.data.len()];
        let mut idx = vec![0; d];
        for &v in &self.data {
            let r: usize = idx.iter().zip(&rmap).map(|(i, s)| i * s).sum();
            let c: usize = idx.iter().zip(&cmap).map(|(i, s)| i * s).sum();
            out[r * ncols + c] = v;
            next_index(&mut idx, &self.shape);
        }
        Ok(Matricization {
            row_modes: row_modes.to_vec(),
            col_modes,
            source_shape: self.shape.clone(),
            matrix: Matrix::from_vec(nrows, ncols, out)?,
        })
    }

    /// Mode product `self ×_mode m`: mode `mode` of size n is contracted with
    /// the columns of `m` (p×n) and replaced by a mode of size p.
    pub fn mode_product(&self, mode: usize, m: &Matrix) -> Result<DenseTensor> {
        if mode >= self.order() {
            return Err(Error::invalid(format!("mode {mode} out of range")));
        }
        let n = self.shape[mode];
        if m.cols() != n {
            return Err(Error::invalid(format!("mode {mode} has size {n} but the matrix has {} columns", m.cols())));
        }
        let p = m.rows();
        let left: usize = self.shape[..mode].iter().product();
        let right: usize = self.shape[mode + 1..].iter().product();
        let mut out = vec![0.0; left * p * right];
        for l in 0..left {
            let src = &self.data[l * n * right..(l + 1) * n * right];
            let dst = &mut out[l * p * right..(l + 1) * p * right];
            for a in 0..p {
                let drow = &mut dst[a * right..(a + 1) * right];
                for k in 0..n {
                    let c = m[(a, k)];
                    if c != 0.0 {
                        for (o, s) in drow.iter_mut().zip(&src[k * right..(k + 1) * right]) {
                            *o += c * s;
                        }
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape[mode] = p;
        DenseTensor::new(shape, out)
    }
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::invalid("tensor order must be at least 1"));
    }
    if shape.contains(&0) {
        return Err(Error::invalid(format!("mode sizes must be positive, got {shape:?}")));
    }
    Ok(())
}

/// Per-mode strides of the lexicographic index over `modes`, zero for modes
/// not in the subset.
fn sub_strides(shape: &[usize], modes: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![0; shape.len()];
    let mut size = 1;
    for &m in modes.iter().rev() {
        map[m] = size;
        size *= shape[m];
    }
    (map, size)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matricization {
    pub row_modes: Vec<usize>,
    pub col_modes: Vec<usize>,
    pub source_shape: Vec<usize>,
    pub matrix: Matrix,
}

impl Matricization {
    /// Inverse index remapping back to the source tensor layout.
    pub fn fold(&self) -> Result<DenseTensor> {
        let (rmap, _) = sub_strides(&self.source_shape, &self.row_modes);
        let (cmap, ncols) = sub_strides(&self.source_shape, &self.col_modes);
        let src = self.matrix.as_slice();
        let len = checked_len(&self.source_shape)?;
        if src.len() != len {
            return Err(Error::invalid("matrix size does not match the source shape"));
        }
        let mut out = Vec::with_capacity(len);
        let mut idx = vec![0; self.source_shape.len()];
        for _ in 0..len {
            let r: usize = idx.iter().zip(&rmap).map(|(i, s)| i * s).sum();
            let c: usize = idx.iter().zip(&cmap).map(|(i, s)| i * s).sum();
            out.push(src[r * ncols + c]);
            next_index(&mut idx, &self.source_shape);
        }
        DenseTensor::new(self.source_shape.clone(), out)
    }
}
