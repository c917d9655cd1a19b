//! Dense row-major matrices and the factorizations the rest of the crate
//! builds on: Householder QR, Cholesky, partial-pivoting LU and a one-sided
//! Jacobi SVD.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probe;

/// Relative level below which a singular value is treated as zero by rank
/// decisions. Such values are still reported.
pub const NUMERICAL_ZERO: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!("{} entries cannot form a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("ragged rows"));
        }
        Ok(Self { rows: rows.len(), cols: ncols, data: rows.concat() })
    }

    pub fn from_cols(cols: &[Vec<f64>]) -> Result<Self> {
        let nrows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::invalid("ragged columns"));
        }
        Ok(Self::from_fn(nrows, cols.len(), |i, j| cols[j][i]))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows, "column length mismatch");
        for (i, &v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn leading_cols(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn leading_rows(&self, k: usize) -> Matrix {
        Matrix { rows: k, cols: self.cols, data: self.data[..k * self.cols].to_vec() }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        let mut m = self.clone();
        m.scale(c);
        m
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: f64, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add_scaled");
        probe::touch(self.rows.max(self.cols));
        axpy_raw(c, &other.data, &mut self.data);
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_cols(&mut self, factors: &[f64]) {
        assert_eq!(factors.len(), self.cols);
        for row in self.data.chunks_mut(self.cols.max(1)) {
            for (v, f) in row.iter_mut().zip(factors) {
                *v *= f;
            }
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ in matmul");
        probe::touch(self.rows.max(self.cols).max(other.cols));
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                    for (o, b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "row counts differ in t_matmul");
        probe::touch(self.rows.max(self.cols).max(other.cols));
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = other.row(k);
            for (i, &a) in arow.iter().enumerate() {
                if a != 0.0 {
                    let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                    for (o, b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch in matvec");
        probe::touch(self.rows.max(self.cols));
        (0..self.rows).map(|i| dot_raw(self.row(i), x)).collect()
    }

    /// `selfᵀ · x`
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "dimension mismatch in t_matvec");
        probe::touch(self.rows.max(self.cols));
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy_raw(xi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..self.rows {
            for j in 0..i {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Largest deviation of `selfᵀ·self` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.t_matmul(self);
        let mut worst = 0.0_f64;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
fn dot_raw(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy_raw(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch in dot");
    probe::touch(a.len());
    dot_raw(a, b)
}

pub fn norm2(a: &[f64]) -> f64 {
    probe::touch(a.len());
    dot_raw(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "length mismatch in axpy");
    probe::touch(x.len());
    axpy_raw(alpha, x, y);
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "length mismatch in sub");
    probe::touch(a.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

// ---------------------------------------------------------------------------
// QR
// ---------------------------------------------------------------------------

/// Thin QR factorization: `q` is m×k with orthonormal columns, `r` is k×n
/// upper triangular, k = min(m, n).
#[derive(Clone, Debug)]
pub struct Qr {
    pub q: Matrix,
    pub r: Matrix,
}

pub fn qr(a: &Matrix) -> Qr {
    let (m, n) = a.shape();
    let k = m.min(n);
    probe::touch(m.max(n));
    let mut cols = a.columns();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);

    for j in 0..k {
        let x = &cols[j][j..];
        let alpha = dot_raw(x, x).sqrt();
        let mut v = x.to_vec();
        if alpha == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        v[0] += if x[0] >= 0.0 { alpha } else { -alpha };
        let beta = 2.0 / dot_raw(&v, &v);
        for col in cols.iter_mut().skip(j) {
            let s = beta * dot_raw(&v, &col[j..]);
            axpy_raw(-s, &v, &mut col[j..]);
        }
        reflectors.push((v, beta));
    }

    let r = Matrix::from_fn(k, n, |i, j| if i <= j { cols[j][i] } else { 0.0 });

    let mut qcols: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let mut e = vec![0.0; m];
            e[c] = 1.0;
            e
        })
        .collect();
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        for q in qcols.iter_mut() {
            let s = beta * dot_raw(v, &q[j..]);
            axpy_raw(-s, v, &mut q[j..]);
        }
    }
    let q = Matrix::from_fn(m, k, |i, j| qcols[j][i]);
    Qr { q, r }
}

// ---------------------------------------------------------------------------
// Cholesky / LU
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Symmetry is checked to
    /// 1e-10 relative; a non-positive pivot is reported with its index.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!("Cholesky needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        if !a.is_symmetric(1e-10) {
            return Err(Error::breakdown("matrix is not symmetric", None));
        }
        let n = a.rows;
        probe::touch(n);
        let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)].abs()));
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > NUMERICAL_ZERO * max_diag) {
                return Err(Error::breakdown(
                    format!("non-positive pivot {d:e} at index {j}; matrix is not positive definite"),
                    Some(j),
                ));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    /// Lower-triangular factor with `A = L Lᵀ`.
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let y = self.solve_lower(b);
        self.solve_upper(&y)
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        probe::touch(n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        assert_eq!(y.len(), n);
        probe::touch(n);
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}

pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::invalid("right-hand side length differs from matrix size"));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!("LU needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        probe::touch(n);
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > NUMERICAL_ZERO * scale) {
                return Err(Error::Breakdown {
                    context: format!("singular matrix: zero pivot at column {k}"),
                    pivot: Some(k),
                    condition: Some(f64::INFINITY),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu.data[i * n + j] -= f * lu.data[k * n + j];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        probe::touch(n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot_raw(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot_raw(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`, σ non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// m×k, orthonormal columns.
    pub u: Matrix,
    /// n×k, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    /// Number of singular values at or above `rel_tol · σ₁`, never counting
    /// values below the numerical-zero floor.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        if s1 == 0.0 {
            return 0;
        }
        let thr = rel_tol.max(NUMERICAL_ZERO) * s1;
        self.singular_values.iter().take_while(|&&s| s >= thr).count()
    }

    /// `sqrt(Σ_{i≥k} σ_i²)`: the Frobenius error of the rank-k truncation.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.singular_values.iter().skip(k).map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Smallest rank whose discarded tail is at most `abs_tol` in Frobenius
    /// norm, with numerically-zero values always discarded.
    pub fn truncation_rank(&self, abs_tol: f64) -> usize {
        let s = &self.singular_values;
        let s1 = s.first().copied().unwrap_or(0.0);
        let floor = NUMERICAL_ZERO * s1;
        let mut keep = s.iter().take_while(|&&v| v > floor).count();
        let mut tail_sq = s[keep..].iter().map(|v| v * v).sum::<f64>();
        while keep > 0 {
            let next = tail_sq + s[keep - 1] * s[keep - 1];
            if next.sqrt() > abs_tol {
                break;
            }
            tail_sq = next;
            keep -= 1;
        }
        keep
    }

    /// Rank-k reconstruction `U_k diag(σ_k) V_kᵀ`.
    pub fn reconstruct(&self, k: usize) -> Matrix {
        let k = k.min(self.singular_values.len());
        let mut uk = self.u.leading_cols(k);
        uk.scale_cols(&self.singular_values[..k]);
        uk.matmul(&self.v.leading_cols(k).transpose())
    }
}

/// Singular value decomposition by one-sided Jacobi rotations, applied to
/// the triangular factor of a Householder QR when the matrix is not square.
pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.transpose());
        return Svd { singular_values: t.singular_values, u: t.v, v: t.u };
    }
    if n == 0 {
        return Svd { singular_values: vec![], u: Matrix::zeros(m, 0), v: Matrix::zeros(0, 0) };
    }
    probe::touch(m);

    // m >= n: reduce to the n×n triangular factor
    let (q, core) = if m > n {
        let f = qr(a);
        (Some(f.q), f.r)
    } else {
        (None, a.clone())
    };

    let mut w = core.columns();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * n as f64;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for qi in p + 1..n {
                let alpha = dot_raw(&w[p], &w[p]);
                let beta = dot_raw(&w[qi], &w[qi]);
                let gamma = dot_raw(&w[p], &w[qi]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, qi, c, s);
                rotate(&mut v, p, qi, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| dot_raw(c, c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    // left vectors in the full space (unnormalized: column j has norm σ_j)
    let wmat = Matrix::from_fn(n, n, |i, j| w[order[j]][i]);
    let mut ucols = match &q {
        Some(q) => q.matmul(&wmat).columns(),
        None => wmat.columns(),
    };
    let mut vcols: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();

    let smax = singular_values[0];
    for j in 0..n {
        let sj = singular_values[j];
        if sj > 1e-13 * smax && sj > 0.0 {
            ucols[j].iter_mut().for_each(|x| *x /= sj);
        } else {
            complete_column(&mut ucols, j);
        }
    }

    // deterministic sign: first non-negligible entry of each left vector positive
    for j in 0..n {
        if let Some(&lead) = ucols[j].iter().find(|x| x.abs() > 1e-8) {
            if lead < 0.0 {
                ucols[j].iter_mut().for_each(|x| *x = -*x);
                vcols[j].iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    Svd { singular_values, u: Matrix::from_fn(m, n, |i, j| ucols[j][i]), v: Matrix::from_fn(n, n, |i, j| vcols[j][i]) }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let a = &mut lo[p];
    let b = &mut hi[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Replaces column `j` by a unit vector orthogonal to columns `0..j`,
/// keeping its direction when that direction is numerically meaningful.
fn complete_column(cols: &mut [Vec<f64>], j: usize) {
    let m = cols[j].len();
    let own = cols[j].clone();
    let units = (0..m).map(|i| {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        e
    });
    for mut cand in std::iter::once(own).chain(units) {
        let n0 = dot_raw(&cand, &cand).sqrt();
        if n0 == 0.0 {
            continue;
        }
        cand.iter_mut().for_each(|x| *x /= n0);
        for _ in 0..2 {
            for prev in cols[..j].iter() {
                let c = dot_raw(prev, &cand);
                axpy_raw(-c, prev, &mut cand);
            }
        }
        let nn = dot_raw(&cand, &cand).sqrt();
        if nn > 0.5 {
            cand.iter_mut().for_each(|x| *x /= nn);
            cols[j] = cand;
            return;
        }
    }
}

/// Minimum-norm least-squares solution through the SVD pseudo-inverse.
/// Also returns the numerical rank that was used.
pub fn lstsq_with_rank(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    if b.len() != a.rows {
        return Err(Error::invalid("right-hand side length differs from row count"));
    }
    let f = svd(a);
    let rank = f.rank(NUMERICAL_ZERO);
    let utb = f.u.t_matvec(b);
    let mut x = vec![0.0; a.cols];
    for i in 0..rank {
        let c = utb[i] / f.singular_values[i];
        for (k, xk) in x.iter_mut().enumerate() {
            *xk += c * f.v[(k, i)];
        }
    }
    Ok((x, rank))
}

pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    lstsq_with_rank(a, b).map(|(x, _)| x)
}

/// `σ_max / σ_min` of a square matrix (infinite when singular).
pub fn condition_number(a: &Matrix) -> f64 {
    let s = svd(a).singular_values;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Orthonormalizes `x` against the orthonormal columns in `basis` with two
/// passes of classical Gram–Schmidt. Returns the unit vector and the norm of
/// the orthogonal remainder, or `None` when that remainder falls below
/// `rel_tol · ‖x‖`.
pub fn orthonormalize_against(basis: &[Vec<f64>], x: &[f64], rel_tol: f64) -> Option<(Vec<f64>, f64)> {
    let n0 = norm2(x);
    if n0 == 0.0 {
        return None;
    }
    let mut r = x.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            axpy(-c, q, &mut r);
        }
    }
    let nr = norm2(&r);
    if nr <= rel_tol * n0 {
        return None;
    }
    r.iter_mut().for_each(|v| *v /= nr);
    Some((r, nr))
}
