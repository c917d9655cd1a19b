#![allow(clippy::needless_range_loop)]

//! Independent reference kernels used as oracles by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensormor_core::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

/// Row-major `Vec<Vec<f64>>` copy.
pub fn rows(a: &Matrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = b[0].len();
    a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect()).collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Classic cyclic Jacobi eigenvalue iteration for a symmetric matrix.
/// Returns eigenvalues in descending order with matching eigenvector columns.
pub fn sym_eig(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (vals, vecs)
}

/// Singular values of `a` (descending) from the eigenvalues of the smaller
/// Gram matrix.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let r = rows(a);
    let g = if a.rows() <= a.cols() { matmul(&r, &transpose(&r)) } else { matmul(&transpose(&r), &r) };
    sym_eig(&g).0.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m = rows(a);
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn diff_norm(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Distance of `x` to span(cols) by least squares through the normal
/// equations with Gaussian elimination.
pub fn distance_to_span(cols: &[Vec<f64>], x: &[f64]) -> f64 {
    if cols.is_empty() {
        return norm(x);
    }
    let m = cols.len();
    let g = Matrix::from_fn(m, m, |i, j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum());
    let rhs: Vec<f64> = cols.iter().map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
    let s = gauss_solve(&g, &rhs);
    let mut r = x.to_vec();
    for (c, si) in cols.iter().zip(&s) {
        for (ri, ci) in r.iter_mut().zip(c) {
            *ri -= si * ci;
        }
    }
    norm(&r)
}

/// Largest principal-angle sine between the column spans of two matrices
/// with orthonormal columns: ‖(I − QQᵀ)P‖₂.
pub fn subspace_gap(p: &Matrix, q: &Matrix) -> f64 {
    let qtp = q.t_matmul(p);
    let mut res = p.clone();
    res.add_scaled(-1.0, &q.matmul(&qtp));
    singular_values(&res).first().copied().unwrap_or(0.0)
}
