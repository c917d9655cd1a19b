use web_time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{IterationRecord, KroneckerOperator, ModeMatrix, SolveTrace};
use crate::error::{Error, Result};
use crate::formats::{CpTensor, TtTensor};
use crate::linalg::{self, Cholesky, Matrix};
use crate::tensor::DenseTensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdOptions {
    /// Number of rank-one corrections.
    pub max_rank: usize,
    /// ALS sweeps per correction.
    pub inner_sweeps: usize,
    /// Relative change of J below which a correction's ALS stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        Self { max_rank: 10, inner_sweeps: 50, tol: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct PgdOutcome {
    pub solution: CpTensor,
    /// One record per accepted correction, starting with the zero iterate.
    pub trace: SolveTrace,
    /// True when a correction could not decrease J (local minimum or a
    /// degenerate factor after one restart).
    pub breakdown: bool,
    pub warnings: Vec<String>,
}

/// Contracts `r` with `vecs[ν]` in every mode except `free`.
fn partial_contract(r: &TtTensor, vecs: &[Vec<f64>], free: usize) -> Vec<f64> {
    let cores = r.cores();
    let mut left = vec![1.0];
    for (c, z) in cores.iter().zip(vecs).take(free) {
        left = contract_left(c, &left, z);
    }
    let mut right = vec![1.0];
    for nu in (free + 1..cores.len()).rev() {
        right = contract_right(&cores[nu], &right, &vecs[nu]);
    }
    let c = &cores[free];
    let s = c.shape();
    let (rl, n, rr) = (s[0], s[1], s[2]);
    let data = c.data();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for a in 0..rl {
                if left[a] == 0.0 {
                    continue;
                }
                let base = (a * n + k) * rr;
                acc += left[a] * linalg::dot(&data[base..base + rr], &right);
            }
            acc
        })
        .collect()
}

fn contract_left(c: &DenseTensor, left: &[f64], z: &[f64]) -> Vec<f64> {
    let s = c.shape();
    let (n, rr) = (s[1], s[2]);
    let mut out = vec![0.0; rr];
    for (a, &la) in left.iter().enumerate() {
        for (k, &zk) in z.iter().enumerate() {
            let w = la * zk;
            if w != 0.0 {
                let base = (a * n + k) * rr;
                linalg::axpy(w, &c.data()[base..base + rr], &mut out);
            }
        }
    }
    out
}

fn contract_right(c: &DenseTensor, right: &[f64], z: &[f64]) -> Vec<f64> {
    let s = c.shape();
    let (rl, n, rr) = (s[0], s[1], s[2]);
    (0..rl)
        .map(|a| {
            (0..n)
                .map(|k| {
                    let base = (a * n + k) * rr;
                    z[k] * linalg::dot(&c.data()[base..base + rr], right)
                })
                .sum()
        })
        .collect()
}

struct Als<'a> {
    a: &'a KroneckerOperator,
    /// `(A_iᵛ)ᵀ A_jᵛ` per mode, indexed [ν][i][j].
    normal: Vec<Vec<Vec<Matrix>>>,
}

impl<'a> Als<'a> {
    fn new(a: &'a KroneckerOperator) -> Self {
        let l = a.len();
        let d = a.shape().len();
        let dense: Vec<Vec<Matrix>> = a.terms().iter().map(|t| t.iter().map(ModeMatrix::to_dense).collect()).collect();
        let normal = (0..d)
            .map(|nu| (0..l).map(|i| (0..l).map(|j| dense[i][nu].t_matmul(&dense[j][nu])).collect()).collect())
            .collect();
        Self { a, normal }
    }

    /// Best rank-one correction of the residual target `r` by alternating
    /// minimization. Returns the factors and the predicted J, or `None` if
    /// the factors collapsed to zero.
    fn correction(
        &self,
        r: &TtTensor,
        r_sq: f64,
        mut v: Vec<Vec<f64>>,
        sweeps: usize,
        tol: f64,
    ) -> Result<Option<(Vec<Vec<f64>>, f64)>> {
        let terms = self.a.terms();
        let d = v.len();
        let mut z: Vec<Vec<Vec<f64>>> =
            terms.iter().map(|t| t.iter().zip(&v).map(|(m, x)| m.apply(x)).collect()).collect();
        let mut j_prev = r_sq;
        let mut j_cur = r_sq;
        for _ in 0..sweeps.max(1) {
            for mu in 0..d {
                // move the scale off the previously updated factor
                let prev = (mu + d - 1) % d;
                let s = linalg::norm2(&v[prev]);
                if s == 0.0 {
                    return Ok(None);
                }
                if prev != mu {
                    v[prev].iter_mut().for_each(|x| *x /= s);
                    for zi in z.iter_mut() {
                        zi[prev].iter_mut().for_each(|x| *x /= s);
                    }
                }
                let n = v[mu].len();
                let mut m = Matrix::zeros(n, n);
                let mut f = vec![0.0; n];
                for (i, ti) in terms.iter().enumerate() {
                    for j in 0..terms.len() {
                        let g: f64 =
                            (0..d).filter(|&nu| nu != mu).map(|nu| linalg::dot(&z[i][nu], &z[j][nu])).product();
                        if g != 0.0 {
                            m.add_scaled(g, &self.normal[mu][i][j]);
                        }
                    }
                    let c = partial_contract(r, &z[i], mu);
                    linalg::axpy(1.0, &ti[mu].apply_transpose(&c), &mut f);
                }
                let x = match Cholesky::new(&m) {
                    Ok(ch) => ch.solve(&f),
                    Err(Error::Breakdown { .. }) => linalg::lstsq(&m, &f)?,
                    Err(e) => return Err(e),
                };
                // J(u + w) = ‖r‖² − 2 xᵀf + xᵀMx
                j_cur = r_sq - 2.0 * linalg::dot(&x, &f) + linalg::dot(&x, &m.matvec(&x));
                for (zi, ti) in z.iter_mut().zip(terms) {
                    zi[mu] = ti[mu].apply(&x);
                }
                v[mu] = x;
            }
            let change = (j_prev - j_cur).abs() / j_prev.max(f64::MIN_POSITIVE);
            j_prev = j_cur;
            if change < tol {
                break;
            }
        }
        if v.iter().any(|x| linalg::norm2(x) == 0.0) {
            return Ok(None);
        }
        Ok(Some((v, j_cur)))
    }
}

fn random_factors(shape: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    shape
        .iter()
        .map(|&n| {
            let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let s = linalg::norm2(&v);
            v.iter_mut().for_each(|x| *x /= s);
            v
        })
        .collect()
}

/// Progressive rank-one corrections minimizing `J(v) = ‖A v − b‖²`.
///
/// Each correction is found by alternating least squares over its factors,
/// starting from seeded standard-normal factors. The residual b − A u is kept
/// as a TT tensor so J is evaluated exactly after every correction.
pub fn greedy_rank_one(a: &KroneckerOperator, b: &TtTensor, opts: &PgdOptions) -> Result<PgdOutcome> {
    let shape = a.shape();
    if b.shape() != shape {
        return Err(Error::invalid("right-hand side shape differs from the operator"));
    }
    let start = Instant::now();
    let als = Als::new(a);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut r = b.clone();
    let mut j = r.dot(&r)?.max(0.0);
    let j0 = j;
    let mut trace = SolveTrace::default();
    trace.records.push(IterationRecord {
        iteration: 0,
        ranks: vec![0],
        residual: j.sqrt(),
        functional: j,
        seconds: 0.0,
    });
    let mut terms: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut breakdown = false;
    let mut warnings = Vec::new();

    for k in 1..=opts.max_rank {
        if j <= 1e-28 * j0 {
            break;
        }
        let mut found = None;
        for attempt in 0..2 {
            let init = random_factors(&shape, &mut rng);
            if let Some(res) = als.correction(&r, j, init, opts.inner_sweeps, opts.tol)? {
                found = Some(res);
                break;
            }
            if attempt == 0 {
                warnings.push(format!("correction {k}: degenerate factor, restarting"));
            }
        }
        let Some((v, _predicted)) = found else {
            breakdown = true;
            warnings.push(format!("correction {k}: factors collapsed to zero after a restart"));
            break;
        };
        let w = TtTensor::rank_one(&v)?;
        let r_new = r.sub(&a.apply(&w)?)?.round(0.0);
        let j_new = r_new.norm().powi(2);
        if !(j_new < j) {
            breakdown = true;
            warnings.push(format!("correction {k}: no decrease of J ({j_new:e} ≥ {j:e}); stopping"));
            break;
        }
        r = r_new;
        j = j_new;
        terms.push((1.0, v));
        trace.records.push(IterationRecord {
            iteration: k,
            ranks: vec![k],
            residual: j.sqrt(),
            functional: j,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let solution = if terms.is_empty() {
        CpTensor::new(vec![], shape.iter().map(|&n| Matrix::zeros(n, 0)).collect())?
    } else {
        CpTensor::from_terms(&terms)?
    };
    Ok(PgdOutcome { solution, trace, breakdown, warnings })
}
