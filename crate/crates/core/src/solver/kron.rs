use crate::error::{Error, Result};
use crate::formats::TtTensor;
use crate::linalg::{self, Matrix};
use crate::rom::AffineModel;
use crate::tensor::DenseTensor;

/// One factor of a Kronecker term.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeMatrix {
    Dense(Matrix),
    Diagonal(Vec<f64>),
    Identity(usize),
}

impl ModeMatrix {
    pub fn size(&self) -> usize {
        match self {
            ModeMatrix::Dense(m) => m.rows(),
            ModeMatrix::Diagonal(d) => d.len(),
            ModeMatrix::Identity(n) => *n,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            ModeMatrix::Dense(m) => m.clone(),
            ModeMatrix::Diagonal(d) => Matrix::from_diag(d),
            ModeMatrix::Identity(n) => Matrix::identity(*n),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ModeMatrix::Dense(m) => m.matvec(x),
            ModeMatrix::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            ModeMatrix::Identity(_) => x.to_vec(),
        }
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ModeMatrix::Dense(m) => m.t_matvec(x),
            _ => self.apply(x),
        }
    }

    /// Applies the matrix to mode 1 of an order-3 TT core.
    fn apply_to_core(&self, core: &DenseTensor) -> Result<DenseTensor> {
        match self {
            ModeMatrix::Identity(_) => Ok(core.clone()),
            ModeMatrix::Dense(m) => core.mode_product(1, m),
            ModeMatrix::Diagonal(d) => {
                let s = core.shape();
                let (n, rr) = (s[1], s[2]);
                let mut data = core.data().to_vec();
                for (k, v) in data.iter_mut().enumerate() {
                    *v *= d[(k / rr) % n];
                }
                DenseTensor::new(s.to_vec(), data)
            }
        }
    }
}

/// `A = Σ_i A_i¹ ⊗ … ⊗ A_iᵈ` acting on order-d tensors (mode 0 first).
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerOperator {
    terms: Vec<Vec<ModeMatrix>>,
}

impl KroneckerOperator {
    pub fn new(terms: Vec<Vec<ModeMatrix>>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::invalid("a Kronecker operator needs L ≥ 1 terms"))?;
        let shape: Vec<usize> = first.iter().map(ModeMatrix::size).collect();
        if shape.is_empty() {
            return Err(Error::invalid("Kronecker terms need at least one mode"));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.iter().map(ModeMatrix::size).collect::<Vec<_>>() != shape {
                return Err(Error::invalid(format!("term {i} has mode sizes differing from term 0")));
            }
            for (nu, m) in t.iter().enumerate() {
                if let ModeMatrix::Dense(a) = m {
                    if !a.is_square() {
                        return Err(Error::invalid(format!("term {i}, mode {nu}: matrix is not square")));
                    }
                }
            }
        }
        Ok(Self { terms })
    }

    /// `I ⊗ … ⊗ T ⊗ … ⊗ I` summed over modes: the discrete Laplacian on a
    /// tensor grid when T is the 1D stencil.
    pub fn laplacian_like(t: &Matrix, d: usize) -> Result<Self> {
        let n = t.rows();
        let terms = (0..d)
            .map(|k| {
                (0..d).map(|nu| if nu == k { ModeMatrix::Dense(t.clone()) } else { ModeMatrix::Identity(n) }).collect()
            })
            .collect();
        Self::new(terms)
    }

    pub fn terms(&self) -> &[Vec<ModeMatrix>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.terms[0].iter().map(ModeMatrix::size).collect()
    }

    /// `A x` in TT format; ranks are at most L times those of x.
    pub fn apply(&self, x: &TtTensor) -> Result<TtTensor> {
        if x.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "operator of shape {:?} applied to a tensor of shape {:?}",
                self.shape(),
                x.shape()
            )));
        }
        let mut out: Option<TtTensor> = None;
        for term in &self.terms {
            let cores = term.iter().zip(x.cores()).map(|(m, c)| m.apply_to_core(c)).collect::<Result<Vec<_>>>()?;
            let y = TtTensor::new(cores)?;
            out = Some(match out {
                None => y,
                Some(acc) => acc.add(&y)?,
            });
        }
        Ok(out.expect("at least one term"))
    }

    /// `A x` for a dense tensor, by successive mode products.
    pub fn apply_dense(&self, x: &DenseTensor) -> Result<DenseTensor> {
        if x.shape() != self.shape().as_slice() {
            return Err(Error::invalid("shape mismatch in dense operator application"));
        }
        let mut out = vec![0.0; x.len()];
        for term in &self.terms {
            let mut y = x.clone();
            for (nu, m) in term.iter().enumerate() {
                if !matches!(m, ModeMatrix::Identity(_)) {
                    y = y.mode_product(nu, &m.to_dense())?;
                }
            }
            linalg::axpy(1.0, y.data(), &mut out);
        }
        DenseTensor::new(x.shape().to_vec(), out)
    }

    /// The assembled N×N matrix, N = ∏ n_ν, in the canonical layout.
    pub fn to_matrix(&self) -> Result<Matrix> {
        let n: usize = self.shape().iter().product();
        crate::formats::check_dense_cap(&[n, n], crate::formats::dense_cap())?;
        let mut a = Matrix::zeros(n, n);
        for term in &self.terms {
            let mut k = Matrix::identity(1);
            for m in term {
                k = kron(&k, &m.to_dense());
            }
            a.add_scaled(1.0, &k);
        }
        Ok(a)
    }

    /// The M×M block `Σ_i A_i⁰ ∏_{ν≥1} A_iᵛ[k_ν, k_ν]` selected by grid
    /// indices `idx` of modes 1…d, which must all be diagonal.
    pub fn parametric_block(&self, idx: &[usize]) -> Result<Matrix> {
        let shape = self.shape();
        if idx.len() + 1 != shape.len() {
            return Err(Error::invalid("one index per parametric mode is required"));
        }
        let m = shape[0];
        let mut a = Matrix::zeros(m, m);
        for term in &self.terms {
            let mut c = 1.0;
            for (mm, &k) in term[1..].iter().zip(idx) {
                c *= match mm {
                    ModeMatrix::Identity(_) => 1.0,
                    ModeMatrix::Diagonal(d) => d[k],
                    ModeMatrix::Dense(_) => {
                        return Err(Error::invalid("parametric modes must be diagonal"));
                    }
                };
            }
            a.add_scaled(c, &term[0].to_dense());
        }
        Ok(a)
    }
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Matrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Tensor-structured form of an affine model on tensor grids: mode 0 is the
/// spatial index, mode ν ≥ 1 the grid index of ξ_ν. Coefficients must be
/// products of univariate functions.
pub fn assemble_from_affine(model: &AffineModel, grids: &[Vec<f64>]) -> Result<(KroneckerOperator, TtTensor)> {
    let d = model.param_dim();
    if grids.len() != d {
        return Err(Error::invalid(format!("{} grids for {d} parameters", grids.len())));
    }
    for (nu, g) in grids.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::invalid(format!("grid {nu} is empty")));
        }
        for &x in g {
            let mut probe = model.domain.lower.clone();
            probe[nu] = x;
            model.domain.check(&probe)?;
        }
    }
    let mut terms = Vec::with_capacity(model.operator.len());
    for (i, (a, c)) in model.operator.matrices.iter().zip(&model.operator.coefficients).enumerate() {
        let sep = c.separable(d).map_err(|reason| Error::UnsupportedCoefficient { term: i, reason })?;
        let mut term = vec![ModeMatrix::Dense(a.scaled(sep.scale))];
        for (f, g) in sep.factors.iter().zip(grids) {
            term.push(match f {
                None => ModeMatrix::Identity(g.len()),
                Some(u) => ModeMatrix::Diagonal(g.iter().map(|&x| u.eval(x)).collect()),
            });
        }
        terms.push(term);
    }
    let mut rhs: Option<TtTensor> = None;
    for (i, (b, c)) in model.rhs.vectors.iter().zip(&model.rhs.coefficients).enumerate() {
        let sep = c
            .separable(d)
            .map_err(|reason| Error::UnsupportedCoefficient { term: model.operator.len() + i, reason })?;
        let mut vecs = vec![b.iter().map(|x| x * sep.scale).collect::<Vec<_>>()];
        for (f, g) in sep.factors.iter().zip(grids) {
            vecs.push(g.iter().map(|&x| f.map_or(1.0, |u| u.eval(x))).collect());
        }
        let t = TtTensor::rank_one(&vecs)?;
        rhs = Some(match rhs {
            None => t,
            Some(acc) => acc.add(&t)?,
        });
    }
    let rhs = rhs.expect("R ≥ 1").round(1e-14);
    Ok((KroneckerOperator::new(terms)?, rhs))
}
