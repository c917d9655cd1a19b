use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Monomial,
    /// Legendre polynomials orthonormal for the uniform probability measure
    /// on the interval.
    Legendre,
}

/// Polynomials of degree 0 … `degree` in one variable on `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateFamily {
    pub kind: FamilyKind,
    pub degree: usize,
    pub lower: f64,
    pub upper: f64,
}

impl UnivariateFamily {
    pub fn new(kind: FamilyKind, degree: usize, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::invalid(format!("invalid interval [{lower}, {upper}]")));
        }
        Ok(Self { kind, degree, lower, upper })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn reference_coordinate(&self, x: f64) -> f64 {
        2.0 * (x - self.lower) / (self.upper - self.lower) - 1.0
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        match self.kind {
            FamilyKind::Monomial => {
                let mut p = 1.0;
                for _ in 0..=self.degree {
                    out.push(p);
                    p *= x;
                }
            }
            FamilyKind::Legendre => {
                let t = self.reference_coordinate(x);
                let (mut p0, mut p1) = (1.0, t);
                for k in 0..=self.degree {
                    let pk = match k {
                        0 => 1.0,
                        1 => t,
                        _ => {
                            let kf = k as f64;
                            let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                            p0 = p1;
                            p1 = p2;
                            p2
                        }
                    };
                    out.push((2.0 * k as f64 + 1.0).sqrt() * pk);
                }
            }
        }
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.lower.abs().max(self.upper.abs()));
        x >= self.lower - slack && x <= self.upper + slack
    }

    /// `n`-point Gauss–Legendre rule mapped to the interval, with weights
    /// normalized to sum to one.
    pub fn gauss_rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let (t, w) = gauss_legendre(n);
        let half = 0.5 * (self.upper - self.lower);
        let mid = 0.5 * (self.upper + self.lower);
        (t.iter().map(|x| mid + half * x).collect(), w.iter().map(|x| 0.5 * x).collect())
    }
}

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1] by Newton
/// iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// One univariate family per parameter dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBasis {
    pub families: Vec<UnivariateFamily>,
}

impl FeatureBasis {
    pub fn new(families: Vec<UnivariateFamily>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::invalid("a feature basis needs at least one dimension"));
        }
        Ok(Self { families })
    }

    /// The same family in every one of `d` dimensions.
    pub fn uniform(kind: FamilyKind, degree: usize, d: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![UnivariateFamily::new(kind, degree, lower, upper)?; d])
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    /// Sizes n_ν of the per-dimension families.
    pub fn sizes(&self) -> Vec<usize> {
        self.families.iter().map(UnivariateFamily::len).collect()
    }

    pub fn check_point(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point of dimension {} for a {}-dimensional basis",
                xi.len(),
                self.dim()
            )));
        }
        for (nu, (f, &x)) in self.families.iter().zip(xi).enumerate() {
            if !f.contains(x) {
                return Err(Error::Domain(format!("ξ_{nu} = {x} lies outside [{}, {}]", f.lower, f.upper)));
            }
        }
        Ok(())
    }
}
