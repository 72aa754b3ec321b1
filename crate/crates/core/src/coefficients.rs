//! Conductivity matrix `A(x)` sampled per element at the centroid.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::DiscreteDomain;

pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;

/// Closed-form description of `A(x)`. In 1D only the `a11` entry is used.
#[derive(Clone)]
pub enum CoefficientSpec {
    Identity,
    Diagonal(ScalarFn, ScalarFn),
    FullSymmetric {
        a11: ScalarFn,
        a12: ScalarFn,
        a22: ScalarFn,
    },
    /// Arbitrary matrix callback; symmetry is checked, not assumed.
    Matrix(MatrixFn),
}

impl CoefficientSpec {
    pub fn constant_diagonal(a1: f64, a2: f64) -> Self {
        CoefficientSpec::Diagonal(Arc::new(move |_| a1), Arc::new(move |_| a2))
    }

    pub fn constant_full(a11: f64, a12: f64, a22: f64) -> Self {
        CoefficientSpec::FullSymmetric {
            a11: Arc::new(move |_| a11),
            a12: Arc::new(move |_| a12),
            a22: Arc::new(move |_| a22),
        }
    }

    /// `A(x) = (a0 + slope * x₁) I`.
    pub fn affine_scalar(a0: f64, slope: f64) -> Self {
        let f: ScalarFn = Arc::new(move |p: [f64; 2]| a0 + slope * p[0]);
        CoefficientSpec::Diagonal(f.clone(), f)
    }

    fn sample(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            CoefficientSpec::Identity => [[1.0, 0.0], [0.0, 1.0]],
            CoefficientSpec::Diagonal(a1, a2) => [[a1(p), 0.0], [0.0, a2(p)]],
            CoefficientSpec::FullSymmetric { a11, a12, a22 } => {
                let off = a12(p);
                [[a11(p), off], [off, a22(p)]]
            }
            CoefficientSpec::Matrix(f) => f(p),
        }
    }
}

impl fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CoefficientSpec::Identity => "Identity",
            CoefficientSpec::Diagonal(..) => "Diagonal",
            CoefficientSpec::FullSymmetric { .. } => "FullSymmetric",
            CoefficientSpec::Matrix(_) => "Matrix",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientField {
    dimension: usize,
    matrices: Vec<[[f64; 2]; 2]>,
    /// Ellipticity lower bound Λ₁.
    pub lambda1: f64,
    /// Upper bound Λ₂ = ‖A‖_∞.
    pub lambda2: f64,
}

/// Eigenvalues of the symmetric 2×2 matrix, ascending.
pub fn sym2_eigenvalues(a: &[[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    let r = half_diff.hypot(a[0][1]);
    (mean - r, mean + r)
}

pub fn build_coefficients(domain: &DiscreteDomain, spec: &CoefficientSpec) -> Result<CoefficientField> {
    let dim = domain.dimension();
    let mut matrices = Vec::with_capacity(domain.n_elements());
    let mut lambda1 = f64::INFINITY;
    let mut lambda2 = f64::NEG_INFINITY;
    for e in 0..domain.n_elements() {
        let mut a = spec.sample(domain.geometry(e).centroid);
        if dim == 1 {
            a = [[a[0][0], 0.0], [0.0, 0.0]];
        }
        let asym = (a[0][1] - a[1][0]).abs();
        let scale = a[0][0].abs().max(a[1][1].abs()).max(1.0);
        if asym > 1e-14 * scale || !asym.is_finite() {
            return Err(Error::AsymmetricCoefficient { element: e, asym });
        }
        let (lo, hi) = if dim == 1 {
            (a[0][0], a[0][0])
        } else {
            sym2_eigenvalues(&a)
        };
        if lo.is_nan() || lo <= 0.0 || !hi.is_finite() {
            return Err(Error::NotElliptic { element: e, min_eig: lo });
        }
        lambda1 = lambda1.min(lo);
        lambda2 = lambda2.max(hi);
        matrices.push(a);
    }
    Ok(CoefficientField {
        dimension: dim,
        matrices,
        lambda1,
        lambda2,
    })
}

impl CoefficientField {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn element(&self, e: usize) -> &[[f64; 2]; 2] {
        &self.matrices[e]
    }

    pub fn n_elements(&self) -> usize {
        self.matrices.len()
    }

    /// `A_e g`.
    pub fn apply(&self, e: usize, g: [f64; 2]) -> [f64; 2] {
        let a = &self.matrices[e];
        [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]]
    }
}
