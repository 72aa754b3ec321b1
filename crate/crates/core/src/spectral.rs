//! Eigen-decomposition of the discrete mixed Dirichlet–Neumann operator and the
//! functional calculus built on it.
//!
//! With eigenpairs `K_A φ_k = λ_k M φ_k`, `φ_jᵀ M φ_k = δ_jk`, a real power acts as
//!
//! ```text
//! L^p v = Σ_k λ_k^p (φ_kᵀ M v) φ_k
//! ```
//!
//! and `K_s = L^{-s}`, `H_s = L^{-s/2}`. The basis only spans fields vanishing
//! on Γ₀, so inputs are projected there first.

use nalgebra::{DMatrix, DVector};

use crate::assembly::{AssembledOperators, MassMode};
use crate::error::{Error, Result};

type BackMap = Box<dyn Fn(DMatrix<f64>) -> DMatrix<f64>>;

pub type NodalField = DVector<f64>;

/// Fractional order `s ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalExponent(f64);

impl FractionalExponent {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(FractionalExponent(s))
        } else {
            Err(Error::Exponent(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponent of `K_s`.
    pub fn potential(self) -> f64 {
        -self.0
    }

    /// Exponent of `H_s`.
    pub fn half_potential(self) -> f64 {
        -0.5 * self.0
    }

    /// Exponent of the solution-space norm, `(1-s)/2`.
    pub fn solution_norm(self) -> f64 {
        0.5 * (1.0 - self.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    /// Columns are `φ_k` over all nodes (zero rows on Γ₀).
    eigenvectors: DMatrix<f64>,
    /// Columns are `M φ_k`, so that `c = (MΦ)ᵀ v`.
    weighted: DMatrix<f64>,
    free_index: Vec<Option<usize>>,
    pub m_norm_check: f64,
    pub max_residual: f64,
    pub mass_mode: MassMode,
}

const ORTHONORMALITY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

/// Full dense decomposition of the free-node pencil `(K_A, M)`.
pub fn eigendecompose(ops: &AssembledOperators) -> Result<SpectralDecomposition> {
    let free = &ops.free_dofs;
    let nf = free.len();
    if nf == 0 {
        return Err(Error::SingularStiffness);
    }
    let k_ff = ops.stiffness_a.dense_submatrix(free);

    // Reduce to a standard symmetric problem S w = λ w and map back.
    let (s, back): (DMatrix<f64>, BackMap) = match ops.mass_mode {
        MassMode::Lumped => {
            let inv_sqrt: Vec<f64> = free.iter().map(|&i| 1.0 / ops.mass.get(i, i).sqrt()).collect();
            let s = DMatrix::from_fn(nf, nf, |r, c| k_ff[(r, c)] * inv_sqrt[r] * inv_sqrt[c]);
            let back = move |mut w: DMatrix<f64>| {
                for (r, scale) in inv_sqrt.iter().enumerate() {
                    w.row_mut(r).scale_mut(*scale);
                }
                w
            };
            (s, Box::new(back))
        }
        MassMode::Consistent => {
            let m_ff = ops.mass.dense_submatrix(free);
            let chol = m_ff
                .cholesky()
                .ok_or_else(|| Error::SpectralInvariant("mass matrix not positive definite".into()))?;
            let l = chol.l();
            let x = l
                .solve_lower_triangular(&k_ff)
                .ok_or_else(|| Error::SpectralInvariant("singular mass factor".into()))?;
            let s = l
                .solve_lower_triangular(&x.transpose())
                .ok_or_else(|| Error::SpectralInvariant("singular mass factor".into()))?;
            let s = 0.5 * (&s + s.transpose());
            let lt = l.transpose();
            let back = move |w: DMatrix<f64>| lt.solve_upper_triangular(&w).expect("triangular factor is nonsingular");
            (s, Box::new(back))
        }
    };

    let max_iter = 1000 * nf.max(10);
    let eig = s
        .try_symmetric_eigen(f64::EPSILON, max_iter)
        .ok_or(Error::EigenNoConvergence { iterations: max_iter })?;

    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(nf, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut w = DMatrix::zeros(nf, nf);
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &eig.eigenvectors.column(src));
    }
    let phi_free = back(w);

    let n = ops.n_nodes();
    let mut eigenvectors = DMatrix::zeros(n, nf);
    for (r, &node) in free.iter().enumerate() {
        eigenvectors.set_row(node, &phi_free.row(r));
    }
    // Deterministic sign: first significant entry positive.
    for k in 0..nf {
        let col = eigenvectors.column(k);
        let pivot = col.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(1.0);
        if pivot < 0.0 {
            eigenvectors.column_mut(k).neg_mut();
        }
    }

    let mut weighted = DMatrix::zeros(n, nf);
    for k in 0..nf {
        let col: DVector<f64> = eigenvectors.column(k).into_owned();
        weighted.set_column(k, &ops.mass.mul_vec(&col));
    }

    if let Some(bad) = eigenvalues.iter().position(|&l| l.is_nan() || l <= 0.0) {
        return Err(Error::SpectralInvariant(format!(
            "eigenvalue λ_{} = {:e} is not positive",
            bad + 1,
            eigenvalues[bad]
        )));
    }

    let gram = eigenvectors.transpose() * &weighted;
    let m_norm_check = (gram - DMatrix::identity(nf, nf)).abs().max();

    let mut max_residual: f64 = 0.0;
    for k in 0..nf {
        let phi: DVector<f64> = eigenvectors.column(k).into_owned();
        let kphi = ops.stiffness_a.mul_vec(&phi);
        let mut res2 = 0.0;
        let mut ref2 = 0.0;
        for &i in free {
            let r = kphi[i] - eigenvalues[k] * weighted[(i, k)];
            res2 += r * r;
            ref2 += kphi[i] * kphi[i];
        }
        max_residual = max_residual.max((res2 / ref2).sqrt());
    }

    if m_norm_check > ORTHONORMALITY_TOL {
        return Err(Error::SpectralInvariant(format!(
            "M-orthonormality defect {m_norm_check:e}"
        )));
    }
    if max_residual > RESIDUAL_TOL {
        return Err(Error::SpectralInvariant(format!(
            "eigen-residual {max_residual:e}"
        )));
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        weighted,
        free_index: ops.free_index.clone(),
        m_norm_check,
        max_residual,
        mass_mode: ops.mass_mode,
    })
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Smallest eigenvalue λ₁.
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Mode `k` (zero-based) as a nodal field.
    pub fn mode(&self, k: usize) -> NodalField {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    fn project(&self, v: &NodalField) -> (NodalField, bool) {
        let mut out = v.clone();
        let mut projected = false;
        for (i, slot) in self.free_index.iter().enumerate() {
            if slot.is_none() && out[i] != 0.0 {
                out[i] = 0.0;
                projected = true;
            }
        }
        (out, projected)
    }

    /// Spectral coefficients `c_k = φ_kᵀ M v` of the Γ₀-projected field.
    pub fn coefficients(&self, v: &NodalField) -> DVector<f64> {
        let (p, _) = self.project(v);
        self.weighted.tr_mul(&p)
    }

    pub fn synthesize(&self, coeffs: &DVector<f64>) -> NodalField {
        &self.eigenvectors * coeffs
    }

    /// `L^p v` together with a flag telling whether `v` had to be zeroed on Γ₀.
    pub fn apply_power_checked(&self, exponent: f64, v: &NodalField) -> (NodalField, bool) {
        let (p, projected) = self.project(v);
        let mut c = self.weighted.tr_mul(&p);
        for (ck, lk) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ck *= lk.powf(exponent);
        }
        (self.synthesize(&c), projected)
    }

    pub fn apply_power(&self, exponent: f64, v: &NodalField) -> NodalField {
        let (out, projected) = self.apply_power_checked(exponent, v);
        if projected {
            log::warn!("field projected onto the Dirichlet class before spectral expansion");
        }
        out
    }

    /// `K_s v = L^{-s} v`.
    pub fn k_s(&self, s: FractionalExponent, v: &NodalField) -> NodalField {
        self.apply_power(s.potential(), v)
    }

    /// `H_s v = L^{-s/2} v`.
    pub fn h_s(&self, s: FractionalExponent, v: &NodalField) -> NodalField {
        self.apply_power(s.half_potential(), v)
    }

    /// `‖L^σ v‖` in the discrete L² (mass) norm: `(Σ λ_k^{2σ} c_k²)^{1/2}`.
    pub fn fractional_norm(&self, sigma: f64, v: &NodalField) -> f64 {
        self.coefficients(v)
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| l.powf(2.0 * sigma) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// `(‖v‖² + ‖L^σ v‖²)^{1/2}`, the graph-norm variant.
    pub fn fractional_graph_norm(&self, sigma: f64, v: &NodalField) -> f64 {
        let c = self.coefficients(v);
        c.iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| (1.0 + l.powf(2.0 * sigma)) * c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// `∫ |∇v|² = vᵀ K_I v`.
pub fn gradient_energy(ops: &AssembledOperators, v: &NodalField) -> f64 {
    ops.stiffness_i.quadratic_form(v)
}

/// `∫ A ∇v · ∇v = vᵀ K_A v`.
pub fn a_gradient_energy(ops: &AssembledOperators, v: &NodalField) -> f64 {
    ops.stiffness_a.quadratic_form(v)
}
