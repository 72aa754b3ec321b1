//! Spectral fractional calculus for the mixed Dirichlet–Neumann operator
//! `L = -div(A(x)∇·)` and a time stepper for the regularized degenerate
//! nonlocal equation
//!
//! ```text
//! ∂t u - δ div(A∇u) = div((μ + u) A ∇K_s u),   K_s = L^{-s}
//! ```
//!
//! with `u = 0` on Γ₀ and the combined conormal flux vanishing on Γ₁.
//! Every estimate the continuous problem satisfies (bounds, mass balance,
//! entropy and `H_s` energy ledgers, boundary and initial traces) is exposed as
//! an executable check in [`diagnostics`].

pub mod assembly;
pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod operator_laws;
pub mod problem;
pub mod quadrature;
pub mod shells;
pub mod solver;
pub mod spectral;

pub use assembly::{assemble, AssembledOperators, MassMode, SparseMatrix};
pub use coefficients::{build_coefficients, CoefficientField, CoefficientSpec};
pub use error::{Error, Result};
pub use problem::Discretization;
pub use mesh::{build_domain, DiscreteDomain, Side};
pub use shells::{build_shells, ShellFamily};
pub use spectral::{eigendecompose, FractionalExponent, NodalField, SpectralDecomposition};
