//! Randomized checks of the identities the spectral calculus must satisfy.
//!
//! Each law evaluates its two sides along independent routes: inner products
//! and gradient energies through the assembled sparse operators, fractional
//! norms through spectral sums.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::AssembledOperators;
use crate::spectral::{a_gradient_energy, gradient_energy, SpectralDecomposition};

/// Relative tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Relative allowance for inequalities that are tight up to roundoff.
const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LawResult {
    pub name: &'static str,
    /// Worst relative defect for identities, worst relative excess for inequalities.
    pub max_violation: f64,
    /// Number of trials where an inequality failed.
    pub violations: usize,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorLawReport {
    pub trials: usize,
    pub s_grid: Vec<f64>,
    pub laws: Vec<LawResult>,
}

impl OperatorLawReport {
    pub fn all_pass(&self) -> bool {
        self.laws.iter().all(|l| l.pass)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.name == name)
    }
}

#[derive(Default)]
struct Tally {
    worst: f64,
    violations: usize,
}

impl Tally {
    fn identity(&mut self, lhs: f64, rhs: f64, scale: f64) {
        let scale = scale.max(f64::MIN_POSITIVE);
        self.worst = self.worst.max((lhs - rhs).abs() / scale);
    }

    /// Records `lhs ≤ rhs`.
    fn at_most(&mut self, lhs: f64, rhs: f64) {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let excess = (lhs - rhs) / scale;
        if excess > INEQUALITY_SLACK {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess.max(0.0));
    }

    fn identity_result(self, name: &'static str) -> LawResult {
        LawResult {
            name,
            max_violation: self.worst,
            violations: usize::from(self.worst > IDENTITY_TOL),
            tolerance: IDENTITY_TOL,
            pass: self.worst <= IDENTITY_TOL,
        }
    }

    fn inequality_result(self, name: &'static str) -> LawResult {
        LawResult {
            name,
            max_violation: self.worst,
            violations: self.violations,
            tolerance: INEQUALITY_SLACK,
            pass: self.violations == 0,
        }
    }
}

pub const DEFAULT_S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn verify_operator_suite(
    dec: &SpectralDecomposition,
    ops: &AssembledOperators,
    trials: usize,
    seed: u64,
) -> OperatorLawReport {
    verify_operator_suite_on(dec, ops, trials, seed, &DEFAULT_S_GRID)
}

pub fn verify_operator_suite_on(
    dec: &SpectralDecomposition,
    ops: &AssembledOperators,
    trials: usize,
    seed: u64,
    s_grid: &[f64],
) -> OperatorLawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l1, l2) = (ops.lambda1, ops.lambda2);
    let lambda_min = dec.lambda_min();

    let mut self_adjoint = Tally::default();
    let mut inverse = Tally::default();
    let mut semigroup = Tally::default();
    let mut poincare = Tally::default();
    let mut half_identity = Tally::default();
    let mut sandwich = Tally::default();
    let mut flux_identity = Tally::default();
    let mut flux_sandwich = Tally::default();
    let mut grad_k_bound = Tally::default();
    let mut grad_h_bound = Tally::default();
    let mut embedding = Tally::default();

    for _ in 0..trials {
        let mut u = DVector::from_fn(ops.n_nodes(), |_, _| rng.random_range(-1.0..1.0));
        let mut v = DVector::from_fn(ops.n_nodes(), |_, _| rng.random_range(-1.0..1.0));
        ops.project_dirichlet(&mut u);
        ops.project_dirichlet(&mut v);
        let u_norm = ops.mass_norm(&u);
        let grad_u = gradient_energy(ops, &u);

        let a_energy = a_gradient_energy(ops, &u);
        let half = dec.fractional_norm(0.5, &u).powi(2);
        half_identity.identity(a_energy, half, a_energy.abs());
        sandwich.at_most(l1 * grad_u, half);
        sandwich.at_most(half, l2 * grad_u);

        for &s in s_grid {
            let ls_u = dec.apply_power(s, &u);
            let ls_v = dec.apply_power(s, &v);
            let left = ops.mass_inner(&ls_u, &v);
            let right = ops.mass_inner(&u, &ls_v);
            self_adjoint.identity(left, right, ops.mass_norm(&ls_u) * ops.mass_norm(&v));

            let back = dec.apply_power(s, &dec.apply_power(-s, &u));
            inverse.identity(ops.mass_norm(&(back - &u)), 0.0, u_norm);

            let split = dec.apply_power(0.5 * s, &dec.apply_power(0.5 * s, &u));
            semigroup.identity(ops.mass_norm(&(split - &ls_u)), 0.0, ops.mass_norm(&ls_u));
            let mixed = dec.apply_power(s, &dec.apply_power(-0.5 * s, &u));
            let direct = dec.apply_power(0.5 * s, &u);
            semigroup.identity(ops.mass_norm(&(mixed - &direct)), 0.0, ops.mass_norm(&direct));

            poincare.at_most(u_norm, lambda_min.powf(-s) * dec.fractional_norm(s, &u));

            let ks_u = dec.apply_power(-s, &u);
            let hs_u = dec.apply_power(-0.5 * s, &u);
            let flux = ks_u.dot(&ops.stiffness_a.mul_vec(&u));
            let spectral = dec.fractional_norm(0.5 * (1.0 - s), &u).powi(2);
            flux_identity.identity(flux, spectral, spectral);

            let grad_h = gradient_energy(ops, &hs_u);
            flux_sandwich.at_most(l1 * grad_h, flux);
            flux_sandwich.at_most(flux, l2 * grad_h);

            let c_omega = l2 / l1 * lambda_min.powf(-2.0 * s);
            grad_k_bound.at_most(gradient_energy(ops, &ks_u), c_omega * grad_u);
            let c_half = l2 / l1 * lambda_min.powf(-s);
            grad_h_bound.at_most(grad_h, c_half * grad_u);

            let (s1, s2) = (0.5 * s, s);
            let factor = 1f64.max(lambda_min.powf(s1 - s2));
            embedding.at_most(dec.fractional_norm(s1, &u), factor * dec.fractional_norm(s2, &u));
        }
    }

    OperatorLawReport {
        trials,
        s_grid: s_grid.to_vec(),
        laws: vec![
            self_adjoint.identity_result("self_adjoint"),
            inverse.identity_result("inverse_round_trip"),
            semigroup.identity_result("semigroup"),
            half_identity.identity_result("half_power_energy"),
            flux_identity.identity_result("flux_energy_identity"),
            poincare.inequality_result("poincare"),
            sandwich.inequality_result("norm_equivalence_sandwich"),
            flux_sandwich.inequality_result("flux_energy_sandwich"),
            grad_k_bound.inequality_result("grad_k_bound"),
            grad_h_bound.inequality_result("grad_h_bound"),
            embedding.inequality_result("domain_embedding"),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, MassMode};
    use crate::coefficients::{build_coefficients, CoefficientSpec};
    use crate::mesh::{build_domain, Side};
    use crate::spectral::eigendecompose;

    #[test]
    fn identity_coefficient_passes_tightly() {
        let d = build_domain(1, 40, &[Side::Left]).unwrap();
        let c = build_coefficients(&d, &CoefficientSpec::Identity).unwrap();
        let ops = assemble(&d, &c, MassMode::Lumped).unwrap();
        let dec = eigendecompose(&ops).unwrap();
        let report = verify_operator_suite(&dec, &ops, 10, 42);
        assert!(report.all_pass(), "{report:#?}");
        for law in &report.laws {
            assert!(law.max_violation < 1e-10, "{} {}", law.name, law.max_violation);
        }
    }

    #[test]
    fn anisotropic_square_passes() {
        let d = build_domain(2, 8, &[Side::Left, Side::Bottom]).unwrap();
        let c = build_coefficients(&d, &CoefficientSpec::constant_full(2.0, 0.5, 1.0)).unwrap();
        let ops = assemble(&d, &c, MassMode::Consistent).unwrap();
        let dec = eigendecompose(&ops).unwrap();
        let report = verify_operator_suite(&dec, &ops, 5, 9);
        assert!(report.all_pass(), "{report:#?}");
    }
}
