use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, Dyn};

use super::config::SolverConfig;
use super::flux::{flux_form, FluxEvaluation};
use crate::error::{Error, Result};
use crate::problem::Discretization;
use crate::spectral::{FractionalExponent, NodalField};

/// Result of one accepted linear solve (plus Picard sweeps).
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u_next: NodalField,
    pub picard_iterations: usize,
    pub picard_converged: bool,
}

/// Factorizations of `M/Δt + δ K_A` on the free nodes, cached per Δt.
pub struct Stepper<'a> {
    disc: &'a Discretization,
    s: FractionalExponent,
    mass_free: DMatrix<f64>,
    stiff_free: DMatrix<f64>,
    factors: HashMap<u64, Cholesky<f64, Dyn>>,
}

impl<'a> Stepper<'a> {
    pub fn new(disc: &'a Discretization, config: &SolverConfig) -> Result<Self> {
        let free = &disc.ops.free_dofs;
        Ok(Stepper {
            disc,
            s: config.exponent()?,
            mass_free: disc.ops.mass.dense_submatrix(free),
            stiff_free: disc.ops.stiffness_a.dense_submatrix(free),
            factors: HashMap::new(),
        })
    }

    pub fn flux(&self, config: &SolverConfig, u: &NodalField) -> FluxEvaluation {
        if config.disable_transport {
            let n = u.len();
            return FluxEvaluation {
                load: NodalField::zeros(n),
                potential: self.disc.dec.k_s(self.s, u),
                clamp_count: 0,
                transport_work: 0.0,
                pressure_dissipation: 0.0,
            };
        }
        flux_form(self.disc, self.s, config.mu, u)
    }

    fn factor(&mut self, dt: f64, delta: f64) -> Result<&Cholesky<f64, Dyn>> {
        let key = dt.to_bits();
        if !self.factors.contains_key(&key) {
            let system = &self.mass_free / dt + &self.stiff_free * delta;
            let chol = system.cholesky().ok_or_else(|| Error::StepRejected {
                t: f64::NAN,
                reason: format!("step matrix not positive definite at dt = {dt}"),
            })?;
            self.factors.insert(key, chol);
        }
        Ok(&self.factors[&key])
    }

    /// Solves `(M/Δt + δK_A) x = (M/Δt) uⁿ − load` on the free nodes.
    fn solve(&mut self, u: &NodalField, load: &NodalField, dt: f64, delta: f64) -> Result<NodalField> {
        let ops = &self.disc.ops;
        let mu_n = ops.mass.mul_vec(u) / dt;
        let rhs = ops.restrict(&(mu_n - load));
        let x = self.factor(dt, delta)?.solve(&rhs);
        Ok(ops.extend(&x))
    }

    /// One IMEX step from `u` with the transport load `flux_u = B(u)`.
    pub fn step(
        &mut self,
        config: &SolverConfig,
        u: &NodalField,
        flux_u: &FluxEvaluation,
        t: f64,
        dt: f64,
    ) -> Result<StepOutcome> {
        let mut next = self.solve(u, &flux_u.load, dt, config.delta)?;
        let mut iterations = 0;
        let mut converged = config.picard_iters == 0;
        while iterations < config.picard_iters {
            let b = self.flux(config, &next);
            let candidate = self.solve(u, &b.load, dt, config.delta)?;
            iterations += 1;
            let change = self.disc.ops.mass_norm(&(&candidate - &next));
            next = candidate;
            if !change.is_finite() {
                break;
            }
            if change < config.picard_tol {
                converged = true;
                break;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepRejected {
                t,
                reason: "non-finite state".into(),
            });
        }
        if !converged {
            log::debug!("Picard cap reached at t = {t}");
        }
        Ok(StepOutcome {
            u_next: next,
            picard_iterations: iterations,
            picard_converged: converged,
        })
    }
}

/// Outflow through Γ₀ implied by the step equation: the Γ₀ rows of
/// `M(u¹ − u⁰)/Δt + δK_A u¹ + B(u⁰)`, summed with a minus sign. The mass
/// changes by exactly `−Δt` times this quantity.
pub fn boundary_outflow(disc: &Discretization, u0: &NodalField, u1: &NodalField, load: &NodalField, dt: f64, delta: f64) -> f64 {
    let ops = &disc.ops;
    let rate = ops.mass.mul_vec(&(u1 - u0)) / dt;
    let visc = ops.stiffness_a.mul_vec(u1) * delta;
    -disc
        .domain
        .gamma0_nodes()
        .iter()
        .map(|&i| rate[i] + visc[i] + load[i])
        .sum::<f64>()
}
