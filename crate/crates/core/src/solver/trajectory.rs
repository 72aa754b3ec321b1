use super::config::SolverConfig;
use super::flux::FluxEvaluation;
use super::initial::InitialData;
use super::step::Stepper;
use crate::error::{Error, Result};
use crate::problem::Discretization;
use crate::quadrature::{simplex_mean, Reciprocal};
use crate::spectral::NodalField;

/// `η(λ) = (λ+μ) log(1 + λ/μ) − λ`, evaluated at `λ⁺`.
pub fn eta(lambda: f64, mu: f64) -> f64 {
    let l = lambda.max(0.0);
    if l == 0.0 {
        return 0.0;
    }
    (l + mu) * (l / mu).ln_1p() - l
}

/// Per-state quantities recorded by the solver as it runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLedger {
    pub t: f64,
    /// Step size that produced this state (0 for the initial state).
    pub dt: f64,
    pub mass: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `∫ η(u)` by nodal quadrature.
    pub entropy: f64,
    /// `½ ‖H_s u‖²`.
    pub hs_energy: f64,
    pub clamp_count: usize,
    /// `∫ |∇u|²`.
    pub grad_sq: f64,
    /// `∫ |∇u|² / (μ + u)`.
    pub viscous_integrand: f64,
    /// `∫ |∇H_s u|²`.
    pub hs_grad_sq: f64,
    /// `∫ (μ + u) A∇K_s u · ∇K_s u` with element-average weights.
    pub transport_work: f64,
    /// `∫ (μ + u) |∇K_s u|²` with element-average weights.
    pub pressure_dissipation: f64,
    /// `‖(uⁿ − uⁿ⁻¹)/Δt‖` in the mass norm.
    pub rate_norm: f64,
    pub picard_iterations: usize,
    pub picard_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptEvent {
    pub t: f64,
    pub dt_from: f64,
    pub dt_to: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub config: SolverConfig,
    /// The unregularized data `u₀`.
    pub initial: NodalField,
    pub u0_sup: f64,
    pub times: Vec<f64>,
    /// `states[0]` is the regularized data `u₀δ`.
    pub states: Vec<NodalField>,
    pub ledgers: Vec<StepLedger>,
    pub adapt_events: Vec<AdaptEvent>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &NodalField {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Piecewise-linear-in-time interpolation, clamped to `[0, T]`.
    pub fn state_at(&self, t: f64) -> NodalField {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.states[0].clone();
        }
        if k == self.times.len() {
            return self.final_state().clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        &self.states[k - 1] * (1.0 - w) + &self.states[k] * w
    }

    /// `(undershoot, overshoot)` of `0 ≤ u + μ ≤ ‖u₀‖∞` at one state. The
    /// upper bound is vacuous for zero data.
    pub fn excursions(&self, u: &NodalField) -> (f64, f64) {
        excursions(u, self.config.mu, self.u0_sup)
    }
}

pub(crate) fn excursions(u: &NodalField, mu: f64, sup: f64) -> (f64, f64) {
    let under = (-u.min()).max(0.0);
    let over = if sup > 0.0 { (u.max() + mu - sup).max(0.0) } else { 0.0 };
    (under, over)
}

struct LedgerContext<'a> {
    disc: &'a Discretization,
    weights: Vec<f64>,
    mu: f64,
    neg_hs: f64,
}

impl LedgerContext<'_> {
    fn new<'d>(disc: &'d Discretization, config: &SolverConfig) -> LedgerContext<'d> {
        let ops = &disc.ops;
        let weights = (0..ops.n_nodes()).map(|r| ops.mass.row(r).map(|(_, v)| v).sum()).collect();
        LedgerContext {
            disc,
            weights,
            mu: config.mu,
            neg_hs: -config.s,
        }
    }

    fn viscous_integrand(&self, u: &NodalField) -> f64 {
        let domain = &self.disc.domain;
        let r = Reciprocal { mu: self.mu };
        let mut total = 0.0;
        let mut vals = [0.0; 3];
        for (e, el) in domain.elements().enumerate() {
            let geo = domain.geometry(e);
            for (slot, &i) in vals.iter_mut().zip(el) {
                *slot = u[i];
            }
            let g = geo.gradient(&vals[..el.len()]);
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 == 0.0 {
                continue;
            }
            for v in vals.iter_mut() {
                *v = v.max(0.0);
            }
            total += geo.volume * g2 * simplex_mean(&r, &vals[..el.len()]);
        }
        total
    }

    fn record(&self, t: f64, dt: f64, u: &NodalField, flux: &FluxEvaluation, rate_norm: f64) -> StepLedger {
        let dec = &self.disc.dec;
        let ops = &self.disc.ops;
        let coeffs = dec.coefficients(u);
        let hs_energy = 0.5
            * coeffs
                .iter()
                .zip(dec.eigenvalues().iter())
                .map(|(c, l)| l.powf(self.neg_hs) * c * c)
                .sum::<f64>();
        let hs_u = dec.apply_power(0.5 * self.neg_hs, u);
        let entropy = if self.mu > 0.0 {
            self.weights.iter().zip(u.iter()).map(|(w, &v)| w * eta(v, self.mu)).sum()
        } else {
            f64::NAN
        };
        StepLedger {
            t,
            dt,
            mass: ops.integral(u),
            min_u: u.min(),
            max_u: u.max(),
            entropy,
            hs_energy,
            clamp_count: flux.clamp_count,
            grad_sq: ops.stiffness_i.quadratic_form(u),
            viscous_integrand: if self.mu > 0.0 { self.viscous_integrand(u) } else { f64::NAN },
            hs_grad_sq: ops.stiffness_i.quadratic_form(&hs_u),
            transport_work: flux.transport_work,
            pressure_dissipation: flux.pressure_dissipation,
            rate_norm,
            picard_iterations: 0,
            picard_converged: true,
        }
    }
}

/// Time-steps the regularized problem from `u₀δ` to `t_end`.
pub fn run(disc: &Discretization, u0: &InitialData, config: &SolverConfig) -> Result<StateTrajectory> {
    config.validate()?;
    if config.mass_mode != disc.ops.mass_mode {
        return Err(Error::Config(format!(
            "solver mass mode {} differs from the assembled {}",
            config.mass_mode, disc.ops.mass_mode
        )));
    }
    let sup = u0.sup_norm();
    let tol_neg = config.tol_neg_rel * sup;
    let tol_pos = config.tol_pos_rel * sup;
    let ctx = LedgerContext::new(disc, config);
    let mut stepper = Stepper::new(disc, config)?;

    let mut u = u0.regularized(config.mu)?;
    let mut flux = stepper.flux(config, &u);
    let mut traj = StateTrajectory {
        config: config.clone(),
        initial: u0.values().clone(),
        u0_sup: sup,
        times: vec![0.0],
        states: vec![u.clone()],
        ledgers: vec![ctx.record(0.0, 0.0, &u, &flux, 0.0)],
        adapt_events: Vec::new(),
    };

    let t_end = config.t_end;
    let mut t = 0.0;
    let mut dt = config.dt;
    let mut base_t = 0.0;
    let mut since_base = 0usize;
    while t_end - t > 1e-12 * t_end {
        let mut halvings = 0;
        let (outcome, h, t_next) = loop {
            let remaining = t_end - t;
            let (h, t_next) = if (remaining - dt).abs() <= 1e-9 * dt {
                (dt, t_end)
            } else if remaining < dt {
                (remaining, t_end)
            } else {
                (dt, base_t + (since_base + 1) as f64 * dt)
            };
            let reason = match stepper.step(config, &u, &flux, t, h) {
                Ok(out) => {
                    let (under, over) = excursions(&out.u_next, config.mu, sup);
                    if !config.adapt || (under <= tol_neg && over <= tol_pos) {
                        break (out, h, t_next);
                    }
                    format!("bounds: undershoot {under:e}, overshoot {over:e}")
                }
                Err(Error::StepRejected { reason, .. }) if config.adapt => reason,
                Err(Error::StepRejected { reason, .. }) => return Err(Error::StepRejected { t, reason }),
                Err(e) => return Err(e),
            };
            if halvings == config.max_halvings {
                return Err(Error::Aborted {
                    t,
                    halvings,
                    min_u: u.min(),
                    max_u: u.max(),
                });
            }
            traj.adapt_events.push(AdaptEvent {
                t,
                dt_from: dt,
                dt_to: dt / 2.0,
                reason,
            });
            dt /= 2.0;
            base_t = t;
            since_base = 0;
            halvings += 1;
        };
        let next_flux = stepper.flux(config, &outcome.u_next);
        let rate = disc.ops.mass_norm(&(&outcome.u_next - &u)) / h;
        let mut ledger = ctx.record(t_next, h, &outcome.u_next, &next_flux, rate);
        ledger.picard_iterations = outcome.picard_iterations;
        ledger.picard_converged = outcome.picard_converged;
        traj.times.push(t_next);
        traj.states.push(outcome.u_next.clone());
        traj.ledgers.push(ledger);
        u = outcome.u_next;
        flux = next_flux;
        t = t_next;
        since_base += 1;
    }
    Ok(traj)
}
