use crate::assembly::MassMode;
use crate::error::{Error, Result};
use crate::spectral::FractionalExponent;

/// Parameters of one run of the regularized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub s: f64,
    /// Viscosity δ.
    pub delta: f64,
    /// Flux regularization μ.
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// 0 for plain IMEX, otherwise the Picard iteration cap.
    pub picard_iters: usize,
    pub picard_tol: f64,
    /// Halve Δt when a step breaks the bounds `0 ≤ u + μ ≤ ‖u₀‖∞`.
    pub adapt: bool,
    pub mass_mode: MassMode,
    /// Relative tolerances (times ‖u₀‖∞) for the bound checks.
    pub tol_neg_rel: f64,
    pub tol_pos_rel: f64,
    pub max_halvings: usize,
    /// Drop the transport term entirely (linear heat equation).
    pub disable_transport: bool,
    /// Allow δ = 0 (pure transport). Experimental; requires Picard.
    pub limit_replay: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            s: 0.5,
            delta: 1e-2,
            mu: 1e-2,
            dt: 1e-4,
            t_end: 0.1,
            picard_iters: 0,
            picard_tol: 1e-10,
            adapt: false,
            mass_mode: MassMode::Lumped,
            tol_neg_rel: 1e-8,
            tol_pos_rel: 1e-6,
            max_halvings: 10,
            disable_transport: false,
            limit_replay: false,
        }
    }
}

impl SolverConfig {
    pub fn exponent(&self) -> Result<FractionalExponent> {
        FractionalExponent::new(self.s)
    }

    /// Every violated constraint, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.s > 0.0 && self.s < 1.0) {
            out.push(format!("s must lie in (0,1), got {}", self.s));
        }
        if self.limit_replay {
            if !(0.0..=1.0).contains(&self.delta) {
                out.push(format!("delta must lie in [0,1] in limit replay, got {}", self.delta));
            }
            if !(0.0..=1.0).contains(&self.mu) {
                out.push(format!("mu must lie in [0,1] in limit replay, got {}", self.mu));
            }
            if self.picard_iters == 0 {
                out.push("limit replay requires picard_iters >= 1".into());
            }
        } else {
            if !(self.delta > 0.0 && self.delta <= 1.0) {
                out.push(format!("delta must lie in (0,1], got {}", self.delta));
            }
            if !(self.mu > 0.0 && self.mu <= 1.0) {
                out.push(format!("mu must lie in (0,1], got {}", self.mu));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.picard_tol.is_nan() || self.picard_tol <= 0.0 {
            out.push(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if !(self.tol_neg_rel >= 0.0 && self.tol_pos_rel >= 0.0) {
            out.push("bound tolerances must be nonnegative".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}
