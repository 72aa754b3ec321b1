use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::DiscreteDomain;
use crate::spectral::NodalField;

/// Named nonnegative profiles that vanish on Γ₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialProfile {
    /// Product of `sin(π d/2)` over the Γ₀ sides, `d` the distance to the side.
    #[default]
    SineCompatible,
    /// `cos²` bump of radius 1/4 centred in the domain.
    Bump,
    /// `min(1, 4 d₀)` with `d₀` the distance to Γ₀.
    Plateau,
    Zero,
}

impl InitialProfile {
    pub fn name(self) -> &'static str {
        match self {
            InitialProfile::SineCompatible => "sine_compatible",
            InitialProfile::Bump => "bump",
            InitialProfile::Plateau => "plateau",
            InitialProfile::Zero => "zero",
        }
    }

    pub fn evaluate(self, domain: &DiscreteDomain, p: [f64; 2]) -> f64 {
        let g0: Vec<_> = domain.gamma0_sides().collect();
        match self {
            InitialProfile::SineCompatible => g0.iter().map(|s| (0.5 * PI * s.distance(p)).sin()).product(),
            InitialProfile::Bump => {
                let c = 0.5;
                let r2 = if domain.dimension() == 1 {
                    (p[0] - c).powi(2)
                } else {
                    (p[0] - c).powi(2) + (p[1] - c).powi(2)
                };
                let r = r2.sqrt();
                if r < 0.25 {
                    (2.0 * PI * r).cos().powi(2)
                } else {
                    0.0
                }
            }
            InitialProfile::Plateau => {
                let d0 = g0.iter().map(|s| s.distance(p)).fold(f64::INFINITY, f64::min);
                (4.0 * d0).min(1.0)
            }
            InitialProfile::Zero => 0.0,
        }
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialProfile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "sine_compatible" => Ok(InitialProfile::SineCompatible),
            "bump" => Ok(InitialProfile::Bump),
            "plateau" => Ok(InitialProfile::Plateau),
            "zero" => Ok(InitialProfile::Zero),
            other => Err(format!("unknown initial profile '{other}'")),
        }
    }
}

/// Validated nodal initial data: finite, `u₀ ≥ 0`, `u₀ = 0` on Γ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    values: NodalField,
}

impl InitialData {
    pub fn new(domain: &DiscreteDomain, values: NodalField) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(Error::InitialData(format!(
                "expected {} nodal values, got {}",
                domain.n_nodes(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InitialData(format!("u0[{i}] = {} is not a nonnegative number", values[i])));
        }
        if let Some(&i) = domain.gamma0_nodes().iter().find(|&&i| values[i] != 0.0) {
            return Err(Error::InitialData(format!("u0 = {} on Dirichlet node {i}", values[i])));
        }
        Ok(InitialData { values })
    }

    pub fn from_profile(domain: &DiscreteDomain, profile: InitialProfile) -> Result<Self> {
        let values = NodalField::from_iterator(
            domain.n_nodes(),
            domain.node_coords().iter().map(|&p| profile.evaluate(domain, p)),
        );
        // sin(π/2 · 0) is exactly 0, so Γ₀ compatibility holds without projection
        Self::new(domain, values)
    }

    pub fn values(&self) -> &NodalField {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    /// `u₀δ = (1 − μ/‖u₀‖∞) u₀`, so that `0 ≤ u₀δ + μ ≤ ‖u₀‖∞` holds at t = 0.
    pub fn regularized(&self, mu: f64) -> Result<NodalField> {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return Ok(self.values.clone());
        }
        if mu >= sup {
            return Err(Error::InitialData(format!(
                "mu = {mu} must be below the data bound {sup}"
            )));
        }
        Ok(&self.values * (1.0 - mu / sup))
    }
}
