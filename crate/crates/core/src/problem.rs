use crate::assembly::{assemble, AssembledOperators, MassMode};
use crate::coefficients::{build_coefficients, CoefficientField, CoefficientSpec};
use crate::error::Result;
use crate::mesh::{build_domain, DiscreteDomain, Side};
use crate::spectral::{eigendecompose, SpectralDecomposition};

/// Everything derived from the geometry and coefficient: mesh, sampled `A`,
/// assembled operators and the eigen-decomposition. Immutable once built and
/// shared read-only between runs.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub domain: DiscreteDomain,
    pub coeff: CoefficientField,
    pub ops: AssembledOperators,
    pub dec: SpectralDecomposition,
}

impl Discretization {
    pub fn build(
        dimension: usize,
        resolution: usize,
        gamma0: &[Side],
        spec: &CoefficientSpec,
        mass_mode: MassMode,
    ) -> Result<Self> {
        let domain = build_domain(dimension, resolution, gamma0)?;
        Self::from_domain(domain, spec, mass_mode)
    }

    pub fn from_domain(domain: DiscreteDomain, spec: &CoefficientSpec, mass_mode: MassMode) -> Result<Self> {
        let coeff = build_coefficients(&domain, spec)?;
        let ops = assemble(&domain, &coeff, mass_mode)?;
        let dec = eigendecompose(&ops)?;
        Ok(Discretization { domain, coeff, ops, dec })
    }

    pub fn n_nodes(&self) -> usize {
        self.domain.n_nodes()
    }
}
