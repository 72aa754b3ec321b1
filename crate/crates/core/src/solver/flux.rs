use crate::problem::Discretization;
use crate::spectral::{FractionalExponent, NodalField};

/// The transport load `B(u)` and by-products of its evaluation.
#[derive(Debug, Clone)]
pub struct FluxEvaluation {
    /// `B_i = Σ_e (μ + ū_e)⁺ |e| A_e ∇(K_s u) · ∇φ_i`, on all nodes (Γ₀ rows included).
    pub load: NodalField,
    /// Pressure `K_s u`.
    pub potential: NodalField,
    /// Elements where `μ + ū_e < 0` was clamped to 0.
    pub clamp_count: usize,
    /// `(K_s u)ᵀ B(u) = Σ_e (μ + ū_e)⁺ |e| A_e ∇K_s u · ∇K_s u`.
    pub transport_work: f64,
    /// `Σ_e (μ + ū_e)⁺ |e| |∇K_s u|²`.
    pub pressure_dissipation: f64,
}

pub fn flux_form(disc: &Discretization, s: FractionalExponent, mu: f64, u: &NodalField) -> FluxEvaluation {
    let potential = disc.dec.k_s(s, u);
    flux_with_potential(disc, mu, u, potential)
}

/// Same as [`flux_form`] with a caller-supplied pressure field.
pub fn flux_with_potential(disc: &Discretization, mu: f64, u: &NodalField, potential: NodalField) -> FluxEvaluation {
    let domain = &disc.domain;
    let mut load = NodalField::zeros(domain.n_nodes());
    let mut clamp_count = 0;
    let mut transport_work = 0.0;
    let mut pressure_dissipation = 0.0;
    let mut local = [0.0; 3];
    for (e, el) in domain.elements().enumerate() {
        let geo = domain.geometry(e);
        let ubar = el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64;
        let mut w = mu + ubar;
        if w < 0.0 {
            w = 0.0;
            clamp_count += 1;
        }
        for (slot, &i) in local.iter_mut().zip(el) {
            *slot = potential[i];
        }
        let g = geo.gradient(&local[..el.len()]);
        let ag = disc.coeff.apply(e, g);
        let q = [w * ag[0], w * ag[1]];
        for (&i, grad_phi) in el.iter().zip(&geo.basis_gradients) {
            load[i] += geo.volume * (q[0] * grad_phi[0] + q[1] * grad_phi[1]);
        }
        transport_work += geo.volume * (q[0] * g[0] + q[1] * g[1]);
        pressure_dissipation += geo.volume * w * (g[0] * g[0] + g[1] * g[1]);
    }
    FluxEvaluation {
        load,
        potential,
        clamp_count,
        transport_work,
        pressure_dissipation,
    }
}
