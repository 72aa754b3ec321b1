use std::f64::consts::PI;

use super::recompute::element_square_integral;
use super::report::{ReportRow, Verdict};
use super::weak::TestFunction;
use crate::mesh::Side;
use crate::problem::Discretization;
use crate::shells::ShellFamily;
use crate::solver::{flux_form, StateTrajectory};
use crate::spectral::NodalField;

/// Boundary weight `γ` on Γ₁: 1 in 1D, `sin(π t)` along the side in 2D.
pub fn boundary_weight(dimension: usize, side: Side, p: [f64; 2]) -> f64 {
    if dimension == 1 {
        1.0
    } else {
        (PI * side.tangential(p)).sin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellFluxReport {
    pub taus: Vec<f64>,
    /// Time-integrated `∫∫_{shell τ} (μ+u) A∇K_s u · ν γ`.
    pub fluxes: Vec<f64>,
    /// `|flux|` non-increasing as τ decreases over the three shells nearest Γ₁.
    pub trend_ok: bool,
}

impl ShellFluxReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = self
            .taus
            .iter()
            .zip(&self.fluxes)
            .map(|(&t, &f)| ReportRow::info("shell_flux", "flux", Some(t), f))
            .collect();
        rows.push(ReportRow::new(
            "shell_flux",
            "trend_last3",
            None,
            f64::from(u8::from(self.trend_ok)),
            Some(1.0),
            Verdict::from_bool(self.trend_ok),
        ));
        rows
    }
}

/// Shell flux of one state: `Σ_{e ∈ strip} |e| q_e · ∇ψ`, where `ψ` equals
/// `γ` on the shell nodes and 0 one layer further in. On the τ = 0 shell this
/// is `Σ_{i∈Γ₁} γ_i B_i(u)`.
pub fn shell_flux_at(disc: &Discretization, shells: &ShellFamily, s: f64, mu: f64, u: &NodalField) -> Vec<f64> {
    let fe = flux_form(disc, crate::spectral::FractionalExponent::new(s).expect("valid s"), mu, u);
    let domain = &disc.domain;
    let coords = domain.node_coords();
    let mut psi = vec![0.0; domain.n_nodes()];
    let mut buf_k = [0.0; 3];
    let mut buf_p = [0.0; 3];
    shells
        .shells
        .iter()
        .map(|shell| {
            let mut total = 0.0;
            for piece in &shell.pieces {
                for &i in &piece.nodes {
                    psi[i] = boundary_weight(domain.dimension(), piece.side, coords[i]);
                }
                for &e in &piece.strip_elements {
                    let el = domain.element(e);
                    let geo = domain.geometry(e);
                    let ubar = el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64;
                    let w = (mu + ubar).max(0.0);
                    for (a, &i) in el.iter().enumerate() {
                        buf_k[a] = fe.potential[i];
                        buf_p[a] = psi[i];
                    }
                    let gk = geo.gradient(&buf_k[..el.len()]);
                    let gp = geo.gradient(&buf_p[..el.len()]);
                    let q = disc.coeff.apply(e, gk);
                    total += geo.volume * w * (q[0] * gp[0] + q[1] * gp[1]);
                }
                for &i in &piece.nodes {
                    psi[i] = 0.0;
                }
            }
            total
        })
        .collect()
}

/// `Σ_{i∈Γ₁} γ_i B_i(u)` from the assembled load, for the τ = 0 consistency check.
pub fn gamma1_load_pairing(disc: &Discretization, shells: &ShellFamily, s: f64, mu: f64, u: &NodalField) -> f64 {
    let fe = flux_form(disc, crate::spectral::FractionalExponent::new(s).expect("valid s"), mu, u);
    let coords = disc.domain.node_coords();
    shells.shells[0]
        .pieces
        .iter()
        .flat_map(|p| p.nodes.iter().map(move |&i| (p.side, i)))
        .map(|(side, i)| boundary_weight(disc.domain.dimension(), side, coords[i]) * fe.load[i])
        .sum()
}

pub fn shell_flux(traj: &StateTrajectory, disc: &Discretization, shells: &ShellFamily) -> ShellFluxReport {
    let cfg = &traj.config;
    let per_state: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|u| shell_flux_at(disc, shells, cfg.s, cfg.mu, u))
        .collect();
    let mut fluxes = vec![0.0; shells.len()];
    for k in 1..traj.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        for (j, f) in fluxes.iter_mut().enumerate() {
            *f += 0.5 * dt * (per_state[k][j] + per_state[k - 1][j]);
        }
    }
    let n = fluxes.len().min(3);
    // shells are ordered τ = 0 first; as τ decreases |flux| must not grow
    let trend_ok = (1..n).all(|j| fluxes[j - 1].abs() <= fluxes[j].abs());
    ShellFluxReport {
        taus: shells.tau_values(),
        fluxes,
        trend_ok,
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletScalingReport {
    pub s: f64,
    pub taus: Vec<f64>,
    /// `g(τ) = (1/τ) ∫₀^τ ∫_{Γ₀} |u(r − τ'ν)|² dr dτ'`.
    pub g: Vec<f64>,
    /// `None` when `g` vanishes on some layer and the fit is undefined.
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    /// `1 − 2s`.
    pub expected: f64,
    /// Meaningful only for `s > 1/2`; the bound is one-sided, so the check is
    /// `slope ≥ (1 − 2s) − 0.5`.
    pub within_band: Option<bool>,
}

impl DirichletScalingReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = self
            .taus
            .iter()
            .zip(&self.g)
            .map(|(&t, &g)| ReportRow::info("dirichlet_scaling", "g", Some(t), g))
            .collect();
        rows.push(ReportRow::new(
            "dirichlet_scaling",
            "slope",
            Some(self.s),
            self.slope.unwrap_or(f64::NAN),
            Some(self.expected),
            Verdict::Info,
        ));
        rows.push(ReportRow::info(
            "dirichlet_scaling",
            "fit_residual",
            Some(self.s),
            self.residual.unwrap_or(f64::NAN),
        ));
        rows
    }
}

/// Layer index of `node` away from `side`.
fn layer(disc: &Discretization, side: Side, node: usize) -> usize {
    let n = disc.domain.resolution();
    let (i, j) = disc.domain.grid_index(node);
    match side {
        Side::Left => i,
        Side::Right => n - i,
        Side::Bottom => j,
        Side::Top => n - j,
    }
}

/// `g(τ_k)` for `τ_k = k h`, `k = 1..=layers`, exact for the P1 field.
pub fn dirichlet_layers(disc: &Discretization, u: &NodalField, layers: usize) -> (Vec<f64>, Vec<f64>) {
    let h = disc.domain.spacing();
    let sides: Vec<Side> = disc.domain.gamma0_sides().collect();
    let mut per_layer = vec![0.0; layers];
    for (e, el) in disc.domain.elements().enumerate() {
        for &side in &sides {
            let deepest = el.iter().map(|&i| layer(disc, side, i)).max().unwrap();
            if deepest >= 1 && deepest <= layers {
                per_layer[deepest - 1] += element_square_integral(disc, u, e);
            }
        }
    }
    let mut acc = 0.0;
    let mut taus = Vec::with_capacity(layers);
    let mut g = Vec::with_capacity(layers);
    for (k, v) in per_layer.iter().enumerate() {
        acc += v;
        let tau = (k + 1) as f64 * h;
        taus.push(tau);
        g.push(acc / tau);
    }
    (taus, g)
}

pub fn dirichlet_scaling_of(disc: &Discretization, u: &NodalField, s: f64, layers: usize) -> DirichletScalingReport {
    let (taus, g) = dirichlet_layers(disc, u, layers);
    let (slope, residual) = if g.iter().all(|&v| v > 0.0) && g.len() >= 2 {
        let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let ly: Vec<f64> = g.iter().map(|v| v.ln()).collect();
        let (sl, _, r) = fit_line(&lx, &ly);
        (Some(sl), Some(r))
    } else {
        (None, None)
    };
    let expected = 1.0 - 2.0 * s;
    let within_band = if s > 0.5 { slope.map(|sl| sl >= expected - 0.5) } else { None };
    DirichletScalingReport {
        s,
        taus,
        g,
        slope,
        residual,
        expected,
        within_band,
    }
}

/// Scaling of the final state of a trajectory.
pub fn dirichlet_scaling(traj: &StateTrajectory, disc: &Discretization, layers: usize) -> DirichletScalingReport {
    dirichlet_scaling_of(disc, traj.final_state(), traj.config.s, layers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialTraceReport {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// `e(tⁿ) = |∫uⁿζ − ∫u⁰ζ|`, first index test, second index step.
    pub errors: Vec<Vec<f64>>,
    /// `C = ‖(u¹ − u⁰)/Δt‖`.
    pub constant: f64,
    pub dt: f64,
    pub zeta_norms: Vec<f64>,
    pub pass: bool,
}

impl InitialTraceReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = vec![ReportRow::info("initial_trace", "C", None, self.constant)];
        for ((label, e), zn) in self.labels.iter().zip(&self.errors).zip(&self.zeta_norms) {
            let bound = self.constant * self.dt * zn;
            let first = e.get(1).copied().unwrap_or(0.0);
            rows.push(ReportRow::new(
                "initial_trace",
                label,
                self.times.get(1).copied(),
                first,
                Some(bound),
                Verdict::from_bool(first <= bound * (1.0 + 1e-12)),
            ));
        }
        rows
    }
}

/// Pairings with the regularized data over the first `steps` steps.
pub fn initial_trace(traj: &StateTrajectory, disc: &Discretization, bank: &[TestFunction], steps: usize) -> InitialTraceReport {
    let last = steps.min(traj.len() - 1);
    let mass = &disc.ops.mass;
    let u0 = &traj.states[0];
    let mut labels = Vec::new();
    let mut errors: Vec<Vec<f64>> = Vec::new();
    let mut zeta_norms = Vec::new();
    let mut seen: Vec<&NodalField> = Vec::new();
    for test in bank {
        if seen.iter().any(|z| **z == test.zeta) {
            continue;
        }
        seen.push(&test.zeta);
        let mz = mass.mul_vec(&test.zeta);
        let base = u0.dot(&mz);
        errors.push((0..=last).map(|k| (traj.states[k].dot(&mz) - base).abs()).collect());
        zeta_norms.push(disc.ops.mass_norm(&test.zeta));
        labels.push(test.label.split('_').next().unwrap_or(&test.label).to_string());
    }
    let (constant, dt) = if traj.len() > 1 {
        let dt = traj.times[1] - traj.times[0];
        (disc.ops.mass_norm(&(&traj.states[1] - u0)) / dt, dt)
    } else {
        (0.0, 0.0)
    };
    let pass = errors
        .iter()
        .zip(&zeta_norms)
        .all(|(e, zn)| e.get(1).copied().unwrap_or(0.0) <= constant * dt * zn * (1.0 + 1e-12));
    InitialTraceReport {
        labels,
        times: traj.times[..=last].to_vec(),
        errors,
        constant,
        dt,
        zeta_norms,
        pass,
    }
}
