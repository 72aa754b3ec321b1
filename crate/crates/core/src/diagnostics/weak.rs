use super::report::{ReportRow, Verdict};
use crate::problem::Discretization;
use crate::solver::StateTrajectory;
use crate::spectral::NodalField;

/// Smoothed step: `H(r) = 35/32 (r − r³ + 3r⁵/5 − r⁷/7) + 1/2` on `[−1, 1]`,
/// 0 below and 1 above. It is `C³` at the junctions.
pub fn smooth_step(r: f64) -> f64 {
    if r <= -1.0 {
        0.0
    } else if r >= 1.0 {
        1.0
    } else {
        let r2 = r * r;
        35.0 / 32.0 * r * (1.0 - r2 + 0.6 * r2 * r2 - r2 * r2 * r2 / 7.0) + 0.5
    }
}

pub fn smooth_step_derivative(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        35.0 / 32.0 * (1.0 - r * r).powi(3)
    }
}

/// Time profiles `θ` with `θ(T) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `1 − H((t − 0.5T)/(0.25T))`.
    EarlyDrop,
    /// `1 − H((t − 0.75T)/(0.2T))`.
    LateDrop,
    /// `H((t − 0.3T)/(0.2T)) − H((t − 0.7T)/(0.2T))`, zero at both ends.
    Window,
    /// `27/4 (t/T)(1 − t/T)²`, zero at both ends with peak 1.
    CubicBump,
}

impl TimeProfile {
    pub const ALL: [TimeProfile; 4] = [
        TimeProfile::EarlyDrop,
        TimeProfile::LateDrop,
        TimeProfile::Window,
        TimeProfile::CubicBump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TimeProfile::EarlyDrop => "early_drop",
            TimeProfile::LateDrop => "late_drop",
            TimeProfile::Window => "window",
            TimeProfile::CubicBump => "cubic_bump",
        }
    }

    /// `(θ(t), θ'(t))` on horizon `t_end`.
    pub fn eval(self, t: f64, t_end: f64) -> (f64, f64) {
        let step = |c: f64, w: f64| {
            let r = (t - c * t_end) / (w * t_end);
            (smooth_step(r), smooth_step_derivative(r) / (w * t_end))
        };
        match self {
            TimeProfile::EarlyDrop => {
                let (h, dh) = step(0.5, 0.25);
                (1.0 - h, -dh)
            }
            TimeProfile::LateDrop => {
                let (h, dh) = step(0.75, 0.2);
                (1.0 - h, -dh)
            }
            TimeProfile::Window => {
                let (a, da) = step(0.3, 0.2);
                let (b, db) = step(0.7, 0.2);
                (a - b, da - db)
            }
            TimeProfile::CubicBump => {
                let x = t / t_end;
                (6.75 * x * (1.0 - x).powi(2), 6.75 * (1.0 - x) * (1.0 - 3.0 * x) / t_end)
            }
        }
    }
}

/// Separable test `φ(t, x) = θ(t) ζ(x)`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub label: String,
    pub theta: TimeProfile,
    pub zeta: NodalField,
    /// Spectral mode index of `ζ`, when `ζ` is an eigenvector.
    pub mode: Option<usize>,
}

/// Low modes × time profiles: `n_modes · 4` tests.
pub fn test_bank(disc: &Discretization, n_modes: usize) -> Vec<TestFunction> {
    let n = n_modes.min(disc.dec.n_modes());
    let mut bank = Vec::with_capacity(4 * n);
    for k in 0..n {
        let zeta = disc.dec.mode(k);
        for theta in TimeProfile::ALL {
            bank.push(TestFunction {
                label: format!("phi{}_{}", k + 1, theta.name()),
                theta,
                zeta: zeta.clone(),
                mode: Some(k),
            });
        }
    }
    bank
}

/// Which weak identity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakForm {
    /// Limit problem: `∫∫ u θ'ζ − θ u A∇K_s u·∇ζ + ∫u₀ θ(0) ζ`.
    Limit,
    /// Regularized problem: flux `(μ+u)`, viscosity `δ`, data `u₀δ`.
    Regularized,
}

/// Spatial pieces per state: `∫uζ`, `∫ w A∇K_s u·∇ζ` and `∫A∇u·∇ζ`, where
/// `w` is `ū_e` or `(μ+ū_e)⁺`.
fn nodal_terms(disc: &Discretization, s: f64, mu_weight: Option<f64>, u: &NodalField, zeta: &NodalField) -> (f64, f64, f64) {
    let pairing = u.dot(&disc.ops.mass.mul_vec(zeta));
    let k = disc.dec.apply_power(-s, u);
    let mut flux = 0.0;
    let mut buf_k = [0.0; 3];
    let mut buf_z = [0.0; 3];
    for (e, el) in disc.domain.elements().enumerate() {
        let geo = disc.domain.geometry(e);
        let ubar = el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64;
        let w = match mu_weight {
            None => ubar,
            Some(mu) => (mu + ubar).max(0.0),
        };
        for (a, &i) in el.iter().enumerate() {
            buf_k[a] = k[i];
            buf_z[a] = zeta[i];
        }
        let gk = geo.gradient(&buf_k[..el.len()]);
        let gz = geo.gradient(&buf_z[..el.len()]);
        let agk = disc.coeff.apply(e, gk);
        flux += geo.volume * w * (agk[0] * gz[0] + agk[1] * gz[1]);
    }
    let visc = zeta.dot(&disc.ops.stiffness_a.mul_vec(u));
    (pairing, flux, visc)
}

/// Same pieces through spectral coefficients: `∫uζ = Σ c_k(u) c_k(ζ)` and the
/// flux as `Σ_k λ_k^{−s} c_k(u) ∫ w A∇φ_k·∇ζ`.
fn spectral_terms(disc: &Discretization, s: f64, mu_weight: Option<f64>, u: &NodalField, zeta: &NodalField) -> (f64, f64, f64) {
    let cu = disc.dec.coefficients(u);
    let cz = disc.dec.coefficients(zeta);
    let pairing = cu.dot(&cz);
    let lambdas = disc.dec.eigenvalues();
    let phi = disc.dec.eigenvectors();
    let mut flux = 0.0;
    let mut buf = [0.0; 3];
    let mut buf_z = [0.0; 3];
    // per element: w_e |e| ∇ζ_e, contracted with A_e ∇φ_k
    let weights: Vec<(f64, [f64; 2])> = disc
        .domain
        .elements()
        .enumerate()
        .map(|(e, el)| {
            let geo = disc.domain.geometry(e);
            let ubar = el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64;
            let w = match mu_weight {
                None => ubar,
                Some(mu) => (mu + ubar).max(0.0),
            };
            for (a, &i) in el.iter().enumerate() {
                buf_z[a] = zeta[i];
            }
            (w * geo.volume, geo.gradient(&buf_z[..el.len()]))
        })
        .collect();
    for k in 0..disc.dec.n_modes() {
        let a_k = lambdas[k].powf(-s) * cu[k];
        if a_k == 0.0 {
            continue;
        }
        let mut g_k = 0.0;
        for (e, el) in disc.domain.elements().enumerate() {
            let (wv, gz) = weights[e];
            if wv == 0.0 {
                continue;
            }
            for (a, &i) in el.iter().enumerate() {
                buf[a] = phi[(i, k)];
            }
            let gp = disc.domain.geometry(e).gradient(&buf[..el.len()]);
            let agp = disc.coeff.apply(e, gp);
            g_k += wv * (agp[0] * gz[0] + agp[1] * gz[1]);
        }
        flux += a_k * g_k;
    }
    // ∫A∇u·∇ζ = Σ λ_k c_k(u) c_k(ζ)
    let visc = cu.iter().zip(cz.iter()).zip(lambdas.iter()).map(|((a, b), l)| l * a * b).sum();
    (pairing, flux, visc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Nodal,
    Spectral,
}

/// `R(φ)` for one test, trapezoid in time.
pub fn residual(traj: &StateTrajectory, disc: &Discretization, test: &TestFunction, form: WeakForm, how: Evaluation) -> f64 {
    let cfg = &traj.config;
    let t_end = *traj.times.last().unwrap();
    let (mu_weight, delta) = match form {
        WeakForm::Limit => (None, 0.0),
        WeakForm::Regularized => (Some(cfg.mu), cfg.delta),
    };
    let integrand: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let (th, dth) = test.theta.eval(t, t_end);
            let (pair, flux, visc) = match how {
                Evaluation::Nodal => nodal_terms(disc, cfg.s, mu_weight, u, &test.zeta),
                Evaluation::Spectral => spectral_terms(disc, cfg.s, mu_weight, u, &test.zeta),
            };
            dth * pair - th * (flux + delta * visc)
        })
        .collect();
    let mut total = 0.0;
    for k in 1..integrand.len() {
        total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (integrand[k] + integrand[k - 1]);
    }
    let data = match form {
        WeakForm::Limit => &traj.initial,
        WeakForm::Regularized => &traj.states[0],
    };
    let (th0, _) = test.theta.eval(0.0, t_end);
    let data_term = match how {
        Evaluation::Nodal => data.dot(&disc.ops.mass.mul_vec(&test.zeta)),
        Evaluation::Spectral => disc.dec.coefficients(data).dot(&disc.dec.coefficients(&test.zeta)),
    };
    total + th0 * data_term
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidualReport {
    pub form: WeakForm,
    pub labels: Vec<String>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
}

impl WeakResidualReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let check = match self.form {
            WeakForm::Limit => "weak_residual",
            WeakForm::Regularized => "weak_residual_regularized",
        };
        let mut rows: Vec<ReportRow> = self
            .labels
            .iter()
            .zip(&self.residuals)
            .map(|(l, r)| ReportRow::info(check, l, None, *r))
            .collect();
        rows.push(ReportRow::info(check, "max_abs", None, self.max_abs));
        rows
    }
}

pub fn weak_residual(traj: &StateTrajectory, disc: &Discretization, bank: &[TestFunction], form: WeakForm) -> WeakResidualReport {
    let residuals: Vec<f64> = bank
        .iter()
        .map(|t| residual(traj, disc, t, form, Evaluation::Nodal))
        .collect();
    WeakResidualReport {
        form,
        labels: bank.iter().map(|t| t.label.clone()).collect(),
        max_abs: residuals.iter().map(|r| r.abs()).fold(0.0, f64::max),
        residuals,
    }
}

/// Nodal versus spectral evaluation of the same residual.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleEvaluation {
    pub nodal: f64,
    pub spectral: f64,
    pub gap: f64,
    pub tolerance: f64,
}

impl DoubleEvaluation {
    pub fn pass(&self) -> bool {
        self.gap <= self.tolerance
    }

    pub fn row(&self) -> ReportRow {
        ReportRow::new(
            "weak_residual",
            "double_evaluation_gap",
            None,
            self.gap,
            Some(self.tolerance),
            Verdict::from_bool(self.pass()),
        )
    }
}

pub fn double_evaluation(traj: &StateTrajectory, disc: &Discretization, test: &TestFunction, form: WeakForm) -> DoubleEvaluation {
    let nodal = residual(traj, disc, test, form, Evaluation::Nodal);
    let spectral = residual(traj, disc, test, form, Evaluation::Spectral);
    DoubleEvaluation {
        nodal,
        spectral,
        gap: (nodal - spectral).abs(),
        tolerance: 1e-10,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::MassMode;
    use crate::coefficients::CoefficientSpec;
    use crate::mesh::Side;
    use crate::solver::{run, InitialData, InitialProfile, SolverConfig};

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert!((smooth_step(1.0 - 1e-15) - 1.0).abs() < 1e-12);
        assert!((smooth_step(0.0) - 0.5).abs() < 1e-15);
        // derivative by central difference
        for r in [-0.7, -0.1, 0.4, 0.9] {
            let fd = (smooth_step(r + 1e-6) - smooth_step(r - 1e-6)) / 2e-6;
            assert!((fd - smooth_step_derivative(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn profiles_vanish_at_horizon() {
        for p in TimeProfile::ALL {
            let (th, _) = p.eval(2.0, 2.0);
            assert!(th.abs() < 1e-14, "{p:?}");
            let t = 0.37;
            let fd = (p.eval(t + 1e-7, 2.0).0 - p.eval(t - 1e-7, 2.0).0) / 2e-7;
            assert!((fd - p.eval(t, 2.0).1).abs() < 1e-6, "{p:?}");
        }
        assert_eq!(TimeProfile::Window.eval(0.0, 1.0).0, 0.0);
        assert!((TimeProfile::CubicBump.eval(1.0 / 3.0, 1.0).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let d = Discretization::build(1, 20, &[Side::Left], &CoefficientSpec::Identity, MassMode::Lumped).unwrap();
        let u0 = InitialData::from_profile(&d.domain, InitialProfile::Zero).unwrap();
        let traj = run(&d, &u0, &SolverConfig { t_end: 0.002, ..Default::default() }).unwrap();
        let bank = test_bank(&d, 5);
        assert_eq!(bank.len(), 20);
        let rep = weak_residual(&traj, &d, &bank, WeakForm::Limit);
        assert_eq!(rep.max_abs, 0.0);
    }

    #[test]
    fn nodal_and_spectral_routes_agree() {
        let d = Discretization::build(1, 40, &[Side::Left], &CoefficientSpec::Identity, MassMode::Lumped).unwrap();
        let u0 = InitialData::from_profile(&d.domain, InitialProfile::SineCompatible).unwrap();
        let traj = run(&d, &u0, &SolverConfig { t_end: 0.01, ..Default::default() }).unwrap();
        let bank = test_bank(&d, 1);
        let cubic = bank.iter().find(|t| t.theta == TimeProfile::CubicBump).unwrap();
        for form in [WeakForm::Limit, WeakForm::Regularized] {
            let de = double_evaluation(&traj, &d, cubic, form);
            assert!(de.pass(), "{de:?}");
        }
    }
}
