use super::recompute;
use super::report::{ReportRow, Verdict};
use crate::problem::Discretization;
use crate::solver::{eta, StateTrajectory};

/// Worst excursions from `0 ≤ u + μ ≤ ‖u₀‖∞` over the run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub max_undershoot: f64,
    pub max_overshoot: f64,
    pub tol_neg: f64,
    pub tol_pos: f64,
    pub adapt_events: usize,
    pub pass: bool,
}

impl BoundsReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        vec![
            ReportRow::new(
                "bounds",
                "undershoot",
                None,
                self.max_undershoot,
                Some(self.tol_neg),
                Verdict::from_bool(self.max_undershoot <= self.tol_neg),
            ),
            ReportRow::new(
                "bounds",
                "overshoot",
                None,
                self.max_overshoot,
                Some(self.tol_pos),
                Verdict::from_bool(self.max_overshoot <= self.tol_pos),
            ),
            ReportRow::info("bounds", "adapt_events", None, self.adapt_events as f64),
        ]
    }
}

pub fn check_bounds(traj: &StateTrajectory) -> BoundsReport {
    let (mut under, mut over) = (0.0f64, 0.0f64);
    for u in &traj.states {
        let (a, b) = traj.excursions(u);
        under = under.max(a);
        over = over.max(b);
    }
    let tol_neg = traj.config.tol_neg_rel * traj.u0_sup;
    let tol_pos = traj.config.tol_pos_rel * traj.u0_sup;
    BoundsReport {
        max_undershoot: under,
        max_overshoot: over,
        tol_neg,
        tol_pos,
        adapt_events: traj.adapt_events.len(),
        pass: under <= tol_neg && over <= tol_pos,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub initial_mass: f64,
    /// `|m(tⁿ) − m(0)| / m(0)` per state.
    pub drift: Vec<f64>,
    pub max_drift: f64,
    /// Set when `m(0) = 0`; drift is then reported as 0.
    pub zero_mass: bool,
}

impl MassReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        vec![
            ReportRow::info("mass", "initial_mass", Some(0.0), self.initial_mass),
            ReportRow::info("mass", "max_drift", None, self.max_drift),
            ReportRow::info("mass", "zero_mass_flag", None, f64::from(u8::from(self.zero_mass))),
        ]
    }
}

pub fn check_mass(traj: &StateTrajectory, disc: &Discretization) -> MassReport {
    let masses: Vec<f64> = traj.states.iter().map(|u| recompute::mass(disc, u)).collect();
    let m0 = masses[0];
    let zero_mass = m0 == 0.0;
    let drift: Vec<f64> = masses
        .iter()
        .map(|m| if zero_mass { 0.0 } else { (m - m0).abs() / m0.abs() })
        .collect();
    MassReport {
        initial_mass: m0,
        max_drift: drift.iter().copied().fold(0.0, f64::max),
        drift,
        zero_mass,
    }
}

/// Largest relative disagreement between the solver ledgers and the
/// recomputed quantities, per quantity, scaled by the series maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerAgreement {
    pub quantities: Vec<(&'static str, f64)>,
    pub tolerance: f64,
}

impl LedgerAgreement {
    pub fn pass(&self) -> bool {
        self.quantities.iter().all(|(_, v)| *v <= self.tolerance)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.quantities
            .iter()
            .map(|(name, v)| {
                ReportRow::new(
                    "ledger_agreement",
                    name,
                    None,
                    *v,
                    Some(self.tolerance),
                    Verdict::from_bool(*v <= self.tolerance),
                )
            })
            .collect()
    }
}

fn relative_gap(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    let pairs: Vec<(f64, f64)> = a.zip(b).collect();
    let scale = pairs.iter().map(|(x, y)| x.abs().max(y.abs())).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    pairs.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn check_ledger_agreement(traj: &StateTrajectory, disc: &Discretization) -> LedgerAgreement {
    let (s, mu) = (traj.config.s, traj.config.mu);
    let l = &traj.ledgers;
    let st = &traj.states;
    let mut quantities = vec![
        ("mass", relative_gap(l.iter().map(|x| x.mass), st.iter().map(|u| recompute::mass(disc, u)))),
        ("hs_energy", relative_gap(l.iter().map(|x| x.hs_energy), st.iter().map(|u| recompute::hs_energy(disc, s, u)))),
        ("grad_sq", relative_gap(l.iter().map(|x| x.grad_sq), st.iter().map(|u| recompute::grad_sq(disc, u)))),
        (
            "hs_grad_sq",
            relative_gap(
                l.iter().map(|x| x.hs_grad_sq),
                st.iter().map(|u| recompute::grad_sq(disc, &disc.dec.apply_power(-0.5 * s, u))),
            ),
        ),
    ];
    if mu > 0.0 {
        quantities.push((
            "entropy",
            relative_gap(l.iter().map(|x| x.entropy), st.iter().map(|u| recompute::entropy(disc, u, mu))),
        ));
        quantities.push((
            "viscous_integrand",
            relative_gap(
                l.iter().map(|x| x.viscous_integrand),
                st.iter().map(|u| recompute::viscous_integrand(disc, u, mu)),
            ),
        ));
    }
    if !traj.config.disable_transport {
        quantities.push((
            "pressure_dissipation",
            relative_gap(
                l.iter().map(|x| x.pressure_dissipation),
                st.iter().map(|u| recompute::pressure_dissipation(disc, s, mu, u)),
            ),
        ));
    }
    LedgerAgreement {
        quantities,
        tolerance: 1e-12,
    }
}

/// Cumulative trapezoid integral of `f` over the trajectory times.
pub(crate) fn cumulative_trapezoid(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..f.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (f[k] + f[k - 1]);
        out.push(acc);
    }
    out
}

/// Cumulative `Σ Δt_k |f_{k} − f_{k−1}|`: the time-discretization slack.
pub(crate) fn cumulative_variation(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..f.len() {
        acc += (times[k] - times[k - 1]) * (f[k] - f[k - 1]).abs();
        out.push(acc);
    }
    out
}

/// Slack constant: slack(tⁿ) = SLACK_C · Σ Δt |D^{k} − D^{k−1}|, with `D` the
/// dissipation rate in the inequality.
pub const SLACK_C: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FirstEnergyReport {
    pub initial_entropy: f64,
    /// Entropy plus accumulated dissipation, per state.
    pub lhs: Vec<f64>,
    pub slack: Vec<f64>,
    /// `max_n (lhs_n − initial_entropy)⁺`.
    pub max_excess: f64,
    pub max_slack: f64,
    pub pass: bool,
    /// Entropy alone is non-increasing up to slack.
    pub entropy_monotone: bool,
    pub corollary_lhs: f64,
    pub corollary_bound: f64,
    pub corollary_pass: bool,
}

impl FirstEnergyReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        vec![
            ReportRow::new(
                "first_energy",
                "max_excess",
                None,
                self.max_excess,
                Some(self.max_slack),
                Verdict::from_bool(self.pass),
            ),
            ReportRow::info("first_energy", "initial_entropy", Some(0.0), self.initial_entropy),
            ReportRow::new(
                "first_energy",
                "entropy_monotone",
                None,
                f64::from(u8::from(self.entropy_monotone)),
                Some(1.0),
                Verdict::from_bool(self.entropy_monotone),
            ),
            ReportRow::new(
                "first_energy",
                "viscous_gradient_bound",
                None,
                self.corollary_lhs,
                Some(self.corollary_bound),
                Verdict::from_bool(self.corollary_pass),
            ),
        ]
    }
}

/// Entropy inequality: `∫η(uⁿ) + Λ₁δ∫∫|∇u|²/(μ+u) + Λ₁∫∫|∇H_s u|² ≤ ∫η(u₀δ)`,
/// and its consequence `δ Σ Δt ‖∇uⁿ‖² ≤ ‖u₀‖∞ η(‖u₀‖∞) |Ω| / Λ₁`.
pub fn check_first_energy(traj: &StateTrajectory, disc: &Discretization) -> FirstEnergyReport {
    let cfg = &traj.config;
    let (s, mu, delta) = (cfg.s, cfg.mu, cfg.delta);
    let l1 = disc.ops.lambda1;
    let times = &traj.times;
    let entropy: Vec<f64> = traj.states.iter().map(|u| recompute::entropy(disc, u, mu)).collect();
    let rate: Vec<f64> = traj
        .states
        .iter()
        .map(|u| {
            let visc = recompute::viscous_integrand(disc, u, mu);
            let hs = recompute::grad_sq(disc, &disc.dec.apply_power(-0.5 * s, u));
            l1 * (delta * visc + hs)
        })
        .collect();
    let dissipated = cumulative_trapezoid(times, &rate);
    let slack: Vec<f64> = cumulative_variation(times, &rate).iter().map(|v| SLACK_C * v).collect();
    let e0 = entropy[0];
    let lhs: Vec<f64> = entropy.iter().zip(&dissipated).map(|(e, d)| e + d).collect();
    let max_excess = lhs.iter().map(|v| (v - e0).max(0.0)).fold(0.0, f64::max);
    let pass = lhs.iter().zip(&slack).all(|(v, sl)| *v <= e0 + sl + 1e-14 * e0.abs());
    let entropy_monotone = (1..entropy.len())
        .all(|k| entropy[k] <= entropy[k - 1] + (slack[k] - slack[k - 1]) + 1e-14 * entropy[k - 1].abs());

    let corollary_lhs = delta
        * (1..traj.len())
            .map(|k| (times[k] - times[k - 1]) * recompute::grad_sq(disc, &traj.states[k]))
            .sum::<f64>();
    let sup = traj.u0_sup;
    let corollary_bound = if sup > 0.0 {
        sup * eta(sup, mu) * disc.domain.measure() / l1
    } else {
        0.0
    };
    FirstEnergyReport {
        initial_entropy: e0,
        max_slack: slack.last().copied().unwrap_or(0.0),
        lhs,
        slack,
        max_excess,
        pass,
        entropy_monotone,
        corollary_lhs,
        corollary_bound,
        corollary_pass: corollary_lhs <= corollary_bound,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondEnergyReport {
    /// `½ ‖H_s uⁿ‖²` per state.
    pub energy: Vec<f64>,
    pub pairs_checked: usize,
    /// Worst `lhs − rhs` over the checked pairs, without slack.
    pub max_excess: f64,
    pub max_slack: f64,
    pub pass: bool,
    pub monotone: bool,
}

impl SecondEnergyReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        vec![
            ReportRow::new(
                "second_energy",
                "max_excess",
                None,
                self.max_excess,
                Some(self.max_slack),
                Verdict::from_bool(self.pass),
            ),
            ReportRow::info("second_energy", "pairs_checked", None, self.pairs_checked as f64),
            ReportRow::new(
                "second_energy",
                "hs_energy_monotone",
                None,
                f64::from(u8::from(self.monotone)),
                Some(1.0),
                Verdict::from_bool(self.monotone),
            ),
        ]
    }
}

/// `½‖H_s u^m‖² + Λ₁∫_{tⁿ}^{t^m}∫(μ+u)|∇K_s u|² ≤ ½‖H_s uⁿ‖²` for pairs on a
/// grid of at most `samples` states.
pub fn check_second_energy(traj: &StateTrajectory, disc: &Discretization, samples: usize) -> SecondEnergyReport {
    let cfg = &traj.config;
    let l1 = disc.ops.lambda1;
    let times = &traj.times;
    let energy: Vec<f64> = traj.states.iter().map(|u| recompute::hs_energy(disc, cfg.s, u)).collect();
    let rate: Vec<f64> = if cfg.disable_transport {
        vec![0.0; traj.len()]
    } else {
        traj.states
            .iter()
            .map(|u| l1 * recompute::pressure_dissipation(disc, cfg.s, cfg.mu, u))
            .collect()
    };
    let dissipated = cumulative_trapezoid(times, &rate);
    let slack: Vec<f64> = cumulative_variation(times, &rate).iter().map(|v| SLACK_C * v).collect();
    let stride = (traj.len() / samples.max(2)).max(1);
    let mut grid: Vec<usize> = (0..traj.len()).step_by(stride).collect();
    if *grid.last().unwrap() != traj.len() - 1 {
        grid.push(traj.len() - 1);
    }
    let mut pairs = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut pass = true;
    for (a, &n) in grid.iter().enumerate() {
        for &m in &grid[a + 1..] {
            let lhs = energy[m] + (dissipated[m] - dissipated[n]);
            let excess = lhs - energy[n];
            let allowance = slack[m] - slack[n];
            pairs += 1;
            max_excess = max_excess.max(excess);
            let scale = energy[n].abs().max(f64::MIN_POSITIVE);
            if excess > allowance + 1e-14 * scale {
                pass = false;
            }
        }
    }
    let monotone = (1..energy.len())
        .all(|k| energy[k] <= energy[k - 1] + (slack[k] - slack[k - 1]) + 1e-14 * energy[k - 1].abs());
    SecondEnergyReport {
        max_slack: slack.last().copied().unwrap_or(0.0),
        energy,
        pairs_checked: pairs,
        max_excess: if pairs == 0 { 0.0 } else { max_excess },
        pass,
        monotone,
    }
}
