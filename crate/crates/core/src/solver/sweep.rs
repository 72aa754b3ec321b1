use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::SolverConfig;
use super::initial::InitialData;
use super::trajectory::{run, StateTrajectory};
use crate::error::{Error, Result};
use crate::problem::Discretization;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegKind {
    /// δ varies, μ fixed at the base value.
    Delta,
    /// μ varies, δ fixed at the smallest grid value.
    Mu,
    /// δ and μ halve together.
    Diagonal,
}

impl LegKind {
    pub fn name(self) -> &'static str {
        match self {
            LegKind::Delta => "delta",
            LegKind::Mu => "mu",
            LegKind::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    /// `max_n |m(tⁿ) − m(0)| / m(0)`, or 0 for zero mass.
    pub mass_drift: f64,
    /// Worst bound excursion over the run.
    pub linf_violation: f64,
    pub clamp_total: usize,
}

impl RunSummary {
    pub fn of(traj: &StateTrajectory) -> RunSummary {
        let m0 = traj.ledgers[0].mass;
        let mass_drift = if m0 == 0.0 {
            0.0
        } else {
            traj.ledgers.iter().map(|l| (l.mass - m0).abs() / m0).fold(0.0, f64::max)
        };
        let linf_violation = traj
            .states
            .iter()
            .map(|u| {
                let (a, b) = traj.excursions(u);
                a.max(b)
            })
            .fold(0.0, f64::max);
        RunSummary {
            steps: traj.len() - 1,
            mass_drift,
            linf_violation,
            clamp_total: traj.ledgers.iter().map(|l| l.clamp_count).sum(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub delta: f64,
    pub mu: f64,
    pub outcome: std::result::Result<Arc<StateTrajectory>, String>,
}

impl SweepRun {
    pub fn summary(&self) -> Option<RunSummary> {
        self.outcome.as_ref().ok().map(|t| RunSummary::of(t))
    }
}

#[derive(Debug, Clone)]
pub struct SweepLeg {
    pub kind: LegKind,
    /// Indices into [`SweepReport::runs`].
    pub runs: Vec<usize>,
    /// `‖u_i − u_{i−1}‖_{L²(Ω×(0,T))}`; `None` for the first run or after a failure.
    pub cauchy: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
    pub legs: Vec<SweepLeg>,
}

impl SweepReport {
    pub fn leg(&self, kind: LegKind) -> Option<&SweepLeg> {
        self.legs.iter().find(|l| l.kind == kind)
    }

    pub fn run_at(&self, delta: f64, mu: f64) -> Option<&SweepRun> {
        self.runs.iter().find(|r| r.delta == delta && r.mu == mu)
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if grid.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::Config(format!("{name} entries must lie in (0,1]")));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

/// Space-time L² distance, trapezoid on the times of `a`, with `b`
/// interpolated onto them.
pub fn space_time_distance(disc: &Discretization, a: &StateTrajectory, b: &StateTrajectory) -> f64 {
    let sq: Vec<f64> = a
        .times
        .iter()
        .zip(&a.states)
        .map(|(&t, ua)| disc.ops.mass_inner(&(ua - b.state_at(t)), &(ua - b.state_at(t))))
        .collect();
    let mut total = 0.0;
    for k in 1..sq.len() {
        total += 0.5 * (a.times[k] - a.times[k - 1]) * (sq[k] + sq[k - 1]);
    }
    total.max(0.0).sqrt()
}

/// Double-limit sweep: a δ leg at the base μ, a μ leg at the smallest δ, and,
/// when the grids have equal length, a diagonal leg pairing them. Distinct
/// (δ, μ) pairs run once each on a pool of `jobs` workers.
pub fn limit_sweep(
    disc: &Discretization,
    u0: &InitialData,
    base: &SolverConfig,
    delta_grid: &[f64],
    mu_grid: &[f64],
    jobs: Option<usize>,
) -> Result<SweepReport> {
    check_grid("delta_grid", delta_grid)?;
    check_grid("mu_grid", mu_grid)?;
    base.validate()?;
    let delta_min = *delta_grid.last().unwrap();
    let mut legs_pairs: Vec<(LegKind, Vec<(f64, f64)>)> = vec![
        (LegKind::Delta, delta_grid.iter().map(|&d| (d, base.mu)).collect()),
        (LegKind::Mu, mu_grid.iter().map(|&m| (delta_min, m)).collect()),
    ];
    if delta_grid.len() == mu_grid.len() {
        legs_pairs.push((
            LegKind::Diagonal,
            delta_grid.iter().copied().zip(mu_grid.iter().copied()).collect(),
        ));
    }

    let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    for (_, leg) in &legs_pairs {
        for &(d, m) in leg {
            index.entry((d.to_bits(), m.to_bits())).or_insert_with(|| {
                pairs.push((d, m));
                pairs.len() - 1
            });
        }
    }

    let work = |&(delta, mu): &(f64, f64)| {
        let cfg = SolverConfig { delta, mu, ..base.clone() };
        let outcome = run(disc, u0, &cfg).map(Arc::new).map_err(|e| e.to_string());
        if let Err(msg) = &outcome {
            log::warn!("sweep run delta={delta} mu={mu} failed: {msg}");
        }
        SweepRun { delta, mu, outcome }
    };
    let threads = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let runs: Vec<SweepRun> = pool.install(|| pairs.par_iter().map(work).collect());

    let legs = legs_pairs
        .into_iter()
        .map(|(kind, leg)| {
            let ids: Vec<usize> = leg.iter().map(|(d, m)| index[&(d.to_bits(), m.to_bits())]).collect();
            let mut cauchy = vec![None];
            for w in ids.windows(2) {
                let diff = match (&runs[w[0]].outcome, &runs[w[1]].outcome) {
                    (Ok(a), Ok(b)) => Some(space_time_distance(disc, b, a)),
                    _ => None,
                };
                cauchy.push(diff);
            }
            SweepLeg { kind, runs: ids, cauchy }
        })
        .collect();
    Ok(SweepReport { runs, legs })
}
