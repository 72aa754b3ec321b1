use std::path::PathBuf;

use super::config::ExperimentConfig;
use super::output::{opt, ArtifactWriter, OutputOptions};
use super::ExperimentError;
use crate::diagnostics::*;
use crate::error::Result;
use crate::operator_laws::verify_operator_suite;
use crate::problem::Discretization;
use crate::shells::build_shells;
use crate::solver::{limit_sweep, run, InitialData, LegKind, StateTrajectory, SweepReport};
use crate::spectral::FractionalExponent;

/// Files written by a command, a short human-readable summary, and whether
/// every asserted check held.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub passed: bool,
}

/// Steps inspected by the initial-trace check.
const TRACE_STEPS: usize = 10;
/// Shells `τ ∈ {0, h, 2h, 3h}`.
const SHELLS: usize = 4;
const BANK_MODES: usize = 5;
const ENERGY_SAMPLES: usize = 20;

pub fn discretize(cfg: &ExperimentConfig) -> Result<Discretization> {
    let d = &cfg.domain;
    Discretization::build(d.dimension, d.resolution, &d.gamma0, &d.coefficient.spec(), cfg.operator.mass_mode)
}

pub fn initial_data(cfg: &ExperimentConfig, disc: &Discretization) -> Result<InitialData> {
    InitialData::from_profile(&disc.domain, cfg.domain.initial)
}

fn writer(cfg: &ExperimentConfig, opts: &OutputOptions) -> std::result::Result<ArtifactWriter, ExperimentError> {
    ArtifactWriter::new(opts.clone(), cfg.hash())
}

fn write_report(w: &mut ArtifactWriter, name: &str, report: &Report) -> std::result::Result<PathBuf, ExperimentError> {
    w.write(name, &[], |o| report.write_csv(o))
}

/// Operator-law suite plus spectrum summary, as report rows.
pub fn spectral_report(cfg: &ExperimentConfig, disc: &Discretization) -> Report {
    let mut rep = Report::default();
    rep.push(ReportRow::info("spectrum", "lambda_min", Some(1.0), disc.dec.lambda_min()));
    rep.push(ReportRow::info("spectrum", "n_modes", None, disc.dec.n_modes() as f64));
    let laws = verify_operator_suite(&disc.dec, &disc.ops, cfg.operator.law_trials, cfg.operator.seed);
    for law in &laws.laws {
        rep.push(ReportRow::new(
            "operator_laws",
            law.name,
            None,
            law.max_violation,
            Some(law.tolerance),
            Verdict::from_bool(law.pass),
        ));
        rep.push(ReportRow::info("operator_laws", &format!("{}_violations", law.name), None, law.violations as f64));
    }
    rep
}

/// Every trajectory diagnostic, in a fixed order.
pub fn trajectory_report(traj: &StateTrajectory, disc: &Discretization) -> Report {
    let mut rep = Report::default();
    rep.extend(check_bounds(traj).rows());
    rep.extend(check_mass(traj, disc).rows());
    rep.push(ReportRow::info(
        "flux",
        "clamp_total",
        None,
        traj.ledgers.iter().map(|l| l.clamp_count).sum::<usize>() as f64,
    ));
    rep.extend(check_ledger_agreement(traj, disc).rows());
    rep.extend(check_first_energy(traj, disc).rows());
    rep.extend(check_second_energy(traj, disc, ENERGY_SAMPLES).rows());

    let bank = test_bank(disc, BANK_MODES);
    rep.extend(weak_residual(traj, disc, &bank, WeakForm::Limit).rows());
    rep.extend(weak_residual(traj, disc, &bank, WeakForm::Regularized).rows());
    let worst = bank
        .iter()
        .map(|t| double_evaluation(traj, disc, t, WeakForm::Limit))
        .max_by(|a, b| a.gap.total_cmp(&b.gap));
    if let Some(d) = worst {
        rep.push(d.row());
    }

    match build_shells(&disc.domain, SHELLS) {
        Ok(shells) => rep.extend(shell_flux(traj, disc, &shells).rows()),
        Err(e) => log::warn!("shell flux skipped: {e}"),
    }
    rep.extend(initial_trace(traj, disc, &bank, TRACE_STEPS).rows());
    let layers = (disc.domain.resolution() / 2).min(6);
    rep.extend(dirichlet_scaling(traj, disc, layers).rows());
    rep
}

/// The full invariant suite on one config: mesh, operator laws, one run and
/// its diagnostics, and the cut-off experiment.
pub fn verify_report(cfg: &ExperimentConfig) -> Result<Report> {
    let disc = discretize(cfg)?;
    let mut rep = Report::default();
    let invariants_ok = disc.domain.check_invariants().is_ok();
    rep.push(ReportRow::new(
        "mesh",
        "invariants",
        None,
        f64::from(u8::from(invariants_ok)),
        Some(1.0),
        Verdict::from_bool(invariants_ok),
    ));
    let lg = disc.domain.first_layer_gradient_error();
    rep.push(ReportRow::new("mesh", "level_set_gradient_error", None, lg, Some(1e-12), Verdict::from_bool(lg <= 1e-12)));
    rep.extend(spectral_report(cfg, &disc).rows);

    let u0 = initial_data(cfg, &disc)?;
    match run(&disc, &u0, &cfg.solver_config()) {
        Ok(traj) => {
            rep.push(ReportRow::new("bounds", "run_completed", None, 1.0, Some(1.0), Verdict::Pass));
            rep.extend(trajectory_report(&traj, &disc).rows);
        }
        Err(e) => {
            log::error!("verification run failed: {e}");
            rep.push(ReportRow::new("bounds", "run_completed", None, 0.0, Some(1.0), Verdict::Fail));
        }
    }
    rep.extend(cutoff_experiment(&disc.domain, &DEFAULT_K_LIST).rows());
    Ok(rep)
}

pub fn cmd_spectral(cfg: &ExperimentConfig, opts: &OutputOptions) -> std::result::Result<Outcome, ExperimentError> {
    let disc = discretize(cfg)?;
    let mut w = writer(cfg, opts)?;
    w.write("eigenvalues.csv", &[], |o| {
        writeln!(o, "k,lambda")?;
        for (k, l) in disc.dec.eigenvalues().iter().enumerate() {
            writeln!(o, "{},{l:e}", k + 1)?;
        }
        Ok(())
    })?;
    let rep = spectral_report(cfg, &disc);
    write_report(&mut w, "operator_laws.csv", &rep)?;
    let summary = vec![
        format!("{} modes, lambda_1 = {:e}", disc.dec.n_modes(), disc.dec.lambda_min()),
        format!("operator laws: {} failing", rep.failures().count()),
    ];
    Ok(Outcome {
        files: w.into_written(),
        summary,
        passed: true,
    })
}

pub fn cmd_solve(cfg: &ExperimentConfig, opts: &OutputOptions) -> std::result::Result<Outcome, ExperimentError> {
    let disc = discretize(cfg)?;
    let u0 = initial_data(cfg, &disc)?;
    let traj = run(&disc, &u0, &cfg.solver_config())?;
    let mut w = writer(cfg, opts)?;
    w.write("trajectory.csv", &[], |o| {
        writeln!(o, "t,mass,min_u,max_u,entropy,hs_energy,clamp_count")?;
        for l in &traj.ledgers {
            writeln!(
                o,
                "{:e},{:e},{:e},{:e},{:e},{:e},{}",
                l.t, l.mass, l.min_u, l.max_u, l.entropy, l.hs_energy, l.clamp_count
            )?;
        }
        Ok(())
    })?;

    let times = if cfg.output.snapshot_times.is_empty() {
        vec![cfg.solver.t_end]
    } else {
        cfg.output.snapshot_times.clone()
    };
    let s = FractionalExponent::new(cfg.operator.s)?;
    let coords = disc.domain.node_coords();
    let two_d = disc.domain.dimension() == 2;
    for (i, &t) in times.iter().enumerate() {
        let u = traj.state_at(t);
        let ksu = disc.dec.k_s(s, &u);
        w.write(&format!("snapshot_{i:03}.csv"), &[format!("t={t:e}")], |o| {
            writeln!(o, "{}", if two_d { "x,y,u,ksu" } else { "x,u,ksu" })?;
            for (n, p) in coords.iter().enumerate() {
                if two_d {
                    writeln!(o, "{:e},{:e},{:e},{:e}", p[0], p[1], u[n], ksu[n])?;
                } else {
                    writeln!(o, "{:e},{:e},{:e}", p[0], u[n], ksu[n])?;
                }
            }
            Ok(())
        })?;
    }

    let rep = trajectory_report(&traj, &disc);
    write_report(&mut w, "diagnostics.csv", &rep)?;
    let last = traj.ledgers.last().expect("trajectory has a ledger");
    let summary = vec![
        format!("{} steps to t = {:e}, {} dt halvings", traj.len() - 1, last.t, traj.adapt_events.len()),
        format!("mass {:e} -> {:e}", traj.ledgers[0].mass, last.mass),
        format!("u range [{:e}, {:e}]", last.min_u, last.max_u),
        format!("diagnostics: {} failing", rep.failures().count()),
    ];
    Ok(Outcome {
        files: w.into_written(),
        summary,
        passed: true,
    })
}

fn write_sweep(w: &mut ArtifactWriter, rep: &SweepReport) -> std::result::Result<(), ExperimentError> {
    for leg in &rep.legs {
        w.write(&format!("sweep_{}.csv", leg.kind.name()), &[format!("leg={}", leg.kind.name())], |o| {
            writeln!(o, "delta,mu,mass_drift,linf_violation,cauchy_diff")?;
            for (&i, c) in leg.runs.iter().zip(&leg.cauchy) {
                let run = &rep.runs[i];
                let s = run.summary();
                writeln!(
                    o,
                    "{:e},{:e},{},{},{}",
                    run.delta,
                    run.mu,
                    opt(s.as_ref().map(|s| s.mass_drift)),
                    opt(s.as_ref().map(|s| s.linf_violation)),
                    opt(*c)
                )?;
            }
            Ok(())
        })?;
    }
    w.write("sweep_runs.csv", &[], |o| {
        writeln!(o, "delta,mu,steps,mass_drift,linf_violation,clamp_total,status")?;
        for run in &rep.runs {
            match run.summary() {
                Some(s) => writeln!(
                    o,
                    "{:e},{:e},{},{:e},{:e},{},ok",
                    run.delta, run.mu, s.steps, s.mass_drift, s.linf_violation, s.clamp_total
                )?,
                None => writeln!(o, "{:e},{:e},,,,,failed", run.delta, run.mu)?,
            }
        }
        Ok(())
    })?;
    Ok(())
}

pub fn cmd_sweep(cfg: &ExperimentConfig, opts: &OutputOptions, jobs: Option<usize>) -> std::result::Result<Outcome, ExperimentError> {
    let disc = discretize(cfg)?;
    let u0 = initial_data(cfg, &disc)?;
    let rep = limit_sweep(&disc, &u0, &cfg.solver_config(), &cfg.sweep.delta_grid, &cfg.sweep.mu_grid, jobs)?;
    let mut w = writer(cfg, opts)?;
    write_sweep(&mut w, &rep)?;
    let failed = rep.runs.iter().filter(|r| r.outcome.is_err()).count();
    let mut summary = vec![format!("{} runs, {failed} failed", rep.runs.len())];
    if let Some(leg) = rep.leg(LegKind::Diagonal) {
        let drifts: Vec<String> = leg
            .runs
            .iter()
            .map(|&i| rep.runs[i].summary().map_or("failed".into(), |s| format!("{:.3e}", s.mass_drift)))
            .collect();
        summary.push(format!("diagonal mass drift: {}", drifts.join(" ")));
    }
    Ok(Outcome {
        files: w.into_written(),
        summary,
        passed: true,
    })
}

pub fn cmd_verify(cfg: &ExperimentConfig, opts: &OutputOptions) -> std::result::Result<Outcome, ExperimentError> {
    let rep = verify_report(cfg)?;
    let mut w = writer(cfg, opts)?;
    write_report(&mut w, "report.csv", &rep)?;
    let asserted = rep.rows.iter().filter(|r| r.verdict != Verdict::Info).count();
    let mut summary = vec![format!("{} checks asserted, {} failed", asserted, rep.failures().count())];
    summary.extend(rep.failures().map(|r| format!("FAIL {}/{}: {:e} (bound {})", r.check, r.quantity, r.value, opt(r.bound))));
    Ok(Outcome {
        files: w.into_written(),
        summary,
        passed: rep.all_pass(),
    })
}
