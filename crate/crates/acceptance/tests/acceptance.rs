//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fpme::diagnostics::*;
use fpme::experiment::{cmd_verify, ExperimentConfig, OutputOptions};
use fpme::operator_laws::verify_operator_suite;
use fpme::solver::*;
use fpme::*;

const EIGEN_REL_TOL: f64 = 0.01;
const EIGEN_MODES: usize = 5;
const EIGEN_BUDGET: Duration = Duration::from_secs(5);
const LAW_TRIALS: usize = 100;
const LAW_TOL: f64 = 1e-8;
const LAW_BUDGET: Duration = Duration::from_secs(30);
const BOUND_REL_TOL: f64 = 1e-6;
const STANDARD_BUDGET: Duration = Duration::from_secs(60);
const DRIFT_FINAL_RATIO: f64 = 0.25;
const SLACK_SHRINK: f64 = 1.5;
const MODE_TOL: f64 = 1e-12;
const RESIDUAL_SHRINK: f64 = 1.5;
const DOUBLE_EVAL_TOL: f64 = 1e-10;
const CUTOFF_REL_TOL: f64 = 0.02;
const SWEEP_GRID: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

type Verdict = (bool, String);

fn interval(res: usize, gamma0: &[Side]) -> Discretization {
    Discretization::build(1, res, gamma0, &CoefficientSpec::Identity, MassMode::Lumped).unwrap()
}

fn standard() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| interval(100, &[Side::Left]))
}

fn standard_data() -> InitialData {
    InitialData::from_profile(&standard().domain, InitialProfile::SineCompatible).unwrap()
}

fn standard_run(cfg: &SolverConfig) -> StateTrajectory {
    run(standard(), &standard_data(), cfg).unwrap()
}

/// The diagonal (δ, μ) halving sweep shared by several criteria.
fn sweep() -> &'static SweepReport {
    static S: OnceLock<SweepReport> = OnceLock::new();
    S.get_or_init(|| limit_sweep(standard(), &standard_data(), &SolverConfig::default(), &SWEEP_GRID, &SWEEP_GRID, None).unwrap())
}

fn sweep_endpoint() -> &'static StateTrajectory {
    let last = SWEEP_GRID[SWEEP_GRID.len() - 1];
    sweep().run_at(last, last).unwrap().outcome.as_ref().unwrap()
}

fn eigenvalue_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (gamma0, shift) in [(vec![Side::Left, Side::Right], 0.0), (vec![Side::Left], 0.5)] {
        let d = interval(200, &gamma0);
        for k in 0..EIGEN_MODES {
            let exact = ((k as f64 + 1.0 - shift) * PI).powi(2);
            worst = worst.max((d.dec.eigenvalues()[k] - exact).abs() / exact);
        }
    }
    let elapsed = start.elapsed();
    (
        worst <= EIGEN_REL_TOL && elapsed < EIGEN_BUDGET,
        format!("max rel error {worst:.2e} (tol {EIGEN_REL_TOL}), {elapsed:.2?}"),
    )
}

fn operator_laws() -> Verdict {
    let start = Instant::now();
    let cases = [
        ("1D mixed", interval(200, &[Side::Left])),
        (
            "2D anisotropic",
            Discretization::build(2, 20, &[Side::Left, Side::Bottom], &CoefficientSpec::constant_full(2.0, 0.4, 1.0), MassMode::Lumped)
                .unwrap(),
        ),
    ];
    let identities = ["inverse_round_trip", "semigroup", "self_adjoint", "flux_energy_identity"];
    let inequalities = ["poincare", "norm_equivalence_sandwich"];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (_, d) in &cases {
        assert!(d.n_nodes() <= 1000);
        let rep = verify_operator_suite(&d.dec, &d.ops, LAW_TRIALS, 2024);
        for name in identities {
            let law = rep.law(name).unwrap();
            worst = worst.max(law.max_violation);
            ok &= law.max_violation <= LAW_TOL;
        }
        for name in inequalities {
            violations += rep.law(name).unwrap().violations;
        }
    }
    let elapsed = start.elapsed();
    ok &= violations == 0 && elapsed < LAW_BUDGET;
    (ok, format!("identities max rel {worst:.2e} (tol {LAW_TOL:e}), inequality violations {violations}, {elapsed:.2?}"))
}

fn max_principle() -> Verdict {
    let start = Instant::now();
    let traj = standard_run(&SolverConfig::default());
    let b = check_bounds(&traj);
    let tol = BOUND_REL_TOL * traj.u0_sup;
    let elapsed = start.elapsed();
    (
        b.max_undershoot <= tol && b.max_overshoot <= tol && elapsed < STANDARD_BUDGET,
        format!("undershoot {:.2e}, overshoot {:.2e} (tol {tol:.1e}), {elapsed:.2?}", b.max_undershoot, b.max_overshoot),
    )
}

fn mass_drift_trend() -> Verdict {
    let rep = sweep();
    let leg = rep.leg(LegKind::Diagonal).unwrap();
    let drifts: Vec<f64> = leg.runs.iter().map(|&i| rep.runs[i].summary().unwrap().mass_drift).collect();
    let monotone = drifts.windows(2).all(|w| w[1] < w[0]);
    let ratio = drifts[drifts.len() - 1] / drifts[0];
    let text: Vec<String> = drifts.iter().map(|d| format!("{d:.3e}")).collect();
    (
        monotone && ratio <= DRIFT_FINAL_RATIO,
        format!("drifts {} monotone={monotone}, final/initial {ratio:.3} (need <= {DRIFT_FINAL_RATIO})", text.join(" ")),
    )
}

fn first_energy() -> Verdict {
    let d = standard();
    let coarse = check_first_energy(&standard_run(&SolverConfig::default()), d);
    let fine = check_first_energy(&standard_run(&SolverConfig { dt: 5e-5, ..Default::default() }), d);
    let shrink = coarse.max_slack / fine.max_slack;
    (
        coarse.pass && fine.pass && shrink >= SLACK_SHRINK && coarse.corollary_pass,
        format!(
            "excess {:.2e} within slack {:.2e}; slack shrink {shrink:.2}x (need >= {SLACK_SHRINK}); corollary {:.3e} <= {:.3e}",
            coarse.max_excess, coarse.max_slack, coarse.corollary_lhs, coarse.corollary_bound
        ),
    )
}

fn second_energy() -> Verdict {
    let d = standard();
    let rep = check_second_energy(&standard_run(&SolverConfig::default()), d, 50);

    let cfg = SolverConfig {
        disable_transport: true,
        ..Default::default()
    };
    let lin = standard_run(&cfg);
    let c0 = d.dec.coefficients(&lin.states[0]);
    let scale = c0.amax();
    let mut worst: f64 = 0.0;
    for (n, u) in lin.states.iter().enumerate() {
        let c = d.dec.coefficients(u);
        for (k, l) in d.dec.eigenvalues().iter().enumerate() {
            let want = c0[k] / (1.0 + cfg.delta * cfg.dt * l).powi(n as i32);
            worst = worst.max((c[k] - want).abs() / scale);
        }
    }
    (
        rep.monotone && rep.pass && worst <= MODE_TOL,
        format!(
            "monotone={} pairs={} within slack; linear per-mode error {worst:.2e} (tol {MODE_TOL:e})",
            rep.monotone, rep.pairs_checked
        ),
    )
}

fn weak_residual_trend() -> Verdict {
    let d = standard();
    let coarse = sweep_endpoint();
    let fine_cfg = SolverConfig {
        dt: coarse.config.dt / 2.0,
        ..coarse.config.clone()
    };
    let fine = standard_run(&fine_cfg);
    let bank = test_bank(d, 5);
    assert_eq!(bank.len(), 20);
    let r_coarse = weak_residual(coarse, d, &bank, WeakForm::Limit).max_abs;
    let r_fine = weak_residual(&fine, d, &bank, WeakForm::Limit).max_abs;
    let shrink = r_coarse / r_fine;
    let reg_shrink = weak_residual(coarse, d, &bank, WeakForm::Regularized).max_abs
        / weak_residual(&fine, d, &bank, WeakForm::Regularized).max_abs;
    let gap = bank
        .iter()
        .map(|t| double_evaluation(coarse, d, t, WeakForm::Limit).gap)
        .fold(0.0, f64::max);
    (
        shrink >= RESIDUAL_SHRINK && gap <= DOUBLE_EVAL_TOL,
        format!(
            "max|R| {r_coarse:.3e} -> {r_fine:.3e}, shrink {shrink:.2}x (need >= {RESIDUAL_SHRINK}); \
             regularized-form shrink {reg_shrink:.2}x; double-evaluation gap {gap:.1e} (tol {DOUBLE_EVAL_TOL:e})"
        ),
    )
}

fn trace_surrogates() -> Verdict {
    let d = standard();
    let traj = sweep_endpoint();
    let shells = build_shells(&d.domain, 4).unwrap();
    let sf = shell_flux(traj, d, &shells);
    let it = initial_trace(traj, d, &test_bank(d, 5), 10);
    let mut slopes = Vec::new();
    let mut reported = true;
    for s in [0.6, 0.75] {
        let r = dirichlet_scaling(&standard_run(&SolverConfig { s, ..Default::default() }), d, 6);
        reported &= r.slope.is_some_and(f64::is_finite) && r.residual.is_some_and(f64::is_finite);
        slopes.push(format!(
            "s={s}: slope {:.3} residual {:.3} (1-2s = {:.2})",
            r.slope.unwrap_or(f64::NAN),
            r.residual.unwrap_or(f64::NAN),
            r.expected
        ));
    }
    let fluxes: Vec<String> = sf.fluxes.iter().take(3).map(|f| format!("{f:.3e}")).collect();
    (
        sf.trend_ok && it.pass && reported,
        format!(
            "shell |flux| tau=0,h,2h: {} trend={}; initial trace C={:.4} pass={}; {}",
            fluxes.join(" "),
            sf.trend_ok,
            it.constant,
            it.pass,
            slopes.join("; ")
        ),
    )
}

fn cutoff() -> Verdict {
    let d = build_domain(1, 400, &[Side::Left]).unwrap();
    let rep = cutoff_experiment(&d, &DEFAULT_K_LIST);
    let err = rep.max_closed_form_error().unwrap();
    let grads: Vec<String> = rep.gradient.iter().map(|g| format!("{g:.3e}")).collect();
    let flagged = rep.rows().iter().any(|r| r.quantity == "gradient_discrepancy_flag");
    (
        rep.defect_decreasing && err <= CUTOFF_REL_TOL && flagged,
        format!(
            "defect strictly decreasing={}, closed-form rel error {err:.1e} (tol {CUTOFF_REL_TOL}); gradient integrals {} flag={}",
            rep.defect_decreasing,
            grads.join(" "),
            rep.gradient_discrepancy
        ),
    )
}

fn determinism() -> Verdict {
    let cfg = ExperimentConfig::default();
    let dir = std::env::temp_dir().join(format!("fpme-acceptance-{}", std::process::id()));
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let opts = OutputOptions {
            dir: dir.join(run),
            timestamp: false,
        };
        cmd_verify(&cfg, &opts).unwrap();
        reports.push(std::fs::read(opts.dir.join("report.csv")).unwrap());
    }
    let _ = std::fs::remove_dir_all(&dir);
    let same = reports[0] == reports[1];
    (same, format!("report.csv byte-identical={same} ({} bytes)", reports[0].len()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("eigenvalue oracle", eigenvalue_oracle),
        ("operator-law suite", operator_laws),
        ("max principle", max_principle),
        ("mass-drift limit trend", mass_drift_trend),
        ("first energy and corollary", first_energy),
        ("second energy", second_energy),
        ("weak residual", weak_residual_trend),
        ("trace surrogates", trace_surrogates),
        ("cut-off experiment", cutoff),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failed += usize::from(!pass);
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
