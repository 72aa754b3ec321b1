use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fpme::experiment::{parse_config, verify_report};

const SMALL: &str = "\
[domain]
dimension = 1
resolution = 40
gamma0 = left

[operator]
s = 0.5
law_trials = 5

[solver]
dt = 1e-4
t_end = 0.005

[sweep]
delta_grid = 1e-2, 5e-3
mu_grid = 1e-2, 5e-3
";

fn fpme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpme")).args(args).output().unwrap()
}

fn run_cmd(cmd: &str, config_text: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config_text).unwrap();
    let out = dir.join("out");
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fpme(&args)
}

/// Lines after the `#` preamble.
fn body(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn verify_passes_and_names_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cmd("verify", SMALL, dir.path(), &["--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let hash = parse_config(SMALL).unwrap().hash();
    assert_eq!(text.lines().next().unwrap(), format!("# config_hash={hash}"));
    assert_eq!(text.lines().nth(1).unwrap(), "check,quantity,tau_or_t_or_k,value,bound,pass");
    assert!(!text.contains(",false\n"));
}

#[test]
fn verify_with_oversized_step_fails_on_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[domain]\nresolution = 100\ninitial = plateau\n[operator]\ns = 0.1\nlaw_trials = 2\n[solver]\ndt = 1e-2\nt_end = 0.1\n";
    // the same config at the stable step passes the bounds
    let mut stable = parse_config(text).unwrap();
    stable.solver.dt = 1e-4;
    let rep = verify_report(&stable).unwrap();
    assert!(rep.rows.iter().filter(|r| r.check == "bounds").all(|r| r.verdict != fpme::diagnostics::Verdict::Fail));

    let out = run_cmd("verify", text, dir.path(), &["--no-timestamp"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = body(&dir.path().join("out/report.csv"));
    assert!(rows.iter().any(|r| r.starts_with("bounds,undershoot,") && r.ends_with(",false")), "{rows:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL bounds/"));
}

#[test]
fn zero_data_verifies_with_trivial_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[output]\n").replace("gamma0 = left", "gamma0 = left\ninitial = zero");
    let out = run_cmd("verify", &text, dir.path(), &["--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = body(&dir.path().join("out/report.csv"));
    for prefix in ["mass,initial_mass,", "mass,max_drift,", "bounds,undershoot,", "first_energy,max_excess,"] {
        let row = rows.iter().find(|r| r.starts_with(prefix)).unwrap();
        assert!(row.contains(",0e0,"), "{row}");
    }
}

#[test]
fn config_errors_exit_2_with_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cmd("solve", "[operator]\ns = 1.5\n[solver]\ndt = soon\nbogus = 1\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["line 2: s must lie in (0,1)", "line 4: dt expects", "line 5: unknown key 'bogus'"] {
        assert!(err.contains(needle), "{err}");
    }
    assert_eq!(fpme(&["verify", "--config", "/definitely/missing.cfg"]).status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    // μ equal to ‖u₀‖∞ leaves no room for the regularized data
    let dir = tempfile::tempdir().unwrap();
    let out = run_cmd("solve", &SMALL.replace("dt = 1e-4", "dt = 1e-4\nmu = 1"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_writes_trajectory_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[output]\nsnapshot_times = 0.0, 0.0025\n");
    let out = run_cmd("solve", &text, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let o = dir.path().join("out");
    let traj = body(&o.join("trajectory.csv"));
    assert_eq!(traj[0], "t,mass,min_u,max_u,entropy,hs_energy,clamp_count");
    assert_eq!(traj.len(), 1 + 51);
    let raw = fs::read_to_string(o.join("trajectory.csv")).unwrap();
    assert!(raw.lines().nth(1).unwrap().starts_with("# generated_unix="));
    let snap = body(&o.join("snapshot_001.csv"));
    assert_eq!(snap[0], "x,u,ksu");
    assert_eq!(snap.len(), 1 + 41);
    assert!(fs::read_to_string(o.join("snapshot_001.csv")).unwrap().contains("# t=2.5e-3"));
    assert_eq!(body(&o.join("diagnostics.csv"))[0], "check,quantity,tau_or_t_or_k,value,bound,pass");
}

#[test]
fn square_snapshot_has_two_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[domain]\ndimension = 2\nresolution = 6\ngamma0 = left, bottom\ninitial = bump\n[solver]\nt_end = 0.001\n";
    let out = run_cmd("solve", text, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let snap = body(&dir.path().join("out/snapshot_000.csv"));
    assert_eq!(snap[0], "x,y,u,ksu");
    assert_eq!(snap.len(), 1 + 49);
}

#[test]
fn sweep_tables_and_job_count_independence() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_cmd("sweep", SMALL, dir.path(), &["--jobs", "1", "--no-timestamp"]);
    assert_eq!(a.status.code(), Some(0));
    let first = fs::read_to_string(dir.path().join("out/sweep_diagonal.csv")).unwrap();
    let b = run_cmd("sweep", SMALL, dir.path(), &["--jobs", "3", "--no-timestamp"]);
    assert_eq!(b.status.code(), Some(0));
    let second = fs::read_to_string(dir.path().join("out/sweep_diagonal.csv")).unwrap();
    assert_eq!(first, second);
    let rows = body(&dir.path().join("out/sweep_diagonal.csv"));
    assert_eq!(rows[0], "delta,mu,mass_drift,linf_violation,cauchy_diff");
    assert!(rows[1].ends_with(','), "first run has no Cauchy partner: {}", rows[1]);
    assert_eq!(rows.len(), 3);
    for leg in ["delta", "mu"] {
        assert!(dir.path().join(format!("out/sweep_{leg}.csv")).exists());
    }
    assert!(body(&dir.path().join("out/sweep_runs.csv"))[1].ends_with(",ok"));
}

#[test]
fn spectral_writes_eigenvalues_and_laws() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cmd("spectral", SMALL, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let eig = body(&dir.path().join("out/eigenvalues.csv"));
    assert_eq!(eig[0], "k,lambda");
    assert_eq!(eig.len(), 1 + 40);
    let lambda1: f64 = eig[1].split(',').nth(1).unwrap().parse().unwrap();
    let want = (0.5 * std::f64::consts::PI).powi(2);
    assert!((lambda1 - want).abs() < 0.01 * want);
    let laws = body(&dir.path().join("out/operator_laws.csv"));
    assert!(laws.iter().filter(|r| r.starts_with("operator_laws,")).all(|r| !r.ends_with(",false")));
}

#[test]
fn defaults_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cmd("sweep", "[domain]\nresolution = 20\n[sweep]\ndelta_grid = 1e-2\nmu_grid = 1e-2\n[solver]\nt_end = 0.001\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("default [solver] dt = 0.0001"), "{stdout}");
    assert!(stdout.contains("default [operator] s = 0.5"));
}
