use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpme::experiment::{self, ExperimentError, Outcome, OutputOptions};

#[derive(Parser)]
#[command(name = "fpme", version, about = "Fractional porous-medium experiments on the unit interval and square")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (`key = value` with `[section]` headers).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Omit the timestamp comment from output files.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and the operator-law suite.
    Spectral(Common),
    /// One trajectory with snapshots and diagnostics.
    Solve(Common),
    /// The (delta, mu) limit sweep.
    Sweep(Common),
    /// Full invariant suite; exit status 1 if any check fails.
    Verify(Common),
}

fn execute(cmd: &Command) -> Result<Outcome, ExperimentError> {
    let (Command::Spectral(c) | Command::Solve(c) | Command::Sweep(c) | Command::Verify(c)) = cmd;
    let parsed = experiment::load_config(&c.config)?;
    let mut stdout = std::io::stdout().lock();
    for line in parsed.defaults_echo() {
        let _ = writeln!(stdout, "default {line}");
    }
    drop(stdout);
    let cfg = parsed.config;
    let opts = OutputOptions {
        dir: c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory)),
        timestamp: !c.no_timestamp,
    };
    match cmd {
        Command::Spectral(_) => experiment::cmd_spectral(&cfg, &opts),
        Command::Solve(_) => experiment::cmd_solve(&cfg, &opts),
        Command::Sweep(_) => experiment::cmd_sweep(&cfg, &opts, c.jobs),
        Command::Verify(_) => experiment::cmd_verify(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(out) => {
            // a closed pipe must not turn a finished run into a panic
            let mut stdout = std::io::stdout().lock();
            for line in &out.summary {
                let _ = writeln!(stdout, "{line}");
            }
            for f in &out.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
