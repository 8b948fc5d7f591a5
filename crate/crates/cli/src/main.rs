//! `senscap`: sensing-capacity bounds, Monte Carlo error estimates and the
//! validation suites.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use senscap_core::capacity;
use senscap_core::montecarlo;
use senscap_core::validate::{self, Level};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "senscap", version, about = "Sensing-capacity bounds for random sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity lower bound for every distortion in the config.
    Bound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo error probability for every sensor count in the config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suites.
    Validate {
        #[arg(long, default_value = "fast")]
        level: Level,
    },
}

/// 12 significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string().to_lowercase()
    }
}

fn bound_csv(cfg: &RunConfig) -> Result<String> {
    let queries = cfg.queries()?;
    let mut out = String::from("D,c_lb,certificate,iterations,witness_distortion\n");
    for q in &queries {
        let r = capacity::clb(q).with_context(|| format!("D = {}", q.distortion))?;
        let wd = r.witness.as_ref().map_or(f64::NAN, |w| w.distortion);
        writeln!(
            out,
            "{},{},{},{},{}",
            num(q.distortion),
            num(r.value),
            num(r.certificate),
            r.iterations,
            num(wd)
        )?;
    }
    Ok(out)
}

fn simulate_csv(cfg: &RunConfig) -> Result<String> {
    let base = cfg.trial_config()?;
    for &n in &cfg.n {
        montecarlo::TrialConfig { n, ..base.clone() }.validate()?;
    }
    let mut out = String::from("n,R,p_e_hat,ci_lo,ci_hi,trials\n");
    for row in montecarlo::rate_sweep(&base, &cfg.n)? {
        let e = row.estimate;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.n,
            num(row.rate),
            num(e.p_e_hat),
            num(e.ci_lo),
            num(e.ci_hi),
            e.trials
        )?;
    }
    Ok(out)
}

fn write_csv(config: &PathBuf, out: &PathBuf, build: fn(&RunConfig) -> Result<String>) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let csv = build(&cfg)?;
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bound { config, out } => write_csv(config, out, bound_csv),
        Command::Simulate { config, out } => write_csv(config, out, simulate_csv),
        Command::Validate { level } => {
            return match validate::run(*level) {
                Ok(report) => {
                    print!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
