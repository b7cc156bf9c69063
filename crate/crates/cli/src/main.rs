use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use causalcheck_cli::config::DatasetSource;
use causalcheck_cli::report::verdict_word;
use causalcheck_cli::{cmd_check, cmd_generate, cmd_report, exit_code, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "causalcheck", version, about = "Posterior predictive checks for causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the run seed (and the scenario seed for `generate`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write one SVG histogram per check.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a synthetic dataset and its truth sidecar.
    Generate,
    /// Fit the configured models and run the listed checks.
    Check,
    /// Summarize the check results in a directory.
    Report {
        /// Results directory; defaults to `--out`.
        dir: Option<PathBuf>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_ref().context("--config <path> is required")?;
    let mut config = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate => {
            let mut config = load(cli)?;
            if let (Some(seed), DatasetSource::Synthetic(s)) = (cli.seed, &mut config.dataset) {
                s.seed = seed;
            }
            for path in cmd_generate(&config, &config.out)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Check => {
            let config = load(cli)?;
            let report = cmd_check(&config, cli.svg)?;
            for fit in report.fits.iter().filter(|f| !f.converged) {
                eprintln!("warning: {} {} fit: {}", fit.block, fit.model, fit.warnings.join("; "));
            }
            for c in &report.checks {
                println!("{:<8} {:.3}  {} {}", verdict_word(c.verdict), c.tail_prob, c.model, c.spec);
            }
            println!("overall: {} ({})", verdict_word(report.overall), config.out.display());
            Ok(exit_code(&report))
        }
        Command::Report { dir } => {
            let dir = dir.as_ref().or(cli.out.as_ref()).context("report needs a results directory")?;
            let summary = cmd_report(dir)?;
            for row in &summary.rows {
                println!("{:<8} {:.3}  {} {}", verdict_word(row.verdict), row.tail_prob, row.model, row.spec);
            }
            println!("overall: {}", verdict_word(summary.overall));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
