use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use leo_aoi_cli::analyze::{analyze, render};
use leo_aoi_cli::config::{Engine, ExperimentConfig};
use leo_aoi_cli::sweep::{run_sweep, write_csv};
use leo_aoi_cli::validate::{run_validation, ValidateOptions};

/// Age of information for a ground node served by a random LEO constellation.
#[derive(Debug, Parser)]
#[command(name = "leo-aoi", version)]
struct Cli {
    /// TOML experiment file. Built-in defaults are used without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Arrivals per simulation run.
    #[arg(long, global = true)]
    arrivals: Option<u64>,
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,
    /// Output file for the sweep CSV (stdout when neither this nor the
    /// config names one).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Revolutions simulated by `validate` for the coverage-law tests.
    #[arg(long, global = true)]
    cycles: Option<u64>,
    /// Scale the off-rate assumed by the model (negative control).
    #[arg(long, global = true, hide = true)]
    corrupt_off_rate: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the closed-form breakdown at the configured point.
    Analyze,
    /// Run the configured sweep and write a CSV.
    Sweep,
    /// Check the closed forms against both simulators.
    Validate,
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(n) = cli.arrivals {
        cfg.sim.n_arrivals = n;
    }
    if let Some(e) = cli.engine {
        cfg.sim.engine = e;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if let Some(c) = cli.cycles {
        cfg.validate.cycles = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_pool() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("LEO_AOI_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .with_context(|| format!("LEO_AOI_WORKERS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    init_pool()?;
    let cfg = load(&cli)?;
    match cli.command {
        Command::Analyze => {
            let a = analyze(&cfg)?;
            print!("{}", render(&a));
        }
        Command::Sweep => {
            let rows = run_sweep(&cfg);
            match &cfg.output {
                Some(p) => {
                    let f = File::create(p)
                        .with_context(|| format!("cannot create {}", p.display()))?;
                    write_csv(&rows, BufWriter::new(f))?;
                }
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::Validate => {
            let factor = cli.corrupt_off_rate.unwrap_or(1.0);
            if !(factor > 0.0 && factor.is_finite()) {
                bail!("--corrupt-off-rate must be a positive factor");
            }
            let report = run_validation(
                &cfg,
                &ValidateOptions {
                    corrupt_off_rate: factor,
                },
            )?;
            println!("{report}");
            io::stdout().flush()?;
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
