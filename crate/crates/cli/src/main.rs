use std::path::PathBuf;
use std::process::ExitCode;

use ambc_core::config::{parse_config, parse_grid, parse_metrics, axis_slot, IqiCases, Mode, RunConfig};
use ambc_core::harness::{self, EXIT_CONFIG_ERROR};
use ambc_core::monte_carlo::SweepAxis;
use ambc_core::Result;
use clap::{Args, Parser, Subcommand};

/// Outage and intercept probabilities of a backscatter NOMA downlink with I/Q imbalance.
#[derive(Parser)]
#[command(name = "ambc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed forms against Monte Carlo; exits 1 if any check fails.
    Validate(RunArgs),
    /// Write analytic and simulated curves along one axis as CSV.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; flags override its settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quadrature_n: Option<usize>,
    /// Ideal front ends everywhere (ε = 1, φ = 0).
    #[arg(long, conflicts_with = "iqi")]
    ideal: bool,
    /// ideal, nonideal or both.
    #[arg(long)]
    iqi: Option<String>,
    /// Amplitude mismatch ε on every chain.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Phase mismatch φ in degrees on every chain.
    #[arg(long)]
    phase_deg: Option<f64>,
    /// snr_db, beta or a1.
    #[arg(long)]
    axis: Option<String>,
    /// `lo:hi:step` or a comma-separated list, for the active axis.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Comma-separated metric ids, or `all`.
    #[arg(long)]
    metrics: Option<String>,
    /// Add high-SNR outage floors to the sweep output.
    #[arg(long)]
    emit_floors: bool,
    /// Reuse one fading stream for every grid point.
    #[arg(long)]
    common_random_numbers: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn bad(name: &str, reason: String) -> ambc_core::Error {
    ambc_core::Error::InvalidParameter {
        name: name.to_string(),
        reason,
    }
}

impl RunArgs {
    fn config(&self, mode: Mode) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path, mode)?,
            None => RunConfig::new(mode),
        };
        cfg.mode = mode;
        let p = &mut cfg.params;
        if let Some(v) = self.snr_db {
            *p = p.with_snr_db(v);
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.a1 {
            p.a1 = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.quadrature_n {
            cfg.quadrature_n = v;
        }
        if self.ideal {
            cfg.cases = Some(IqiCases::Ideal);
        }
        if let Some(v) = &self.iqi {
            cfg.cases = Some(match v.as_str() {
                "ideal" => IqiCases::Ideal,
                "nonideal" => IqiCases::NonIdeal,
                "both" => IqiCases::Both,
                _ => return Err(bad("iqi", format!("expected ideal, nonideal or both, got `{v}`"))),
            });
        }
        if let Some(v) = self.amplitude {
            cfg.iqi.amplitude = v;
        }
        if let Some(v) = self.phase_deg {
            cfg.iqi.phase_deg = v;
        }
        if let Some(v) = &self.axis {
            cfg.axis = v.parse::<SweepAxis>()?;
        }
        if let Some(v) = &self.grid {
            cfg.grids[axis_slot(cfg.axis)] = Some(parse_grid(v).map_err(|e| bad("grid", e))?);
        }
        if let Some(v) = &self.metrics {
            cfg.metrics = parse_metrics(v).map_err(|e| bad("metrics", e))?;
        }
        cfg.emit_floors |= self.emit_floors;
        cfg.common_random_numbers |= self.common_random_numbers;
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate(args) => {
            let cfg = args.config(Mode::Validate)?;
            let report = harness::run_validate(&cfg)?;
            harness::write_output(cfg.output.as_deref(), report.text())?;
            eprintln!(
                "{} of {} checks passed",
                report.rows.len() - report.failures(),
                report.rows.len()
            );
            Ok(report.exit_code())
        }
        Command::Sweep(args) => {
            let cfg = args.config(Mode::Sweep)?;
            let csv = harness::run_sweep(&cfg)?;
            harness::write_output(cfg.output.as_deref(), &csv)?;
            Ok(harness::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG_ERROR as u8)
        }
    }
}
