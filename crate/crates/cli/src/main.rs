//! `oqr`: drive rotor simulations from config files and flags.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oqr_core::config::{self, InitialState, Overrides, RunConfig};
use oqr_core::error::Error;
use oqr_core::output;
use oqr_core::scan;

#[derive(Parser)]
#[command(
    name = "oqr",
    version,
    about = "Orientational revivals of linear polar molecules driven by single-cycle THz pulses"
)]
struct Cli {
    /// TOML configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default from config, "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid scans (0 = automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for data files.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Reserved for interface stability; nothing here uses randomness.
    #[arg(long, global = true, hide_short_help = true)]
    seedless: bool,

    /// Peak field strength override (V/m).
    #[arg(long, global = true)]
    e0: Option<f64>,

    /// Carrier frequency override (ordinary THz).
    #[arg(long = "freq-thz", global = true)]
    freq_thz: Option<f64>,

    /// Ensemble temperature override (K).
    #[arg(long, global = true)]
    temperature: Option<f64>,

    /// Basis truncation override.
    #[arg(long = "j-max", global = true)]
    j_max: Option<u32>,

    /// Integrator relative tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the configured ensemble and write trace, density, and report.
    Simulate {
        /// Also export the leading trajectory coefficients as CSV.
        #[arg(long)]
        trajectory: bool,
    },
    /// Evaluate the revival amplitude over the (E0, delta1) grid.
    Scan,
    /// Per-order population transfer curves and time traces.
    MagnusOrders,
    /// Pulse spectrum |A(omega)| as CSV.
    Spectrum {
        /// Number of frequency samples.
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
    /// Angular density map only.
    Density,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let file = config::load(cli.config.as_deref())?;
    let overrides = Overrides {
        e0_v_per_m: cli.e0,
        freq_thz: cli.freq_thz,
        temperature_k: cli.temperature,
        j_max: cli.j_max,
        tol: cli.tol,
        out_dir: cli.out.clone(),
        format: cli.format.clone(),
        threads: cli.threads,
    };
    config::resolve(file, &overrides)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = build_config(cli)?;
    let dir = cfg.output.dir.clone();
    let json = cfg.output.json;
    let plots = cfg.output.plot_scripts;

    match &cli.command {
        Command::Simulate { trajectory } => {
            let result = scan::run_simulate(&cfg)?;
            let files = output::write_simulate(&result, &dir, json, plots)?;
            if *trajectory {
                let traj = leading_trajectory(&cfg)?;
                output::write_trajectory(&traj, &dir, "trajectory.csv")?;
            }
            println!(
                "cos_max = {:.4} at {:.3} ps, cos_min = {:.4} at {:.3} ps, A_OQR = {:.4}, revival spacing = {:.3} ps",
                result.report.max_value,
                result.report.t_max,
                result.report.min_value,
                result.report.t_min,
                result.report.amplitude(),
                result.revival_spacing_ps,
            );
            println!("wrote {} files to {}", files.len(), dir.display());
        }
        Command::Scan => {
            let result = scan::run_scan(&cfg)?;
            let files = output::write_scan(&result, &dir, json, plots)?;
            let failed = result
                .points
                .iter()
                .filter(|p| matches!(p.outcome, scan::PointOutcome::Failed { .. }))
                .count();
            println!(
                "{} grid points ({} failed), wrote {} files to {}",
                result.points.len(),
                failed,
                files.len(),
                dir.display()
            );
        }
        Command::MagnusOrders => {
            let result = scan::run_magnus_orders(&cfg)?;
            let files = output::write_magnus_orders(&result, &dir, json)?;
            println!(
                "{} field points x {} order sets, wrote {} files to {}",
                result.e0_axis.len(),
                result.curves.len(),
                files.len(),
                dir.display()
            );
        }
        Command::Spectrum { points } => {
            let result = scan::run_spectrum(&cfg, *points)?;
            let files = output::write_spectrum(&result, &dir, json, plots)?;
            println!("wrote {} files to {}", files.len(), dir.display());
        }
        Command::Density => {
            let result = scan::run_simulate(&cfg)?;
            let files = output::write_density(&result, &dir, json, plots)?;
            println!("wrote {} files to {}", files.len(), dir.display());
        }
    }
    Ok(())
}

/// Propagate the highest-weight configured initial state for CSV export.
fn leading_trajectory(cfg: &RunConfig) -> Result<oqr_core::Trajectory, Error> {
    let label = match &cfg.initial {
        InitialState::Single(label) => *label,
        InitialState::Thermal { .. } => oqr_core::RotLabel::new(0, 0).expect("valid"),
    };
    let basis = match cfg.basis {
        config::BasisChoice::Fixed(j) => {
            oqr_core::BasisSpec::new(label.m(), j.max(label.j() + 2))?
        }
        config::BasisChoice::Auto => {
            oqr_core::tdse::auto_truncate_with_tol(label, &cfg.pulse, &cfg.molecule, cfg.tol)?
        }
    };
    oqr_core::propagate(label, &cfg.pulse, &cfg.molecule, basis, cfg.tol)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidInput(_) => ExitCode::from(2),
                Error::NonConvergence { .. }
                | Error::TruncationLeak { .. }
                | Error::DegenerateBeta => ExitCode::from(3),
                Error::Io { .. } => ExitCode::from(1),
            }
        }
    }
}
