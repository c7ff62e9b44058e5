//! Command-line front end for the movable-antenna relay simulator.
//!
//! Subcommands: `run` (Monte Carlo campaign from a TOML config to CSV),
//! `bounds` (closed-form average-rate bounds), `landscape` (gain-grid CSV
//! for one channel realization), `validate` (built-in self checks).
//!
//! The worker thread count defaults to the number of cores and can be
//! pinned with the `MARELAY_THREADS` environment variable; campaign output
//! is byte-identical for any thread count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use marelay_core::baselines::grid_exhaustive;
use marelay_core::bounds::{aar_af_upper, aar_df_upper};
use marelay_core::channel::sample_paths;
use marelay_core::experiments::{run_campaign, write_csv, CampaignConfig};
use marelay_core::validate::run_all;
use marelay_core::{Region, Relaying, SystemParams};

#[derive(Parser)]
#[command(name = "marelay", version, about = "Movable-antenna relay simulation and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a campaign described by a TOML config and write the
    /// aggregated rates as CSV.
    Run {
        /// Path to the campaign config file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the closed-form average-rate upper bounds for a symmetric
    /// setup (equal path counts, powers, and unit noise at both hops).
    Bounds {
        /// Restrict output to one relaying strategy; prints both if omitted.
        #[arg(long, value_enum)]
        relaying: Option<RelayingArg>,
        /// Path count per hop.
        #[arg(long)]
        l: usize,
        /// Relay antenna count.
        #[arg(long)]
        n: usize,
        /// Average SNR in dB (transmit power against unit noise).
        #[arg(long)]
        snr_db: f64,
        /// Receive-side average channel power.
        #[arg(long, default_value_t = 1.0)]
        rho1_sq: f64,
        /// Transmit-side average channel power.
        #[arg(long, default_value_t = 1.0)]
        rho2_sq: f64,
    },
    /// Sample one channel realization and write its gain landscape over
    /// the moving region as CSV (one row per grid row).
    Landscape {
        /// Region side length in wavelengths.
        #[arg(long)]
        a: f64,
        /// Grid cell size in wavelengths.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Realization seed.
        #[arg(long)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Number of propagation paths.
        #[arg(long, default_value_t = 5)]
        l: usize,
        /// Average channel power of the realization.
        #[arg(long, default_value_t = 1.0)]
        rho_sq: f64,
    },
    /// Run the built-in invariant suite and report pass/fail per check.
    Validate {
        /// Use reduced sample counts.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RelayingArg {
    Df,
    Af,
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("MARELAY_THREADS") {
        let n: usize = raw.parse().with_context(|| format!("MARELAY_THREADS must be a positive integer, got `{raw}`"))?;
        if n == 0 {
            bail!("MARELAY_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to configure the worker thread pool")?;
    }
    Ok(())
}

fn cmd_run(config: &PathBuf, out: &PathBuf) -> Result<ExitCode> {
    let cfg = CampaignConfig::load(config).with_context(|| format!("loading config {}", config.display()))?;
    let table = run_campaign(&cfg)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&table, BufWriter::new(file))?;
    println!(
        "wrote {} rows for {} sweep values to {}",
        table.rows.len(),
        cfg.sweep.values().len(),
        out.display()
    );
    if table.errors.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for (value, msg) in &table.errors {
            eprintln!("error: sweep value {value} failed: {msg}");
        }
        eprintln!("error: {} sweep value(s) recorded error rows", table.errors.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_bounds(
    relaying: Option<RelayingArg>,
    l: usize,
    n: usize,
    snr_db: f64,
    rho1_sq: f64,
    rho2_sq: f64,
) -> Result<ExitCode> {
    let power = 10f64.powf(snr_db / 10.0);
    let params = SystemParams::symmetric(n, power)?;
    let want = |r: Relaying| match relaying {
        None => true,
        Some(RelayingArg::Df) => r == Relaying::Df,
        Some(RelayingArg::Af) => r == Relaying::Af,
    };
    if want(Relaying::Df) {
        println!("df_aar_upper_bps_hz = {:.6}", aar_df_upper(l, l, rho1_sq, rho2_sq, &params)?);
    }
    if want(Relaying::Af) {
        println!("af_aar_upper_bps_hz = {:.6}", aar_af_upper(l, l, rho1_sq, rho2_sq, &params)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_landscape(a: f64, step: f64, seed: u64, out: &PathBuf, l: usize, rho_sq: f64) -> Result<ExitCode> {
    let wavelength = 1.0;
    let region = Region::new(a * wavelength, 0.5 * wavelength, wavelength)?;
    let paths = sample_paths(l, rho_sq, seed)?;
    let (best_pos, best_gain, grid) = grid_exhaustive(&paths, &region, step * wavelength)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    grid.write_csv(BufWriter::new(file))?;
    println!(
        "wrote a {}x{} gain grid to {}; best cell at ({:.4}, {:.4}) with gain {:.6}",
        grid.rows(),
        grid.cols(),
        out.display(),
        best_pos.x,
        best_pos.y,
        best_gain
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(fast: bool) -> Result<ExitCode> {
    let reports = run_all(fast)?;
    let mut all_ok = true;
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        writeln!(stdout, "{}: {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        all_ok &= r.passed;
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<ExitCode> {
        configure_threads()?;
        match &cli.command {
            Command::Run { config, out } => cmd_run(config, out),
            Command::Bounds { relaying, l, n, snr_db, rho1_sq, rho2_sq } => {
                cmd_bounds(*relaying, *l, *n, *snr_db, *rho1_sq, *rho2_sq)
            }
            Command::Landscape { a, step, seed, out, l, rho_sq } => cmd_landscape(*a, *step, *seed, out, *l, *rho_sq),
            Command::Validate { fast } => cmd_validate(*fast),
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
