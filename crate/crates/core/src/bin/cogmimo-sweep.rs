//! Sweeps the interference threshold and writes one CSV row per
//! (threshold, policy) cell.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 some calibration failed.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cogmimo::sweep::{default_q_range, q_grid, render_csv, QScale};
use cogmimo::{run_sweep, PolicyKind, SweepSpec, SystemConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Parser)]
#[command(name = "cogmimo-sweep", version, about = "Rate vs. interference threshold for limited-feedback cognitive MIMO power policies")]
struct Args {
    /// Transmit antennas.
    #[arg(long, default_value_t = 2)]
    mt: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 2)]
    mr: usize,
    /// Noise power (linear).
    #[arg(long, default_value_t = 1.0)]
    n0: f64,
    /// Peak per-antenna power (linear).
    #[arg(long, default_value_t = 10.0)]
    pmax: f64,
    /// Smallest threshold [default: 0.05 * mt * pmax].
    #[arg(long)]
    q_min: Option<f64>,
    /// Largest threshold [default: 1.5 * mt * pmax].
    #[arg(long)]
    q_max: Option<f64>,
    #[arg(long, default_value_t = 25)]
    q_steps: usize,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    q_scale: Scale,
    /// Comma-separated subset of EBPP,MEBPP,IEBPP,IMEBPP,FIXED.
    #[arg(long, value_delimiter = ',', default_value = "EBPP,MEBPP,IEBPP,IMEBPP,FIXED")]
    policies: Vec<String>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path, `-` for stdout.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Evaluate on a second sample set drawn with this seed.
    #[arg(long)]
    eval_holdout: Option<u64>,
    /// Relative tolerance on the calibrated interference.
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
}

fn build_spec(args: &Args) -> cogmimo::Result<SweepSpec> {
    // q is a placeholder until the grid is known
    let config = SystemConfig::new(args.mt, args.mr, args.n0, args.pmax, 1.0)?;
    let (default_min, default_max) = default_q_range(&config);
    let scale = match args.q_scale {
        Scale::Lin => QScale::Lin,
        Scale::Log => QScale::Log,
    };
    let q_values = q_grid(
        args.q_min.unwrap_or(default_min),
        args.q_max.unwrap_or(default_max),
        args.q_steps,
        scale,
    )?;
    let policies = args
        .policies
        .iter()
        .map(|s| s.parse::<PolicyKind>())
        .collect::<cogmimo::Result<Vec<_>>>()?;

    let mut spec = SweepSpec::new(config, q_values, args.samples, args.seed);
    spec.policies = policies;
    spec.holdout_seed = args.eval_holdout;
    spec.rel_tol = args.rel_tol;
    spec.output_path = args.out.clone();
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let spec = match build_spec(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let rows = match run_sweep(&spec) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let csv = render_csv(&rows);
    let written = if spec.output_path.as_os_str() == "-" {
        std::io::stdout().write_all(csv.as_bytes())
    } else {
        std::fs::write(&spec.output_path, csv)
    };
    if let Err(e) = written {
        eprintln!("error: cannot write {}: {e}", spec.output_path.display());
        return ExitCode::from(2);
    }

    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!("calibration failed: {} at q = {}: {}", r.policy, r.q, r.error.as_deref().unwrap_or(""));
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
