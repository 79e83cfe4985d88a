mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use mems_core::channels::FamilyTag;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mems",
    version,
    about = "Maximally entangled mixed states from non-trace-preserving local maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a MEMS I or MEMS II state with its diagnostics.
    Gen {
        #[arg(long)]
        family: FamilyTag,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Report trace-preservation, unitality and complete positivity of a Kraus map.
    Audit {
        /// `mems1:<p>` or `mems2:<p>`.
        #[arg(long, conflicts_with = "map", required_unless_present = "map")]
        builtin: Option<String>,
        /// Kraus map JSON file.
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check the Kraus, optics and second-quantized models.
    Verify {
        /// Comma-separated MEMS I parameters in [2/3, 1].
        #[arg(long = "p-grid", value_delimiter = ',', default_values_t = mems_core::verify::DEFAULT_P_GRID)]
        p_grid: Vec<f64>,
        #[arg(long, default_value_t = mems_core::verify::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// CSV of (linear entropy, concurrence) for random states and the MEMS curve.
    Frontier {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points per MEMS family.
        #[arg(long = "curve-points", default_value_t = 101)]
        curve_points: usize,
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Send one photon through the attenuated interferometer.
    Optics {
        #[arg(long, conflicts_with = "p", required_unless_present = "p")]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        /// Input polarization amplitude on H (real).
        #[arg(long = "phi-h", default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        phi_h: f64,
        /// Input polarization amplitude on V (real).
        #[arg(long = "phi-v", default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        phi_v: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the second-quantized model at beam-splitter transmissivity T.
    Qed {
        #[arg(long = "T")]
        t: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen { family, p, common } => commands::gen(family, p, &common),
        Command::Audit {
            builtin,
            map,
            common,
        } => commands::audit(builtin, map, &common),
        Command::Verify {
            p_grid,
            trials,
            seed,
            sequential,
            common,
        } => commands::verify(p_grid, trials, seed, sequential, &common),
        Command::Frontier {
            samples,
            seed,
            curve_points,
            sequential,
            common,
        } => commands::frontier(samples, seed, curve_points, sequential, &common),
        Command::Optics {
            alpha,
            p,
            phi_h,
            phi_v,
            common,
        } => commands::optics(alpha, p, phi_h, phi_v, &common),
        Command::Qed { t, common } => commands::qed(t, &common),
    };
    ExitCode::from(code as u8)
}
