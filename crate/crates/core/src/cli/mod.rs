//! Command-line interface.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 verification
//! failed (output files are still written).

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }
}

pub(crate) fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "rampforge", version, about = "Constant-speed friction ramps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a planar ramp branch with its normal-force profile.
    Generate2d(Generate2dArgs),
    /// Integrate a spatial ramp, mesh its surface and verify it.
    Generate3d(Generate3dArgs),
    /// Check Newton's law along the constant-speed motion.
    Verify(VerifyArgs),
    /// Write per-frame positions, velocities and forces.
    Simulate(SimulateArgs),
    /// Dilate a ramp and verify both equivalent physical readings.
    Scale(ScaleArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// JSON file with default values for any option; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Kinetic friction coefficient, in (0, 1).
    #[arg(long, conflicts_with = "delta_deg")]
    pub mu: Option<f64>,
    /// Friction angle in degrees, in (0, 45).
    #[arg(long = "delta-deg")]
    pub delta_deg: Option<f64>,
    /// Constant speed, m/s.
    #[arg(long)]
    pub v: Option<f64>,
    /// Gravity, m/s^2.
    #[arg(long)]
    pub g: Option<f64>,
    /// Block mass, kg.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Saved parameter set (JSON with delta, mu, g, v, m, a).
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpaceArgs {
    /// Tangent field: upslope, horizontal or blend:<w>.
    #[arg(long)]
    pub field: Option<String>,
    /// Initial direction "x,y,z", normalized on input.
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<String>,
    /// Arc length to integrate, m.
    #[arg(long)]
    pub smax: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Generate2dArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// lower or upper.
    #[arg(long)]
    pub branch: Option<String>,
    /// Arc length sampled from the apex, m.
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, svg or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Also write the integrated tangent angle against its closed form.
    #[arg(long)]
    pub theta_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Generate3dArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Ruling offsets "lo,hi", m.
    #[arg(long, allow_hyphen_values = true)]
    pub r_extent: Option<String>,
    /// Mesh resolution NxM (along the curve x across it).
    #[arg(long)]
    pub mesh: Option<String>,
    /// Output directory for mesh.obj, curve.csv and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// planar or space.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub branch: Option<String>,
    /// End of the checked time window, s.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Check the ramp against a different friction coefficient.
    #[arg(long)]
    pub assume_mu: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json (full report) or csv (profiles).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// jsonl or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Also write the 3D path as an OBJ polyline.
    #[arg(long)]
    pub polyline: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub branch: Option<String>,
    /// Dilation factor.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command, printing its summary to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate2d(a) => commands::generate2d(a),
        Command::Generate3d(a) => commands::generate3d(a),
        Command::Verify(a) => commands::verify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Scale(a) => commands::scale(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
