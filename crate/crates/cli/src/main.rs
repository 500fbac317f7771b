//! `pkmstiff`: batch front end for compliance identification, VJM stiffness,
//! transmission factors and the Orthoglide studies.
//!
//! Exit codes: 0 ok, 2 bad input, 3 rank or geometry failure, 4 no
//! convergence, 5 singular configuration.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pkm_stiffness::Error;

#[derive(Parser, Debug)]
#[command(name = "pkmstiff", version, about = "Stiffness and performance evaluation for parallel manipulators")]
pub struct Cli {
    /// Require every input file to declare its units (mm, N, rad).
    #[arg(long, global = true)]
    pub units_check: bool,

    /// Newton tolerance on the scaled residual.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; stdout when omitted or `-`.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Run sample loops on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rigid-motion fit of one displacement field.
    Fit(FitArgs),
    /// Compliance matrix from a directory of load cases.
    Identify(IdentifyArgs),
    /// Cartesian stiffness of a VJM model or of the Orthoglide.
    Stiffness(StiffnessArgs),
    /// Planar deflection for a force of fixed magnitude turning around.
    SweepDirection(SweepDirectionArgs),
    /// Planar deflection for growing force along a fixed direction.
    SweepMagnitude(SweepMagnitudeArgs),
    /// Worst-direction deflection over a plane of workpoints.
    Map(MapArgs),
    /// Largest scaled box inside a workspace.
    Inscribe(InscribeArgs),
    /// Velocity, force or accuracy transmission factors.
    Factors(FactorsArgs),
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Field CSV (`px,py,pz,dx,dy,dz`).
    pub field: PathBuf,
    /// JSON sidecar; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Outlier threshold in multiples of σ̂.
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    #[arg(long)]
    pub no_filter: bool,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    /// Directory of `*.csv` fields with their sidecars.
    pub dir: PathBuf,
    /// Significance threshold in standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub k_sig: f64,
    /// Outlier threshold applied to every field before identification.
    #[arg(long)]
    pub filter: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OrthoglideArgs {
    /// Orthoglide parameter file; revised-bar defaults otherwise.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Variant {
    Original,
    Revised,
}

#[derive(Args, Debug)]
pub struct StiffnessArgs {
    /// VJM model file. Without it the Orthoglide is built at `--point`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    #[arg(long, value_parser = vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    pub point: [f64; 3],
    /// External wrench `fx,fy,fz,mx,my,mz` at the platform point.
    #[arg(long, value_parser = vec6, allow_hyphen_values = true, default_value = "0,0,0,0,0,0")]
    pub wrench: [f64; 6],
    /// Classical stiffness with relaxed springs instead of the loaded one.
    #[arg(long)]
    pub unloaded: bool,
}

#[derive(Args, Debug)]
pub struct SweepDirectionArgs {
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    #[arg(long, value_parser = vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    pub point: [f64; 3],
    /// N
    #[arg(long, default_value_t = 300.0)]
    pub force: f64,
    #[arg(long, default_value_t = 72)]
    pub angles: usize,
}

#[derive(Args, Debug)]
pub struct SweepMagnitudeArgs {
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    #[arg(long, value_parser = vec3, allow_hyphen_values = true, default_value = "0,0,0")]
    pub point: [f64; 3],
    /// Force direction in the xy plane, degrees.
    #[arg(long, allow_hyphen_values = true, default_value_t = 45.0)]
    pub angle: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub max: f64,
    #[arg(long, default_value_t = 100.0)]
    pub step: f64,
}

#[derive(Args, Debug)]
pub struct MapArgs {
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub z: f64,
    #[arg(long, default_value_t = 300.0)]
    pub force: f64,
    #[arg(long, default_value_t = 50.0)]
    pub step: f64,
    #[arg(long, default_value_t = 36)]
    pub directions: usize,
    #[arg(long, value_parser = range, allow_hyphen_values = true, default_value = "-200,300")]
    pub x_range: (f64, f64),
    #[arg(long, value_parser = range, allow_hyphen_values = true, default_value = "-200,300")]
    pub y_range: (f64, f64),
}

#[derive(Args, Debug)]
pub struct InscribeArgs {
    /// Voxel mask file. Without it the Orthoglide workspace is sampled.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    /// Base box edge lengths.
    #[arg(long, value_parser = vec3, default_value = "1,1,1")]
    pub base: [f64; 3],
    #[arg(long, value_parser = vec3, allow_hyphen_values = true, default_value = "-400,-400,-400")]
    pub lo: [f64; 3],
    #[arg(long, value_parser = vec3, allow_hyphen_values = true, default_value = "500,500,500")]
    pub hi: [f64; 3],
    /// Sampling step, mm.
    #[arg(long, default_value_t = 20.0)]
    pub resolution: f64,
    /// Admissible velocity transmission factors.
    #[arg(long, value_parser = range, default_value = "0.5,2")]
    pub factor_range: (f64, f64),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Velocity,
    Force,
    Accuracy,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SingularValue,
    Box,
    Directional,
}

#[derive(Args, Debug)]
pub struct FactorsArgs {
    /// Row-major matrix, rows separated by `;`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "point")]
    pub jacobian: Option<String>,
    /// Orthoglide workpoint, used when no matrix is given.
    #[arg(long, value_parser = vec3, allow_hyphen_values = true)]
    pub point: Option<[f64; 3]>,
    #[command(flatten)]
    pub orthoglide: OrthoglideArgs,
    #[arg(long, value_enum, default_value_t = Kind::Velocity)]
    pub kind: Kind,
    #[arg(long, value_enum, default_value_t = Method::Box)]
    pub method: Method,
    /// Per-input limits; all ones when omitted.
    #[arg(long, value_delimiter = ',')]
    pub limits: Option<Vec<f64>>,
    /// Planar directions in the plane of the first two outputs.
    #[arg(long, default_value_t = 36)]
    pub directions: usize,
    /// Random unit directions over all outputs instead of planar ones.
    #[arg(long)]
    pub random_directions: Option<usize>,
}

fn floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"))).collect()
}

fn fixed<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = floats(s)?;
    let n = v.len();
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got {n}"))
}

fn vec3(s: &str) -> Result<[f64; 3], String> {
    fixed::<3>(s)
}

fn vec6(s: &str) -> Result<[f64; 6], String> {
    fixed::<6>(s)
}

fn range(s: &str) -> Result<(f64, f64), String> {
    let [a, b] = fixed::<2>(s)?;
    if a <= b {
        Ok((a, b))
    } else {
        Err(format!("empty range {a}..{b}"))
    }
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) | Error::InvalidParams(_) | Error::DimensionMismatch(_) | Error::Io(_) => 2,
            Error::SingularGeometry { .. }
            | Error::TooFewNodes { .. }
            | Error::RankDeficientLoads { .. }
            | Error::Unreachable { .. }
            | Error::NoFeasibleBox => 3,
            Error::NoConvergence { .. } => 4,
            Error::SingularConfiguration { .. } | Error::SingularJacobian => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

/// Rendered output plus the exit code to report once it is written.
pub struct Output {
    pub text: String,
    pub code: u8,
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    match &cli.output {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, &out.text),
        _ => std::io::stdout().lock().write_all(out.text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = commands::run(&cli).and_then(|out| {
        emit(&cli, &out)?;
        Ok(out.code)
    });
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
