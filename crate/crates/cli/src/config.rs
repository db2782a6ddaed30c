//! Command-line configuration and its validation.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finsler_core::FinslerNorm;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "unitary-finsler", version, about = "Random-instance experiments on unitary groups and orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Suite {
    Convexity,
    Lifting,
    Projection,
    Nilpotent,
    Completion,
    IoCheck,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convexity of the distance along random geodesics
    Convexity(CommonArgs),
    /// Minimal liftings on finite-spectrum orbits
    Lifting(CommonArgs),
    /// Minimal geodesics between projection pairs
    Projection(CommonArgs),
    /// Minimal liftings on the nilpotent orbit
    Nilpotent(CommonArgs),
    /// Minimal-norm completions of Hermitian block matrices
    Completion(CommonArgs),
    /// Read a matrix file and check that it round-trips
    IoCheck(CommonArgs),
}

impl Command {
    pub fn split(&self) -> (Suite, &CommonArgs) {
        match self {
            Command::Convexity(a) => (Suite::Convexity, a),
            Command::Lifting(a) => (Suite::Lifting, a),
            Command::Projection(a) => (Suite::Projection, a),
            Command::Nilpotent(a) => (Suite::Nilpotent, a),
            Command::Completion(a) => (Suite::Completion, a),
            Command::IoCheck(a) => (Suite::IoCheck, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    Operator,
    Schatten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusPolicy {
    /// `½·sinc⁻¹(1/(p−1))`
    Paper,
    /// The paper radius capped below π/4
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Schatten exponent (even, at least 2)
    #[arg(long, default_value_t = 4)]
    pub p: u32,
    #[arg(long, value_enum, default_value_t = NormChoice::Operator)]
    pub norm: NormChoice,
    /// Use the trace normalized by the dimension
    #[arg(long)]
    pub normalized: bool,
    /// Number of grid points on each geodesic
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = RadiusPolicy::Conservative)]
    pub radius_policy: RadiusPolicy,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Matrix file (JSON) used as the base point or checked by io-check
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Validated configuration, echoed into every run summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub suite: &'static str,
    pub seed: u64,
    pub dim: usize,
    pub trials: usize,
    pub norm: String,
    pub p: u32,
    pub normalized: bool,
    pub grid: usize,
    pub radius_policy: RadiusPolicy,
    pub format: Format,
    #[serde(skip)]
    pub finsler: FinslerNorm,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub input: Option<PathBuf>,
}

pub fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Convexity => "convexity",
        Suite::Lifting => "lifting",
        Suite::Projection => "projection",
        Suite::Nilpotent => "nilpotent",
        Suite::Completion => "completion",
        Suite::IoCheck => "io-check",
    }
}

impl ExperimentConfig {
    pub fn validate(suite: Suite, a: &CommonArgs) -> Result<Self, String> {
        if !(2..=64).contains(&a.dim) {
            return Err(format!("--dim must lie in [2, 64], got {}", a.dim));
        }
        if a.trials < 1 {
            return Err("--trials must be at least 1".into());
        }
        if a.p < 2 || a.p % 2 != 0 {
            return Err(format!("--p must be an even integer >= 2, got {}", a.p));
        }
        if a.grid < 3 {
            return Err(format!("--grid must be at least 3, got {}", a.grid));
        }
        if suite == Suite::IoCheck && a.input.is_none() {
            return Err("io-check needs --input".into());
        }
        let finsler = match (a.norm, a.normalized) {
            (NormChoice::Operator, false) => FinslerNorm::operator(),
            (NormChoice::Operator, true) => return Err("--normalized applies to --norm schatten only".into()),
            (NormChoice::Schatten, false) => FinslerNorm::schatten(a.p).map_err(|e| e.to_string())?,
            (NormChoice::Schatten, true) => FinslerNorm::normalized(a.p).map_err(|e| e.to_string())?,
        };
        Ok(ExperimentConfig {
            suite: suite_name(suite),
            seed: a.seed,
            dim: a.dim,
            trials: a.trials,
            norm: finsler.label(),
            p: a.p,
            normalized: a.normalized,
            grid: a.grid,
            radius_policy: a.radius_policy,
            format: a.format,
            finsler,
            out: a.out.clone(),
            input: a.input.clone(),
        })
    }
}
