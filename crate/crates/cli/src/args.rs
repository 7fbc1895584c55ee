use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heom_core::dataset::CoherenceChannel;
use heom_core::Integrator;

#[derive(Debug, Parser)]
#[command(name = "heom", version, about = "HEOM excitonic dynamics and dataset generation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one Hamiltonian and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Generate a dataset of random Hamiltonians and their trajectories.
    GenDataset(GenDatasetArgs),
    /// Verify a dataset and summarize its contents.
    Inspect(InspectArgs),
    /// Write dataset trajectories as CSV.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntegratorArg {
    Rk4,
    Expm,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::Expm => Integrator::Expm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CoherenceArg {
    Real,
    Imag,
    Abs,
}

impl From<CoherenceArg> for CoherenceChannel {
    fn from(a: CoherenceArg) -> Self {
        match a {
            CoherenceArg::Real => CoherenceChannel::Real,
            CoherenceArg::Imag => CoherenceChannel::Imag,
            CoherenceArg::Abs => CoherenceChannel::Abs,
        }
    }
}

/// Bath and propagation settings shared by `simulate` and `gen-dataset`.
#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Reorganization energy λ per site, cm⁻¹.
    #[arg(long, default_value_t = 35.0)]
    pub lambda: f64,
    /// Drude cutoff γ per site, cm⁻¹.
    #[arg(long, default_value_t = 106.1767)]
    pub gamma: f64,
    /// Bath temperature, K.
    #[arg(long, default_value_t = 300.0)]
    pub temp: f64,
    /// Hierarchy truncation depth.
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Propagation horizon, ps.
    #[arg(long, default_value_t = 1.0)]
    pub time_ps: f64,
    /// Number of time steps over the horizon.
    #[arg(long, default_value_t = 5000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Expm)]
    pub integrator: IntegratorArg,
    /// Initially excited site, one-based.
    #[arg(long, default_value_t = 1)]
    pub initial_site: usize,
    /// Scalar stored for each coherence ρ_{j,j+1}.
    #[arg(long, value_enum, default_value_t = CoherenceArg::Real)]
    pub coherence: CoherenceArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of sites N.
    #[arg(long)]
    pub levels: usize,
    /// Site energies ε_1…ε_N in cm⁻¹, comma separated; ε_1 must be 0.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Vec<f64>,
    /// Nearest-neighbour couplings J_12…J_{N−1,N} in cm⁻¹, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub couplings: Vec<f64>,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Number of sites N.
    #[arg(long)]
    pub levels: usize,
    #[arg(long, default_value_t = 25_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "HEOM_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Dataset directory.
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Dataset directory.
    pub path: PathBuf,
    /// Keep only the first this many femtoseconds of each trajectory.
    #[arg(long)]
    pub window_fs: Option<f64>,
    /// Export a single sample by id.
    #[arg(long, conflicts_with = "combined")]
    pub sample: Option<u64>,
    /// Write every sample into one long-format CSV.
    #[arg(long)]
    pub combined: bool,
    /// Output directory for per-sample files, or the file for --sample/--combined (stdout when absent).
    #[arg(long, required_unless_present_any = ["sample", "combined"])]
    pub out: Option<PathBuf>,
}
