//! `graphon`: sample graphs from graphons, compute spectra, filter signals,
//! evaluate homomorphism densities and run the convergence experiments.
//!
//! Exit codes: 0 success, 1 numeric failure (including failed `--assert-trend`
//! checks), 2 usage error, 3 missing data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "graphon", version, about = "Graphon signal processing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a graph from a graphon; writes adjacency.csv, labels.csv and config.toml.
    Sample(SampleArgs),
    /// Signed-index eigenvalues of a graph file or a graphon.
    Spectrum(SpectrumArgs),
    /// Filter a graph signal in the vertex or the spectral domain.
    Filter(FilterArgs),
    /// Homomorphism density of a motif in a graph or a graphon.
    Density(DensityArgs),
    /// Run a convergence experiment.
    Experiment(ExperimentArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Bernoulli,
    Weighted,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum LatentArg {
    Uniform,
    Grid,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Graphon descriptor, e.g. er:0.4, exp:2.3, expabs:2.3, sbm:0.5,1;0.8,0.2,0.2,0.8, step:file.csv.
    #[arg(long)]
    graphon: String,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Bernoulli edges or the graphon values as edge weights.
    #[arg(long, value_enum, default_value_t = ModeArg::Bernoulli)]
    mode: ModeArg,
    /// Latent labels: i.i.d. uniform or the regular grid i/n.
    #[arg(long, value_enum, default_value_t = LatentArg::Uniform)]
    latents: LatentArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory (created if needed).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Graph file: CSV adjacency matrix or edge list.
    #[arg(long, conflicts_with = "graphon", required_unless_present = "graphon")]
    graph: Option<PathBuf>,
    /// Graphon descriptor, diagonalized on a regular grid.
    #[arg(long)]
    graphon: Option<String>,
    /// Eigenvalues kept per sign.
    #[arg(long)]
    k: Option<usize>,
    /// Grid resolution for graphon inputs.
    #[arg(long, default_value_t = 1000)]
    resolution: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FilterMode {
    /// Polynomial in the raw shift.
    Poly,
    /// Frequency response of the normalized eigenvalues λ/n.
    Spectral,
}

#[derive(Args, Debug)]
struct FilterArgs {
    #[arg(long)]
    graph: PathBuf,
    /// One-column signal CSV.
    #[arg(long)]
    signal: PathBuf,
    /// Polynomial taps h_0,h_1,... applied to the raw shift.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    taps: Option<Vec<f64>>,
    /// Frequency response descriptor, e.g. lowpass:0.3,0.1 or pwl:-1:0,1:1.
    #[arg(long, conflicts_with = "filter_file")]
    filter: Option<String>,
    /// File holding a frequency response descriptor.
    #[arg(long)]
    filter_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FilterMode::Poly)]
    mode: FilterMode,
    /// With --taps, also run the other mode and report the largest difference.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// edge, cycle:K, path:K, complete:K, star:K or an edge-list file.
    #[arg(long)]
    motif: String,
    #[arg(long, conflicts_with = "graphon", required_unless_present = "graphon")]
    graph: Option<PathBuf>,
    #[arg(long)]
    graphon: Option<String>,
    /// Monte Carlo samples for graphons that are not piecewise constant.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Pollution,
    Gmrf,
    Eigconv,
    Transfer,
    Movie,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    /// TOML config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graphon: Option<String>,
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid resolution of the graphon side.
    #[arg(long)]
    resolution: Option<usize>,
    /// Frequency response descriptor.
    #[arg(long)]
    filter: Option<String>,
    /// Signed eigenvalue indices, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    indices: Option<Vec<i32>>,
    /// Compare transform coefficients by magnitude rank instead of index.
    #[arg(long)]
    magnitude_sorted: bool,
    /// Spread of the pollution signal.
    #[arg(long)]
    sigma: Option<f64>,
    /// GMRF diffusion coefficient.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Path to MovieLens u.data (movie only).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Run movie on generated ratings instead of the dataset.
    #[arg(long, conflicts_with = "data")]
    synthetic: bool,
    /// Filter orders for movie, comma separated.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Nearest neighbours kept per user (movie only).
    #[arg(long)]
    k_nn: Option<usize>,
    /// Ridge weight of the tap fit (movie only).
    #[arg(long)]
    lambda_reg: Option<f64>,
    /// Symmetrization of the neighbour graph: max or mean (movie only).
    #[arg(long)]
    symmetrize: Option<String>,
    /// Output directory (created if needed).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write an SVG plot per result table.
    #[arg(long)]
    svg: bool,
    /// Exit with code 1 when a convergence trend check fails.
    #[arg(long)]
    assert_trend: bool,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Filter(a) => commands::filter(a),
        Command::Density(a) => commands::density(a),
        Command::Experiment(a) => commands::experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
