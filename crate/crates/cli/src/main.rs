//! `qframes` command-line interface.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qframes", version, about = "Build, apply and test frame representations of finite-dimensional quantum theory")]
pub struct Cli {
    /// RNG seed for every randomized step; recorded in reports.
    #[arg(long, global = true, env = "QFRAMES_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Absolute and relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a representation and write the frame with its canonical dual.
    Build(FamilyArgs),
    /// Represent a state or effect through a frame file.
    Rep(RepArgs),
    /// Evaluate the Born rule in both forms.
    Born(BornArgs),
    /// Transfer matrix of a Kraus channel.
    Channel(ChannelArgs),
    /// Star product of two operators or distributions.
    Star(StarArgs),
    /// Run property suites against a representation.
    Verify(VerifyArgs),
    /// Search for a SIC fiducial vector.
    SicFind(SicFindArgs),
    /// Random positive-frame sweep: every canonical dual should have a negative element.
    Sweep(SweepArgs),
    /// Negativity of a distribution, or a sampled classicality check of a representation.
    Negativity(NegativityArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// wootters, odd, even, constellation, ghw or sic.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Field characteristic for ghw (with --n, instead of --dim).
    #[arg(long)]
    pub p: Option<u32>,
    /// Field degree for ghw.
    #[arg(long)]
    pub n: Option<usize>,
    /// Irreducible modulus for ghw, coefficients c_0,...,c_{n-1},1.
    #[arg(long, value_delimiter = ',')]
    pub modulus: Option<Vec<u32>>,
    /// Momentum multiplier f for ghw, as a field-element string.
    #[arg(long)]
    pub f_multiplier: Option<String>,
    /// Fiducial file for sic: {"dim": d, "re": [...], "im": [...]}.
    #[arg(long)]
    pub fiducial_file: Option<PathBuf>,
    /// JSON list of unit 3-vectors for constellation.
    #[arg(long)]
    pub constellation_file: Option<PathBuf>,
    /// Kernel signs eps_1,...,eps_{2s} for constellation.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub signs: Option<Vec<i8>>,
    /// Restart budget for the sic optimizer.
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct RepArgs {
    /// Frame file written by `build`.
    #[arg(long)]
    pub frame: PathBuf,
    /// Density operator file.
    #[arg(long, conflicts_with = "effect", required_unless_present = "effect")]
    pub state: Option<PathBuf>,
    /// Effect operator file.
    #[arg(long)]
    pub effect: Option<PathBuf>,
    /// Side used for effects.
    #[arg(long, value_enum, default_value_t = SideArg::Dual)]
    pub side: SideArg,
    /// Also write a CSV grid (rows q, columns p) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Frame,
    Dual,
}

#[derive(Args, Debug)]
pub struct BornArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub effect: PathBuf,
}

#[derive(Args, Debug)]
pub struct ChannelArgs {
    #[arg(long)]
    pub frame: PathBuf,
    /// Kraus list file: {"dim": d, "kraus": [Operator, ...]}.
    #[arg(long)]
    pub kraus: PathBuf,
    /// qp or def.
    #[arg(long, default_value = "qp")]
    pub form: String,
    /// Optional density operator to push through the channel.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StarArgs {
    #[arg(long)]
    pub frame: PathBuf,
    /// Hermitian operator file or frame-side distribution file.
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Frame file; replaces the family flags.
    #[arg(long, conflicts_with = "family")]
    pub frame: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Comma-separated selectors: woo, fano, ghw, covariance, kernel, dual, tight, normalization, born, all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub props: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SicFindArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Defaults to 1000 at d = 2, 200 at d = 3 and 100 otherwise.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Ontic sizes cycled through; defaults to 4,6,8 at d = 2 and d² otherwise.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct NegativityArgs {
    /// Distribution file; when given only its negativity is reported.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long, conflicts_with = "family")]
    pub frame: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Pure states (and pure effects) sampled by the classicality check.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
