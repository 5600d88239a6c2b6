//! `bec-dephasing`: decoherence profiles, trajectories and scans for two
//! double-well qubits in a Bose-Einstein condensate.

mod cache;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::code;

#[derive(Parser)]
#[command(name = "bec-dephasing", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Reservoir selection shared by all commands.
#[derive(Args, Clone, Default)]
pub struct ParamArgs {
    /// Named parameter set (benchmark, trapping, adjacent, discord,
    /// generation, narrow). Default: trapping.
    #[arg(long)]
    pub preset: Option<String>,
    /// Parameter file with either SI keys (m_A, a_B, ..., optional units) or
    /// dimensionless keys (u, g_AB, ...).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long = "g-ab")]
    pub g_ab: Option<f64>,
    #[arg(long)]
    pub n0: Option<f64>,
    /// Dimensionless temperature.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Well separation inside one double well.
    #[arg(long = "l-sep")]
    pub l_sep: Option<f64>,
    /// Distance between the double wells (`inf` for independent baths).
    #[arg(long = "d-sep")]
    pub d_sep: Option<f64>,
}

/// Options every command shares.
#[derive(Args, Clone, Default)]
pub struct Common {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Sidecar file of an earlier run; its values become the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted. A `<output>.meta` sidecar is written
    /// next to it.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Quadrature tolerance (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Profile cache directory (default: $BEC_DEPHASING_CACHE).
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    /// Ignore the profile cache.
    #[arg(long = "no-cache")]
    pub no_cache: bool,
}

/// Time grid: uniform with step `dt`, or fine steps up to `t_switch` then
/// coarse steps.
#[derive(Args, Clone, Default)]
pub struct GridArgs {
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-switch")]
    pub t_switch: Option<f64>,
    #[arg(long = "dt-fine")]
    pub dt_fine: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct ScanArgs {
    /// `a_B` (relative to the template) or `D`.
    #[arg(long)]
    pub variable: Option<String>,
    /// Comma-separated scan values.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate decoherence factors, rates and phase on a time grid.
    Rates {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Evolve a two-qubit state and write its correlations.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// `werner:{+|-}:<c>`, `protocol:{+|-}:<c>`, `product+` or `basis:<XX>`.
        #[arg(long)]
        state: Option<String>,
        /// `map` (exact) or `me` (master equation).
        #[arg(long)]
        method: Option<String>,
        /// Drop the phase generator from the master equation.
        #[arg(long = "no-phase-generator")]
        no_phase_generator: bool,
        /// Discord: `none`, `bell`, `brute` or `auto`.
        #[arg(long)]
        discord: Option<String>,
        /// Also write the density matrices here.
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Classify Werner dynamics over a (c, a_B) grid.
    PhaseDiagram {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "c-min")]
        c_min: Option<f64>,
        #[arg(long = "c-max")]
        c_max: Option<f64>,
        #[arg(long = "c-n")]
        c_n: Option<usize>,
        #[arg(long = "ab-min")]
        ab_min: Option<f64>,
        #[arg(long = "ab-max")]
        ab_max: Option<f64>,
        #[arg(long = "ab-n")]
        ab_n: Option<usize>,
        /// Werner family, `+` or `-`.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        /// Concurrence threshold.
        #[arg(long = "eps-c")]
        eps_c: Option<f64>,
    },
    /// Stationary Werner concurrence along an a_B or D scan.
    ScanStationary {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
    },
    /// Peak generated concurrence along an a_B or D scan.
    ScanGeneration {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Concurrence and discord of an evolving Werner state.
    DiscordCompare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        #[arg(long = "eps-c")]
        eps_c: Option<f64>,
    },
    /// Run built-in consistency checks.
    Validate {
        /// `quick` or `full`.
        #[arg(long)]
        level: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    use commands as c;
    match cli.command {
        Command::Rates { common, grid } => c::rates(&common, &grid),
        Command::Evolve {
            common,
            grid,
            state,
            method,
            no_phase_generator,
            discord,
            density,
        } => c::evolve(&common, &grid, state, method, no_phase_generator, discord, density),
        Command::PhaseDiagram {
            common,
            grid,
            c_min,
            c_max,
            c_n,
            ab_min,
            ab_max,
            ab_n,
            sign,
            eps_c,
        } => c::phase_diagram(
            &common,
            &grid,
            c::DiagramRanges {
                c_min,
                c_max,
                c_n,
                ab_min,
                ab_max,
                ab_n,
            },
            sign,
            eps_c,
        ),
        Command::ScanStationary { common, scan, c, sign } => c::scan_stationary(&common, &scan, c, sign),
        Command::ScanGeneration { common, grid, scan } => c::scan_generation(&common, &grid, &scan),
        Command::DiscordCompare {
            common,
            grid,
            c,
            sign,
            eps_c,
        } => c::discord_compare(&common, &grid, c, sign, eps_c),
        Command::Validate { level } => c::validate(level),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE as u8 } else { code::OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
