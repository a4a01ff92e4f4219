//! `vortex-stir`: equilibria, phase portraits, period scans, periodic orbits
//! and parameter sweeps for a particle in a disk stirred by a point vortex.
//!
//! Exit codes: 0 success, 1 i/o or numerical failure, 2 usage or domain
//! error, 3 no center for the requested parameters.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vortex_stir::equilibria::classify_parameters;

/// The subcommands.
mod commands;
/// Run configuration and flag overrides.
mod config;

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    NoCenter(String),
    Runtime(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Runtime(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::NoCenter(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::NoCenter(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<vortex_stir::Error> for Failure {
    fn from(e: vortex_stir::Error) -> Self {
        use vortex_stir::Error as E;
        match e {
            E::NotACenter(_) => Failure::NoCenter(e.to_string()),
            E::InvalidParams(_) | E::Domain(_) | E::InvalidProtocol(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "vortex-stir",
    version,
    about = "Particle dynamics in a disk stirred by a point vortex"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Region label of a (rho0, phi0) pair, printed as JSON.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        rho0: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi0: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Equilibria with their kinds, written to equilibria.json.
    Equilibria(RunArgs),
    /// Equilibria, separatrices and streamlines.
    Portrait(RunArgs),
    /// Period function between the center and the separatrix.
    PeriodScan(RunArgs),
    /// Periodic orbits of the perturbed flow at the lowest resonances.
    PeriodicOrbits(RunArgs),
    /// Region labels over a (rho0, phi0) grid.
    Sweep(RunArgs),
    /// Describes the config, output files and exit codes.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Disk radius.
    #[arg(long = "R", allow_negative_numbers = true)]
    domain_radius: Option<f64>,
    /// Vortex circulation.
    #[arg(long = "gamma", allow_negative_numbers = true)]
    circulation: Option<f64>,
    /// Stirring angular velocity.
    #[arg(long = "theta0", allow_negative_numbers = true)]
    angular_velocity: Option<f64>,
    /// Stirring path radius.
    #[arg(long = "r0", allow_negative_numbers = true)]
    path_radius: Option<f64>,
    /// Perturbation amplitude (needs a protocol in the config).
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
}

impl RunArgs {
    fn load(&self) -> Result<commands::Run, Failure> {
        let overrides = Overrides {
            output_dir: self.output_dir.clone(),
            domain_radius: self.domain_radius,
            circulation: self.circulation,
            angular_velocity: self.angular_velocity,
            path_radius: self.path_radius,
            epsilon: self.epsilon,
        };
        commands::Run::start(RunConfig::load(self.config.as_deref(), &overrides)?)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("VORTEX_STIR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("VORTEX_STIR_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<String, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Classify { rho0, phi0, tol } => {
            let label = classify_parameters(rho0, phi0, tol)?;
            Ok(serde_json::to_string(&label).expect("label serializes") + "\n")
        }
        Command::Equilibria(a) => commands::equilibria(&a.load()?),
        Command::Portrait(a) => commands::portrait(&a.load()?),
        Command::PeriodScan(a) => commands::period_scan(&a.load()?),
        Command::PeriodicOrbits(a) => commands::periodic_orbits(&a.load()?),
        Command::Sweep(a) => commands::sweep_grid(&a.load()?),
        Command::Schema => Ok(commands::schema()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
