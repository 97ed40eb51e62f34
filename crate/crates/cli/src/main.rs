//! Experiment runner. Usage:
//!   randwave <experiment> --config <path> [--set key=value ...] --out <dir>
//!   randwave make-base --profile <kind> ... --out <file>
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical instability,
//! 4 i/o failure. Worker count comes from the config key `workers` or the
//! RANDWAVE_WORKERS environment variable, defaulting to the machine size.

mod config;
mod experiments;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use experiments::Profile;
use manifest::ManifestBuilder;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        CliError { message, code: 2 }
    }
    pub fn instability(message: String) -> Self {
        CliError { message, code: 3 }
    }
    pub fn io(message: String) -> Self {
        CliError { message, code: 4 }
    }
}

impl From<randwave::Error> for CliError {
    fn from(e: randwave::Error) -> Self {
        match e {
            randwave::Error::Instability(_) => CliError::instability(e.to_string()),
            randwave::Error::Io(_) => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "randwave", version, about = "cubic wave simulation and Monte-Carlo verification runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exceedance tail of a norm functional over randomized draws
    Tails(RunArgs),
    /// Membership rates of the frequency-threshold events
    Events(RunArgs),
    /// Ensemble evolution and growth-exponent fits of the remainder norm
    Growth(RunArgs),
    /// Paired-flow continuity probe in the trajectory metric
    Continuity(RunArgs),
    /// Equivalence/singularity verdict for two gaussian randomizations
    Kakutani(RunArgs),
    /// One trajectory of the split-step integrator
    Evolve(RunArgs),
    /// Write a base spectrum file
    MakeBase(MakeBaseArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Override a top-level config key, e.g. --set trials=1000
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (created if absent)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileKind {
    SingleMode,
    PowerDecay,
    Custom,
}

#[derive(Args)]
struct MakeBaseArgs {
    #[arg(long, value_enum)]
    profile: ProfileKind,
    /// Lattice mode for single-mode, e.g. --mode 1,0,0
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mode: Option<Vec<i32>>,
    /// Decay exponent of power-decay coefficients <n>^-sigma
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
    /// Overall amplitude of the power-decay profile
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Sobolev index stored with the spectrum
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Source file for the custom profile
    #[arg(long)]
    from: Option<PathBuf>,
    /// Output spectrum file
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::MakeBase(args) => {
            init_workers(None)?;
            let profile = match args.profile {
                ProfileKind::SingleMode => {
                    let mode = args.mode.ok_or_else(|| {
                        CliError::validation("single-mode profile needs --mode i,j,k".into())
                    })?;
                    if mode.len() != 3 {
                        return Err(CliError::validation(format!(
                            "--mode needs exactly three components, got {}",
                            mode.len()
                        )));
                    }
                    Profile::SingleMode {
                        n: [mode[0], mode[1], mode[2]],
                    }
                }
                ProfileKind::PowerDecay => Profile::PowerDecay {
                    sigma: args.sigma.ok_or_else(|| {
                        CliError::validation("power-decay profile needs --sigma".into())
                    })?,
                    n_max: args.n_max.ok_or_else(|| {
                        CliError::validation("power-decay profile needs --n-max".into())
                    })?,
                    scale: args.scale,
                },
                ProfileKind::Custom => Profile::Custom {
                    from: args.from.ok_or_else(|| {
                        CliError::validation("custom profile needs --from".into())
                    })?,
                },
            };
            experiments::make_base(profile, args.s, &args.out)
        }
        Command::Tails(args) => run_experiment("tails", args, experiments::run_tails),
        Command::Events(args) => run_experiment("events", args, experiments::run_events),
        Command::Growth(args) => run_experiment("growth", args, experiments::run_growth),
        Command::Continuity(args) => {
            run_experiment("continuity", args, experiments::run_continuity)
        }
        Command::Kakutani(args) => run_experiment("kakutani", args, experiments::run_kakutani),
        Command::Evolve(args) => run_experiment("evolve", args, experiments::run_evolve),
    }
}

fn run_experiment(
    name: &str,
    args: RunArgs,
    runner: fn(&RunConfig, &mut ManifestBuilder, &std::path::Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let (config, raw) = RunConfig::load(&args.config, &args.sets)?;
    if let Some(declared) = config.experiment.as_deref() {
        if declared != name {
            return Err(CliError::validation(format!(
                "config declares experiment '{declared}' but the '{name}' subcommand was invoked"
            )));
        }
    }
    init_workers(config.workers)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::io(format!("creating output directory {:?}: {e}", args.out)))?;
    let mut manifest = ManifestBuilder::new(name, raw, &args.out);
    runner(&config, &mut manifest, &args.out)?;
    manifest.finish()
}

fn init_workers(config_workers: Option<usize>) -> Result<(), CliError> {
    let workers = config_workers.or_else(|| {
        std::env::var("RANDWAVE_WORKERS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::validation("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(format!("worker pool: {e}")))?;
    }
    Ok(())
}
