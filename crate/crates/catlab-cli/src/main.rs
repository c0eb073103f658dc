//! `catlab`: command-line front end for the spin-dependent-kick cat-state
//! simulator: preset execution, parameter scans, lineshape fits, Wigner
//! maps, cross-engine verification, and kick-schedule planning.

mod commands;
mod config;
mod io;
mod pool;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Errors carrying their exit codes: 2 configuration, 3 program parse,
/// 4 verification failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Parse(String),
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Parse(m) | CliError::Verification(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "catlab",
    version,
    about = "Exact spin-motion cat-state interferometry on one trapped ion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (flat `key = value`, `#` comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Preset name (cat2-everypulse, cat2-halfperiod, cat34, cat68,
    /// control-m0, control-m1) or a program file path.
    #[arg(long, global = true)]
    program: Option<String>,
    /// Kicks per set for the two-component presets.
    #[arg(long, global = true)]
    n_kicks: Option<usize>,
    /// Lamb-Dicke parameter.
    #[arg(long, global = true)]
    eta: Option<String>,
    /// Mean initial phonon number.
    #[arg(long, global = true)]
    nbar: Option<String>,
    /// Optical phase of the kicks (angle expression).
    #[arg(long, global = true)]
    phi_lambda: Option<String>,
    /// Trap delay bound to `theta` (angle expression, e.g. 2*pi).
    #[arg(long, global = true)]
    theta: Option<String>,
    /// Analysis phase bound to `phi` (angle expression).
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Initial qubit state (`up` or `down`); presets carry their own.
    #[arg(long, global = true)]
    init: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for scans (0 = all cores; CATLAB_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path prefix.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Gauss-Hermite nodes per axis for thermal averages.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one program at fixed delay and dump the final state.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Contrast versus trap delay (or trap frequency), CSV output.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Scan variable: theta, phi or omega.
        #[arg(long)]
        variable: Option<String>,
        /// Grid start (angle expression; rad or rad/s).
        #[arg(long)]
        start: Option<String>,
        /// Grid stop.
        #[arg(long)]
        stop: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Analysis phases per scan point.
        #[arg(long)]
        phases: Option<usize>,
    },
    /// Amplitude-only lineshape fit of scan data.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// CSV with theta_rad and contrast columns.
        #[arg(long)]
        data: PathBuf,
        /// Lineshape: eq4, multi34 or multi68.
        #[arg(long)]
        model: String,
        /// Known coherent amplitude |alpha| for the eq4 model.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Wigner map of the state a program prepares.
    Wigner {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a program through both engines and compare brightness.
    OracleCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Number-basis truncation.
        #[arg(long)]
        n_max: Option<usize>,
        /// Maximum tolerated brightness deviation.
        #[arg(long)]
        tol: Option<f64>,
        /// Random (theta, phi, phi_lambda, beta) draws.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Kick count and wall time to reach a target separation.
    Plan {
        #[command(flatten)]
        common: CommonArgs,
        /// Target separation between the cat components.
        #[arg(long)]
        delta_alpha: f64,
        /// everypulse or halfperiod.
        #[arg(long)]
        scheme: String,
    },
}

fn resolve(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.load_file(path)?;
    }
    for pair in &common.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(v) = &common.program {
        cfg.program = v.clone();
    }
    if let Some(v) = common.n_kicks {
        cfg.n_kicks = v;
    }
    if let Some(v) = &common.eta {
        cfg.eta = config::parse_angle_value("eta", v)?;
    }
    if let Some(v) = &common.nbar {
        cfg.nbar = config::parse_angle_value("nbar", v)?;
    }
    if let Some(v) = &common.phi_lambda {
        cfg.phi_lambda = config::parse_angle_value("phi_lambda", v)?;
    }
    if let Some(v) = &common.theta {
        cfg.theta = config::parse_angle_value("theta", v)?;
    }
    if let Some(v) = &common.phi {
        cfg.phi = config::parse_angle_value("phi", v)?;
    }
    if let Some(v) = &common.init {
        cfg.set("init", v)?;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.threads {
        cfg.threads = v;
    }
    if let Some(v) = &common.output {
        cfg.output = v.clone();
    }
    if let Some(v) = common.quad_nodes {
        cfg.quad_nodes = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { common } => commands::cmd_simulate(&resolve(common)?),
        Command::Scan {
            common,
            variable,
            start,
            stop,
            steps,
            phases,
        } => {
            let mut cfg = resolve(common)?;
            if let Some(v) = variable {
                cfg.set("scan.variable", v)?;
            }
            if let Some(v) = start {
                cfg.scan.start = config::parse_angle_value("scan.start", v)?;
            }
            if let Some(v) = stop {
                cfg.scan.stop = config::parse_angle_value("scan.stop", v)?;
            }
            if let Some(v) = steps {
                cfg.scan.steps = *v;
            }
            if let Some(v) = phases {
                cfg.scan.phases = *v;
            }
            cfg.validate()?;
            commands::cmd_scan(&cfg)
        }
        Command::Fit {
            common,
            data,
            model,
            alpha,
        } => {
            let cfg = resolve(common)?;
            commands::cmd_fit(
                &cfg,
                &commands::FitArgs {
                    data: data.clone(),
                    model: model.clone(),
                    alpha: *alpha,
                },
            )
        }
        Command::Wigner { common } => commands::cmd_wigner(&resolve(common)?),
        Command::OracleCheck {
            common,
            n_max,
            tol,
            samples,
        } => {
            let mut cfg = resolve(common)?;
            if let Some(v) = n_max {
                cfg.oracle_n_max = *v;
            }
            if let Some(v) = tol {
                cfg.oracle_tol = *v;
            }
            if let Some(v) = samples {
                cfg.oracle_samples = *v;
            }
            commands::cmd_oracle_check(&cfg)
        }
        Command::Plan {
            common,
            delta_alpha,
            scheme,
        } => {
            let cfg = resolve(common)?;
            commands::cmd_plan(&cfg, *delta_alpha, scheme)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
