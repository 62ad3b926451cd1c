//! `bisphere`: resonances, fields and scattering of two close-to-touching
//! spherical resonators from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Regime, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }
}

impl From<bisphere::Error> for CliError {
    fn from(e: bisphere::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bisphere",
    version,
    about = "Subwavelength resonances of two close-to-touching spherical resonators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact and asymptotic capacitance coefficients.
    Capacitance,
    /// Resonant frequencies from the exact eigenvalues and from the
    /// close-gap asymptotics.
    Resonances,
    /// Potentials, eigenmodes and mode gradients at exterior points.
    Field,
    /// Maximal mode gradients over an epsilon grid with fitted rates.
    Blowup,
    /// Modal scattering weights over a frequency grid.
    Scattering,
    /// Resonances over an epsilon grid, or over a contrast grid in the regime.
    Sweep,
}

/// Every flag overrides the matching config-file value.
#[derive(Debug, Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    r1: Option<f64>,
    #[arg(long, global = true)]
    r2: Option<f64>,
    /// Gap between the spheres.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Contrast rho_b / rho.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Regime exponent: epsilon = exp(-c0 / delta^(1 - beta)).
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    c0: Option<f64>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    #[arg(long = "rho-b", global = true)]
    rho_b: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long = "kappa-b", global = true)]
    kappa_b: Option<f64>,
    /// Absolute series tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Relative pole guard for the scattering weights.
    #[arg(long = "pole-guard", global = true)]
    pole_guard: Option<f64>,
    #[arg(long = "eps-min", global = true)]
    eps_min: Option<f64>,
    #[arg(long = "eps-max", global = true)]
    eps_max: Option<f64>,
    #[arg(long = "delta-min", global = true)]
    delta_min: Option<f64>,
    #[arg(long = "delta-max", global = true)]
    delta_max: Option<f64>,
    /// Grid size for sweep and blowup.
    #[arg(long, global = true)]
    count: Option<usize>,
    #[arg(long = "omega-min", global = true)]
    omega_min: Option<f64>,
    #[arg(long = "omega-max", global = true)]
    omega_max: Option<f64>,
    #[arg(long = "omega-count", global = true)]
    omega_count: Option<usize>,
    /// Boundary samples per sphere in the gradient search.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Incident direction `d1,d2,d3`.
    #[arg(long, global = true, value_parser = parse_vec3)]
    direction: Option<[f64; 3]>,
    /// Evaluation point `x1,x2,x3`; repeatable.
    #[arg(long = "point", global = true, value_parser = parse_vec3, allow_hyphen_values = true)]
    points: Vec<[f64; 3]>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write a JSON error report here on failure.
    #[arg(long = "error-json", global = true)]
    error_json: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three comma-separated numbers, got {}", v.len()))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl Overrides {
    fn apply(self, mut c: RunConfig) -> Result<RunConfig, CliError> {
        let g = &mut c.geometry;
        set(&mut g.r1, self.r1);
        set(&mut g.r2, self.r2);
        if self.eps.is_some() {
            if self.beta.is_some() {
                return Err(CliError::Config(
                    "--eps and --beta are mutually exclusive".into(),
                ));
            }
            g.epsilon = self.eps;
            g.regime = None;
        }
        if let Some(beta) = self.beta {
            let c0 = self.c0.or(g.regime.map(|r| r.c0)).unwrap_or(1.0);
            g.regime = Some(Regime { beta, c0 });
            g.epsilon = None;
        } else if let Some(c0) = self.c0 {
            let r = g
                .regime
                .as_mut()
                .ok_or_else(|| CliError::Config("--c0 needs --beta".into()))?;
            r.c0 = c0;
        }
        let m = &mut c.material;
        set_opt(&mut m.delta, self.delta);
        set_opt(&mut m.rho, self.rho);
        set_opt(&mut m.rho_b, self.rho_b);
        set_opt(&mut m.kappa, self.kappa);
        set_opt(&mut m.kappa_b, self.kappa_b);
        set(&mut c.tolerances.series, self.tol);
        set(&mut c.tolerances.pole_guard, self.pole_guard);
        let s = &mut c.sweep;
        set(&mut s.eps_min, self.eps_min);
        set(&mut s.eps_max, self.eps_max);
        set(&mut s.delta_min, self.delta_min);
        set(&mut s.delta_max, self.delta_max);
        set(&mut s.count, self.count);
        set_opt(&mut s.omega_min, self.omega_min);
        set_opt(&mut s.omega_max, self.omega_max);
        set(&mut s.omega_count, self.omega_count);
        set(&mut s.samples, self.samples);
        set(&mut s.direction, self.direction);
        if !self.points.is_empty() {
            s.points = self.points;
        }
        set_opt(&mut c.output.path, self.out);
        set(&mut c.output.format, self.format);
        set_opt(&mut c.output.error_json, self.error_json);
        set_opt(&mut c.jobs, self.jobs);
        Ok(c)
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<(), (CliError, Option<PathBuf>)> {
    let error_json = cli.opts.error_json.clone();
    let fail = |e: CliError, c: Option<&RunConfig>| {
        (
            e,
            c.and_then(|c| c.output.error_json.clone())
                .or(error_json.clone()),
        )
    };

    let base = match &cli.opts.config {
        Some(path) => RunConfig::load(path).map_err(|e| fail(e, None))?,
        None => RunConfig::default(),
    };
    let config = cli.opts.apply(base).map_err(|e| fail(e, None))?;
    let needs_gap = !matches!(cli.command, Command::Blowup | Command::Sweep);
    config
        .validate(needs_gap)
        .map_err(|e| fail(e, Some(&config)))?;
    if let Some(n) = config.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| {
                fail(
                    CliError::Config(format!("cannot start {n} workers: {e}")),
                    Some(&config),
                )
            })?;
    }
    let table = match cli.command {
        Command::Capacitance => commands::capacitance(&config),
        Command::Resonances => commands::resonances(&config),
        Command::Field => commands::field(&config),
        Command::Blowup => commands::blowup(&config),
        Command::Scattering => commands::scattering(&config),
        Command::Sweep => commands::sweep(&config),
    }
    .map_err(|e| fail(e, Some(&config)))?;
    output::emit(&table, &config, argv).map_err(|e| fail(e, Some(&config)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, report)) => {
            eprintln!("error: {e}");
            if let Some(path) = report {
                output::write_error_json(&path, &e);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
