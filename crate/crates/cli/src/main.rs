use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spinchain::disorder::{sample_realization, DisorderSpec};
use spinchain::ensemble::{run_point, run_sweep, thread_pool, StatsRow, SweepGrid};
use spinchain::io::{
    manifest_path, trajectory_stride, write_csv, write_trajectory, RunConfig, RunManifest,
};
use spinchain::propagator::propagate_schedule;
use spinchain::protocols::{build_schedule, ProtocolKind, RampEndpoints};
use spinchain::{verify, StateVector};

/// Single-excitation state transfer through disordered XX spin chains.
#[derive(Debug, Parser)]
#[command(name = "spinchain", version)]
struct Cli {
    /// Worker threads for ensemble averaging [default: all cores]
    #[arg(long, global = true, env = "SPINCHAIN_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble statistics at one parameter point
    Run(PointArgs),
    /// Ensemble statistics over a parameter grid, as CSV
    Sweep(SweepArgs),
    /// Time-resolved site populations for one realization
    Trajectory(TrajectoryArgs),
    /// Run the built-in acceptance checks
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    /// TOML configuration file (a manifest works too); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// swap, spin-coupling or adiabatic
    #[arg(long)]
    protocol: Option<ProtocolKind>,
    /// Number of sites N
    #[arg(long)]
    n: Option<usize>,
    /// Maximum coupling strength
    #[arg(long)]
    j_max: Option<f64>,
    /// Width of the site-energy disorder, in units of j_max
    #[arg(long)]
    sigma_h: Option<f64>,
    /// Width of the relative coupling disorder
    #[arg(long)]
    sigma_j: Option<f64>,
    /// Switch both disorder channels off
    #[arg(long, conflicts_with_all = ["sigma_h", "sigma_j"])]
    noiseless: bool,
    #[arg(long)]
    realizations: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Largest time step for smoothly varying schedules
    #[arg(long)]
    dt_max: Option<f64>,
    /// Adiabatic duration t_out = C N / j_max
    #[arg(long)]
    adiabatic_c: Option<f64>,
    /// Adiabatic ramp width relative to the duration
    #[arg(long)]
    sigma_ratio: Option<f64>,
    /// pinned (ramps run exactly 0 → j_max) or raw (erf tails kept)
    #[arg(long, value_parser = parse_endpoints)]
    ramp_endpoints: Option<RampEndpoints>,
    /// Write the table here, with a manifest alongside
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Protocols to sweep (comma separated)
    #[arg(long, value_delimiter = ',')]
    protocols: Option<Vec<ProtocolKind>>,
    /// Chain lengths to sweep (comma separated)
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Explicit sigma_h values (comma separated)
    #[arg(long, value_delimiter = ',')]
    sigma_h_values: Option<Vec<f64>>,
    /// Explicit sigma_J values (comma separated)
    #[arg(long, value_delimiter = ',')]
    sigma_j_values: Option<Vec<f64>>,
    /// Upper end of a regular sigma axis, used for axes not given explicitly
    #[arg(long)]
    sigma_max: Option<f64>,
    /// Spacing of a regular sigma axis
    #[arg(long)]
    sigma_step: Option<f64>,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Index of the disorder realization to follow
    #[arg(long)]
    realization: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Include the 1000-realization ensemble checks (minutes)
    #[arg(long)]
    full: bool,
}

fn parse_endpoints(s: &str) -> Result<RampEndpoints, String> {
    match s {
        "pinned" => Ok(RampEndpoints::Pinned),
        "raw" => Ok(RampEndpoints::Raw),
        other => Err(format!("expected pinned or raw, got '{other}'")),
    }
}

impl PointArgs {
    /// File values (or defaults) with every given flag applied on top.
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.protocol {
            c.protocol.kind = v;
        }
        if let Some(v) = self.n {
            c.chain.n_sites = v;
        }
        if let Some(v) = self.j_max {
            c.chain.j_max = v;
        }
        if let Some(v) = self.sigma_h {
            c.disorder.sigma_h = v;
        }
        if let Some(v) = self.sigma_j {
            c.disorder.sigma_j = v;
        }
        if self.noiseless {
            c.disorder = DisorderSpec::none();
        }
        if let Some(v) = self.realizations {
            c.realizations = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.dt_max {
            c.propagation.dt_max = v;
        }
        if let Some(v) = self.adiabatic_c {
            c.protocol.adiabatic_c = v;
        }
        if let Some(v) = self.sigma_ratio {
            c.protocol.adiabatic_sigma_ratio = v;
        }
        if let Some(v) = self.ramp_endpoints {
            c.protocol.ramp_endpoints = v;
        }
        Ok(c)
    }
}

impl SweepArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = self.point.resolve()?;
        let mut grid = c.sweep.take().unwrap_or_default();
        if let Some(v) = &self.protocols {
            grid.protocols = v.clone();
        }
        if let Some(v) = &self.ns {
            grid.n_sites = v.clone();
        }
        if self.sigma_max.is_some() || self.sigma_step.is_some() {
            let max = self
                .sigma_max
                .unwrap_or(spinchain::ensemble::DEFAULT_SIGMA_MAX);
            let step = self
                .sigma_step
                .unwrap_or(spinchain::ensemble::DEFAULT_SIGMA_STEP);
            if !(step > 0.0 && max >= 0.0) {
                bail!("sigma axis needs a positive step and non-negative maximum");
            }
            let axis = SweepGrid::axis(max, step);
            grid.sigma_h = axis.clone();
            grid.sigma_j = axis;
        }
        if let Some(v) = &self.sigma_h_values {
            grid.sigma_h = v.clone();
        }
        if let Some(v) = &self.sigma_j_values {
            grid.sigma_j = v.clone();
        }
        c.sweep = Some(grid);
        Ok(c)
    }
}

fn resolve_threads(flag: Option<usize>, config: &mut RunConfig) -> Result<usize> {
    let threads = flag
        .or(config.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    config.threads = Some(threads);
    Ok(threads)
}

/// Sends the table to `output` (plus a manifest) or to standard output.
fn emit(
    output: Option<&Path>,
    command: &str,
    config: &RunConfig,
    write: impl FnOnce(&mut dyn Write) -> spinchain::Result<()>,
) -> Result<()> {
    match output {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            let mut file = io::BufWriter::new(file);
            write(&mut file)?;
            file.flush()?;
            let manifest = manifest_path(path);
            RunManifest::new(command, config.clone())
                .write(&manifest)
                .with_context(|| format!("cannot write {}", manifest.display()))?;
            eprintln!("wrote {} and {}", path.display(), manifest.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn cmd_run(args: &PointArgs, threads: Option<usize>) -> Result<()> {
    let mut config = args.resolve()?;
    let threads = resolve_threads(threads, &mut config)?;
    let experiment = config.experiment();
    let stats = thread_pool(threads)?.install(|| run_point(&experiment))?;
    let rows = [StatsRow::new(&experiment, stats)];
    emit(args.output.as_deref(), "run", &config, |w| {
        write_csv(&rows, w)
    })
}

fn cmd_sweep(args: &SweepArgs, threads: Option<usize>) -> Result<()> {
    let mut config = args.resolve()?;
    let threads = resolve_threads(threads, &mut config)?;
    let grid = config.sweep.clone().expect("sweep grid resolved");
    let base = config.experiment();
    let rows = thread_pool(threads)?.install(|| run_sweep(&grid, &base))?;
    emit(args.point.output.as_deref(), "sweep", &config, |w| {
        write_csv(&rows, w)
    })
}

fn cmd_trajectory(args: &TrajectoryArgs) -> Result<()> {
    let mut config = args.point.resolve()?;
    if let Some(v) = args.realization {
        config.trajectory_realization = v;
    }
    config.experiment().validate()?;
    let schedule = build_schedule(&config.chain, &config.protocol)?;
    let realization = sample_realization(
        &config.disorder,
        &config.chain,
        config.seed,
        config.trajectory_realization,
    );
    let mut settings = config.propagation;
    settings.record_trajectory = true;
    settings.trajectory_stride = trajectory_stride(&schedule, &settings);
    let n = config.chain.n_sites;
    let (_, trajectory) =
        propagate_schedule(&schedule, &realization, &StateVector::site(n, 1), &settings)?;
    let trajectory = trajectory.expect("trajectory recorded");
    emit(args.point.output.as_deref(), "trajectory", &config, |w| {
        write_trajectory(&schedule, &trajectory, w)
    })
}

fn cmd_verify(args: &VerifyArgs, threads: Option<usize>) -> Result<bool> {
    let threads =
        threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let reports = if args.full {
        verify::full_suite(threads)?
    } else {
        verify::quick_suite()?
    };
    let mut all = true;
    for r in &reports {
        println!("{r}");
        all &= r.passed;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!(
        "{} of {} checks passed",
        reports.len() - failed,
        reports.len()
    );
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a, cli.threads).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a, cli.threads).map(|_| true),
        Command::Trajectory(a) => cmd_trajectory(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a, cli.threads),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
