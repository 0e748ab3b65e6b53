use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lamens::io::pipeline::{self, BurgersRequest, KernelCheckRequest};
use lamens::io::{load_config, RunConfig, RunManifest};
use lamens::kernels::BoundSampleSpec;
use lamens::Error;

/// Pseudospectral solver for the inertia Lamé equations on the periodic box.
#[derive(Parser)]
#[command(name = "lamens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write diagnostics and snapshots.
    Simulate(ConfigArgs),
    /// Run the λ ladder of a sweep configuration against the incompressible reference.
    Sweep(ConfigArgs),
    /// Compare the Lamé solution at the configured λ with the incompressible reference.
    Compare(ConfigArgs),
    /// Fit Gaussian-bound constants of the free-space kernel.
    KernelCheck(KernelArgs),
    /// Burgers run checked against the Cole-Hopf closed form.
    BurgersOracle(BurgersArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    /// Derivative order |α| (0, 1 or 2).
    #[arg(long, default_value_t = 0)]
    alpha: u32,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 10.0, 100.0])]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 4.0)]
    r_max: f64,
    #[arg(long, default_value_t = 81)]
    n_r: usize,
    #[arg(long, default_value_t = 0.01)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 41)]
    n_t: usize,
    /// Decay constant c (default 1/(16 mu)).
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    serial: bool,
    #[arg(long, default_value = "kernel-check")]
    out: PathBuf,
}

#[derive(Args)]
struct BurgersArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 0.5)]
    t_end: f64,
    #[arg(long)]
    serial: bool,
    #[arg(long, default_value = "burgers-oracle")]
    out: PathBuf,
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("LAMENS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("LAMENS_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size thread pool: {e}")))
}

fn load(args: &ConfigArgs) -> Result<(RunConfig, PathBuf), Error> {
    let cfg = load_config(&args.config)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<RunManifest, Error> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => {
            let (cfg, out) = load(&a)?;
            let o = pipeline::simulate(&cfg, &out)?;
            print_json(&o.report)?;
            Ok(o.manifest)
        }
        Command::Sweep(a) => {
            let (cfg, out) = load(&a)?;
            let o = pipeline::sweep(&cfg, &out)?;
            print_json(&o.report)?;
            Ok(o.manifest)
        }
        Command::Compare(a) => {
            let (cfg, out) = load(&a)?;
            let (report, manifest) = pipeline::compare(&cfg, &out)?;
            print_json(&report)?;
            Ok(manifest)
        }
        Command::KernelCheck(a) => {
            let req = KernelCheckRequest {
                alpha_order: a.alpha,
                mu: a.mu,
                lambdas: a.lambdas,
                spec: BoundSampleSpec {
                    r_max: a.r_max,
                    n_r: a.n_r,
                    t_min: a.t_min,
                    t_max: a.t_max,
                    n_t: a.n_t,
                    decay_constant: a.decay,
                    ..Default::default()
                },
                serial: a.serial,
            };
            let (report, manifest) = pipeline::kernel_check(&req, &a.out)?;
            print_json(&report)?;
            Ok(manifest)
        }
        Command::BurgersOracle(a) => {
            let req = BurgersRequest {
                dim: a.dim,
                grid_n: a.n,
                mu: a.mu,
                dt: a.dt,
                t_end: a.t_end,
                serial: a.serial,
            };
            let (report, manifest) = pipeline::burgers_oracle(&req, &a.out)?;
            print_json(&report)?;
            Ok(manifest)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) if m.termination == "completed" => ExitCode::SUCCESS,
        Ok(m) => {
            let record = serde_json::json!({
                "error": "RunNotCompleted",
                "termination": m.termination,
                "message": format!("run ended with status {}", m.termination),
            });
            eprintln!("{record}");
            ExitCode::from(3)
        }
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
