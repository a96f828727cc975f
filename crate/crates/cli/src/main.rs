use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use falsify_core::synthesis::{es_synthesize, evaluate_alignment, rollout_distance, EsParams};
use falsify_core::trace::SearchPoint;

use falsify_cli::formats;
use falsify_cli::runner::{
    load_results, render_report, resolve_config, resolve_plant, run_repeats,
};

#[derive(Parser)]
#[command(
    name = "falsify",
    about = "Falsification harness for AI-enabled control systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a linear proxy for a neural controller
    Synthesize(SynthesizeArgs),
    /// Simulate the closed loop from a given initial state and write a trace
    Simulate(SimulateArgs),
    /// Run a falsification campaign from a config file
    Falsify(FalsifyArgs),
    /// Run repeated campaigns and aggregate results
    Bench(BenchArgs),
    /// Print metrics for a results directory
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Builtin plant name or fixture path
    #[arg(long)]
    plant: String,
    /// Controller weight file
    #[arg(long)]
    controller: PathBuf,
    /// Output proxy file
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outer ES iterations
    #[arg(long, default_value_t = EsParams::default().max_iterations)]
    max_iterations: usize,
    /// Coefficient updates per outer iteration
    #[arg(long, default_value_t = EsParams::default().time_steps)]
    time_steps: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    plant: String,
    /// Controller weight file (exclusive with --proxy)
    #[arg(long)]
    controller: Option<PathBuf>,
    /// Proxy coefficient file (exclusive with --controller)
    #[arg(long)]
    proxy: Option<PathBuf>,
    /// Initial state as comma-separated numbers, e.g. "0.1,0.0"
    #[arg(long)]
    init: String,
    /// Output trace CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FalsifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stop_on_first: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Results directory (from falsify or bench)
    #[arg(long = "in")]
    in_dir: PathBuf,
    /// Baseline results directory to compare against
    #[arg(long)]
    baseline: Option<PathBuf>,
}

/// Errors are split into configuration errors (exit 1, detected before any
/// work) and runtime failures (exit 2).
enum Phase {
    Config,
    Runtime,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders both usage errors and --help/--version requests as
            // "errors"; only the former exit nonzero
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((Phase::Config, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err((Phase::Runtime, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> std::result::Result<(), (Phase, anyhow::Error)> {
    match cli.command {
        Command::Synthesize(args) => synthesize(args),
        Command::Simulate(args) => simulate(args),
        Command::Falsify(args) => falsify(args),
        Command::Bench(args) => bench(args),
        Command::Report(args) => report(args),
    }
}

fn config_err<T>(r: Result<T>) -> std::result::Result<T, (Phase, anyhow::Error)> {
    r.map_err(|e| (Phase::Config, e))
}

fn runtime_err<T>(r: Result<T>) -> std::result::Result<T, (Phase, anyhow::Error)> {
    r.map_err(|e| (Phase::Runtime, e))
}

fn synthesize(args: SynthesizeArgs) -> std::result::Result<(), (Phase, anyhow::Error)> {
    let plant = config_err(resolve_plant(&args.plant))?;
    let controller = config_err(formats::load_controller(&args.controller))?;
    let params = EsParams {
        seed: args.seed,
        max_iterations: args.max_iterations,
        time_steps: args.time_steps,
        ..EsParams::default()
    };
    let proxy = runtime_err(
        es_synthesize(&plant, &controller, &params)
            .map_err(|e| anyhow::anyhow!("synthesis failed: {e}")),
    )?;
    let init = SearchPoint::new(
        plant.init_box.bounds().iter().map(|(lo, hi)| (lo + hi) / 2.0).collect(),
    );
    let distance = runtime_err(
        rollout_distance(&plant, &controller, &proxy, &init, params.rollout_horizon)
            .map_err(|e| anyhow::anyhow!("evaluating proxy: {e}")),
    )?;
    let mae = runtime_err(
        evaluate_alignment(&plant, &controller, &proxy, &init, params.rollout_horizon)
            .map_err(|e| anyhow::anyhow!("evaluating proxy: {e}")),
    )?;
    runtime_err(formats::save_proxy(&args.out, &proxy))?;
    println!(
        "synthesized proxy for `{}`: rollout distance {distance:.4}, normalized MAE {mae:.4} -> {}",
        plant.name,
        args.out.display()
    );
    Ok(())
}

fn parse_init(s: &str, dim: usize) -> Result<SearchPoint> {
    let coords = s
        .split(',')
        .map(|f| f.trim().parse::<f64>().with_context(|| format!("bad number `{}` in --init", f.trim())))
        .collect::<Result<Vec<f64>>>()?;
    if coords.len() != dim {
        bail!("--init has {} coordinates but the plant has {dim} states", coords.len());
    }
    Ok(SearchPoint::new(coords))
}

fn simulate(args: SimulateArgs) -> std::result::Result<(), (Phase, anyhow::Error)> {
    let plant = config_err(resolve_plant(&args.plant))?;
    let init = config_err(parse_init(&args.init, plant.state_dim()))?;
    let trace = match (&args.controller, &args.proxy) {
        (Some(w), None) => {
            let c = config_err(formats::load_controller(w))?;
            runtime_err(
                plant
                    .simulate(&c, &init, plant.horizon)
                    .map_err(|e| anyhow::anyhow!("simulation failed: {e}")),
            )?
        }
        (None, Some(p)) => {
            let proxy = config_err(formats::load_proxy(p))?;
            runtime_err(
                plant
                    .simulate(&proxy, &init, plant.horizon)
                    .map_err(|e| anyhow::anyhow!("simulation failed: {e}")),
            )?
        }
        _ => {
            return Err((
                Phase::Config,
                anyhow::anyhow!("give exactly one of --controller or --proxy"),
            ))
        }
    };
    runtime_err(formats::write_trace(&args.out, &trace))?;
    println!("wrote {} rows to {}", trace.len(), args.out.display());
    Ok(())
}

fn falsify(args: FalsifyArgs) -> std::result::Result<(), (Phase, anyhow::Error)> {
    let mut config = config_err(formats::load_config(&args.config))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.stop_on_first {
        config.stop_on_first = true;
    }
    let out_dir = PathBuf::from(config.out_dir.clone());
    let resolved = config_err(resolve_config(config))?;
    let artifacts = runtime_err(run_repeats(&resolved, &out_dir))?;
    print_outcome(&artifacts.summary, &out_dir);
    Ok(())
}

fn bench(args: BenchArgs) -> std::result::Result<(), (Phase, anyhow::Error)> {
    let mut config = config_err(formats::load_config(&args.config))?;
    if args.repeats < 1 {
        return Err((Phase::Config, anyhow::anyhow!("--repeats must be >= 1")));
    }
    config.repeats = args.repeats;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let resolved = config_err(resolve_config(config))?;
    let artifacts = runtime_err(run_repeats(&resolved, &args.out))?;
    print_outcome(&artifacts.summary, &args.out);
    Ok(())
}

fn print_outcome(summary: &formats::Summary, out_dir: &Path) {
    println!(
        "{} repeat(s): {} violation(s), mean success rate {:.4}, mean coverage {:.1}% -> {}",
        summary.repeats.len(),
        summary.total_violations,
        summary.mean_success_rate,
        summary.mean_coverage,
        out_dir.display()
    );
}

fn report(args: ReportArgs) -> std::result::Result<(), (Phase, anyhow::Error)> {
    let results = config_err(load_results(&args.in_dir))?;
    let baseline = match &args.baseline {
        Some(dir) => Some(config_err(load_results(dir))?),
        None => None,
    };
    let rendered = runtime_err(render_report(&results, baseline.as_ref()))?;
    print!("{rendered}");
    Ok(())
}
