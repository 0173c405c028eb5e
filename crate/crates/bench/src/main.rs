use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qaco_bench::commands::{
    cmd_compare, cmd_estimate_error, cmd_gen_random, cmd_noise_sweep, cmd_solve, compare_table, preset_layers,
    read_layers, sweep_table,
};
use qaco_bench::config::{ConfigFile, OneOrMany, RunConfig, SeedList, SolverKind};
use qaco_bench::BenchError;

#[derive(Parser)]
#[command(name = "qaco-bench", version, about = "Run clustered quantum ant colony TSP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve instances and record one result per solver and seed.
    Solve(RunArgs),
    /// Median lengths of ACO, QACO-hybrid and clustered ACO per dataset.
    Compare(RunArgs),
    /// QACO-hybrid across noise levels with the noiseless baseline.
    NoiseSweep(RunArgs),
    /// Layered circuit failure probability.
    EstimateError(ErrorArgs),
    /// Write a random uniform instance as a TSPLIB file.
    GenRandom(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TSPLIB file or `random:N[:SEED[:BOUND]]`; repeat for several.
    #[arg(long)]
    instance: Vec<String>,
    /// aco, qaco-hybrid or clustered-aco; repeat for several.
    #[arg(long)]
    solver: Vec<String>,
    /// canonical (TSPLIB rounding) or paper (plain Euclidean).
    #[arg(long)]
    metric: Option<String>,
    /// none, bitflip or thermal.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    rate: Option<f64>,
    /// Comma-separated noise levels for noise-sweep.
    #[arg(long)]
    levels: Option<String>,
    /// `0..5` or `1,2,3`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as these flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write 0 for wall_ms so repeated runs produce identical files.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args)]
struct ErrorArgs {
    /// JSON array of layers: `[{"gates": [{"kind", "count", "error_rate"}], "m"?}]`.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    layers: Option<PathBuf>,
    /// Built-in layer set, e.g. heron-4city.
    #[arg(long)]
    preset: Option<String>,
    /// Per-measurement error rate used by presets.
    #[arg(long, default_value_t = 0.0)]
    measurement_rate: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    bound: f64,
    #[arg(long)]
    out: PathBuf,
}

fn run_config(args: RunArgs, base: RunConfig) -> Result<RunConfig, BenchError> {
    let file = match &args.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        instance: (!args.instance.is_empty()).then_some(OneOrMany::Many(args.instance)),
        solver: (!args.solver.is_empty()).then_some(OneOrMany::Many(args.solver)),
        metric: args.metric,
        noise: args.noise,
        rate: args.rate,
        levels: args.levels.as_deref().map(qaco_bench::config::parse_levels).transpose()?,
        seeds: args.seeds.map(SeedList::Spec),
        out: args.out,
        omit_timing: args.omit_timing.then_some(true),
        ..ConfigFile::default()
    };
    file.overlay(flags).into_run_config(base)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qaco-bench: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = run_config(args, RunConfig::default())?;
            for r in cmd_solve(&cfg)? {
                println!("{} {} seed={} length={} iterations={}", r.dataset, r.solver, r.seed, r.length, r.iterations);
            }
            println!("wrote {}", cfg.out.display());
        }
        Command::Compare(args) => {
            let base = RunConfig { solvers: SolverKind::ALL.to_vec(), ..RunConfig::default() };
            let cfg = run_config(args, base)?;
            let (_, rows) = cmd_compare(&cfg)?;
            print!("{}", compare_table(&rows).render());
            println!("wrote {}", cfg.out.display());
        }
        Command::NoiseSweep(args) => {
            let cfg = run_config(args, RunConfig::default())?;
            let (_, rows) = cmd_noise_sweep(&cfg)?;
            print!("{}", sweep_table(&cfg.levels, &rows).render());
            println!("wrote {}", cfg.out.display());
        }
        Command::EstimateError(args) => {
            let layers = match (&args.layers, &args.preset) {
                (Some(p), _) => read_layers(p)?,
                (None, Some(name)) => preset_layers(name, args.measurement_rate)?,
                (None, None) => return Err(BenchError::Config("give --layers or --preset".into())),
            };
            let report = cmd_estimate_error(&layers, args.out.as_deref())?;
            println!("depth={} s={}", report.depth, report.s);
            for (j, avg) in report.layer_average_rates.iter().enumerate() {
                println!("layer {j}: average error {avg}");
            }
        }
        Command::GenRandom(args) => {
            let inst = cmd_gen_random(args.n, args.seed, args.bound, &args.out)?;
            println!("wrote {} ({} cities) to {}", inst.name(), inst.dimension(), args.out.display());
        }
    }
    Ok(())
}
