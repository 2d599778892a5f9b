use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisy_submod::harness::{
    exact_opt, noise_seed, run_counterexample, run_trials, run_verify, ConstraintShape, DemoConfig, Generator,
    InstanceSpec, TrialConfig,
};
use noisy_submod::{solve_with, Algorithm, Error, NoiseDistribution, NoisyOracle, Regime, SolverConfig};
use noisy_submod::solvers::select_algorithm;
use serde_json::json;

/// Monotone submodular maximization with a consistently noisy value oracle.
#[derive(Parser)]
#[command(name = "noisy-submod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one instance file and print a JSON report.
    Solve(SolveArgs),
    /// Run a trial config and write one CSV row per (seed, algorithm).
    Experiment(ExperimentArgs),
    /// Run the built-in self checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo run of bundle greedy on the adversarial partition instance.
    DemoCounterexample(DemoArgs),
    /// Write a generated instance file.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solver name; dispatch by `--regime` when omitted.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long, default_value = "auto")]
    regime: String,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sample_multiplier: f64,
    /// Run the local search for the full iteration cap.
    #[arg(long)]
    strict_paper: bool,
    /// Also compute the exact optimum when the instance is small enough.
    #[arg(long)]
    opt: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Trial config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// CSV path; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    sample_multiplier: Option<f64>,
    #[arg(long)]
    strict_paper: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 10.0)]
    m: f64,
    /// Bundle size.
    #[arg(long, default_value_t = 3)]
    bundle: usize,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Exit 1 when the miss frequency is below this.
    #[arg(long, default_value_t = 0.25)]
    threshold: f64,
    /// Skip the comparison solver.
    #[arg(long)]
    no_compare: bool,
    /// Per-trial CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    RandomCoverage,
    RandomFacility,
    PartitionAdversary,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Cardinality rank; also `r` of the adversary.
    #[arg(long)]
    rank: Option<usize>,
    /// Number of contiguous partition blocks (instead of `--rank`).
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = 1)]
    cap: usize,
    #[arg(long, default_value_t = 100)]
    items: usize,
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    #[arg(long, default_value_t = 50)]
    clients: usize,
    #[arg(long, default_value_t = 10.0)]
    m: f64,
    /// Noise block as JSON, e.g. `{"family":"uniform_band","halfwidth":0.1}`.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let spec = InstanceSpec::load(&args.instance)?;
    let c = spec.validate()?;
    let cfg = SolverConfig {
        epsilon: args.epsilon,
        sample_multiplier: args.sample_multiplier,
        seed: args.seed,
        strict: args.strict_paper,
        ..Default::default()
    };
    let algorithm = match &args.algorithm {
        Some(name) => name.parse::<Algorithm>()?,
        None => select_algorithm(&c, args.regime.parse::<Regime>()?, &cfg)?,
    };
    let oracle = NoisyOracle::new(&spec.objective, spec.noise.clone(), noise_seed(&spec, args.seed))?;
    let start = Instant::now();
    let report = solve_with(algorithm, &oracle, &c, &cfg)?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    let opt = if args.opt {
        Some(exact_opt(&spec.objective, &c)?.1)
    } else {
        None
    };
    let out = json!({
        "algorithm": report.algorithm,
        "set": report.set,
        "feasible": c.is_independent(&report.set),
        "value": report.value,
        "opt": opt,
        "ratio": opt.map(|o| if o > 0.0 { report.value / o } else { 1.0 }),
        "noisy_queries": report.noisy_queries,
        "params": report.params,
        "candidates": report.candidates,
        "chosen": report.chosen,
        "local_search": report.traces.iter().map(|t| json!({
            "iterations": t.iterations,
            "calls": t.calls,
            "swaps": t.swaps.len(),
            "final_value": t.final_value,
        })).collect::<Vec<_>>(),
        "timings": report.timings,
        "wall_time_ms": wall,
    });
    emit(&serde_json::to_string_pretty(&out)?, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode, Error> {
    let mut cfg = TrialConfig::load(&args.config)?;
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(m) = args.sample_multiplier {
        cfg.sample_multiplier = m;
    }
    cfg.strict |= args.strict_paper;
    let rows = run_trials(&cfg)?;
    let mut by_alg: Vec<(Algorithm, Vec<f64>)> = Vec::new();
    for row in &rows {
        let Some(ratio) = row.ratio else { continue };
        match by_alg.iter_mut().find(|(a, _)| *a == row.algorithm) {
            Some((_, v)) => v.push(ratio),
            None => by_alg.push((row.algorithm, vec![ratio])),
        }
    }
    eprintln!("{} rows", rows.len());
    for (alg, ratios) in by_alg {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        eprintln!("{alg}: mean ratio {mean:.4}, min {min:.4}");
    }
    if cfg.out.is_none() {
        let mut w = csv::Writer::from_writer(std::io::stdout());
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: u64) -> Result<ExitCode, Error> {
    let checks = run_verify(seed)?;
    let mut ok = true;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn demo(args: DemoArgs) -> Result<ExitCode, Error> {
    let cfg = DemoConfig {
        n: args.n,
        r: args.r,
        m: args.m,
        bundle: args.bundle,
        trials: args.trials,
        seed: args.seed,
        epsilon: args.epsilon,
        compare: !args.no_compare,
    };
    if cfg.trials == 0 {
        return Err(config_error("need at least one trial"));
    }
    let summary = run_counterexample(&cfg)?;
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trial", "bundle_set", "missed", "bundle_ratio", "solver_ratio"])?;
        for t in &summary.trials {
            w.write_record([
                t.trial.to_string(),
                t.bundle_set.to_string(),
                t.missed.to_string(),
                t.bundle_ratio.to_string(),
                t.solver_ratio.map(|r| r.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    println!("trials: {}", summary.trials.len());
    println!("miss frequency: {:.4}", summary.miss_frequency);
    println!("bundle greedy mean ratio: {:.4}", summary.bundle_mean_ratio);
    if let Some(r) = summary.solver_mean_ratio {
        println!("matroid-small mean ratio: {r:.4}");
    }
    if summary.miss_frequency >= args.threshold {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("miss frequency below threshold {}", args.threshold);
        Ok(ExitCode::from(1))
    }
}

fn gen(args: GenArgs) -> Result<ExitCode, Error> {
    let shape = || match (args.rank, args.blocks) {
        (Some(rank), None) => Ok(ConstraintShape::Uniform { rank }),
        (None, Some(count)) => Ok(ConstraintShape::Blocks { count, cap: args.cap }),
        _ => Err(config_error("give exactly one of --rank and --blocks")),
    };
    let generator = match args.kind {
        Kind::RandomCoverage => Generator::RandomCoverage {
            n: args.n,
            items: args.items,
            density: args.density,
            constraint: shape()?,
        },
        Kind::RandomFacility => Generator::RandomFacility {
            n: args.n,
            clients: args.clients,
            constraint: shape()?,
        },
        Kind::PartitionAdversary => Generator::PartitionAdversary {
            n: args.n,
            r: args.rank.ok_or_else(|| config_error("the adversary needs --rank"))?,
            m: args.m,
        },
    };
    let mut spec = generator.generate(args.seed)?;
    if let Some(text) = &args.noise {
        let noise: NoiseDistribution =
            serde_json::from_str(text).map_err(|e| config_error(format!("bad --noise: {e}")))?;
        noise.validate()?;
        spec.noise = noise;
    }
    spec.save(&args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Verify { seed } => verify(seed),
        Command::DemoCounterexample(a) => demo(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_)
                | Error::Input(_)
                | Error::Parameter(_)
                | Error::Unsupported(_)
                | Error::Json(_)
                | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
