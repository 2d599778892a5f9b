//! Seeded trial runs and CSV output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::instance::{Generator, InstanceSpec};
use crate::harness::opt::exact_opt;
use crate::noise::{NoiseDistribution, NoisyOracle};
use crate::solvers::{derive_seed, select_algorithm, solve_with, Algorithm, Regime, SolverConfig, SolverReport};

/// Stream tags separating the noise key from the algorithm seed of a trial.
const NOISE_TAG: u64 = 1;
const ALGORITHM_TAG: u64 = 2;

/// Where the instance of a trial comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// A fixed instance file; every seed reuses it.
    File(PathBuf),
    /// A generator; seed `s` generates its own instance.
    Generator(Generator),
}

/// An experiment: instances, algorithms and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub instance: InstanceSource,
    /// Solvers to run. Empty means "dispatch by `regime`".
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    /// Replaces the instance's noise block.
    #[serde(default)]
    pub noise: Option<NoiseDistribution>,
    #[serde(default = "default_multiplier")]
    pub sample_multiplier: f64,
    #[serde(default)]
    pub strict: bool,
    /// Compute exact optima when feasible.
    #[serde(default = "default_true")]
    pub opt: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    0.2
}
fn default_multiplier() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

impl TrialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: TrialConfig = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("trial config needs at least one seed".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if !(self.sample_multiplier > 0.0) {
            return Err(Error::Config("sample multiplier must be positive".into()));
        }
        Ok(())
    }

    fn instance_for(&self, seed: u64) -> Result<InstanceSpec> {
        let mut spec = match &self.instance {
            InstanceSource::File(path) => InstanceSpec::load(path)?,
            InstanceSource::Generator(g) => g.generate(seed)?,
        };
        if let Some(noise) = &self.noise {
            spec.noise = noise.clone();
        }
        Ok(spec)
    }

    fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            sample_multiplier: self.sample_multiplier,
            seed: derive_seed(seed, ALGORITHM_TAG),
            strict: self.strict,
            ..Default::default()
        }
    }
}

/// One CSV row; the field order is the CSV header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub n: usize,
    pub r: usize,
    pub epsilon: f64,
    pub f_value: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub noisy_queries: u64,
    pub wall_time_ms: f64,
}

pub const CSV_HEADER: &str = "seed,algorithm,n,r,epsilon,f_value,opt,ratio,noisy_queries,wall_time_ms";

/// The noise key used for trial seed `seed`.
pub fn noise_seed(instance: &InstanceSpec, seed: u64) -> u64 {
    derive_seed(instance.seed ^ seed, NOISE_TAG)
}

/// Runs one seed: every algorithm on the same instance and noise.
pub fn run_seed(cfg: &TrialConfig, seed: u64) -> Result<Vec<(ResultRow, SolverReport)>> {
    let spec = cfg.instance_for(seed)?;
    let c = spec.validate()?;
    let n = spec.ground_size();
    let solver_cfg = cfg.solver_config(seed);
    let algorithms = if cfg.algorithms.is_empty() {
        vec![select_algorithm(&c, cfg.regime, &solver_cfg)?]
    } else {
        cfg.algorithms.clone()
    };
    let opt = if cfg.opt {
        match exact_opt(&spec.objective, &c) {
            Ok((_, v)) => Some(v),
            Err(Error::TooLarge(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let mut rows = Vec::with_capacity(algorithms.len());
    for algorithm in algorithms {
        let oracle = NoisyOracle::new(&spec.objective, spec.noise.clone(), noise_seed(&spec, seed))?;
        let start = Instant::now();
        let report = solve_with(algorithm, &oracle, &c, &solver_cfg)?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        if !c.is_independent(&report.set) {
            return Err(Error::Input(format!(
                "{algorithm} returned infeasible set {} for seed {seed}",
                report.set
            )));
        }
        let ratio = opt.map(|o| if o > 0.0 { report.value / o } else { 1.0 });
        rows.push((
            ResultRow {
                seed,
                algorithm,
                n,
                r: c.rank(),
                epsilon: cfg.epsilon,
                f_value: report.value,
                opt,
                ratio,
                noisy_queries: report.noisy_queries,
                wall_time_ms: wall,
            },
            report,
        ));
    }
    Ok(rows)
}

/// Runs every seed in parallel; rows come back in (seed, algorithm) order
/// of the config.
pub fn run_trials(cfg: &TrialConfig) -> Result<Vec<ResultRow>> {
    cfg.check()?;
    let per_seed: Vec<Vec<(ResultRow, SolverReport)>> =
        cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Result<_>>()?;
    let rows: Vec<ResultRow> = per_seed.into_iter().flatten().map(|(row, _)| row).collect();
    if let Some(path) = &cfg.out {
        write_csv(&rows, path)?;
    }
    Ok(rows)
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
