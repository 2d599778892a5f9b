//! Monte-Carlo run of bundle greedy against the adversarial partition
//! instance, with the small-rank matroid solver for comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::instance::{adversary_special, Generator};
use crate::noise::NoisyOracle;
use crate::solvers::{baseline_bundle_greedy, derive_seed, solve_matroid_small, BundleOptions, SolverConfig};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub n: usize,
    pub r: usize,
    pub m: f64,
    /// Bundle size.
    pub bundle: usize,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Also run the small-rank matroid solver on every trial.
    pub compare: bool,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            n: 300,
            r: 4,
            m: 10.0,
            bundle: 3,
            trials: 400,
            seed: 0,
            epsilon: 0.2,
            compare: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoTrial {
    pub trial: usize,
    pub bundle_set: Subset,
    /// Bundle greedy took an element of the large block other than `e★`.
    pub missed: bool,
    pub bundle_ratio: f64,
    pub solver_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoSummary {
    pub trials: Vec<DemoTrial>,
    pub miss_frequency: f64,
    pub bundle_mean_ratio: f64,
    pub solver_mean_ratio: Option<f64>,
}

/// Every trial uses the same instance and a fresh noise key.
pub fn run_counterexample(cfg: &DemoConfig) -> Result<DemoSummary> {
    let spec = Generator::PartitionAdversary {
        n: cfg.n,
        r: cfg.r,
        m: cfg.m,
    }
    .generate(cfg.seed)?;
    let c = spec.validate()?;
    let special = adversary_special(cfg.n);
    let opt = cfg.m;
    let trials: Vec<DemoTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let key = derive_seed(cfg.seed, 2 * t as u64);
            let oracle = NoisyOracle::new(&spec.objective, spec.noise.clone(), key)?;
            let report = baseline_bundle_greedy(&oracle, &c, &BundleOptions::new(cfg.bundle, key))?;
            let in_block = report.set.iter().any(|e| e >= cfg.r - 1);
            let missed = in_block && !report.set.contains(special);
            let solver_ratio = if cfg.compare {
                let oracle = NoisyOracle::new(&spec.objective, spec.noise.clone(), key)?;
                let solver_cfg = SolverConfig::new(cfg.epsilon, derive_seed(cfg.seed, 2 * t as u64 + 1));
                Some(solve_matroid_small(&oracle, &c, &solver_cfg)?.value / opt)
            } else {
                None
            };
            Ok(DemoTrial {
                trial: t,
                bundle_ratio: report.value / opt,
                bundle_set: report.set,
                missed,
                solver_ratio,
            })
        })
        .collect::<Result<_>>()?;
    let count = trials.len().max(1) as f64;
    let miss_frequency = trials.iter().filter(|t| t.missed).count() as f64 / count;
    let bundle_mean_ratio = trials.iter().map(|t| t.bundle_ratio).sum::<f64>() / count;
    let solver_mean_ratio = if cfg.compare {
        Some(trials.iter().filter_map(|t| t.solver_ratio).sum::<f64>() / count)
    } else {
        None
    };
    Ok(DemoSummary {
        trials,
        miss_frequency,
        bundle_mean_ratio,
        solver_mean_ratio,
    })
}
