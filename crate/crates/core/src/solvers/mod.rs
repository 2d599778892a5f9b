//! End-to-end solvers, baselines and regime dispatch.

mod baseline;
mod cardinality;
mod matroid;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use baseline::{baseline_bundle_greedy, baseline_greedy_noisy, BundleOptions, DEFAULT_BALL_LIMIT};
pub use cardinality::{solve_cardinality_large, solve_cardinality_small};
pub use matroid::{solve_matroid_large, solve_matroid_small, solve_sbo};

use crate::auxiliary::{stream_rng, CoefficientTable, Surrogate};
use crate::error::{parameter, Error, Result};
use crate::local_search::{ApproxOracle, ExactPhi, NlsTrace, SampledPhiH, SampledPhiPinned};
use crate::matroid::Constraint;
use crate::noise::NoisyOracle;
use crate::objective::SetFunction;
use crate::subset::{Element, Subset};

/// The solvers exposed by [`solve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CardSmall,
    CardLarge,
    MatroidSmall,
    MatroidLarge,
    Sbo,
    Greedy,
    BundleGreedy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::CardSmall,
        Algorithm::CardLarge,
        Algorithm::MatroidSmall,
        Algorithm::MatroidLarge,
        Algorithm::Sbo,
        Algorithm::Greedy,
        Algorithm::BundleGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CardSmall => "card-small",
            Algorithm::CardLarge => "card-large",
            Algorithm::MatroidSmall => "matroid-small",
            Algorithm::MatroidLarge => "matroid-large",
            Algorithm::Sbo => "sbo",
            Algorithm::Greedy => "greedy",
            Algorithm::BundleGreedy => "bundle-greedy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// How the auxiliary function is evaluated inside the local search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimation {
    /// Monte-Carlo estimators over noisy values.
    #[default]
    Sampled,
    /// Exact enumeration over the noisy values; desk-scale only.
    Exact,
}

/// Knobs shared by all solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Multiplies every sample-count formula.
    pub sample_multiplier: f64,
    /// Seed of the algorithm's own randomness (never the noise key).
    pub seed: u64,
    /// Disable early termination of the local search.
    pub strict: bool,
    pub estimation: Estimation,
    /// Overrides `|H| = ⌈3 ln n⌉` in the large-cardinality solver.
    pub pinned_size: Option<usize>,
    /// Overrides `l = ⌈3 ln n⌉` in the base-orderable solver.
    pub part_length: Option<usize>,
    /// Overrides the sample count `M` of every estimator.
    pub samples: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 0.2,
            sample_multiplier: 1.0,
            seed: 0,
            strict: false,
            estimation: Estimation::Sampled,
            pinned_size: None,
            part_length: None,
            samples: None,
        }
    }
}

impl SolverConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        SolverConfig {
            epsilon,
            seed,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.sample_multiplier > 0.0 && self.sample_multiplier.is_finite()) {
            return Err(parameter(format!(
                "sample multiplier must be positive, got {}",
                self.sample_multiplier
            )));
        }
        if self.samples == Some(0) {
            return Err(parameter("sample override must be at least 1"));
        }
        Ok(())
    }

    /// `M = ⌈ln r · √n · max(r, ln n)⌉` for the smoothed estimator.
    pub fn smooth_samples(&self, n: usize, r: usize) -> usize {
        self.samples.unwrap_or_else(|| {
            let (nf, rf) = (n as f64, r as f64);
            scaled(rf.ln() * nf.sqrt() * rf.max(nf.ln()), self.sample_multiplier)
        })
    }

    /// `M = ⌈r ε⁻¹ ln^{5/2} n ln² r⌉` for the pinned-set estimator.
    pub fn pinned_samples(&self, n: usize, r: usize) -> usize {
        self.samples.unwrap_or_else(|| {
            let (nf, rf) = (n as f64, r as f64);
            scaled(rf / self.epsilon * nf.ln().powf(2.5) * rf.ln().powi(2), self.sample_multiplier)
        })
    }
}

fn scaled(x: f64, multiplier: f64) -> usize {
    ((x * multiplier).ceil() as usize).max(1)
}

/// `⌈3 ln n⌉`.
pub fn log_part_length(n: usize) -> usize {
    (3.0 * (n as f64).ln()).ceil() as usize
}

/// Parameters actually used by a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub step: f64,
    pub delta: f64,
    /// Iteration cap `I` of the local search.
    pub cap: usize,
    /// Estimator sample count `M`.
    pub samples: usize,
    /// `|H|`, or the part length for the base-orderable solver.
    pub pinned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseTiming {
    pub phase: &'static str,
    pub millis: f64,
}

/// Outcome of one solver run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    pub set: Subset,
    /// Noise-free `f` of `set`; evaluated out of band.
    pub value: f64,
    /// Noisy queries made by the run.
    pub noisy_queries: u64,
    pub traces: Vec<NlsTrace>,
    /// Candidates compared in the final phase, in order.
    pub candidates: Vec<Subset>,
    /// Index into `candidates` of the returned set, when applicable.
    pub chosen: Option<usize>,
    pub timings: Vec<PhaseTiming>,
    pub params: ReportParams,
}

/// Per-run bookkeeping shared by the solvers.
pub(crate) struct RunContext<'o, 'a> {
    oracle: &'o NoisyOracle<'a>,
    algorithm: Algorithm,
    start_queries: u64,
    clock: Instant,
    timings: Vec<PhaseTiming>,
}

impl<'o, 'a> RunContext<'o, 'a> {
    pub(crate) fn new(oracle: &'o NoisyOracle<'a>, algorithm: Algorithm, cfg: &SolverConfig) -> Result<Self> {
        cfg.check()?;
        Ok(RunContext {
            oracle,
            algorithm,
            start_queries: oracle.query_count(),
            clock: Instant::now(),
            timings: Vec::new(),
        })
    }

    pub(crate) fn phase(&mut self, name: &'static str) {
        let now = Instant::now();
        self.timings.push(PhaseTiming {
            phase: name,
            millis: (now - self.clock).as_secs_f64() * 1e3,
        });
        self.clock = now;
    }

    pub(crate) fn finish(
        self,
        set: Subset,
        traces: Vec<NlsTrace>,
        candidates: Vec<Subset>,
        chosen: Option<usize>,
        params: ReportParams,
    ) -> SolverReport {
        SolverReport {
            algorithm: self.algorithm,
            value: self.oracle.objective().value(&set),
            noisy_queries: self.oracle.query_count() - self.start_queries,
            set,
            traces,
            candidates,
            chosen,
            timings: self.timings,
            params,
        }
    }
}

/// Independent seed for a sub-run `tag` of a solver.
pub(crate) fn derive_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, tag.wrapping_add(1 << 32)).next_u64()
}

/// The approximation oracle used inside the local search.
pub(crate) fn phi_oracle<'o>(
    oracle: &'o NoisyOracle<'_>,
    table: &'o CoefficientTable,
    pinned: Option<Subset>,
    samples: usize,
    seed: u64,
    alpha: f64,
    delta: f64,
    estimation: Estimation,
) -> Box<dyn ApproxOracle + 'o> {
    match (estimation, pinned) {
        (Estimation::Exact, None) => Box::new(ExactPhi {
            values: oracle,
            surrogate: Surrogate::Smooth,
            table,
        }),
        (Estimation::Exact, Some(h)) => Box::new(ExactPhi {
            values: oracle,
            surrogate: Surrogate::Pinned(h),
            table,
        }),
        (Estimation::Sampled, None) => Box::new(SampledPhiH {
            values: oracle,
            table,
            samples,
            seed,
            alpha,
            delta,
        }),
        (Estimation::Sampled, Some(h)) => Box::new(SampledPhiPinned {
            values: oracle,
            pinned: h,
            table,
            samples,
            seed,
            alpha,
            delta,
        }),
    }
}

/// `argmax_{e ∉ s} f̃(s + e)`, smallest id on ties.
pub(crate) fn best_extension(oracle: &NoisyOracle<'_>, s: &Subset) -> Option<Element> {
    let mut best: Option<(Element, f64)> = None;
    for e in 0..oracle.ground_size() {
        if s.contains(e) {
            continue;
        }
        let v = oracle.value(&s.with(e));
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((e, v));
        }
    }
    best.map(|(e, _)| e)
}

/// Which family of solver the dispatcher should use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Small when `r³ <= n`, large otherwise.
    #[default]
    Auto,
    Small,
    Large,
    /// The base-orderable solver; partition constraints only.
    Sbo,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Regime::Auto),
            "small" => Ok(Regime::Small),
            "large" => Ok(Regime::Large),
            "sbo" => Ok(Regime::Sbo),
            _ => Err(Error::Config(format!("unknown regime '{s}'"))),
        }
    }
}

/// The solver `solve` would run for this constraint and regime.
pub fn select_algorithm(c: &Constraint, regime: Regime, cfg: &SolverConfig) -> Result<Algorithm> {
    let n = c.ground_size();
    let r = c.rank();
    let cardinality = matches!(c, Constraint::Uniform { .. });
    let small = |card| if card { Algorithm::CardSmall } else { Algorithm::MatroidSmall };
    let large = |card| if card { Algorithm::CardLarge } else { Algorithm::MatroidLarge };
    Ok(match regime {
        Regime::Small => small(cardinality),
        Regime::Large => large(cardinality),
        Regime::Sbo => {
            if c.as_partition().is_none() {
                return Err(parameter("the base-orderable solver needs a partition constraint"));
            }
            Algorithm::Sbo
        }
        Regime::Auto => {
            let cube = (r as u128).pow(3);
            if cube <= n as u128 {
                small(cardinality)
            } else {
                let feasible = if cardinality {
                    cfg.pinned_size.unwrap_or_else(|| log_part_length(n)) < r
                } else {
                    r >= 4
                };
                if feasible {
                    large(cardinality)
                } else {
                    small(cardinality)
                }
            }
        }
    })
}

/// Picks a solver by regime and runs it.
pub fn solve(oracle: &NoisyOracle<'_>, c: &Constraint, regime: Regime, cfg: &SolverConfig) -> Result<SolverReport> {
    let algorithm = select_algorithm(c, regime, cfg)?;
    solve_with(algorithm, oracle, c, cfg)
}

/// Runs a named solver.
pub fn solve_with(
    algorithm: Algorithm,
    oracle: &NoisyOracle<'_>,
    c: &Constraint,
    cfg: &SolverConfig,
) -> Result<SolverReport> {
    if c.ground_size() != oracle.ground_size() {
        return Err(Error::Input(format!(
            "constraint has {} elements but the objective has {}",
            c.ground_size(),
            oracle.ground_size()
        )));
    }
    let cardinality_rank = || match c {
        Constraint::Uniform { rank, .. } => Ok(*rank),
        _ => Err(parameter(format!("{algorithm} needs a cardinality constraint"))),
    };
    match algorithm {
        Algorithm::CardSmall => solve_cardinality_small(oracle, cardinality_rank()?, cfg),
        Algorithm::CardLarge => solve_cardinality_large(oracle, cardinality_rank()?, cfg),
        Algorithm::MatroidSmall => solve_matroid_small(oracle, c, cfg),
        Algorithm::MatroidLarge => solve_matroid_large(oracle, c, cfg),
        Algorithm::Sbo => solve_sbo(oracle, c, cfg),
        Algorithm::Greedy => baseline_greedy_noisy(oracle, c),
        Algorithm::BundleGreedy => baseline_bundle_greedy(oracle, c, &BundleOptions::new(1, cfg.seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_examples() {
        let cfg = SolverConfig::default();
        let c = Constraint::uniform(1000, 9);
        assert_eq!(select_algorithm(&c, Regime::Auto, &cfg).unwrap(), Algorithm::CardSmall);
        let c = Constraint::uniform(1000, 50);
        assert_eq!(select_algorithm(&c, Regime::Auto, &cfg).unwrap(), Algorithm::CardLarge);
        // large regime without room for the pinned set falls back
        let c = Constraint::uniform(100, 6);
        assert_eq!(select_algorithm(&c, Regime::Auto, &cfg).unwrap(), Algorithm::CardSmall);
        assert!(select_algorithm(&c, Regime::Sbo, &cfg).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn sample_formulas() {
        let cfg = SolverConfig::default();
        let m = cfg.smooth_samples(60, 8);
        assert_eq!(m, (8f64.ln() * 60f64.sqrt() * 8.0).ceil() as usize);
        let mut half = cfg.clone();
        half.sample_multiplier = 0.5;
        assert!(half.smooth_samples(60, 8) < m);
        half.samples = Some(7);
        assert_eq!(half.pinned_samples(60, 8), 7);
    }
}
