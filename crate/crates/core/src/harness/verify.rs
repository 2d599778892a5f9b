//! Desk-scale self checks behind the `verify` subcommand.
//!
//! Each check is a small, seeded version of a property the library relies
//! on. They are meant to finish in seconds on one core.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::auxiliary::{
    comparison_f0, estimate_phi_h_detailed, ln_binomial, phi_exact_bruteforce, phi_h_coefficient_form, surrogate_h,
    surrogate_h_pinned, CoefficientTable, EstimatorConfig, Surrogate, TauClasses,
};
use crate::error::Result;
use crate::harness::instance::{ConstraintShape, ConstraintSpec, Generator};
use crate::harness::opt::brute_force_opt;
use crate::local_search::{nls, ExactPhi, NlsConfig};
use crate::matroid::Constraint;
use crate::noise::{NoiseDistribution, NoisyOracle};
use crate::objective::{verify_submodular_monotone, Objective, SetFunction};
use crate::solvers::{solve_with, Algorithm, SolverConfig};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn coverage(rng: &mut ChaCha8Rng, n: usize, items: usize, density: f64) -> Objective {
    let item_weights = (0..items).map(|_| rng.gen_range(0.5..1.5)).collect();
    let covers = (0..n)
        .map(|_| (0..items).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    Objective::WeightedCoverage { covers, item_weights }
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Subset {
    let k = rng.gen_range(1..=max.min(n));
    Subset::new(rand::seq::index::sample(rng, n, k))
}

fn coefficients() -> Check {
    let table = CoefficientTable::new(40);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = (table.m(0, 0) - 1.0).abs() < 1e-12;
    for a in 2..=32 {
        let (mut lin, mut sq) = (0.0, 0.0);
        for t in 1..=a {
            let c = ln_binomial(a, t).exp();
            let m = table.m(a - 1, t as isize - 1);
            lin += c * m;
            sq += c * m * m;
        }
        ok &= lin <= table.harmonic(a) + 1e-9 && sq <= 3.0;
        worst = worst.max(lin - table.harmonic(a));
    }
    check("coefficient bounds", ok, format!("max(Σ C·m - H_a) = {worst:.3e}"))
}

fn tau_bounds() -> Result<Check> {
    let table = CoefficientTable::new(40);
    let mut ok = true;
    for n in [64usize, 1024] {
        let root = (n as f64).sqrt() as usize;
        for a in 1..=root {
            let tau = TauClasses::new(&table, a, n)?;
            ok &= tau.sum_of_squares() <= 12.0 / (n * a) as f64 + 1e-12;
            ok &= tau.max_weight() <= 4.0 / n as f64 + 1e-12;
            ok &= tau.total() <= 2.0 * ((a as f64).ln() + 2.0) + 1e-12;
        }
    }
    Ok(check("tau bounds", ok, "n in {64, 1024}, a <= sqrt(n)".into()))
}

fn phi_sandwich(rng: &mut ChaCha8Rng) -> Result<Check> {
    let table = CoefficientTable::new(16);
    let mut ok = true;
    for _ in 0..40 {
        let n = rng.gen_range(4..=9);
        let f = coverage(rng, n, 12, 0.3);
        let a = random_subset(rng, n, 5);
        let h = surrogate_h(&f, &a);
        let phi = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table)?;
        let coeff = phi_h_coefficient_form(&f, &a, &table)?;
        let upper = E / (E - 1.0) * table.harmonic(a.len()) * h;
        ok &= h <= phi + 1e-9 && phi <= upper + 1e-9 && (phi - coeff).abs() <= 1e-9;
    }
    Ok(check("phi sandwich", ok, "40 random coverage cases".into()))
}

fn surrogate_bounds(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut ok = true;
    for _ in 0..100 {
        let n = 10;
        let f = coverage(rng, n, 15, 0.25);
        let s = random_subset(rng, n, 5);
        let fs = f.value(&s);
        let f0 = comparison_f0(&f, &s)?;
        ok &= (1.0 - 1.0 / s.len() as f64) * fs <= f0 + 1e-12 && f0 <= fs + 1e-12;
        let rest: Vec<usize> = (0..n).filter(|&e| !s.contains(e)).collect();
        let pinned = Subset::new(rest.into_iter().take(3));
        let hh = surrogate_h_pinned(&f, &pinned, &s)?;
        ok &= hh >= 0.5 * f.value(&s.union(&pinned)) + 0.5 * fs - 1e-12;
    }
    Ok(check("surrogate bounds", ok, "100 random cases".into()))
}

fn estimator(rng: &mut ChaCha8Rng) -> Result<Check> {
    let table = CoefficientTable::new(16);
    let f = coverage(rng, 8, 12, 0.3);
    let a = Subset::new([1, 4, 6]);
    let exact = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table)?;
    let oracle = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 0)?;
    let est = estimate_phi_h_detailed(&oracle, &a, &table, &EstimatorConfig::new(20_000, 5, 0))?;
    let z = (est.value - exact).abs() / est.std_error.max(1e-300);
    Ok(check(
        "estimator unbiasedness",
        z <= 4.0,
        format!("exact {exact:.5}, estimate {:.5}, z = {z:.2}", est.value),
    ))
}

fn noise_consistency() -> Result<Check> {
    let f = Objective::Modular { weights: vec![1.0; 16] };
    let oracle = NoisyOracle::new(&f, NoiseDistribution::Exponential, 9)?;
    let mut ok = true;
    let mut sum = 0.0;
    let count = 4000;
    for i in 0..count {
        let s = Subset::new((0..16).filter(|b| (i >> b) & 1 == 1));
        let v = oracle.value(&s);
        ok &= v == oracle.value(&s);
        if !s.is_empty() {
            sum += oracle.multiplier(&s);
        }
    }
    let mean = sum / (count - 1) as f64;
    ok &= (mean - 1.0).abs() < 0.1;
    Ok(check("noise consistency", ok, format!("mean multiplier {mean:.3}")))
}

fn local_search(rng: &mut ChaCha8Rng) -> Result<Check> {
    let table = CoefficientTable::new(16);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let f = coverage(rng, 12, 20, 0.2);
        let c = Constraint::uniform(12, 4);
        let approx = ExactPhi {
            values: &f,
            surrogate: Surrogate::Identity,
            table: &table,
        };
        let (s, _) = nls(&approx, &c, &NlsConfig::new(1e-6, 10_000))?;
        let (_, opt) = brute_force_opt(&f, &c)?;
        worst = worst.min(f.value(&s) / opt);
    }
    Ok(check(
        "noise-free local search",
        worst >= 0.63,
        format!("worst ratio {worst:.3}"),
    ))
}

fn matroid_solvers() -> Result<Check> {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for seed in 0..5u64 {
        let spec = Generator::RandomCoverage {
            n: 12,
            items: 30,
            density: 0.2,
            constraint: ConstraintShape::Blocks { count: 4, cap: 1 },
        }
        .generate(seed)?;
        let c = spec.validate()?;
        let (_, opt) = brute_force_opt(&spec.objective, &c)?;
        for alg in [Algorithm::MatroidSmall, Algorithm::MatroidLarge] {
            let oracle = NoisyOracle::new(&spec.objective, NoiseDistribution::NoNoise, seed)?;
            let report = solve_with(alg, &oracle, &c, &SolverConfig::new(0.2, seed))?;
            ok &= c.is_independent(&report.set);
            worst = worst.min(report.value / opt);
        }
    }
    ok &= worst >= 0.3;
    Ok(check("matroid solvers", ok, format!("worst ratio {worst:.3}")))
}

fn determinism() -> Result<Check> {
    let spec = Generator::RandomCoverage {
        n: 20,
        items: 40,
        density: 0.15,
        constraint: ConstraintShape::Uniform { rank: 4 },
    }
    .generate(3)?;
    let c = spec.validate()?;
    let run = || -> Result<(Subset, u64)> {
        let oracle = NoisyOracle::new(&spec.objective, NoiseDistribution::UniformBand { halfwidth: 0.1 }, 8)?;
        let report = solve_with(Algorithm::CardSmall, &oracle, &c, &SolverConfig::new(0.2, 8))?;
        Ok((report.set, report.noisy_queries))
    };
    let (a, b) = (run()?, run()?);
    Ok(check("determinism", a == b, format!("set {} after {} queries", a.0, a.1)))
}

fn generator() -> Result<Check> {
    let spec = Generator::RandomCoverage {
        n: 10,
        items: 30,
        density: 0.2,
        constraint: ConstraintShape::Uniform { rank: 3 },
    }
    .generate(1)?;
    let ok = verify_submodular_monotone(&spec.objective, 1e-12)?.is_none()
        && matches!(spec.constraint, ConstraintSpec::Uniform { rank: 3 });
    Ok(check("generated instances", ok, "coverage, n = 10".into()))
}

/// Runs every check; the caller decides what a failure means.
pub fn run_verify(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        coefficients(),
        tau_bounds()?,
        phi_sandwich(&mut rng)?,
        surrogate_bounds(&mut rng)?,
        estimator(&mut rng)?,
        noise_consistency()?,
        local_search(&mut rng)?,
        matroid_solvers()?,
        determinism()?,
        generator()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_verify(0).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
