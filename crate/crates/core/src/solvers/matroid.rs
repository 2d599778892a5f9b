//! Solvers for general matroid constraints.

use rayon::prelude::*;

use crate::auxiliary::{comparison_f0, CoefficientTable};
use crate::error::{parameter, Error, Result};
use crate::local_search::{choose_parameters, iteration_cap, nls, NlsConfig, NlsTrace, SearchParameters};
use crate::matroid::Constraint;
use crate::noise::NoisyOracle;
use crate::objective::SetFunction;
use crate::solvers::{
    best_extension, derive_seed, log_part_length, phi_oracle, Algorithm, ReportParams, RunContext, SolverConfig,
    SolverReport,
};
use crate::subset::Subset;

/// Local search over `I(r-1) ∩ I(M)`, a noisy best extension, and a
/// comparison of `f̃_0` values that keeps the output feasible.
pub fn solve_matroid_small(oracle: &NoisyOracle<'_>, c: &Constraint, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = oracle.ground_size();
    let r = c.rank();
    if r < 3 {
        return Err(parameter(format!("small-rank matroid solver needs rank >= 3, got {r}")));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::MatroidSmall, cfg)?;
    let p = choose_parameters(cfg.epsilon, r)?;
    let cap = iteration_cap(p.alpha, p.step, r - 1)?;
    let delta = 1.0 / ((cap as f64 + 1.0) * (r as f64 - 1.0) * (n as f64).powi(2));
    let samples = cfg.smooth_samples(n, r);
    let table = CoefficientTable::new(r);
    let approx = phi_oracle(oracle, &table, None, samples, cfg.seed, p.alpha, delta, cfg.estimation);
    let nls_cfg = NlsConfig {
        step: p.step,
        cap,
        strict: cfg.strict,
    };
    let (local, trace) = nls(approx.as_ref(), &c.clone().truncate(r - 1), &nls_cfg)?;
    ctx.phase("local-search");
    let e = best_extension(oracle, &local).expect("rank below n leaves an element outside S_L");
    let extended = local.with(e);
    ctx.phase("extension");
    let keep_local = comparison_f0(oracle, &local)? >= 0.5 * comparison_f0(oracle, &extended)?;
    ctx.phase("comparison");
    let (set, chosen) = if keep_local { (local.clone(), 0) } else { (Subset::new([e]), 1) };
    let params = ReportParams {
        epsilon: cfg.epsilon,
        alpha: p.alpha,
        step: p.step,
        delta,
        cap,
        samples,
        pinned: 0,
    };
    Ok(ctx.finish(set, vec![trace], vec![local, extended], Some(chosen), params))
}

/// One local search per pinned part of an initial base, each on the
/// contracted matroid; returns the part whose completed solution has the
/// largest `f̃_0`, lowest index on ties.
fn solve_by_parts(
    oracle: &NoisyOracle<'_>,
    c: &Constraint,
    parts: Vec<Subset>,
    p: &SearchParameters,
    cfg: &SolverConfig,
    ctx: &mut RunContext<'_, '_>,
) -> Result<(Subset, Vec<NlsTrace>, Vec<Subset>, usize, ReportParams)> {
    let n = oracle.ground_size();
    let r = c.rank();
    let delta = 3.0 / (n as f64).powi(6);
    let samples = cfg.pinned_samples(n, r);
    let table = CoefficientTable::new(r);
    let runs: Vec<(Subset, NlsTrace, usize)> = parts
        .par_iter()
        .enumerate()
        .map(|(t, h)| {
            let contracted = c.clone().contract(h.clone())?;
            let rank = r - h.len();
            let cap = iteration_cap(p.alpha, p.step, rank)?;
            let seed = derive_seed(cfg.seed, t as u64);
            let approx = phi_oracle(oracle, &table, Some(h.clone()), samples, seed, p.alpha, delta, cfg.estimation);
            let nls_cfg = NlsConfig {
                step: p.step,
                cap,
                strict: cfg.strict,
            };
            let (s, trace) = nls(approx.as_ref(), &contracted, &nls_cfg)?;
            Ok((s.union(h), trace, cap))
        })
        .collect::<Result<_>>()?;
    ctx.phase("local-search");
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (t, (set, _, _)) in runs.iter().enumerate() {
        let v = comparison_f0(oracle, set)?;
        if v > best_value {
            best = t;
            best_value = v;
        }
    }
    ctx.phase("comparison");
    let cap = runs.iter().map(|x| x.2).max().unwrap_or(0);
    let params = ReportParams {
        epsilon: cfg.epsilon,
        alpha: p.alpha,
        step: p.step,
        delta,
        cap,
        samples,
        pinned: parts.iter().map(Subset::len).max().unwrap_or(0),
    };
    let candidates: Vec<Subset> = runs.iter().map(|x| x.0.clone()).collect();
    let traces = runs.into_iter().map(|x| x.1).collect();
    Ok((candidates[best].clone(), traces, candidates, best, params))
}

/// Splits an ascending base into two halves, pins each in turn, and keeps
/// the better completed solution.
pub fn solve_matroid_large(oracle: &NoisyOracle<'_>, c: &Constraint, cfg: &SolverConfig) -> Result<SolverReport> {
    let r = c.rank();
    if r < 4 {
        return Err(parameter(format!("large-rank matroid solver needs rank >= 4, got {r}")));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::MatroidLarge, cfg)?;
    let p = choose_parameters(cfg.epsilon, r)?;
    let base = c.extend_to_base(&Subset::empty())?;
    let ids = base.as_slice();
    let parts = vec![Subset::new(ids[..r / 2].to_vec()), Subset::new(ids[r / 2..].to_vec())];
    let (set, traces, candidates, chosen, params) = solve_by_parts(oracle, c, parts, &p, cfg, &mut ctx)?;
    Ok(ctx.finish(set, traces, candidates, Some(chosen), params))
}

/// Splits an ascending base into `⌊r/l⌋` contiguous parts of near-equal
/// size, pins each in turn, and keeps the best completed solution.
pub fn solve_sbo(oracle: &NoisyOracle<'_>, c: &Constraint, cfg: &SolverConfig) -> Result<SolverReport> {
    if c.as_partition().is_none() {
        return Err(Error::Unsupported("the base-orderable solver needs a partition constraint".into()));
    }
    let n = oracle.ground_size();
    let r = c.rank();
    let l = cfg.part_length.unwrap_or_else(|| log_part_length(n));
    if l == 0 {
        return Err(parameter("part length must be positive"));
    }
    let k = r / l;
    if k < 2 {
        return Err(parameter(format!(
            "rank {r} holds fewer than two parts of length {l}; use the large-rank matroid solver"
        )));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::Sbo, cfg)?;
    let p = choose_parameters(cfg.epsilon, r)?;
    let base = c.extend_to_base(&Subset::empty())?;
    let ids = base.as_slice();
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for t in 0..k {
        let len = r / k + usize::from(t < r % k);
        parts.push(Subset::new(ids[start..start + len].to_vec()));
        start += len;
    }
    let (set, traces, candidates, chosen, mut params) = solve_by_parts(oracle, c, parts, &p, cfg, &mut ctx)?;
    params.pinned = l;
    Ok(ctx.finish(set, traces, candidates, Some(chosen), params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseDistribution;
    use crate::objective::Objective;
    use crate::solvers::Estimation;

    fn blocks(n: usize, size: usize) -> Vec<Vec<usize>> {
        (0..n).collect::<Vec<_>>().chunks(size).map(|c| c.to_vec()).collect()
    }

    #[test]
    fn small_rank_output_is_feasible() {
        let f = Objective::Modular {
            weights: (0..12).map(|i| (i % 5) as f64 + 1.0).collect(),
        };
        let c = Constraint::partition(12, &blocks(12, 3), &[1; 4]).unwrap();
        let o = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 0).unwrap();
        let mut cfg = SolverConfig::new(0.2, 5);
        cfg.samples = Some(200);
        let rep = solve_matroid_small(&o, &c, &cfg).unwrap();
        assert!(c.is_independent(&rep.set));
        // with exact values the local solution always wins the comparison
        assert_eq!(rep.chosen, Some(0));
        assert_eq!(rep.set.len(), 3);
        let c2 = Constraint::partition(12, &blocks(12, 6), &[1; 2]).unwrap();
        assert!(solve_matroid_small(&o, &c2, &cfg).is_err());
    }

    #[test]
    fn large_rank_candidates_are_bases() {
        let f = Objective::Modular {
            weights: (0..12).map(|i| (i % 4) as f64 + 0.5).collect(),
        };
        let c = Constraint::partition(12, &blocks(12, 3), &[1; 4]).unwrap();
        let o = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 0).unwrap();
        let mut cfg = SolverConfig::new(0.2, 5);
        cfg.estimation = Estimation::Exact;
        let rep = solve_matroid_large(&o, &c, &cfg).unwrap();
        assert_eq!(rep.candidates.len(), 2);
        for s in &rep.candidates {
            assert!(c.is_base(s));
        }
        assert!(c.is_base(&rep.set));
    }

    #[test]
    fn sbo_ties_go_to_first_part() {
        // constant objective: every completed part has the same f_0
        let f = Objective::Modular { weights: vec![1.0; 12] };
        let c = Constraint::partition(12, &blocks(12, 2), &[1; 6]).unwrap();
        let o = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 0).unwrap();
        let mut cfg = SolverConfig::new(0.2, 5);
        cfg.part_length = Some(2);
        cfg.samples = Some(20);
        let rep = solve_sbo(&o, &c, &cfg).unwrap();
        assert_eq!(rep.candidates.len(), 3);
        assert_eq!(rep.chosen, Some(0));
        assert!(rep.candidates.iter().all(|s| c.is_base(s)));
        cfg.part_length = Some(4);
        assert!(solve_sbo(&o, &c, &cfg).is_err());
        let u = Constraint::uniform(12, 6);
        assert!(solve_sbo(&o, &u, &cfg).is_err());
    }
}
