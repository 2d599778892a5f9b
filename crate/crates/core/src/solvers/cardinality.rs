//! Solvers for `|S| <= r`.

use crate::auxiliary::CoefficientTable;
use crate::error::{parameter, Result};
use crate::local_search::{choose_parameters, iteration_cap, nls, NlsConfig};
use crate::matroid::Constraint;
use crate::noise::NoisyOracle;
use crate::objective::SetFunction;
use crate::solvers::{best_extension, log_part_length, phi_oracle, Algorithm, ReportParams, RunContext, SolverConfig, SolverReport};
use crate::subset::Subset;

/// Local search on the smoothed surrogate over `I(r-1)`, then one noisy
/// best extension.
pub fn solve_cardinality_small(oracle: &NoisyOracle<'_>, r: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = oracle.ground_size();
    if r < 2 || r > n {
        return Err(parameter(format!("small-cardinality solver needs 2 <= r <= n, got r={r}, n={n}")));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::CardSmall, cfg)?;
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
    let (local, trace) = nls(approx.as_ref(), &Constraint::uniform(n, r - 1), &nls_cfg)?;
    ctx.phase("local-search");
    let e = best_extension(oracle, &local).expect("r <= n leaves an element outside S_L");
    let set = local.with(e);
    ctx.phase("extension");
    let params = ReportParams {
        epsilon: cfg.epsilon,
        alpha: p.alpha,
        step: p.step,
        delta,
        cap,
        samples,
        pinned: 0,
    };
    Ok(ctx.finish(set, vec![trace], vec![local], None, params))
}

/// Pins the `⌈3 ln n⌉` smallest ids and runs the local search on the
/// pinned-set surrogate over the remaining budget.
pub fn solve_cardinality_large(oracle: &NoisyOracle<'_>, r: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    let n = oracle.ground_size();
    let h_size = cfg.pinned_size.unwrap_or_else(|| log_part_length(n));
    if r > n || r < 2 {
        return Err(parameter(format!("large-cardinality solver needs 2 <= r <= n, got r={r}, n={n}")));
    }
    if h_size >= r {
        return Err(parameter(format!(
            "pinned set of size {h_size} leaves no budget at r={r}; use the small-cardinality solver"
        )));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::CardLarge, cfg)?;
    let pinned = Subset::new(0..h_size);
    let p = choose_parameters(cfg.epsilon, r)?;
    let c = Constraint::uniform(n, r).contract(pinned.clone())?;
    let cap = iteration_cap(p.alpha, p.step, r - h_size)?;
    let delta = 3.0 / (n as f64).powi(6);
    let samples = cfg.pinned_samples(n, r);
    let table = CoefficientTable::new(r);
    let approx = phi_oracle(oracle, &table, Some(pinned.clone()), samples, cfg.seed, p.alpha, delta, cfg.estimation);
    let nls_cfg = NlsConfig {
        step: p.step,
        cap,
        strict: cfg.strict,
    };
    let (local, trace) = nls(approx.as_ref(), &c, &nls_cfg)?;
    ctx.phase("local-search");
    let set = local.union(&pinned);
    let params = ReportParams {
        epsilon: cfg.epsilon,
        alpha: p.alpha,
        step: p.step,
        delta,
        cap,
        samples,
        pinned: h_size,
    };
    Ok(ctx.finish(set, vec![trace], vec![local], None, params))
}
