//! Reference algorithms that run directly on noisy values.

use std::collections::HashMap;

use rand::seq::index;

use crate::auxiliary::stream_rng;
use crate::error::{parameter, Error, Result};
use crate::matroid::Constraint;
use crate::noise::NoisyOracle;
use crate::objective::SetFunction;
use crate::solvers::{Algorithm, ReportParams, RunContext, SolverConfig, SolverReport};
use crate::subset::{Element, Subset};

/// Balls up to this size are averaged exactly.
pub const DEFAULT_BALL_LIMIT: usize = 10_000;
/// Refuse to enumerate more bundles than this in one step.
const MAX_BUNDLES: usize = 2_000_000;

/// Classic greedy on noisy marginals: add the feasible element with the
/// largest `f̃(S + e)`, smallest id on ties, until none is left.
pub fn baseline_greedy_noisy(oracle: &NoisyOracle<'_>, c: &Constraint) -> Result<SolverReport> {
    let mut ctx = RunContext::new(oracle, Algorithm::Greedy, &SolverConfig::default())?;
    let mut s = Subset::empty();
    loop {
        let mut best: Option<(Subset, f64)> = None;
        for e in 0..oracle.ground_size() {
            if s.contains(e) {
                continue;
            }
            let t = s.with(e);
            if !c.is_independent(&t) {
                continue;
            }
            let v = oracle.value(&t);
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((t, v));
            }
        }
        match best {
            Some((t, _)) => s = t,
            None => break,
        }
    }
    ctx.phase("greedy");
    Ok(ctx.finish(s, Vec::new(), Vec::new(), None, ReportParams::default()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BundleOptions {
    /// Bundle size `c`.
    pub bundle: usize,
    /// Balls larger than this are averaged over a uniform subsample of
    /// this many members.
    pub ball_limit: usize,
    /// Seed for ball subsampling.
    pub seed: u64,
}

impl BundleOptions {
    pub fn new(bundle: usize, seed: u64) -> Self {
        BundleOptions {
            bundle,
            ball_limit: DEFAULT_BALL_LIMIT,
            seed,
        }
    }
}

/// All `b ⊆ pool` with `|b| = size` and `s ∪ b` independent, in
/// lexicographic order.
fn feasible_bundles(c: &Constraint, s: &Subset, pool: &[Element], size: usize) -> Result<Vec<Vec<Element>>> {
    fn dfs(
        c: &Constraint,
        current: &Subset,
        pool: &[Element],
        from: usize,
        bundle: &mut Vec<Element>,
        size: usize,
        out: &mut Vec<Vec<Element>>,
    ) -> Result<()> {
        if bundle.len() == size {
            if out.len() >= MAX_BUNDLES {
                return Err(Error::TooLarge(format!("more than {MAX_BUNDLES} bundles")));
            }
            out.push(bundle.clone());
            return Ok(());
        }
        for i in from..pool.len() {
            if pool.len() - i < size - bundle.len() {
                break;
            }
            let next = current.with(pool[i]);
            if !c.is_independent(&next) {
                continue;
            }
            bundle.push(pool[i]);
            dfs(c, &next, pool, i + 1, bundle, size, out)?;
            bundle.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    dfs(c, s, pool, 0, &mut Vec::new(), size, &mut out)?;
    Ok(out)
}

/// Greedy over bundles: pick the bundle whose ball has the largest mean
/// noisy value, then add the ball member with the largest noisy value.
///
/// The bundle size shrinks to the remaining rank near the end. Ties prefer
/// the lexicographically smaller bundle and ball member.
pub fn baseline_bundle_greedy(oracle: &NoisyOracle<'_>, c: &Constraint, opts: &BundleOptions) -> Result<SolverReport> {
    if opts.bundle == 0 || opts.ball_limit == 0 {
        return Err(parameter("bundle size and ball limit must be positive"));
    }
    let mut ctx = RunContext::new(oracle, Algorithm::BundleGreedy, &SolverConfig::default())?;
    let n = oracle.ground_size();
    let rank = c.rank();
    let mut s = Subset::empty();
    let mut steps = Vec::new();
    let mut step = 0u64;
    while s.len() < rank {
        let pool: Vec<Element> = (0..n).filter(|&e| !s.contains(e) && c.is_independent(&s.with(e))).collect();
        if pool.is_empty() {
            break;
        }
        let size = opts.bundle.min(rank - s.len());
        let bundles = feasible_bundles(c, &s, &pool, size)?;
        if bundles.is_empty() {
            break;
        }
        // f̃ is consistent, so repeated sets are looked up instead of re-queried
        let mut memo: HashMap<Subset, f64> = HashMap::new();
        let mut noisy = |t: Subset| -> f64 { *memo.entry(t).or_insert_with_key(|k| oracle.value(k)) };
        let ball = |b: &[Element]| -> Vec<Subset> {
            let bs = Subset::new(b.iter().copied());
            let mut members = Vec::new();
            for &x in b {
                for y in 0..n {
                    if s.contains(y) || bs.contains(y) {
                        continue;
                    }
                    let z = s.union(&bs.swap(x, y));
                    if c.is_independent(&z) {
                        members.push(z);
                    }
                }
            }
            members.sort();
            members
        };
        let mut rng = stream_rng(opts.seed, step);
        let mut best: Option<(usize, f64)> = None;
        for (i, b) in bundles.iter().enumerate() {
            let members = ball(b);
            let mean = if members.is_empty() {
                noisy(s.union(&Subset::new(b.iter().copied())))
            } else if members.len() <= opts.ball_limit {
                members.iter().map(|z| noisy(z.clone())).sum::<f64>() / members.len() as f64
            } else {
                let picks = index::sample(&mut rng, members.len(), opts.ball_limit);
                picks.iter().map(|j| noisy(members[j].clone())).sum::<f64>() / opts.ball_limit as f64
            };
            if best.is_none_or(|(_, v)| mean > v) {
                best = Some((i, mean));
            }
        }
        let chosen = &bundles[best.expect("bundles is nonempty").0];
        let mut members = ball(chosen);
        if members.is_empty() {
            members.push(s.union(&Subset::new(chosen.iter().copied())));
        }
        let mut pick: Option<(Subset, f64)> = None;
        for z in members {
            let v = noisy(z.clone());
            if pick.as_ref().is_none_or(|p| v > p.1) {
                pick = Some((z, v));
            }
        }
        s = pick.expect("ball is nonempty").0;
        steps.push(s.clone());
        step += 1;
    }
    ctx.phase("bundle-greedy");
    Ok(ctx.finish(s, Vec::new(), steps, None, ReportParams::default()))
}
