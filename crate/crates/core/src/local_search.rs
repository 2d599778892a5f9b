//! Noisy non-oblivious local search: a greedy start followed by threshold
//! swaps judged by an approximation of the auxiliary function.

use rayon::prelude::*;
use serde::Serialize;

use crate::auxiliary::{
    estimate_phi_h, estimate_phi_h_pinned, phi_exact_bruteforce, CoefficientTable, EstimatorConfig, Surrogate,
};
use crate::error::{parameter, Error, Result};
use crate::matroid::Constraint;
use crate::objective::SetFunction;
use crate::subset::{Element, Subset};

/// A randomized evaluator approximating an auxiliary function `φ`.
///
/// `evaluate` must be a deterministic function of `(set, call)` for a fixed
/// oracle; `call` selects the randomness stream of that evaluation.
pub trait ApproxOracle: Sync {
    fn evaluate(&self, set: &Subset, call: u64) -> Result<f64>;

    /// Declared additive accuracy `α`.
    fn alpha(&self) -> f64 {
        0.0
    }

    /// Declared failure probability `δ`.
    fn delta(&self) -> f64 {
        0.0
    }

    /// Noisy queries spent by one `evaluate`.
    fn queries_per_call(&self) -> u64 {
        0
    }
}

/// Exact `φ` by enumeration; `α = δ = 0`. Desk-scale only.
pub struct ExactPhi<'a, V: SetFunction + ?Sized> {
    pub values: &'a V,
    pub surrogate: Surrogate,
    pub table: &'a CoefficientTable,
}

impl<V: SetFunction + ?Sized> ApproxOracle for ExactPhi<'_, V> {
    fn evaluate(&self, set: &Subset, _call: u64) -> Result<f64> {
        phi_exact_bruteforce(self.values, set, &self.surrogate, self.table)
    }
}

/// `φ̂_h` by the smoothed sampler.
pub struct SampledPhiH<'a, V: SetFunction + ?Sized> {
    pub values: &'a V,
    pub table: &'a CoefficientTable,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
}

impl<V: SetFunction + ?Sized> ApproxOracle for SampledPhiH<'_, V> {
    fn evaluate(&self, set: &Subset, call: u64) -> Result<f64> {
        estimate_phi_h(self.values, set, self.table, &EstimatorConfig::new(self.samples, self.seed, call))
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn queries_per_call(&self) -> u64 {
        self.samples as u64
    }
}

/// `φ̂_{h_H}` by the pinned-set sampler.
pub struct SampledPhiPinned<'a, V: SetFunction + ?Sized> {
    pub values: &'a V,
    pub pinned: Subset,
    pub table: &'a CoefficientTable,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
}

impl<V: SetFunction + ?Sized> ApproxOracle for SampledPhiPinned<'_, V> {
    fn evaluate(&self, set: &Subset, call: u64) -> Result<f64> {
        estimate_phi_h_pinned(
            self.values,
            set,
            &self.pinned,
            self.table,
            &EstimatorConfig::new(self.samples, self.seed, call),
        )
    }
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn queries_per_call(&self) -> u64 {
        self.samples as u64
    }
}

/// Adapts a closure; handy for tests and custom evaluators.
pub struct FnOracle<F>(pub F);

impl<F: Fn(&Subset, u64) -> Result<f64> + Sync> ApproxOracle for FnOracle<F> {
    fn evaluate(&self, set: &Subset, call: u64) -> Result<f64> {
        (self.0)(set, call)
    }
}

/// `I = ⌈log_{1+Δ}(2(1+α) / (1 − 2(r+1)α))⌉`.
pub fn iteration_cap(alpha: f64, step: f64, r: usize) -> Result<usize> {
    if !(step > 0.0) || !(alpha >= 0.0) {
        return Err(parameter(format!("need Δ > 0 and α >= 0, got Δ={step}, α={alpha}")));
    }
    let denom = 1.0 - 2.0 * (r as f64 + 1.0) * alpha;
    if denom <= 0.0 {
        return Err(parameter(format!("α={alpha} too large for rank {r}")));
    }
    let x = (2.0 * (1.0 + alpha) / denom).ln() / step.ln_1p();
    // absorb rounding when x is an integer in exact arithmetic
    let cap = (x - 1e-9 * x.abs().max(1.0)).ceil();
    Ok((cap as usize).max(1))
}

/// Step size, accuracy and iteration cap for a target loss `ε` at rank `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParameters {
    pub alpha: f64,
    pub step: f64,
    pub cap: usize,
}

/// `α = Δ = ε / (4 r ln r)` and the matching iteration cap.
pub fn choose_parameters(epsilon: f64, r: usize) -> Result<SearchParameters> {
    if r < 2 {
        return Err(parameter(format!("parameter choice needs r >= 2, got {r}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(parameter(format!("ε must lie in (0, 1/2), got {epsilon}")));
    }
    let rf = r as f64;
    let alpha = epsilon / (4.0 * rf * rf.ln());
    let cap = iteration_cap(alpha, alpha, r)?;
    let bound = (5.0 * rf * rf.ln() / epsilon).ceil() as usize;
    if cap > bound {
        return Err(Error::Numeric(format!("iteration cap {cap} exceeds {bound}")));
    }
    Ok(SearchParameters {
        alpha,
        step: alpha,
        cap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NlsConfig {
    /// `Δ`.
    pub step: f64,
    /// `I`.
    pub cap: usize,
    /// Run all `I` iterations even after a scan without an accepted swap.
    pub strict: bool,
}

impl NlsConfig {
    pub fn new(step: f64, cap: usize) -> Self {
        NlsConfig {
            step,
            cap,
            strict: false,
        }
    }

    pub fn from_parameters(p: &SearchParameters, strict: bool) -> Self {
        NlsConfig {
            step: p.step,
            cap: p.cap,
            strict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapRecord {
    pub iteration: usize,
    pub removed: Element,
    pub added: Element,
    pub old_value: f64,
    pub new_value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NlsTrace {
    /// Elements in greedy order.
    pub greedy: Vec<Element>,
    pub swaps: Vec<SwapRecord>,
    /// Swap-phase iterations actually run.
    pub iterations: usize,
    /// Approximation-oracle calls.
    pub calls: u64,
    /// Oracle value of the returned set as last evaluated.
    pub final_value: f64,
}

/// Runs the local search over `c` and returns a base of `c`.
pub fn nls<A: ApproxOracle + ?Sized>(approx: &A, c: &Constraint, cfg: &NlsConfig) -> Result<(Subset, NlsTrace)> {
    let r = c.rank();
    if r == 0 {
        return Err(parameter("local search needs rank >= 1"));
    }
    if !(cfg.step > 0.0) || cfg.cap == 0 {
        return Err(parameter("local search needs Δ > 0 and I >= 1"));
    }
    let n = c.ground_size();
    let mut trace = NlsTrace::default();
    let mut calls = 0u64;

    let mut s = Subset::empty();
    let mut value = 0.0;
    for _ in 0..r {
        let candidates: Vec<Subset> = (0..n)
            .filter(|&e| !s.contains(e))
            .map(|e| s.with(e))
            .filter(|t| c.is_independent(t))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let base = calls;
        let values: Vec<f64> = candidates
            .par_iter()
            .enumerate()
            .map(|(j, t)| approx.evaluate(t, base + j as u64))
            .collect::<Result<_>>()?;
        calls += candidates.len() as u64;
        let mut best = 0;
        for j in 1..values.len() {
            if values[j] > values[best] {
                best = j;
            }
        }
        let added = candidates[best].difference(&s).as_slice()[0];
        trace.greedy.push(added);
        s = candidates[best].clone();
        value = values[best];
    }

    let outside: Vec<Element> = (0..n).collect();
    for i in 0..cfg.cap {
        trace.iterations = i + 1;
        let threshold = (1.0 + cfg.step) * value;
        let mut accepted = None;
        'scan: for x in s.iter() {
            for &y in &outside {
                if s.contains(y) {
                    continue;
                }
                let t = s.swap(x, y);
                if !c.is_independent(&t) {
                    continue;
                }
                let v = approx.evaluate(&t, calls)?;
                calls += 1;
                if v >= threshold {
                    accepted = Some((x, y, t, v));
                    break 'scan;
                }
            }
        }
        match accepted {
            Some((x, y, t, v)) => {
                trace.swaps.push(SwapRecord {
                    iteration: i,
                    removed: x,
                    added: y,
                    old_value: value,
                    new_value: v,
                });
                s = t;
                value = v;
            }
            None if !cfg.strict => break,
            None => {}
        }
    }
    trace.calls = calls;
    trace.final_value = value;
    Ok((s, trace))
}
