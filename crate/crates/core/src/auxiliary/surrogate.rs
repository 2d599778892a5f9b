//! Smoothing surrogates `h`, `h_H` and the comparison function `f_0`.
//!
//! Every function here is generic over [`SetFunction`], so the same code
//! evaluates the exact surrogate (on an [`Objective`](crate::Objective)) and
//! its noisy analogue (on a [`NoisyOracle`](crate::NoisyOracle)).

use crate::error::{input, Error, Result};
use crate::objective::SetFunction;
use crate::subset::Subset;

/// Largest pinned set for exact `h_H` evaluation.
pub const MAX_EXACT_PINNED: usize = 22;

/// `h(S) = (1/n) Σ_{e∈N} v(S + e)`; makes exactly `n` calls to `v`.
pub fn surrogate_h<V: SetFunction + ?Sized>(v: &V, s: &Subset) -> f64 {
    let n = v.ground_size();
    let total: f64 = (0..n).map(|e| v.value(&s.with(e))).sum();
    total / n as f64
}

/// `h_H(S) = 2^{-|H|} Σ_{H_j⊆H} v(S ∪ H_j)` for `S ∩ H = ∅`.
pub fn surrogate_h_pinned<V: SetFunction + ?Sized>(v: &V, pinned: &Subset, s: &Subset) -> Result<f64> {
    if pinned.len() > MAX_EXACT_PINNED {
        return Err(Error::TooLarge(format!(
            "exact h_H limited to |H| <= {MAX_EXACT_PINNED}; use the sampling estimator"
        )));
    }
    if !s.is_disjoint(pinned) {
        return Err(input("h_H needs S disjoint from H"));
    }
    let count = 1u64 << pinned.len();
    let total: f64 = (0..count)
        .map(|mask| v.value(&s.union(&pinned.select_mask(mask))))
        .sum();
    Ok(total / count as f64)
}

/// `f_0(S) = (1/|S|) Σ_{e∈S} v(S - e)`; `|S|` calls to `v`.
pub fn comparison_f0<V: SetFunction + ?Sized>(v: &V, s: &Subset) -> Result<f64> {
    if s.is_empty() {
        return Err(input("f_0 is undefined on the empty set"));
    }
    let total: f64 = s.iter().map(|e| v.value(&s.without(e))).sum();
    Ok(total / s.len() as f64)
}
