//! Monotone submodular objectives with exact value oracles.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::subset::{Element, Subset};

/// Exact set-function value oracle over `{0, .., n-1}`.
///
/// Implementations are expected to be pure: equal subsets give bit-identical
/// values.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;

    /// Value of `s`. Callers guarantee every id is `< ground_size()`.
    fn value(&self, s: &Subset) -> f64;
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, s: &Subset) -> f64 {
        (**self).value(s)
    }
}

/// The objective families exposed to users. Each is monotone and submodular
/// by construction and normalized so that `f(∅) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `f(S) = Σ w_u` over the items `u` covered by at least one member of `S`.
    WeightedCoverage {
        /// `covers[e]` lists the item ids covered by element `e`.
        covers: Vec<Vec<usize>>,
        item_weights: Vec<f64>,
    },
    /// `f(S) = Σ_{e∈S} w_e`.
    Modular { weights: Vec<f64> },
    /// `f(S) = Σ_c max_{e∈S} u[c][e]`; rows are clients, columns elements.
    FacilityLocation { utility: Vec<Vec<f64>> },
}

fn check_weight(w: f64, what: &str) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(input(format!("{what} must be finite and nonnegative, got {w}")))
    }
}

impl Objective {
    /// Checks the structural invariants (nonnegative weights, valid item ids).
    pub fn validate(&self) -> Result<()> {
        match self {
            Objective::WeightedCoverage {
                covers,
                item_weights,
            } => {
                if covers.is_empty() {
                    return Err(input("coverage objective needs at least one element"));
                }
                for &w in item_weights {
                    check_weight(w, "item weight")?;
                }
                for (e, items) in covers.iter().enumerate() {
                    if let Some(&bad) = items.iter().find(|&&u| u >= item_weights.len()) {
                        return Err(input(format!(
                            "element {e} covers item {bad} but only {} items exist",
                            item_weights.len()
                        )));
                    }
                }
            }
            Objective::Modular { weights } => {
                if weights.is_empty() {
                    return Err(input("modular objective needs at least one element"));
                }
                for &w in weights {
                    check_weight(w, "element weight")?;
                }
            }
            Objective::FacilityLocation { utility } => {
                let n = utility.first().map_or(0, Vec::len);
                if n == 0 {
                    return Err(input("facility location needs at least one client and element"));
                }
                for row in utility {
                    if row.len() != n {
                        return Err(input("facility utility rows must have equal length"));
                    }
                    for &u in row {
                        check_weight(u, "utility")?;
                    }
                }
            }
        }
        Ok(())
    }

    /// `f(S)`, rejecting out-of-range ids.
    pub fn evaluate(&self, s: &Subset) -> Result<f64> {
        s.check_range(self.ground_size())?;
        Ok(self.value(s))
    }

    /// `f(S + x) - f(S)` for `x ∉ S`.
    pub fn marginal(&self, s: &Subset, x: Element) -> Result<f64> {
        if x >= self.ground_size() {
            return Err(input(format!("element {x} out of range")));
        }
        if s.contains(x) {
            return Err(input(format!("element {x} is already in the set")));
        }
        Ok(self.evaluate(&s.with(x))? - self.evaluate(s)?)
    }
}

impl SetFunction for Objective {
    fn ground_size(&self) -> usize {
        match self {
            Objective::WeightedCoverage { covers, .. } => covers.len(),
            Objective::Modular { weights } => weights.len(),
            Objective::FacilityLocation { utility } => utility.first().map_or(0, Vec::len),
        }
    }

    fn value(&self, s: &Subset) -> f64 {
        match self {
            Objective::WeightedCoverage {
                covers,
                item_weights,
            } => {
                let mut seen = vec![0u64; item_weights.len().div_ceil(64)];
                let mut total = 0.0;
                for e in s.iter() {
                    for &u in &covers[e] {
                        let (word, bit) = (u / 64, 1u64 << (u % 64));
                        if seen[word] & bit == 0 {
                            seen[word] |= bit;
                            total += item_weights[u];
                        }
                    }
                }
                total
            }
            Objective::Modular { weights } => s.iter().map(|e| weights[e]).sum(),
            Objective::FacilityLocation { utility } => utility
                .iter()
                .map(|row| s.iter().map(|e| row[e]).fold(0.0, f64::max))
                .sum(),
        }
    }
}

/// A witness that a set function is not monotone submodular.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `f(a + x) < f(a)`.
    Monotonicity { a: Subset, x: Element },
    /// `f(a + x) - f(a) < f(b + x) - f(b)` with `a ⊆ b`, `x ∉ b`.
    DiminishingReturns { a: Subset, b: Subset, x: Element },
}

/// Largest ground set the exhaustive checker accepts.
pub const MAX_VERIFY_N: usize = 14;

/// Exhaustively checks monotonicity and diminishing returns over every
/// `A ⊆ B`, `x ∉ B`. Returns the first violation in mask order, if any.
pub fn verify_submodular_monotone<F: SetFunction + ?Sized>(
    f: &F,
    tol: f64,
) -> Result<Option<Violation>> {
    let n = f.ground_size();
    if n > MAX_VERIFY_N {
        return Err(Error::TooLarge(format!(
            "exhaustive submodularity check limited to n <= {MAX_VERIFY_N}, got {n}"
        )));
    }
    let full = Subset::full(n);
    let table: Vec<f64> = (0..1u64 << n).map(|m| f.value(&full.select_mask(m))).collect();

    for a in 0..1u64 << n {
        for x in 0..n {
            if a >> x & 1 == 0 && table[(a | 1 << x) as usize] < table[a as usize] - tol {
                return Ok(Some(Violation::Monotonicity {
                    a: full.select_mask(a),
                    x,
                }));
            }
        }
    }
    for b in 0..1u64 << n {
        // every submask a of b, including b itself
        let mut a = b;
        loop {
            for x in 0..n {
                if b >> x & 1 == 1 {
                    continue;
                }
                let gain_a = table[(a | 1 << x) as usize] - table[a as usize];
                let gain_b = table[(b | 1 << x) as usize] - table[b as usize];
                if gain_a < gain_b - tol {
                    return Ok(Some(Violation::DiminishingReturns {
                        a: full.select_mask(a),
                        b: full.select_mask(b),
                        x,
                    }));
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(None)
}
