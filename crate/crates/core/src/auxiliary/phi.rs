//! Exact auxiliary function `φ_h(A) = Σ_{T⊆A} m_{|A|-1,|T|-1} h(T)` by
//! enumeration. Used as a reference oracle at desk scale.

use crate::auxiliary::coefficients::{CoefficientTable, TauClasses};
use crate::auxiliary::surrogate::{surrogate_h, surrogate_h_pinned};
use crate::error::{input, Error, Result};
use crate::objective::SetFunction;
use crate::subset::Subset;

/// Largest `|A|` accepted by the exhaustive routines.
pub const MAX_EXACT_SET: usize = 14;
/// Largest pinned set accepted by the exhaustive routines.
pub const MAX_EXACT_PINNED_PHI: usize = 12;

/// The surrogate the auxiliary function is built on.
#[derive(Clone, Debug, PartialEq)]
pub enum Surrogate {
    /// `h = f`: the plain non-oblivious auxiliary function.
    Identity,
    /// `h(S) = (1/n) Σ_e f(S + e)`.
    Smooth,
    /// `h_H(S) = 2^{-|H|} Σ_{H_j⊆H} f(S ∪ H_j)`.
    Pinned(Subset),
}

impl Surrogate {
    pub fn evaluate<V: SetFunction + ?Sized>(&self, v: &V, s: &Subset) -> Result<f64> {
        match self {
            Surrogate::Identity => Ok(v.value(s)),
            Surrogate::Smooth => Ok(surrogate_h(v, s)),
            Surrogate::Pinned(h) => surrogate_h_pinned(v, h, s),
        }
    }
}

/// `φ_h(A)` from the definition, with exact surrogate values.
pub fn phi_exact_bruteforce<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    surrogate: &Surrogate,
    table: &CoefficientTable,
) -> Result<f64> {
    if a.len() > MAX_EXACT_SET {
        return Err(Error::TooLarge(format!("exact φ limited to |A| <= {MAX_EXACT_SET}")));
    }
    if let Surrogate::Pinned(h) = surrogate {
        if h.len() > MAX_EXACT_PINNED_PHI {
            return Err(Error::TooLarge(format!(
                "exact φ_(h_H) limited to |H| <= {MAX_EXACT_PINNED_PHI}"
            )));
        }
        if !a.is_disjoint(h) {
            return Err(input("φ_(h_H) needs A disjoint from H"));
        }
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let s = a.len() - 1;
    let mut total = 0.0;
    for mask in 1..1u64 << a.len() {
        let t = a.select_mask(mask);
        total += table.m(s, t.len() as isize - 1) * surrogate.evaluate(v, &t)?;
    }
    Ok(total)
}

/// `φ_h(A) = Σ_{T∈L_A} τ_A(T) f(T)`, enumerating the averaging set `L_A`.
pub fn phi_h_coefficient_form<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    table: &CoefficientTable,
) -> Result<f64> {
    if a.len() > MAX_EXACT_SET {
        return Err(Error::TooLarge(format!("exact φ limited to |A| <= {MAX_EXACT_SET}")));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = v.ground_size();
    let tau = TauClasses::new(table, a.len(), n)?;
    let outside: Vec<usize> = (0..n).filter(|&e| !a.contains(e)).collect();
    let mut total = 0.0;
    for mask in 1..1u64 << a.len() {
        let t = a.select_mask(mask);
        total += tau.inside_weight(t.len()) * v.value(&t);
        let w = tau.outside_weight(t.len());
        for &e in &outside {
            total += w * v.value(&t.with(e));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;

    #[test]
    fn singleton_reduces_to_surrogate() {
        let f = Objective::Modular {
            weights: vec![1.0, 2.0, 4.0],
        };
        let table = CoefficientTable::new(8);
        let a = Subset::new([1]);
        let phi = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table).unwrap();
        assert!((phi - surrogate_h(&f, &a)).abs() < 1e-14);
        assert_eq!(phi_exact_bruteforce(&f, &Subset::empty(), &Surrogate::Smooth, &table).unwrap(), 0.0);
    }

    #[test]
    fn two_forms_agree() {
        let f = Objective::WeightedCoverage {
            covers: vec![vec![0, 1], vec![1, 2], vec![3], vec![0, 4], vec![2, 3, 4], vec![5], vec![]],
            item_weights: vec![1.0, 2.0, 0.5, 1.5, 1.0, 3.0],
        };
        let table = CoefficientTable::new(8);
        let a = Subset::new([0, 2, 4, 5]);
        let x = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table).unwrap();
        let y = phi_h_coefficient_form(&f, &a, &table).unwrap();
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }

    #[test]
    fn size_limits() {
        let f = Objective::Modular {
            weights: vec![1.0; 20],
        };
        let table = CoefficientTable::new(8);
        let big = Subset::full(15);
        assert!(phi_exact_bruteforce(&f, &big, &Surrogate::Identity, &table).is_err());
        let h = Subset::new(0..13);
        let a = Subset::new([15]);
        assert!(phi_exact_bruteforce(&f, &a, &Surrogate::Pinned(h), &table).is_err());
    }
}
