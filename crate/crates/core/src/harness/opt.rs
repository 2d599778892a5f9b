//! Exact optima for reference ratios.

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::objective::SetFunction;
use crate::subset::{Element, Subset};

/// Largest number of candidate sets [`brute_force_opt`] will enumerate.
pub const MAX_ENUMERATION: u64 = 1 << 22;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

/// Number of bases, when it has a closed form.
fn base_count(c: &Constraint) -> Option<u128> {
    match c {
        Constraint::Uniform { n, rank } => Some(binomial(*n, (*rank).min(*n))),
        Constraint::Partition(p) => {
            let mut sizes = vec![0usize; p.block_count()];
            for e in 0..c.ground_size() {
                sizes[p.block_of(e)] += 1;
            }
            let mut total: u128 = 1;
            for (size, &cap) in sizes.iter().zip(p.caps()) {
                total = total.saturating_mul(binomial(*size, cap.min(*size)));
            }
            Some(total)
        }
        _ => None,
    }
}

/// Exact maximizer over the bases of `c` by enumeration in lexicographic
/// order; the first maximizer wins ties. Monotonicity makes bases enough.
pub fn brute_force_opt<F: SetFunction + ?Sized>(f: &F, c: &Constraint) -> Result<(Subset, f64)> {
    if let Some(count) = base_count(c) {
        if count > MAX_ENUMERATION as u128 {
            return Err(Error::TooLarge(format!(
                "{count} bases exceed the enumeration cap of {MAX_ENUMERATION}"
            )));
        }
    }
    let n = c.ground_size();
    let rank = c.rank();
    let mut best: Option<(Subset, f64)> = None;
    let mut visited = 0u64;
    let mut stack: Vec<Element> = Vec::with_capacity(rank);

    #[allow(clippy::too_many_arguments)]
    fn walk<F: SetFunction + ?Sized>(
        f: &F,
        c: &Constraint,
        n: usize,
        rank: usize,
        from: usize,
        stack: &mut Vec<Element>,
        visited: &mut u64,
        best: &mut Option<(Subset, f64)>,
    ) -> Result<()> {
        if stack.len() == rank {
            *visited += 1;
            if *visited > MAX_ENUMERATION {
                return Err(Error::TooLarge(format!("more than {MAX_ENUMERATION} bases")));
            }
            let s = Subset::new(stack.iter().copied());
            let v = f.value(&s);
            if best.as_ref().is_none_or(|b| v > b.1) {
                *best = Some((s, v));
            }
            return Ok(());
        }
        for e in from..n {
            if n - e < rank - stack.len() {
                break;
            }
            stack.push(e);
            if c.is_independent(&Subset::new(stack.iter().copied())) {
                walk(f, c, n, rank, e + 1, stack, visited, best)?;
            }
            stack.pop();
        }
        Ok(())
    }

    walk(f, c, n, rank, 0, &mut stack, &mut visited, &mut best)?;
    best.ok_or_else(|| Error::Input("constraint has no base".into()))
}

/// Exact optimum of `max f(S)` subject to `|S| <= r` by branch and bound.
///
/// The bound at a node `S` adds the `r - |S|` largest marginals still
/// available, which is valid for submodular `f`. On ties the returned set
/// is not necessarily the lexicographically first maximizer.
pub fn cardinality_branch_and_bound<F: SetFunction + ?Sized>(f: &F, r: usize) -> (Subset, f64) {
    let n = f.ground_size();
    let r = r.min(n);
    // greedy start
    let mut incumbent = Subset::empty();
    for _ in 0..r {
        let base = f.value(&incumbent);
        let mut pick = None;
        let mut gain = f64::NEG_INFINITY;
        for e in (0..n).filter(|&e| !incumbent.contains(e)) {
            let g = f.value(&incumbent.with(e)) - base;
            if g > gain {
                gain = g;
                pick = Some(e);
            }
        }
        incumbent = incumbent.with(pick.expect("r <= n"));
    }
    let mut best = (incumbent.clone(), f.value(&incumbent));

    fn node<F: SetFunction + ?Sized>(
        f: &F,
        r: usize,
        s: &Subset,
        value: f64,
        candidates: &[Element],
        best: &mut (Subset, f64),
    ) {
        let k = r - s.len();
        let mut gains: Vec<(Element, f64)> = candidates
            .iter()
            .map(|&e| (e, f.value(&s.with(e)) - value))
            .filter(|&(_, g)| g > 0.0)
            .collect();
        if k == 0 || gains.is_empty() {
            if value > best.1 {
                *best = (s.clone(), value);
            }
            return;
        }
        gains.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let order: Vec<Element> = gains.iter().map(|g| g.0).collect();
        for i in 0..gains.len() {
            let bound = value + gains[i..].iter().take(k).map(|g| g.1).sum::<f64>();
            if bound <= best.1 * (1.0 + 1e-12) {
                break;
            }
            let next = s.with(gains[i].0);
            let v = value + gains[i].1;
            node(f, r, &next, v, &order[i + 1..], best);
        }
    }

    let all: Vec<Element> = (0..n).collect();
    node(f, r, &Subset::empty(), 0.0, &all, &mut best);
    // pad with the smallest unused ids so the set has size r
    let mut set = best.0;
    let mut e = 0;
    while set.len() < r {
        if !set.contains(e) {
            set = set.with(e);
        }
        e += 1;
    }
    let v = f.value(&set);
    (set, v.max(best.1))
}

/// Exact optimum by enumeration when small enough, otherwise by branch and
/// bound for cardinality constraints.
pub fn exact_opt<F: SetFunction + ?Sized>(f: &F, c: &Constraint) -> Result<(Subset, f64)> {
    match brute_force_opt(f, c) {
        Err(Error::TooLarge(_)) => match c {
            Constraint::Uniform { rank, .. } => Ok(cardinality_branch_and_bound(f, *rank)),
            _ => Err(Error::TooLarge("no exact method for this constraint at this size".into())),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;

    #[test]
    fn brute_force_examples() {
        let f = Objective::Modular {
            weights: vec![3.0, 1.0, 2.0],
        };
        assert_eq!(
            brute_force_opt(&f, &Constraint::uniform(3, 2)).unwrap(),
            (Subset::new([0, 2]), 5.0)
        );
        let cov = Objective::WeightedCoverage {
            covers: vec![vec![0, 1], vec![1, 2], vec![0]],
            item_weights: vec![1.0; 3],
        };
        assert_eq!(brute_force_opt(&cov, &Constraint::uniform(3, 2)).unwrap().1, 3.0);
        let c = Constraint::partition(3, &[vec![0, 2], vec![1]], &[1, 1]).unwrap();
        assert_eq!(brute_force_opt(&f, &c).unwrap(), (Subset::new([0, 1]), 4.0));
    }

    #[test]
    fn refuses_large_enumerations() {
        let f = Objective::Modular { weights: vec![1.0; 60] };
        assert!(matches!(brute_force_opt(&f, &Constraint::uniform(60, 8)), Err(Error::TooLarge(_))));
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let covers = (0..14)
                .map(|_| (0..20).filter(|_| rng.gen_bool(0.2)).collect())
                .collect();
            let item_weights = (0..20).map(|_| rng.gen_range(0.5..1.5)).collect();
            let f = Objective::WeightedCoverage { covers, item_weights };
            let (_, exact) = brute_force_opt(&f, &Constraint::uniform(14, 4)).unwrap();
            let (set, bb) = cardinality_branch_and_bound(&f, 4);
            assert_eq!(set.len(), 4);
            assert!((exact - bb).abs() < 1e-9, "{exact} vs {bb}");
        }
    }
}
