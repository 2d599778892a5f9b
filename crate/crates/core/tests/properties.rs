//! Property tests over randomly generated small instances.

use std::f64::consts::E;

use noisy_submod::auxiliary::{
    comparison_f0, estimate_phi_h_detailed, estimate_phi_h_pinned_detailed, phi_exact_bruteforce,
    phi_h_coefficient_form, surrogate_h, surrogate_h_pinned, CoefficientTable, EstimatorConfig, SmoothSampler, Surrogate,
    TauClass,
};
use noisy_submod::local_search::ExactPhi;
use noisy_submod::{
    nls, verify_submodular_monotone, Constraint, NlsConfig, NoiseDistribution, NoisyOracle, Objective, SetFunction,
    Subset,
};
use proptest::prelude::*;

fn coverage_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Objective> {
    n.prop_flat_map(|n| {
        let items = 10usize;
        (
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), items), n),
            proptest::collection::vec(0.1f64..2.0, items),
        )
    })
    .prop_map(|(rows, item_weights)| Objective::WeightedCoverage {
        covers: rows
            .into_iter()
            .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
            .collect(),
        item_weights,
    })
}

fn subset_of(n: usize, mask: u64) -> Subset {
    Subset::new((0..n).filter(|&i| mask >> i & 1 == 1))
}

fn noise_strategy() -> impl Strategy<Value = NoiseDistribution> {
    prop_oneof![
        Just(NoiseDistribution::NoNoise),
        Just(NoiseDistribution::Exponential),
        (0.01f64..0.99).prop_map(|halfwidth| NoiseDistribution::UniformBand { halfwidth }),
        (0.05f64..2.0).prop_map(|sigma| NoiseDistribution::TruncatedGaussian { sigma }),
        (1.0f64..20.0, 0.001f64..0.5).prop_map(|(high, p_high)| NoiseDistribution::TwoPoint {
            high,
            p_high,
            low: 1.0,
            normalize: true,
        }),
    ]
}

/// `S ↦ h_H(S)` on the ground set `N \ H`, relabelled to `0..n-|H|`.
struct PinnedView<'a> {
    f: &'a Objective,
    pinned: Subset,
    free: Vec<usize>,
}

impl SetFunction for PinnedView<'_> {
    fn ground_size(&self) -> usize {
        self.free.len()
    }
    fn value(&self, s: &Subset) -> f64 {
        let mapped = Subset::new(s.iter().map(|i| self.free[i]));
        surrogate_h_pinned(self.f, &self.pinned, &mapped).unwrap()
    }
}

struct SmoothView<'a>(&'a Objective);

impl SetFunction for SmoothView<'_> {
    fn ground_size(&self) -> usize {
        self.0.ground_size()
    }
    fn value(&self, s: &Subset) -> f64 {
        surrogate_h(self.0, s)
    }
}

proptest! {
    #[test]
    fn noise_is_consistent(dist in noise_strategy(), key in any::<u64>(), mask in any::<u32>()) {
        let f = Objective::Modular { weights: vec![1.0; 32] };
        let s = subset_of(32, mask as u64);
        let a = NoisyOracle::new(&f, dist.clone(), key).unwrap();
        let b = NoisyOracle::new(&f, dist, key).unwrap();
        let first = a.value(&s);
        prop_assert_eq!(first.to_bits(), a.value(&s).to_bits());
        prop_assert_eq!(first.to_bits(), b.value(&s).to_bits());
        prop_assert!(a.multiplier(&s) >= 0.0);
        prop_assert_eq!(a.query_count(), 2);
    }

    #[test]
    fn objectives_are_monotone_submodular(f in coverage_strategy(3..=8)) {
        prop_assert_eq!(verify_submodular_monotone(&f, 1e-12).unwrap(), None);
    }

    #[test]
    fn smoothing_keeps_submodularity(f in coverage_strategy(3..=8)) {
        prop_assert_eq!(verify_submodular_monotone(&SmoothView(&f), 1e-12).unwrap(), None);
    }

    #[test]
    fn pinned_smoothing_keeps_submodularity(f in coverage_strategy(4..=9), k in 1usize..=3) {
        let n = f.ground_size();
        let pinned = Subset::new(n - k..n);
        let view = PinnedView { f: &f, pinned, free: (0..n - k).collect() };
        prop_assert_eq!(verify_submodular_monotone(&view, 1e-12).unwrap(), None);
    }

    #[test]
    fn comparison_and_pinned_bounds(f in coverage_strategy(4..=10), mask in 1u64..1024, k in 0usize..=4) {
        let n = f.ground_size();
        let s = subset_of(n, mask % (1 << n));
        prop_assume!(!s.is_empty());
        let fs = f.value(&s);
        let f0 = comparison_f0(&f, &s).unwrap();
        prop_assert!((1.0 - 1.0 / s.len() as f64) * fs <= f0 + 1e-12);
        prop_assert!(f0 <= fs + 1e-12);
        let pinned = Subset::new((0..n).filter(|&e| !s.contains(e)).take(k));
        let hh = surrogate_h_pinned(&f, &pinned, &s).unwrap();
        prop_assert!(hh >= 0.5 * f.value(&s.union(&pinned)) + 0.5 * fs - 1e-12);
        prop_assert!(hh <= f.value(&s.union(&pinned)) + 1e-12);
    }

    #[test]
    fn phi_sandwich(f in coverage_strategy(2..=9), mask in 1u64..512) {
        let n = f.ground_size();
        let a = subset_of(n, mask % (1 << n));
        prop_assume!(!a.is_empty() && a.len() <= 6);
        let table = CoefficientTable::new(16);
        let h = surrogate_h(&f, &a);
        let phi = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table).unwrap();
        prop_assert!(h <= phi + 1e-9);
        prop_assert!(phi <= E / (E - 1.0) * table.harmonic(a.len()) * h + 1e-9);
        let coeff = phi_h_coefficient_form(&f, &a, &table).unwrap();
        prop_assert!((phi - coeff).abs() <= 1e-9 * phi.max(1.0));
    }

    #[test]
    fn contraction_lowers_rank_by_pinned_size(
        blocks in 2usize..=5,
        width in 1usize..=3,
        cap in 1usize..=2,
        k in 0usize..=3,
    ) {
        let n = blocks * width;
        let cap = cap.min(width);
        let parts: Vec<Vec<usize>> = (0..blocks).map(|b| (b * width..(b + 1) * width).collect()).collect();
        let c = Constraint::partition(n, &parts, &vec![cap; blocks]).unwrap();
        let pinned = Subset::new((0..blocks.min(k)).map(|b| b * width));
        let r = c.rank();
        let base_of_contraction = {
            let contracted = Constraint::partition(n, &parts, &vec![cap; blocks])
                .unwrap()
                .contract(pinned.clone())
                .unwrap();
            prop_assert_eq!(contracted.rank(), r - pinned.len());
            contracted.extend_to_base(&Subset::empty()).unwrap()
        };
        prop_assert!(c.is_base(&base_of_contraction.union(&pinned)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimators_are_unbiased(f in coverage_strategy(6..=8), seed in any::<u64>()) {
        let n = f.ground_size();
        let table = CoefficientTable::new(16);
        let a = Subset::new([0, 2, 3]);
        let oracle = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 0).unwrap();
        let exact = phi_exact_bruteforce(&f, &a, &Surrogate::Smooth, &table).unwrap();
        let est = estimate_phi_h_detailed(&oracle, &a, &table, &EstimatorConfig::new(4000, seed, 0)).unwrap();
        prop_assert!((est.value - exact).abs() <= 5.0 * est.std_error + 1e-12);

        let pinned = Subset::new([n - 2, n - 1]);
        let exact = phi_exact_bruteforce(&f, &a, &Surrogate::Pinned(pinned.clone()), &table).unwrap();
        let est = estimate_phi_h_pinned_detailed(&oracle, &a, &pinned, &table, &EstimatorConfig::new(4000, seed, 1))
            .unwrap();
        prop_assert!((est.value - exact).abs() <= 5.0 * est.std_error + 1e-12);
    }

    #[test]
    fn local_search_ends_feasible_and_locally_optimal(
        f in coverage_strategy(6..=9),
        r in 2usize..=4,
        partition in any::<bool>(),
    ) {
        let n = f.ground_size();
        let c = if partition {
            let parts: Vec<Vec<usize>> = (0..r).map(|b| (b..n).step_by(r).collect()).collect();
            Constraint::partition(n, &parts, &vec![1; r]).unwrap()
        } else {
            Constraint::uniform(n, r)
        };
        let table = CoefficientTable::new(16);
        let approx = ExactPhi { values: &f, surrogate: Surrogate::Identity, table: &table };
        let step = 1e-3;
        let (s, trace) = nls(&approx, &c, &NlsConfig::new(step, 10_000)).unwrap();
        prop_assert!(c.is_base(&s));
        prop_assert!(trace.calls <= (trace.iterations as u64 + 1) * (r * n) as u64);
        let value = phi_exact_bruteforce(&f, &s, &Surrogate::Identity, &table).unwrap();
        prop_assert!((value - trace.final_value).abs() <= 1e-12 * value.max(1.0));
        for x in s.iter() {
            for y in (0..n).filter(|&y| !s.contains(y)) {
                let t = s.swap(x, y);
                if c.is_independent(&t) {
                    let v = phi_exact_bruteforce(&f, &t, &Surrogate::Identity, &table).unwrap();
                    prop_assert!(v < (1.0 + step) * value);
                }
            }
        }
    }
}

#[test]
fn noise_means_are_calibrated() {
    let f = Objective::Modular { weights: vec![1.0; 20] };
    let count = 40_000u64;
    for dist in [
        NoiseDistribution::Exponential,
        NoiseDistribution::UniformBand { halfwidth: 0.5 },
        NoiseDistribution::TruncatedGaussian { sigma: 0.8 },
        NoiseDistribution::TwoPoint {
            high: 10.0,
            p_high: 0.05,
            low: 1.0,
            normalize: true,
        },
    ] {
        let oracle = NoisyOracle::new(&f, dist.clone(), 17).unwrap();
        let xs: Vec<f64> = (1..=count).map(|m| oracle.multiplier(&subset_of(20, m))).collect();
        let mean = xs.iter().sum::<f64>() / count as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        let se = (var / count as f64).sqrt();
        assert!((mean - 1.0).abs() <= 4.0 * se, "{dist:?}: mean {mean}, se {se}");
    }
}

#[test]
fn noise_on_disjoint_sets_is_uncorrelated() {
    let f = Objective::Modular { weights: vec![1.0; 40] };
    let oracle = NoisyOracle::new(&f, NoiseDistribution::UniformBand { halfwidth: 0.9 }, 5).unwrap();
    let pairs: Vec<(f64, f64)> = (1..=20_000u64)
        .map(|m| {
            let s = subset_of(20, m);
            let t = Subset::new(subset_of(20, m * 7919 % (1 << 20)).iter().map(|e| e + 20));
            (oracle.multiplier(&s), oracle.multiplier(&t))
        })
        .collect();
    let k = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / k, acc.1 + p.1 / k));
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / k;
    let sx = (pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / k).sqrt();
    let sy = (pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / k).sqrt();
    let corr = cov / (sx * sy);
    assert!(corr.abs() <= 3.0 / k.sqrt(), "correlation {corr}");
}

#[test]
fn subset_encoding_is_injective() {
    let sets: Vec<Subset> = (0..4096u64).map(|m| subset_of(12, m)).collect();
    let encodings: std::collections::HashSet<Vec<u8>> = sets.iter().map(Subset::encode).collect();
    assert_eq!(encodings.len(), sets.len());
}

#[test]
fn sampler_class_frequencies_match_weights() {
    let table = CoefficientTable::new(16);
    let (a, n) = (Subset::new([1, 4, 5, 7]), 12);
    let sampler = SmoothSampler::new(&table, a.len(), n).unwrap();
    let probs = sampler.class_probabilities();
    let mut rng = noisy_submod::auxiliary::stream_rng(3, 0);
    let draws = 100_000;
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..draws {
        let (class, t, set) = sampler.draw(&mut rng, &a, n);
        let inside = set.intersection(&a).len();
        assert_eq!(inside, t);
        assert_eq!(set.len(), t + usize::from(class == TauClass::Outside));
        let j = probs.iter().position(|p| p.0 == class && p.1 == t).unwrap();
        counts[j] += 1;
    }
    for (p, &count) in probs.iter().zip(&counts) {
        let freq = count as f64 / draws as f64;
        let se = (p.2 * (1.0 - p.2) / draws as f64).sqrt();
        assert!((freq - p.2).abs() <= 4.0 * se + 1e-12, "{p:?}: {freq}");
    }
}
