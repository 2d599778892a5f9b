//! Monte-Carlo estimators of `φ_h` and `φ_{h_H}` from noisy values.
//!
//! Both estimators rewrite the auxiliary function as a weighted sum of
//! values `f̃(T)`, sample `T` proportionally to its weight and rescale the
//! sample mean by the total weight. Each call makes exactly `samples`
//! oracle queries and draws its randomness from a ChaCha stream selected by
//! `(seed, stream)`, never from the noise key.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::auxiliary::coefficients::{ln_binomial, CoefficientTable, TauClass, TauClasses};
use crate::error::{input, parameter, Result};
use crate::objective::SetFunction;
use crate::subset::{Element, Subset};

/// Sample budget and randomness source of one estimator call.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// `M`, the number of noisy queries.
    pub samples: usize,
    /// Algorithm seed; independent of the noise key.
    pub seed: u64,
    /// Stream id within the seed.
    pub stream: u64,
    /// Declared accuracy target (reporting only).
    pub alpha: f64,
    /// Declared failure probability (reporting only).
    pub delta: f64,
}

impl EstimatorConfig {
    pub fn new(samples: usize, seed: u64, stream: u64) -> Self {
        EstimatorConfig {
            samples,
            seed,
            stream,
            alpha: 0.0,
            delta: 0.0,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        stream_rng(self.seed, self.stream)
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            Err(parameter("estimator needs at least one sample"))
        } else {
            Ok(())
        }
    }
}

/// Deterministic RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// An estimate with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `scale · sd / √M` of the scaled sample values.
    pub std_error: f64,
}

fn uniform_subset<R: Rng + ?Sized>(rng: &mut R, a: &Subset, t: usize) -> Vec<Element> {
    let ids = a.as_slice();
    index::sample(rng, ids.len(), t)
        .into_iter()
        .map(|i| ids[i])
        .collect()
}

/// Uniform element of `{0..n} \ a`, with `a` sorted.
fn uniform_outside<R: Rng + ?Sized>(rng: &mut R, a: &Subset, n: usize) -> Element {
    let mut e = rng.gen_range(0..n - a.len());
    for x in a.iter() {
        if x <= e {
            e += 1;
        } else {
            break;
        }
    }
    e
}

/// Sampler for `ν(T) = τ_A(T) / Σ τ_A` over the averaging set of `φ_h`.
#[derive(Clone, Debug)]
pub struct SmoothSampler {
    tau: TauClasses,
    pick: WeightedIndex<f64>,
}

impl SmoothSampler {
    pub fn new(table: &CoefficientTable, a: usize, n: usize) -> Result<Self> {
        let tau = TauClasses::new(table, a, n)?;
        let pick = WeightedIndex::new(tau.classes().iter().map(|c| c.2))
            .map_err(|e| input(format!("degenerate tau classes: {e}")))?;
        Ok(SmoothSampler { tau, pick })
    }

    pub fn tau(&self) -> &TauClasses {
        &self.tau
    }

    /// Probability of each `(class, |T ∩ A|)` under `ν`.
    pub fn class_probabilities(&self) -> Vec<(TauClass, usize, f64)> {
        let total = self.tau.total();
        self.tau
            .classes()
            .iter()
            .map(|&(c, t, w)| (c, t, w / total))
            .collect()
    }

    /// Draws one `T ∈ L_A` and reports its class.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, a: &Subset, n: usize) -> (TauClass, usize, Subset) {
        let (class, t, _) = self.tau.classes()[self.pick.sample(rng)];
        let mut ids = uniform_subset(rng, a, t);
        if class == TauClass::Outside {
            ids.push(uniform_outside(rng, a, n));
        }
        (class, t, Subset::new(ids))
    }
}

fn mean_and_se(values: &[f64], scale: f64) -> Estimate {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: scale * mean,
        std_error: scale * (var / m).sqrt(),
    }
}

/// Estimate of `φ_h(A)` from `M` noisy values, with its standard error.
pub fn estimate_phi_h_detailed<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    table: &CoefficientTable,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    cfg.check()?;
    if a.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            std_error: 0.0,
        });
    }
    let n = v.ground_size();
    a.check_range(n)?;
    let sampler = SmoothSampler::new(table, a.len(), n)?;
    let mut rng = cfg.rng();
    let values: Vec<f64> = (0..cfg.samples)
        .map(|_| v.value(&sampler.draw(&mut rng, a, n).2))
        .collect();
    Ok(mean_and_se(&values, sampler.tau().total()))
}

/// `φ̂_h(A)`: `(Σ τ) · (1/M) Σ_j f̃(T_j)` with `T_j ~ ν`.
pub fn estimate_phi_h<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    table: &CoefficientTable,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    estimate_phi_h_detailed(v, a, table, cfg).map(|e| e.value)
}

/// Sampler for `ν_A(T ∪ H_i) = m_{|A|-1,|T|-1} / (2^{|H|} s(A))`.
#[derive(Clone, Debug)]
pub struct PinnedSampler {
    sizes: WeightedIndex<f64>,
    total: f64,
}

impl PinnedSampler {
    pub fn new(table: &CoefficientTable, a: usize) -> Result<Self> {
        if a == 0 {
            return Err(input("pinned sampler needs |A| >= 1"));
        }
        let weights: Vec<f64> = (1..=a)
            .map(|t| (ln_binomial(a, t) + table.ln_m(a - 1, t as isize - 1)).exp())
            .collect();
        let total = weights.iter().sum();
        let sizes = WeightedIndex::new(&weights)
            .map_err(|e| input(format!("degenerate size weights: {e}")))?;
        Ok(PinnedSampler { sizes, total })
    }

    /// `s(A) = Σ_{T⊆A} m_{|A|-1,|T|-1}`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, a: &Subset, pinned: &Subset) -> Subset {
        let t = self.sizes.sample(rng) + 1;
        let mut ids = uniform_subset(rng, a, t);
        ids.extend(pinned.iter().filter(|_| rng.gen::<bool>()));
        Subset::new(ids)
    }
}

/// Estimate of `φ_{h_H}(A)` with its standard error.
pub fn estimate_phi_h_pinned_detailed<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    pinned: &Subset,
    table: &CoefficientTable,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    cfg.check()?;
    if !a.is_disjoint(pinned) {
        return Err(input("φ_(h_H) estimator needs A disjoint from H"));
    }
    if a.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            std_error: 0.0,
        });
    }
    a.check_range(v.ground_size())?;
    let sampler = PinnedSampler::new(table, a.len())?;
    let mut rng = cfg.rng();
    let values: Vec<f64> = (0..cfg.samples)
        .map(|_| v.value(&sampler.draw(&mut rng, a, pinned)))
        .collect();
    Ok(mean_and_se(&values, sampler.total()))
}

/// `φ̂_{h_H}(A)`: `s(A) · (1/M) Σ_i f̃(B_i)` with `B_i ~ ν_A`.
pub fn estimate_phi_h_pinned<V: SetFunction + ?Sized>(
    v: &V,
    a: &Subset,
    pinned: &Subset,
    table: &CoefficientTable,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    estimate_phi_h_pinned_detailed(v, a, pinned, table, cfg).map(|e| e.value)
}
