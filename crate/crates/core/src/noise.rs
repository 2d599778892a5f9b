//! Multiplicative noise: distributions, the consistent noisy oracle
//! `f̃(S) = ξ_S · f(S)`, and the sub-exponential norm of `ξ - 1`.
//!
//! `ξ_S` is the inverse CDF of the distribution evaluated at a uniform value
//! derived from a keyed SipHash of the canonical set encoding. Re-querying a
//! set therefore always returns the same answer, and distinct sets get
//! (pseudo-)independent multipliers.

use std::collections::HashMap;
use std::hash::Hasher;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher13;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{input, Error, Result};
use crate::objective::SetFunction;
use crate::subset::Subset;

fn default_true() -> bool {
    true
}

/// Noise multiplier distributions. All families have support in `[0, ∞)`
/// and, except a `TwoPoint` with `normalize: false`, mean one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseDistribution {
    /// `ξ ≡ 1`.
    NoNoise,
    /// Exponential with rate 1; tail density `e^{-x}` (`c0 = 1`, `γ0 = 1`).
    Exponential,
    /// Uniform on `[1 - a, 1 + a]`, `0 < a < 1`.
    UniformBand { halfwidth: f64 },
    /// `N(1, σ²)` conditioned on `[0, ∞)` and divided by its mean.
    TruncatedGaussian { sigma: f64 },
    /// `high` with probability `p_high`, `low` otherwise; divided by the mean
    /// when `normalize` is set.
    TwoPoint {
        high: f64,
        p_high: f64,
        #[serde(default = "one")]
        low: f64,
        #[serde(default = "default_true")]
        normalize: bool,
    },
}

fn one() -> f64 {
    1.0
}

/// Parameters of `N(1, σ²)` truncated at zero.
#[derive(Clone, Copy, Debug)]
struct TruncNormal {
    sigma: f64,
    /// `Φ(-1/σ)`, the mass cut off below zero.
    cut: f64,
    /// Mean of the truncated variable.
    mean: f64,
}

impl TruncNormal {
    fn new(sigma: f64) -> Self {
        let std = standard_normal();
        let alpha = -1.0 / sigma;
        let cut = std.cdf(alpha);
        let mean = 1.0 + sigma * std.pdf(alpha) / (1.0 - cut);
        TruncNormal { sigma, cut, mean }
    }

    /// Density of the rescaled variable `ξ = X / mean` at `x >= 0`.
    fn density(&self, x: f64) -> f64 {
        let z = (self.mean * x - 1.0) / self.sigma;
        self.mean * standard_normal().pdf(z) / (self.sigma * (1.0 - self.cut))
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl NoiseDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseDistribution::NoNoise | NoiseDistribution::Exponential => Ok(()),
            NoiseDistribution::UniformBand { halfwidth } => {
                if halfwidth > 0.0 && halfwidth < 1.0 {
                    Ok(())
                } else {
                    Err(input(format!("uniform band halfwidth must lie in (0,1), got {halfwidth}")))
                }
            }
            NoiseDistribution::TruncatedGaussian { sigma } => {
                if sigma.is_finite() && sigma > 0.0 {
                    Ok(())
                } else {
                    Err(input(format!("gaussian sigma must be positive, got {sigma}")))
                }
            }
            NoiseDistribution::TwoPoint {
                high, p_high, low, ..
            } => {
                if !(low.is_finite() && low >= 0.0 && high.is_finite() && high >= low) {
                    return Err(input("two-point values must satisfy 0 <= low <= high"));
                }
                if !(p_high > 0.0 && p_high < 1.0) {
                    return Err(input(format!("two-point probability must lie in (0,1), got {p_high}")));
                }
                if low == 0.0 && high == 0.0 {
                    return Err(input("two-point distribution cannot be identically zero"));
                }
                Ok(())
            }
        }
    }

    /// Inverse CDF at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(input(format!("quantile level must lie in (0,1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            NoiseDistribution::NoNoise => 1.0,
            NoiseDistribution::Exponential => -(-u).ln_1p(),
            NoiseDistribution::UniformBand { halfwidth } => 1.0 - halfwidth + 2.0 * halfwidth * u,
            NoiseDistribution::TruncatedGaussian { sigma } => {
                let tn = TruncNormal::new(sigma);
                let level = tn.cut + u * (1.0 - tn.cut);
                let x = 1.0 + sigma * standard_normal().inverse_cdf(level);
                x.max(0.0) / tn.mean
            }
            NoiseDistribution::TwoPoint {
                high,
                p_high,
                low,
                normalize,
            } => {
                let scale = if normalize {
                    p_high * high + (1.0 - p_high) * low
                } else {
                    1.0
                };
                let v = if u <= 1.0 - p_high { low } else { high };
                v / scale
            }
        }
    }

    /// Mean of the multiplier.
    pub fn mean(&self) -> f64 {
        match *self {
            NoiseDistribution::TwoPoint {
                high,
                p_high,
                low,
                normalize: false,
            } => p_high * high + (1.0 - p_high) * low,
            _ => 1.0,
        }
    }

    /// Upper end of the support, `None` when unbounded.
    pub fn support_max(&self) -> Option<f64> {
        match *self {
            NoiseDistribution::NoNoise => Some(1.0),
            NoiseDistribution::Exponential | NoiseDistribution::TruncatedGaussian { .. } => None,
            NoiseDistribution::UniformBand { halfwidth } => Some(1.0 + halfwidth),
            NoiseDistribution::TwoPoint { .. } => {
                Some(self.quantile_unchecked(1.0 - f64::EPSILON))
            }
        }
    }

    /// `E[g(ξ)]`, by adaptive quadrature for continuous families and exact
    /// summation for atoms. Returns `+∞` when the integral diverges.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        match *self {
            NoiseDistribution::NoNoise => Ok(g(1.0)),
            NoiseDistribution::TwoPoint { p_high, .. } => {
                let lo = self.quantile_unchecked(0.5 * (1.0 - p_high));
                let hi = self.quantile_unchecked(1.0 - 0.5 * p_high);
                Ok((1.0 - p_high) * g(lo) + p_high * g(hi))
            }
            NoiseDistribution::UniformBand { halfwidth } => {
                let dens = 0.5 / halfwidth;
                let h = |x: f64| g(x) * dens;
                Ok(integrate(&h, 1.0 - halfwidth, 1.0)? + integrate(&h, 1.0, 1.0 + halfwidth)?)
            }
            NoiseDistribution::Exponential => {
                let h = |x: f64| g(x) * (-x).exp();
                Ok(integrate(&h, 0.0, 1.0)? + integrate_tail(&h, 1.0)?)
            }
            NoiseDistribution::TruncatedGaussian { sigma } => {
                let tn = TruncNormal::new(sigma);
                let h = |x: f64| g(x) * tn.density(x);
                Ok(integrate(&h, 0.0, 1.0)? + integrate_tail(&h, 1.0)?)
            }
        }
    }
}

const QUAD_TOL: f64 = 1e-13;
const QUAD_MAX_DEPTH: u32 = 48;

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-12 * (1.0 + a.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "quadrature did not converge on [{a}, {b}]"
        )));
    }
    Ok(adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)?
        + adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub(crate) fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    if !whole.is_finite() {
        return Ok(f64::INFINITY);
    }
    adaptive(f, a, fa, b, fb, m, fm, whole, QUAD_TOL.max(whole.abs() * 1e-14), QUAD_MAX_DEPTH)
}

/// `∫_start^∞ f` over dyadic pieces, stopping once a piece is negligible.
/// Diverges to `+∞` when the pieces stop shrinking.
pub(crate) fn integrate_tail(f: &impl Fn(f64) -> f64, start: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = start;
    let mut width = 1.0;
    for _ in 0..64 {
        let piece = integrate(f, lo, lo + width)?;
        if !piece.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += piece;
        if piece <= 1e-17 * total.max(1e-300) && f(lo + width) <= 1e-17 * total.max(1e-300) {
            return Ok(total);
        }
        lo += width;
        width *= 2.0;
    }
    // pieces never became negligible over ~2^64 units: divergent
    Ok(f64::INFINITY)
}

/// Sub-exponential norm of `ξ - 1`: the least `t` with
/// `E[exp(|ξ - 1| / t)] <= 2`, to relative precision `1e-6` (the returned
/// value always satisfies the inequality).
pub fn sub_exponential_norm(dist: &NoiseDistribution) -> Result<f64> {
    dist.validate()?;
    let moment = |t: f64| -> Result<f64> {
        if let NoiseDistribution::Exponential = dist {
            // the integrand grows like e^{x(1/t - 1)}
            if t <= 1.0 {
                return Ok(f64::INFINITY);
            }
        }
        dist.expectation(|x| ((x - 1.0).abs() / t).exp())
    };

    let mut hi = match *dist {
        NoiseDistribution::NoNoise => return Ok(0.0),
        NoiseDistribution::UniformBand { halfwidth } => halfwidth / std::f64::consts::LN_2,
        NoiseDistribution::TwoPoint { .. } => {
            let b = dist.support_max().unwrap_or(1.0);
            (b + 1.0) / std::f64::consts::LN_2
        }
        _ => 2.0,
    };
    if dist.expectation(|x| (x - 1.0).abs())? == 0.0 {
        return Ok(0.0);
    }
    let mut guard = 0;
    while moment(hi)? > 2.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numeric("could not bracket the sub-exponential norm".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if moment(mid)? <= 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The consistent noisy value oracle `f̃(S) = ξ_S · f(S)`.
///
/// Queries go through [`SetFunction::value`] (or [`NoisyOracle::noisy_value`]
/// for validated input); each one bumps an atomic counter.
pub struct NoisyOracle<'a> {
    objective: &'a dyn SetFunction,
    dist: NoiseDistribution,
    seed: u64,
    queries: AtomicU64,
    per_set: Option<Mutex<HashMap<Subset, u64>>>,
}

impl std::fmt::Debug for NoisyOracle<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoisyOracle")
            .field("n", &self.objective.ground_size())
            .field("dist", &self.dist)
            .field("seed", &self.seed)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl<'a> NoisyOracle<'a> {
    pub fn new(objective: &'a dyn SetFunction, dist: NoiseDistribution, seed: u64) -> Result<Self> {
        dist.validate()?;
        Ok(NoisyOracle {
            objective,
            dist,
            seed,
            queries: AtomicU64::new(0),
            per_set: None,
        })
    }

    /// Also records how many times each distinct set was queried.
    pub fn with_set_tracking(mut self) -> Self {
        self.per_set = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn objective(&self) -> &'a dyn SetFunction {
        self.objective
    }

    pub fn distribution(&self) -> &NoiseDistribution {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform level in `(0, 1)` assigned to `s` by the keyed hash.
    pub fn uniform_level(&self, s: &Subset) -> f64 {
        let mut h = SipHasher13::new_with_keys(self.seed, self.seed.rotate_left(32) ^ 0x6e6f_6973_655f_6b31);
        h.write(&s.encode());
        let bits = h.finish() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// The multiplier `ξ_S`. Does not count as a query.
    pub fn multiplier(&self, s: &Subset) -> f64 {
        self.dist.quantile_unchecked(self.uniform_level(s))
    }

    /// `f̃(S)` with range validation.
    pub fn noisy_value(&self, s: &Subset) -> Result<f64> {
        s.check_range(self.objective.ground_size())?;
        Ok(self.value(s))
    }

    /// Total queries answered so far.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Queries made for `s`; `None` unless set tracking is enabled.
    pub fn queries_for(&self, s: &Subset) -> Option<u64> {
        self.per_set
            .as_ref()
            .map(|m| m.lock().expect("tracking lock").get(s).copied().unwrap_or(0))
    }
}

impl SetFunction for NoisyOracle<'_> {
    fn ground_size(&self) -> usize {
        self.objective.ground_size()
    }

    fn value(&self, s: &Subset) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if let Some(m) = &self.per_set {
            *m.lock().expect("tracking lock").entry(s.clone()).or_insert(0) += 1;
        }
        let exact = self.objective.value(s);
        if exact == 0.0 {
            return 0.0;
        }
        self.multiplier(s) * exact
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;

    fn band(a: f64) -> NoiseDistribution {
        NoiseDistribution::UniformBand { halfwidth: a }
    }

    #[test]
    fn quantile_examples() {
        let q = NoiseDistribution::Exponential
            .quantile(1.0 - (-1.0f64).exp())
            .unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        assert_eq!(band(0.1).quantile(0.5).unwrap(), 1.0);
        let g = NoiseDistribution::TruncatedGaussian { sigma: 0.2 }
            .quantile(0.5)
            .unwrap();
        assert!((0.99..=1.01).contains(&g), "{g}");
        assert!(band(0.1).quantile(0.0).is_err());
        assert!(band(0.1).quantile(1.0).is_err());
    }

    #[test]
    fn truncated_gaussian_median_matches_bisection() {
        // independent route: bisection on the numerically integrated CDF
        let sigma = 0.2;
        let dist = NoiseDistribution::TruncatedGaussian { sigma };
        let tn = TruncNormal::new(sigma);
        let cdf = |x: f64| integrate(&|y| tn.density(y), 0.0, x).unwrap();
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = dist.quantile(0.5).unwrap();
        assert!((q - lo).abs() < 1e-6, "{q} vs {lo}");
    }

    #[test]
    fn truncated_gaussian_has_unit_mean() {
        for sigma in [0.1, 0.5, 1.0, 2.0] {
            let d = NoiseDistribution::TruncatedGaussian { sigma };
            let m = d.expectation(|x| x).unwrap();
            assert!((m - 1.0).abs() < 1e-8, "sigma {sigma}: mean {m}");
            let mass = d.expectation(|_| 1.0).unwrap();
            assert!((mass - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn two_point_normalization() {
        let d = NoiseDistribution::TwoPoint {
            high: 10.0,
            p_high: 0.01,
            low: 1.0,
            normalize: true,
        };
        assert!((d.expectation(|x| x).unwrap() - 1.0).abs() < 1e-12);
        let raw = NoiseDistribution::TwoPoint {
            high: 10.0,
            p_high: 0.25,
            low: 1.0,
            normalize: false,
        };
        assert_eq!(raw.quantile(0.5).unwrap(), 1.0);
        assert_eq!(raw.quantile(0.8).unwrap(), 10.0);
        assert!((raw.mean() - 3.25).abs() < 1e-12);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(sub_exponential_norm(&NoiseDistribution::NoNoise).unwrap(), 0.0);
        let k = sub_exponential_norm(&band(0.1)).unwrap();
        assert!(k > 0.0 && k <= 0.1 / std::f64::consts::LN_2 + 1e-12, "{k}");

        let k = sub_exponential_norm(&NoiseDistribution::Exponential).unwrap();
        // closed form of E[exp(|ξ-1|/k)] for the unit exponential
        let s = 1.0 / k;
        let closed = s.exp() * (1.0 - (-(1.0 + s)).exp()) / (1.0 + s) + (-1.0f64).exp() / (1.0 - s);
        assert!((closed - 2.0).abs() < 1e-4, "k={k}, moment={closed}");
    }

    #[test]
    fn kappa_two_point_respects_bounded_support_bound() {
        let d = NoiseDistribution::TwoPoint {
            high: 10.0,
            p_high: 0.01,
            low: 1.0,
            normalize: true,
        };
        let k = sub_exponential_norm(&d).unwrap();
        let b = d.support_max().unwrap();
        assert!(k <= (b + 1.0) / std::f64::consts::LN_2);
        let m = d.expectation(|x| ((x - 1.0).abs() / k).exp()).unwrap();
        assert!(m <= 2.0 && m > 2.0 - 1e-4, "{m}");
    }

    #[test]
    fn oracle_is_consistent_and_counts() {
        let f = Objective::Modular {
            weights: vec![1.0, 2.0, 3.0],
        };
        let o = NoisyOracle::new(&f, band(0.1), 7).unwrap().with_set_tracking();
        assert_eq!(o.query_count(), 0);
        let s = Subset::new([0, 2]);
        let v1 = o.noisy_value(&s).unwrap();
        let v2 = o.noisy_value(&s).unwrap();
        assert_eq!(v1.to_bits(), v2.to_bits());
        assert_eq!(o.query_count(), 2);
        assert_eq!(o.queries_for(&s), Some(2));
        assert!((0.9 * 4.0..=1.1 * 4.0).contains(&v1));
        assert!(o.noisy_value(&Subset::new([3])).is_err());
    }

    #[test]
    fn no_noise_returns_exact_values() {
        let f = Objective::Modular {
            weights: vec![1.5, 2.0],
        };
        let o = NoisyOracle::new(&f, NoiseDistribution::NoNoise, 1).unwrap();
        assert_eq!(o.noisy_value(&Subset::new([0, 1])).unwrap(), 3.5);
    }

    #[test]
    fn different_seeds_give_different_noise() {
        let f = Objective::Modular {
            weights: vec![1.0; 4],
        };
        let a = NoisyOracle::new(&f, band(0.1), 1).unwrap();
        let b = NoisyOracle::new(&f, band(0.1), 2).unwrap();
        let s = Subset::new([1, 3]);
        assert_ne!(a.multiplier(&s), b.multiplier(&s));
    }
}
