//! The coefficients `m_{s,t} = ∫₀¹ e^p/(e-1) · p^t (1-p)^{s-t} dp` and the
//! per-set weights `τ_A(T)` of the auxiliary function written over `f`.

use std::f64::consts::E;

use crate::error::{input, Result};

/// `ln C(n, k)` by a product of ratios; exact enough for `n` in the thousands.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

/// `ln m_{s,t}` for `0 <= t <= s`, from the series
/// `m_{s,t} = (e-1)^{-1} Σ_k B(t+k+1, s-t+1) / k!`.
fn ln_m_series(s: usize, t: usize) -> f64 {
    debug_assert!(t <= s);
    // B(t+1, s-t+1) = 1 / ((s+1) C(s,t))
    let ln_first = -((s + 1) as f64).ln() - ln_binomial(s, t);
    // the terms shrink at least factorially; stop once the remaining tail,
    // bounded by term / (k + 1), is below 1e-17 of the running sum
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0usize;
    loop {
        term *= (t + k + 1) as f64 / (((s + k + 2) * (k + 1)) as f64);
        sum += term;
        k += 1;
        if term / (k + 1) as f64 <= 1e-17 * sum {
            break;
        }
    }
    ln_first + sum.ln() - (E - 1.0).ln()
}

/// `m_{s,t}` with the convention `m_{s,-1} = 0`.
pub fn m_coefficient(s: i64, t: i64) -> Result<f64> {
    if s < 0 || t < -1 || t > s {
        return Err(input(format!("m coefficient needs -1 <= t <= s, got s={s}, t={t}")));
    }
    if t == -1 {
        return Ok(0.0);
    }
    Ok(ln_m_series(s as usize, t as usize).exp())
}

/// Cached `m_{s,t}` for `s <= s_max` plus harmonic numbers; larger `s` are
/// computed on demand.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    ln_m: Vec<Vec<f64>>,
    harmonic: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(s_max: usize) -> Self {
        let ln_m = (0..=s_max)
            .map(|s| (0..=s).map(|t| ln_m_series(s, t)).collect())
            .collect();
        let mut harmonic = vec![0.0; s_max + 2];
        for k in 1..harmonic.len() {
            harmonic[k] = harmonic[k - 1] + 1.0 / k as f64;
        }
        CoefficientTable { ln_m, harmonic }
    }

    pub fn s_max(&self) -> usize {
        self.ln_m.len() - 1
    }

    /// `ln m_{s,t}`; `-∞` for `t = -1`.
    pub fn ln_m(&self, s: usize, t: isize) -> f64 {
        assert!(t <= s as isize, "m_{{s,t}} needs t <= s");
        if t < 0 {
            return f64::NEG_INFINITY;
        }
        match self.ln_m.get(s) {
            Some(row) => row[t as usize],
            None => ln_m_series(s, t as usize),
        }
    }

    /// `m_{s,t}`; zero for `t = -1`.
    pub fn m(&self, s: usize, t: isize) -> f64 {
        if t < 0 {
            0.0
        } else {
            self.ln_m(s, t).exp()
        }
    }

    /// `H_k = Σ_{i<=k} 1/i`.
    pub fn harmonic(&self, k: usize) -> f64 {
        match self.harmonic.get(k) {
            Some(&h) => h,
            None => (1..=k).map(|i| 1.0 / i as f64).sum(),
        }
    }

    /// `s(A) = Σ_{T⊆A} m_{|A|-1,|T|-1}` for `|A| = a >= 1`.
    pub fn subset_weight_total(&self, a: usize) -> f64 {
        (1..=a)
            .map(|t| (ln_binomial(a, t) + self.ln_m(a - 1, t as isize - 1)).exp())
            .sum()
    }
}

/// Which part of the averaging set `L_A` a sampled `T` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TauClass {
    /// `T ⊆ A`.
    Inside,
    /// `T = S + e` with `S ⊆ A` nonempty and `e ∉ A`.
    Outside,
}

/// The weights `τ_A(T)` for a set of size `a` in a ground set of size `n`,
/// grouped by class and by `|T ∩ A|`.
#[derive(Clone, Debug)]
pub struct TauClasses {
    a: usize,
    n: usize,
    /// `inside[t]`: weight of one `T ⊆ A` with `|T| = t`.
    inside: Vec<f64>,
    /// `outside[t]`: weight of one `S + e` with `|S| = t`.
    outside: Vec<f64>,
    /// `(class, t, total class weight)` for all classes with positive weight.
    classes: Vec<(TauClass, usize, f64)>,
    total: f64,
}

impl TauClasses {
    pub fn new(table: &CoefficientTable, a: usize, n: usize) -> Result<Self> {
        if a == 0 || a > n {
            return Err(input(format!("tau classes need 1 <= |A| <= n, got a={a}, n={n}")));
        }
        let nf = n as f64;
        let s = a - 1;
        let mut inside = vec![0.0; a + 1];
        let mut outside = vec![0.0; a + 1];
        let mut classes = Vec::with_capacity(2 * a);
        for t in 1..=a {
            let ti = t as isize;
            inside[t] = t as f64 * (table.m(s, ti - 1) + table.m(s, ti - 2)) / nf;
            outside[t] = table.m(s, ti - 1) / nf;
        }
        // class totals in log space: C(a,t) overflows f64 well before m underflows
        for t in 1..=a {
            let ln_c = ln_binomial(a, t);
            let ti = t as isize;
            let ln_in = (t as f64).ln() + log_add(table.ln_m(s, ti - 1), table.ln_m(s, ti - 2)) - nf.ln();
            let w = (ln_c + ln_in).exp();
            if w > 0.0 {
                classes.push((TauClass::Inside, t, w));
            }
        }
        if n > a {
            for t in 1..=a {
                let ln_w = ln_binomial(a, t) + ((n - a) as f64).ln() + table.ln_m(s, t as isize - 1) - nf.ln();
                let w = ln_w.exp();
                if w > 0.0 {
                    classes.push((TauClass::Outside, t, w));
                }
            }
        }
        let total = classes.iter().map(|c| c.2).sum();
        Ok(TauClasses {
            a,
            n,
            inside,
            outside,
            classes,
            total,
        })
    }

    pub fn set_size(&self) -> usize {
        self.a
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// `τ_A(T)` for an inside set of size `t`.
    pub fn inside_weight(&self, t: usize) -> f64 {
        self.inside[t]
    }

    /// `τ_A(S + e)` for `|S| = t`.
    pub fn outside_weight(&self, t: usize) -> f64 {
        self.outside[t]
    }

    /// Normalizer `Σ_{T∈L_A} τ_A(T)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn classes(&self) -> &[(TauClass, usize, f64)] {
        &self.classes
    }

    /// `max_T τ_A(T)`.
    pub fn max_weight(&self) -> f64 {
        let out = if self.n > self.a { &self.outside[1..] } else { &[][..] };
        self.inside[1..].iter().chain(out).copied().fold(0.0, f64::max)
    }

    /// `Σ_T τ_A(T)²`.
    pub fn sum_of_squares(&self) -> f64 {
        let a = self.a;
        let extra = (self.n - a) as f64;
        (1..=a)
            .map(|t| {
                let c = ln_binomial(a, t).exp();
                c * (self.inside[t].powi(2) + extra * self.outside[t].powi(2))
            })
            .sum()
    }
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre (5 points) of the defining integral.
    fn m_by_quadrature(s: usize, t: usize) -> f64 {
        let nodes = [
            (0.0, 0.568_888_888_888_888_9),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let pieces = 400;
        let h = 1.0 / pieces as f64;
        let mut total = 0.0;
        for i in 0..pieces {
            let mid = (i as f64 + 0.5) * h;
            for (x, w) in nodes {
                let p = mid + 0.5 * h * x;
                total += 0.5 * h * w * p.exp() * p.powi(t as i32) * (1.0 - p).powi((s - t) as i32);
            }
        }
        total / (E - 1.0)
    }

    #[test]
    fn small_values() {
        assert!((m_coefficient(0, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((m_coefficient(1, 1).unwrap() - 1.0 / (E - 1.0)).abs() < 1e-14);
        assert!((m_coefficient(1, 0).unwrap() - (E - 2.0) / (E - 1.0)).abs() < 1e-14);
        assert_eq!(m_coefficient(3, -1).unwrap(), 0.0);
        assert!(m_coefficient(1, 2).is_err());
    }

    #[test]
    fn series_matches_quadrature() {
        for s in 0..12 {
            for t in 0..=s {
                let a = m_coefficient(s as i64, t as i64).unwrap();
                let b = m_by_quadrature(s, t);
                assert!((a - b).abs() < 1e-12, "s={s} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn coefficients_bounded() {
        let table = CoefficientTable::new(64);
        for s in 0..=64 {
            for t in 0..=s as isize {
                let m = table.m(s, t);
                assert!((0.0..=3.0).contains(&m));
            }
        }
        assert!((table.harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
        // the Pascal-like identity m_{s,t} = m_{s+1,t} + m_{s+1,t+1}
        for s in 0..30 {
            for t in 0..=s as isize {
                let lhs = table.m(s, t);
                let rhs = table.m(s + 1, t) + table.m(s + 1, t + 1);
                assert!((lhs - rhs).abs() < 1e-13 * lhs.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn on_demand_rows_match_cache() {
        let small = CoefficientTable::new(4);
        let big = CoefficientTable::new(40);
        assert_eq!(small.ln_m(30, 7), big.ln_m(30, 7));
    }

    #[test]
    fn tau_total_matches_weighted_sum() {
        let table = CoefficientTable::new(16);
        let tau = TauClasses::new(&table, 5, 20).unwrap();
        let direct: f64 = (1..=5)
            .map(|t| {
                let c = ln_binomial(5, t).exp();
                c * (tau.inside_weight(t) + 15.0 * tau.outside_weight(t))
            })
            .sum();
        assert!((direct - tau.total()).abs() < 1e-12);
        assert!(TauClasses::new(&table, 0, 4).is_err());
    }
}
