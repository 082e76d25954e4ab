//! Small summary statistics on `f64` samples.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

/// Linear-interpolation quantile (Hyndman–Fan type 7) of an unsorted sample.
pub fn quantile(sample: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Quantiles {
    pub fn of(sample: &[f64]) -> Self {
        let mut v: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return Quantiles {
                q05: f64::NAN,
                q25: f64::NAN,
                q50: f64::NAN,
                q75: f64::NAN,
                q95: f64::NAN,
            };
        }
        Quantiles {
            q05: quantile_sorted(&v, 0.05),
            q25: quantile_sorted(&v, 0.25),
            q50: quantile_sorted(&v, 0.5),
            q75: quantile_sorted(&v, 0.75),
            q95: quantile_sorted(&v, 0.95),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

pub fn mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}

/// Unbiased sample variance.
pub fn variance(sample: &[f64]) -> f64 {
    let m = mean(sample);
    sample.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (sample.len() as f64 - 1.0)
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F₁ − F₂|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < x.len() && j < y.len() {
        let t = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// One-sided sign test: `P(Bin(n, ½) ≥ wins)`, exact.
pub fn sign_test_p(wins: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let mut c = BigUint::one();
    let mut tail = BigUint::from(0u32);
    for k in 0..=trials {
        if k >= wins {
            tail += &c;
        }
        c = c * BigUint::from(trials - k) / BigUint::from(k + 1);
    }
    let total = BigUint::one() << trials as usize;
    // both fit in f64 range for trials < 1000
    tail.to_f64().unwrap_or(f64::INFINITY) / total.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_examples() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(Quantiles::of(&v).iqr(), 3.25 - 1.75);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert_eq!(ks_distance(&[1.0, 3.0], &[2.0, 4.0]), 0.5);
    }

    #[test]
    fn sign_test_examples() {
        assert_eq!(sign_test_p(0, 10), 1.0);
        assert_eq!(sign_test_p(10, 10), 1.0 / 1024.0);
        assert!((sign_test_p(8, 10) - 56.0 / 1024.0).abs() < 1e-15);
        // 115 of 200 is just significant at 5%
        assert!(sign_test_p(115, 200) < 0.05 && sign_test_p(112, 200) > 0.05);
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
    }
}
