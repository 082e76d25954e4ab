//! Certified second moments of truncated sums and Bernstein tail bounds.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exactnum::{pow2_inv, sum_rationals, Rational, Real};
use crate::observables::{chi_trunc_step, expect_chi_trunc_sq};

use super::transfer::transfer_apply;

/// Largest lag computed exactly by [`second_moment_tn`].
pub const MAX_EXACT_LAG: u32 = 20;

/// Enclosure `[lower, upper]` of `E((T_n^r)²)`.
///
/// `E(T²) = n·E((χ^r)²) + 2Σ_{L=1}^{n−1} (n−L)·C(L)` with `C(L) = ∫χ^r·χ^r∘τ^L`.
/// Lags `L ≤ exact_lag` use `C(L) = ∫χ^r·τ̂^Lχ^r` exactly; larger lags are
/// bracketed by `(∫χ^r)² ± 2^{−L}‖χ^r‖₁V(χ^r)`.
pub fn second_moment_tn(n: u64, r: u64, exact_lag: u32) -> Result<(Rational, Rational)> {
    if n == 0 || r == 0 {
        return Err(Error::Domain("second moment needs n, r ≥ 1".into()));
    }
    if exact_lag > MAX_EXACT_LAG {
        return Err(Error::Domain(format!("exact lag {exact_lag} above {MAX_EXACT_LAG}")));
    }
    let chi = chi_trunc_step(r);
    let mean = chi.integral();
    let mean_sq = &mean * &mean;
    let slack = chi.l1_norm() * chi.variation();
    let int = |v: u64| Rational::from_integer(BigInt::from(v));

    let diag = int(n) * expect_chi_trunc_sq(r);
    let mut exact_terms = Vec::new();
    let mut g = chi.clone();
    let last_exact = u64::from(exact_lag).min(n - 1);
    for lag in 1..=last_exact {
        g = transfer_apply(&g)?;
        exact_terms.push(int(n - lag) * chi.inner(&g));
    }
    // Σ_{L>D} (n−L)·(mean² ± 2^{−L}·slack)
    let mut weight = Vec::new();
    let mut width = Vec::new();
    for lag in last_exact + 1..n {
        weight.push(int(n - lag));
        width.push(int(n - lag) * pow2_inv(lag as u32));
    }
    let far = sum_rationals(weight.into_iter()) * &mean_sq;
    let far_width = sum_rationals(width.into_iter()) * &slack;
    let two = int(2);
    let centre = diag + &two * (sum_rationals(exact_terms.into_iter()) + far);
    let half = &two * far_width;
    Ok((&centre - &half, centre + half))
}

/// `2·exp(−t²/(2V + ⅔Mt))`.
pub fn bernstein_bound(t: &Rational, var_z: &Rational, m: &Rational, prec: u32) -> Result<Real> {
    let zero = Rational::from_integer(0.into());
    if t <= &zero || var_z <= &zero || m <= &zero {
        return Err(Error::Domain("Bernstein bound needs positive arguments".into()));
    }
    let two = Rational::from_integer(2.into());
    let denom = &two * var_z + Rational::new(2.into(), 3.into()) * m * t;
    let expo = -(t * t) / denom;
    Ok(Real::from_rational(&expo, prec).exp().mul(&Real::from_int(2, prec)))
}

/// `2·exp(−3κ²/(6+2κ)·E(Z)/K)`.
pub fn bernstein_simple(kappa: &Rational, ez: &Rational, k: &Rational, prec: u32) -> Result<Real> {
    let zero = Rational::from_integer(0.into());
    if kappa <= &zero || ez <= &zero || k <= &zero {
        return Err(Error::Domain("Bernstein bound needs positive arguments".into()));
    }
    let three = Rational::from_integer(3.into());
    let expo = -(three * kappa * kappa) / (Rational::from_integer(6.into()) + Rational::from_integer(2.into()) * kappa) * ez / k;
    Ok(Real::from_rational(&expo, prec).exp().mul(&Real::from_int(2, prec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat, DEFAULT_PIECE_CAP};

    #[test]
    fn single_term_is_the_diagonal() {
        let (lo, hi) = second_moment_tn(1, 3, 0).unwrap();
        assert_eq!((lo.clone(), hi), (rat(23, 12), rat(23, 12)));
        assert_eq!(lo, rat(1, 2) + rat(2, 3) + rat(3, 4));
    }

    #[test]
    fn enclosure_width_and_exact_case() {
        let chi = chi_trunc_step(2);
        let slack = chi.l1_norm() * chi.variation();
        let (lo, hi) = second_moment_tn(2, 2, 0).unwrap();
        assert_eq!(&hi - &lo, int(2) * rat(1, 2) * slack * int(2));
        // with the lag computed exactly the enclosure collapses onto the pullback value
        let (elo, ehi) = second_moment_tn(2, 2, 2).unwrap();
        assert_eq!(elo, ehi);
        let cross = chi.pullback_tau(1, DEFAULT_PIECE_CAP).unwrap().inner(&chi);
        assert_eq!(elo, int(2) * expect_chi_trunc_sq(2) + int(2) * cross);
        assert!(lo <= elo && elo <= hi);
    }

    #[test]
    fn moment_bound_at_64() {
        let n = 64u64;
        let r = crate::trimming::thresholds(n).unwrap().r_floor;
        let (_, hi) = second_moment_tn(n, r, 20).unwrap();
        use num_traits::ToPrimitive;
        let ln = (n as f64).ln();
        assert!(hi.to_f64().unwrap() <= 9.0 * (n * n) as f64 * ln * ln);
    }

    #[test]
    fn bernstein_examples() {
        let b = bernstein_simple(&int(1), &int(60), &int(10), 128).unwrap();
        assert!((b.to_f64() - 2.0 * (-2.25f64).exp()).abs() < 1e-15);
        let tiny = bernstein_bound(&rat(1, 1_000_000), &int(1), &int(1), 128).unwrap();
        assert!((tiny.to_f64() - 2.0).abs() < 1e-9);
        let lo = bernstein_simple(&int(1), &int(10), &int(10), 128).unwrap();
        let hi = bernstein_simple(&int(1), &int(50), &int(10), 128).unwrap();
        assert!(hi.upper() < lo.lower());
        assert!(bernstein_bound(&int(0), &int(1), &int(1), 64).is_err());
    }
}
