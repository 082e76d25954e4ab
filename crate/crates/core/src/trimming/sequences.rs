//! The trimming sequence `b_n`, the thresholds `t_n`, `r_n`, `d_n`, and the ω
//! contracts.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exactnum::{certify_floor, certify_floor_i64, ln2, Rational, Real};

use super::psi::{omega_args, PsiSpec};

/// `⌊log n⌋`, certified.
pub fn floor_ln(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("log 0".into()));
    }
    Ok(certify_floor_i64(|p| Real::from_bigint(BigInt::from(n), p).ln())? as u64)
}

/// `⌊log₂ n⌋`.
pub fn floor_log2(n: u64) -> u64 {
    63 - u64::from(n.leading_zeros())
}

/// `b_n = ⌊(log ψ(⌊log n⌋) − log log n)/log 2⌋`, possibly negative.
pub fn b_of_n(n: u64, psi: &PsiSpec) -> Result<i64> {
    if n < 3 {
        return Err(Error::Domain(format!("b_n needs n ≥ 3, got {n}")));
    }
    let k = floor_ln(n)?;
    certify_floor_i64(|p| {
        let w = p + 32;
        let lp = psi.eval(k, w)?.ln()?;
        let llnn = Real::from_bigint(BigInt::from(n), w).ln()?.ln()?;
        lp.sub(&llnn).div(&ln2(w))
    })
}

/// `max(b_n, 0)`.
pub fn b_plus(n: u64, psi: &PsiSpec) -> Result<u64> {
    Ok(b_of_n(n, psi)?.max(0) as u64)
}

/// `(1+ε)/log 2 · log log log n`, the leading behaviour of `b_n` for
/// `ψ(k) = k(log k)^{1+ε}`.
pub fn b_asymptote(n: u64, eps: &Rational) -> Result<f64> {
    let p = 128;
    let lll = Real::from_bigint(BigInt::from(n), p).ln()?.ln()?.ln()?;
    let one_eps = Real::from_rational(&(eps + Rational::from_integer(1.into())), p);
    Ok(one_eps.mul(&lll).div(&ln2(p))?.to_f64())
}

/// The three scale sequences at `n`, with certified floors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub n: u64,
    /// Lower endpoint of the 128-bit enclosure of `t_n = n(log n)^{3/4}`.
    pub t: Rational,
    /// Lower endpoint of the enclosure of `r_n = n log n`.
    pub r: Rational,
    /// `d_n = n log n`, identical to `r_n`.
    pub d: Rational,
    pub t_floor: u64,
    pub r_floor: u64,
}

impl Thresholds {
    pub fn d_f64(&self) -> f64 {
        self.d.to_f64().unwrap_or(f64::NAN)
    }
}

fn t_real(n: u64, p: u32) -> Result<Real> {
    let x = Real::from_bigint(BigInt::from(n), p);
    let e = Real::from_rational(&Rational::new(3.into(), 4.into()), p);
    Ok(x.mul(&x.ln()?.pow(&e)?))
}

fn r_real(n: u64, p: u32) -> Result<Real> {
    let x = Real::from_bigint(BigInt::from(n), p);
    Ok(x.mul(&x.ln()?))
}

pub fn thresholds(n: u64) -> Result<Thresholds> {
    if n < 2 {
        return Err(Error::Domain(format!("thresholds need n ≥ 2, got {n}")));
    }
    let r = r_real(n, 128)?.lower();
    let to_u64 = |v: BigInt| v.to_u64().ok_or_else(|| Error::Domain("threshold overflow".into()));
    Ok(Thresholds {
        n,
        t: t_real(n, 128)?.lower(),
        d: r.clone(),
        r,
        t_floor: to_u64(certify_floor(|p| t_real(n, p))?)?,
        r_floor: to_u64(certify_floor(|p| r_real(n, p))?)?,
    })
}

/// `⌊ε·n·log n⌋` for a rational factor ε > 0.
pub fn eps_threshold(n: u64, eps: &Rational) -> Result<u64> {
    let v = certify_floor(|p| Ok(Real::from_rational(eps, p).mul(&r_real(n, p)?)))?;
    v.to_u64().ok_or_else(|| Error::Domain("threshold overflow".into()))
}

/// Which ω-transform a contract check refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaVariant {
    Min,
    Max,
}

/// Outcome of checking `ω(⌊log₂ n⌋) ≤ ψ(⌊log n⌋)` (min) or `≥` (max) for all
/// `2 ≤ n ≤ n_max`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OmegaReport {
    /// Distinct `(⌊log n⌋, ⌊log₂ n⌋)` pairs examined.
    pub segments: u64,
    /// Pairs where `⌊log n⌋` is not one of the two ω arguments.
    pub structural_defects: u64,
    /// Pairs where interval evaluation proves the inequality false.
    pub numeric_defects: u64,
    /// Pairs skipped because ψ is undefined at one of the arguments.
    pub undefined: u64,
}

/// Every `n ≥ 2` shares its `(⌊log n⌋, ⌊log₂ n⌋)` pair with the largest
/// breakpoint `≤ n` among `{2} ∪ {2^L} ∪ {⌈e^k⌉}`, so checking those breakpoints
/// covers the full range.
pub fn omega_contract(psi: &PsiSpec, variant: OmegaVariant, n_max: u64) -> Result<OmegaReport> {
    let mut starts = vec![2u64];
    let mut p2 = 4u64;
    while p2 <= n_max {
        starts.push(p2);
        p2 = match p2.checked_mul(2) {
            Some(v) => v,
            None => break,
        };
    }
    // smallest n with ⌊log n⌋ = k
    let mut k = 1u64;
    loop {
        let mut lo = 2u64;
        let mut hi = n_max.saturating_add(1);
        if floor_ln(hi)? < k {
            break;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if floor_ln(mid)? >= k {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo <= n_max {
            starts.push(lo);
        }
        k += 1;
    }
    starts.sort_unstable();
    starts.dedup();

    let mut rep = OmegaReport::default();
    for &n in &starts {
        rep.segments += 1;
        let t = floor_ln(n)?;
        let l = floor_log2(n);
        let (a, b) = omega_args(l)?;
        if t != a && t != b {
            rep.structural_defects += 1;
        }
        let omega = match variant {
            OmegaVariant::Min => super::psi::omega_min(psi),
            OmegaVariant::Max => super::psi::omega_max(psi),
        };
        match (omega.eval(l, 128), psi.eval(t, 128)) {
            (Ok(w), Ok(v)) => {
                let violated = match variant {
                    OmegaVariant::Min => w.lower() > v.upper(),
                    OmegaVariant::Max => w.upper() < v.lower(),
                };
                if violated {
                    rep.numeric_defects += 1;
                }
            }
            _ => rep.undefined += 1,
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trimming::psi::PsiClass;

    #[test]
    fn floors_of_logs() {
        assert_eq!(floor_ln(1000).unwrap(), 6);
        assert_eq!(floor_ln(1096).unwrap(), 6);
        assert_eq!(floor_ln(1097).unwrap(), 7); // e^7 ≈ 1096.63
        assert_eq!(floor_log2(1024), 10);
    }

    #[test]
    fn b_of_n_zero_when_psi_is_log() {
        // ψ(⌊log n⌋) = log n would need ψ(k) = log n; use ψ ≡ log n at a fixed n
        let n = 1_000_000u64;
        let ln_n = (n as f64).ln();
        let psi = PsiSpec::custom("log n", PsiClass::Divergent, move |_, p| Real::from_bigint(BigInt::from(n), p).ln());
        assert_eq!(b_of_n(n, &psi).unwrap(), 0);
        assert!(ln_n > 13.0);
        assert!(b_of_n(2, &psi).is_err());
    }

    #[test]
    fn b_of_n_against_float_evaluation() {
        let psi = PsiSpec::n_log_pow("2", PsiClass::Summable).unwrap();
        for n in [1000u64, 1_000_000, 10_000_000] {
            let k = (n as f64).ln().floor();
            let v = ((k * k.ln().powi(2)).ln() - (n as f64).ln().ln()) / 2f64.ln();
            assert_eq!(b_of_n(n, &psi).unwrap(), v.floor() as i64, "n={n}");
        }
    }

    #[test]
    fn threshold_relations() {
        let th = thresholds(1_000_000).unwrap();
        assert_eq!(th.r, th.d);
        assert_eq!(th.r_floor, 13_815_510);
        for n in [16u64, 100, 10_000] {
            let t = thresholds(n).unwrap();
            assert!(t.t < t.r);
        }
        // n = 8: e² < 8 and t_8 = 8·(log 8)^{3/4}
        let t8 = thresholds(8).unwrap();
        assert!((t8.t.to_f64().unwrap() - 8.0 * 8f64.ln().powf(0.75)).abs() < 1e-12);
        assert_eq!(eps_threshold(1_000_000, &Rational::new(1.into(), 10.into())).unwrap(), 1_381_551);
    }

    #[test]
    fn omega_contracts_hold() {
        for src in ["n", "mul(n, n)", "5", "add(n, 3)"] {
            let psi = PsiSpec::parse(src, PsiClass::Divergent).unwrap();
            for v in [OmegaVariant::Min, OmegaVariant::Max] {
                let rep = omega_contract(&psi, v, 1_000_000).unwrap();
                assert!(rep.segments > 30);
                assert_eq!((rep.structural_defects, rep.numeric_defects, rep.undefined), (0, 0, 0), "{src}");
            }
        }
    }
}
