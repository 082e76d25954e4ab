//! Certified real intervals with dyadic endpoints.
//!
//! A [`Real`] is an interval `[lo, hi]` whose endpoints are dyadic rationals
//! `m·2^e`. Every operation rounds the lower endpoint down and the upper endpoint
//! up to `prec` significant bits, so the true value is always enclosed. `ln` and
//! `exp` evaluate their series on single dyadic points and add a rigorous tail
//! bound, then use monotonicity to cover the whole interval.
//!
//! [`Real::certified_floor`] is the main consumer: it returns `⌊x⌋` once both
//! endpoints share a floor. Callers retry at higher precision when it is `None`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Working precisions tried, in order, by [`certify_floor`].
pub const PRECISION_LADDER: [u32; 4] = [128, 256, 1024, 4096];

/// Exact dyadic `m·2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(n: BigInt) -> Self {
        Dyadic { m: n, e: 0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.m.is_zero() {
            self.e = 0;
            return self;
        }
        let tz = self.m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.m >>= tz;
            self.e += tz as i64;
        }
        self
    }

    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m << self.e as usize)
        } else {
            BigRational::new(self.m.clone(), BigInt::one() << (-self.e) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.m.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.m >> shift as usize).to_f64().unwrap_or(0.0);
        top * 2f64.powi((self.e + shift) as i32)
    }

    /// Rounds to at most `prec` significant bits, toward −∞ or +∞.
    fn round(self, prec: u32, up: bool) -> Self {
        let bits = self.m.bits();
        if bits <= prec as u64 {
            return self;
        }
        let drop = bits - prec as u64;
        let div = BigInt::one() << drop as usize;
        let m = if up {
            self.m.div_ceil(&div)
        } else {
            self.m.div_floor(&div)
        };
        Dyadic {
            m,
            e: self.e + drop as i64,
        }
        .normalized()
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as usize;
        let b = &o.m << (o.e - e) as usize;
        Dyadic { m: a + b, e }.normalized()
    }

    fn neg(&self) -> Dyadic {
        Dyadic {
            m: -&self.m,
            e: self.e,
        }
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
        .normalized()
    }

    /// `self/o` rounded to `prec` bits in the given direction.
    fn div(&self, o: &Dyadic, prec: u32, up: bool) -> Dyadic {
        assert!(!o.m.is_zero(), "division by zero dyadic");
        // scale the numerator so the quotient carries about prec + 2 bits
        let s = (prec as i64 + 2 + o.m.bits() as i64 - self.m.bits() as i64).max(0);
        let num = &self.m << s as usize;
        let q = if up {
            num.div_ceil(&o.m)
        } else {
            num.div_floor(&o.m)
        };
        Dyadic {
            m: q,
            e: self.e - o.e - s,
        }
        .normalized()
        .round(prec, up)
    }

    fn cmp_value(&self, o: &Dyadic) -> Ordering {
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as usize;
        let b = &o.m << (o.e - e) as usize;
        a.cmp(&b)
    }

    fn floor(&self) -> BigInt {
        if self.e >= 0 {
            &self.m << self.e as usize
        } else {
            self.m.div_floor(&(BigInt::one() << (-self.e) as usize))
        }
    }

    fn is_negative(&self) -> bool {
        self.m.sign() == Sign::Minus
    }

    fn is_positive(&self) -> bool {
        self.m.sign() == Sign::Plus
    }

    /// Exponent of the leading bit: `2^{msb} ≤ |self| < 2^{msb+1}`.
    fn msb(&self) -> i64 {
        self.m.bits() as i64 - 1 + self.e
    }

    fn pow2(k: i64) -> Dyadic {
        Dyadic { m: BigInt::one(), e: k }
    }

    fn from_rational(q: &BigRational, prec: u32, up: bool) -> Dyadic {
        Dyadic::from_int(q.numer().clone()).div(&Dyadic::from_int(q.denom().clone()), prec, up)
    }
}

/// An enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Real {
    pub fn from_int(n: i64, prec: u32) -> Real {
        Self::from_bigint(BigInt::from(n), prec)
    }

    pub fn from_bigint(n: BigInt, prec: u32) -> Real {
        let d = Dyadic::from_int(n);
        Real {
            lo: d.clone().round(prec, false),
            hi: d.round(prec, true),
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Real {
        Real {
            lo: Dyadic::from_rational(q, prec, false),
            hi: Dyadic::from_rational(q, prec, true),
            prec,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lower(&self) -> BigRational {
        self.lo.to_rational()
    }

    pub fn upper(&self) -> BigRational {
        self.hi.to_rational()
    }

    /// Midpoint as a float, for reporting only.
    pub fn to_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    pub fn width(&self) -> BigRational {
        self.upper() - self.lower()
    }

    fn make(lo: Dyadic, hi: Dyadic, prec: u32) -> Real {
        Real {
            lo: lo.round(prec, false),
            hi: hi.round(prec, true),
            prec,
        }
    }

    pub fn add(&self, o: &Real) -> Real {
        Self::make(self.lo.add(&o.lo), self.hi.add(&o.hi), self.prec.min(o.prec))
    }

    pub fn neg(&self) -> Real {
        Real {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Real) -> Real {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Real) -> Real {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min_by(|a, b| a.cmp_value(b)).unwrap().clone();
        let hi = c.iter().max_by(|a, b| a.cmp_value(b)).unwrap().clone();
        Self::make(lo, hi, self.prec.min(o.prec))
    }

    pub fn div(&self, o: &Real) -> Result<Real> {
        if !o.is_positive() && !o.is_negative() {
            return Err(Error::Domain("division by an interval containing 0".into()));
        }
        let prec = self.prec.min(o.prec);
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let l = a.div(b, prec, false);
                let h = a.div(b, prec, true);
                if lo.as_ref().is_none_or(|x| l.cmp_value(x) == Ordering::Less) {
                    lo = Some(l);
                }
                if hi.as_ref().is_none_or(|x| h.cmp_value(x) == Ordering::Greater) {
                    hi = Some(h);
                }
            }
        }
        Ok(Real {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
            prec,
        })
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// `xⁿ` for integer `n ≥ 0`.
    pub fn powi(&self, n: u32) -> Real {
        if n == 0 {
            return Real::from_int(1, self.prec);
        }
        // even powers of a sign-straddling interval touch 0
        if n.is_multiple_of(2) && !self.is_positive() && !self.is_negative() {
            let a = self.abs_hi();
            let mut hi = a.clone();
            for _ in 1..n {
                hi = hi.mul(&a);
            }
            return Real::make(Dyadic::zero(), hi.round(self.prec, true), self.prec);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self);
        }
        acc
    }

    fn abs_hi(&self) -> Dyadic {
        let a = self.lo.neg();
        if a.cmp_value(&self.hi) == Ordering::Greater {
            a
        } else {
            self.hi.clone()
        }
    }

    pub fn ln(&self) -> Result<Real> {
        if !self.is_positive() {
            return Err(Error::Domain("logarithm of a non-positive value".into()));
        }
        let lo = ln_point(&self.lo, self.prec).lo;
        let hi = ln_point(&self.hi, self.prec).hi;
        Ok(Real { lo, hi, prec: self.prec })
    }

    pub fn exp(&self) -> Real {
        let lo = exp_point(&self.lo, self.prec).lo;
        let hi = exp_point(&self.hi, self.prec).hi;
        Real { lo, hi, prec: self.prec }
    }

    /// `x^y` for `x > 0`, as `exp(y·ln x)`.
    pub fn pow(&self, y: &Real) -> Result<Real> {
        Ok(y.mul(&self.ln()?).exp())
    }

    /// Enclosure of `min(x, y)`.
    pub fn min(&self, o: &Real) -> Real {
        let pick = |a: &Dyadic, b: &Dyadic| if a.cmp_value(b) == Ordering::Greater { b.clone() } else { a.clone() };
        Real {
            lo: pick(&self.lo, &o.lo),
            hi: pick(&self.hi, &o.hi),
            prec: self.prec.min(o.prec),
        }
    }

    /// Enclosure of `max(x, y)`.
    pub fn max(&self, o: &Real) -> Real {
        self.neg().min(&o.neg()).neg()
    }

    /// `⌊x⌋` if the enclosure determines it.
    pub fn certified_floor(&self) -> Option<BigInt> {
        let a = self.lo.floor();
        (a == self.hi.floor()).then_some(a)
    }

    /// Compares with an exact rational, if the enclosure decides it.
    pub fn cmp_rational(&self, q: &BigRational) -> Option<Ordering> {
        if &self.upper() < q {
            Some(Ordering::Less)
        } else if &self.lower() > q {
            Some(Ordering::Greater)
        } else if self.lower() == self.upper() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// True when `[lo, hi]` contains `q`.
    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lower() <= q && q <= &self.upper()
    }
}

thread_local! {
    static LN2_CACHE: RefCell<HashMap<u32, Real>> = RefCell::new(HashMap::new());
}

/// Enclosure of `ln 2` at working precision `prec`.
pub fn ln2(prec: u32) -> Real {
    LN2_CACHE.with(|c| {
        if let Some(r) = c.borrow().get(&prec) {
            return r.clone();
        }
        let third = Real::from_int(1, prec + 32).div(&Real::from_int(3, prec + 32)).unwrap();
        let v = atanh_series(&third, prec + 32).add(&atanh_series(&third, prec + 32));
        let v = Real::make(v.lo, v.hi, prec);
        c.borrow_mut().insert(prec, v.clone());
        v
    })
}

/// `atanh(y)` for `0 ≤ y ≤ 1/2` by its Taylor series with tail bound.
fn atanh_series(y: &Real, prec: u32) -> Real {
    let y2 = y.mul(y);
    let mut term = y.clone();
    let mut sum = y.clone();
    let eps = Dyadic::pow2(-(prec as i64) - 8);
    let mut k = 1u64;
    loop {
        term = term.mul(&y2);
        let t = term.div(&Real::from_int(2 * k as i64 + 1, prec)).unwrap();
        sum = sum.add(&t);
        k += 1;
        // remaining terms are bounded by |term|·y²/(1−y²) ≤ |term|·(4/3)·y² ≤ |term|/3
        if term.abs_hi().cmp_value(&eps) == Ordering::Less {
            let tail = term.abs_hi();
            return Real::make(sum.lo, sum.hi.add(&tail), prec);
        }
    }
}

/// `ln d` for a positive dyadic point.
fn ln_point(d: &Dyadic, prec: u32) -> Real {
    let w = prec + 32;
    // d = f · 2^s with f ∈ [1, 2)
    let s = d.msb();
    let f = Dyadic {
        m: d.m.clone(),
        e: d.e - s,
    };
    let fr = Real {
        lo: f.clone(),
        hi: f,
        prec: w,
    };
    let one = Real::from_int(1, w);
    // y = (f−1)/(f+1) ∈ [0, 1/3)
    let y = fr.sub(&one).div(&fr.add(&one)).unwrap();
    let lnf = atanh_series(&y, w).mul(&Real::from_int(2, w));
    let r = ln2(w).mul(&Real::from_int(s, w)).add(&lnf);
    Real::make(r.lo, r.hi, prec)
}

/// `exp d` for a dyadic point.
fn exp_point(d: &Dyadic, prec: u32) -> Real {
    // reduce: d = k·ln2 + t with |t| ≲ 0.35, extra guard bits for the range of k
    let k_est = (d.to_f64() / std::f64::consts::LN_2).round();
    let kbits = (k_est.abs() + 2.0).log2().ceil() as u32;
    let w = prec + 32 + kbits;
    let x = Real {
        lo: d.clone(),
        hi: d.clone(),
        prec: w,
    };
    let k = k_est as i64;
    let t = x.sub(&ln2(w).mul(&Real::from_int(k, w)));
    // Taylor series for |t| < 1
    let mut term = Real::from_int(1, w);
    let mut sum = term.clone();
    let eps = Dyadic::pow2(-(w as i64));
    let mut n = 1i64;
    loop {
        term = term.mul(&t).div(&Real::from_int(n, w)).unwrap();
        sum = sum.add(&term);
        n += 1;
        if term.abs_hi().cmp_value(&eps) == Ordering::Less {
            // |tail| ≤ |term|·|t|/(n) / (1 − |t|/n) ≤ |term|
            let tail = term.abs_hi();
            let sum = Real::make(sum.lo.add(&tail.neg()), sum.hi.add(&tail), w);
            let scale = Dyadic::pow2(k);
            return Real::make(sum.lo.mul(&scale), sum.hi.mul(&scale), prec);
        }
    }
}

/// Evaluates `f` at increasing precision until its floor is certified.
///
/// If the enclosure still straddles an integer `N` at the top precision, the value
/// is treated as equal to `N` (it is within `2^-4000` of it) and `N` is returned.
pub fn certify_floor(f: impl Fn(u32) -> Result<Real>) -> Result<BigInt> {
    let mut last = None;
    for &p in PRECISION_LADDER.iter() {
        let r = f(p)?;
        if let Some(v) = r.certified_floor() {
            return Ok(v);
        }
        last = Some(r);
    }
    let r = last.expect("ladder is non-empty");
    Ok(r.hi.floor())
}

/// `⌊f⌋` as `i64`.
pub fn certify_floor_i64(f: impl Fn(u32) -> Result<Real>) -> Result<i64> {
    certify_floor(f)?
        .to_i64()
        .ok_or_else(|| Error::Domain("floor does not fit in 64 bits".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(r: &Real, v: f64, tol: f64) -> bool {
        (r.to_f64() - v).abs() <= tol * v.abs().max(1.0)
    }

    #[test]
    fn ln2_encloses_known_digits() {
        let r = ln2(256);
        // ln 2 = 0.693147180559945309417232121458176568…
        let q = BigRational::new(
            BigInt::parse_bytes(b"693147180559945309417232121458176568", 10).unwrap(),
            BigInt::from(10u32).pow(36),
        );
        let w = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(35));
        assert!(r.lower() <= &q + &w && r.upper() >= &q - &w);
        assert!(r.width() < BigRational::new(BigInt::one(), BigInt::one() << 240));
    }

    #[test]
    fn ln_and_exp_roundtrip() {
        for v in [1i64, 2, 3, 10, 1000, 123456789] {
            let x = Real::from_int(v, 200);
            let l = x.ln().unwrap();
            assert!(close(&l, (v as f64).ln(), 1e-14));
            let back = l.exp();
            assert!(back.contains(&BigRational::from_integer(BigInt::from(v))));
        }
        let e = Real::from_int(1, 128).exp();
        assert!(close(&e, std::f64::consts::E, 1e-15));
        let small = Real::from_int(-20, 128).exp();
        assert!(close(&small, (-20f64).exp(), 1e-14));
    }

    #[test]
    fn floors_are_certified() {
        // ⌊ln 1000⌋ = 6, ⌊1e12·ln 2⌋ = 693147180559
        let f = certify_floor_i64(|p| Real::from_int(1000, p).ln()).unwrap();
        assert_eq!(f, 6);
        let g = certify_floor_i64(|p| Ok(Real::from_int(1_000_000_000_000, p).mul(&ln2(p)))).unwrap();
        assert_eq!(g, 693_147_180_559);
        // exact integers
        assert_eq!(certify_floor_i64(|p| Ok(Real::from_int(7, p))).unwrap(), 7);
        assert_eq!(certify_floor_i64(|p| Ok(Real::from_int(-7, p))).unwrap(), -7);
    }

    #[test]
    fn power_and_division() {
        let x = Real::from_int(10, 128);
        let y = Real::from_rational(&BigRational::new(3.into(), 4.into()), 128);
        let p = x.pow(&y).unwrap();
        assert!(close(&p, 10f64.powf(0.75), 1e-14));
        let q = Real::from_int(1, 128).div(&Real::from_int(3, 128)).unwrap();
        assert!(q.contains(&BigRational::new(1.into(), 3.into())));
        assert!(Real::from_int(0, 64).ln().is_err());
        let sq = Real::from_int(-3, 64).powi(2);
        assert_eq!(sq.lower(), BigRational::from_integer(9.into()));
    }
}
