//! Doubling map orbits, the digits `a_n = ⌊1/τ^{n−1}x⌋`, first-exit times and
//! the induced map that jumps past the leading run `0…01`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{BitPoint, Rational};

/// Default bit budget for resolving one digit.
pub const DEFAULT_MAX_BITS: usize = 4096;

const TWO_POW_64: u128 = 1u128 << 64;

/// One step of the doubling map on a bit stream.
#[inline]
pub fn shift(p: &mut BitPoint) {
    p.shift();
}

/// `2x mod 1` on exact rationals.
pub fn tau_rational(x: &Rational) -> Rational {
    let y = x * Rational::from_integer(2.into());
    if y >= Rational::one() {
        y - Rational::one()
    } else {
        y
    }
}

/// `⌊1/x⌋` on exact rationals, `0 < x < 1`.
pub fn chi_exact(x: &Rational) -> Result<BigUint> {
    if x <= &Rational::zero() {
        return Err(Error::Domain("χ is undefined at 0".into()));
    }
    let inv = x.recip();
    Ok(inv.floor().to_integer().to_biguint().expect("positive"))
}

/// `⌊1/x⌋` for the current point, read without consuming bits.
///
/// Bits are read until the enclosing dyadic interval sits inside one cell
/// `(1/(m+1), 1/m]`.
pub fn chi_of_point(p: &mut BitPoint, max_bits: usize) -> Result<BigUint> {
    match chi_window(p.window64(0)) {
        Some(m) => Ok(BigUint::from(m)),
        None => chi_slow(p, 0, max_bits).map(|r| r.0),
    }
}

/// Machine-word variant of [`chi_of_point`]; digits beyond `u64` are an error.
#[inline]
pub fn chi_u64(p: &mut BitPoint, max_bits: usize) -> Result<u64> {
    chi_at(p, 0, max_bits)
}

/// χ of the point `offset` τ-steps ahead, i.e. `a_{offset+1}`, without consuming.
#[inline]
pub fn chi_at(p: &mut BitPoint, offset: u64, max_bits: usize) -> Result<u64> {
    match chi_window(p.window64(offset)) {
        Some(m) => Ok(m),
        None => chi_slow(p, offset, max_bits)?.0.to_u64().ok_or(Error::DigitOverflow),
    }
}

/// [`chi_at`] together with the number of bits it examined.
///
/// The bit count is a stopping time of the bit stream: whether it stops after
/// `k` bits depends only on those `k` bits. Digits read from consecutive
/// non-overlapping stretches are therefore i.i.d. with the law of `a₁`.
#[inline]
pub fn chi_with_depth(p: &mut BitPoint, offset: u64, max_bits: usize) -> Result<(u64, u64)> {
    match chi_window(p.window64(offset)) {
        Some(m) => Ok((m, 64)),
        None => {
            let (m, k) = chi_slow(p, offset, max_bits)?;
            Ok((m.to_u64().ok_or(Error::DigitOverflow)?, k as u64))
        }
    }
}

/// Resolves χ from the 64-bit prefix `w`, if it pins a single cell.
#[inline(always)]
fn chi_window(w: u64) -> Option<u64> {
    // m = ⌊2^64/w⌋; valid when (w+1)/2^64 ≤ 1/m. Digits are random, so the code
    // avoids data-dependent branches on the common path.
    let m = if w >= 1 << 20 {
        // the float quotient is within one of the true floor
        let est = (TWO_POW_64 as f64 / w as f64) as u64;
        let prod = est as u128 * w as u128;
        if prod > TWO_POW_64 {
            est - 1
        } else if prod + w as u128 <= TWO_POW_64 {
            est + 1
        } else {
            est
        }
    } else if w >= 2 {
        w.wrapping_neg() / w + 1
    } else {
        return None;
    };
    if (m as u128) * (w as u128 + 1) <= TWO_POW_64 {
        Some(m)
    } else {
        None
    }
}

#[cold]
fn chi_slow(p: &mut BitPoint, offset: u64, max_bits: usize) -> Result<(BigUint, usize)> {
    let mut k = 128usize.min(max_bits);
    loop {
        let v = p.prefix_value(offset, k);
        if !v.is_zero() {
            let two_k = BigUint::one() << k;
            let m = two_k.div_floor(&v);
            if &m * (&v + 1u32) <= two_k {
                return Ok((m, k));
            }
        }
        if k >= max_bits {
            return Err(if v.is_zero() {
                Error::ZeroPrefix { max_bits }
            } else {
                Error::Unresolved { max_bits }
            });
        }
        k = (2 * k).min(max_bits);
    }
}

/// First-exit time into `[1/2, 1)`: one plus the number of leading zero bits.
#[inline]
pub fn phi_of_point(p: &mut BitPoint, max_bits: usize) -> Result<u64> {
    phi_at(p, 0, max_bits)
}

/// φ of the point `offset` τ-steps ahead.
#[inline]
pub fn phi_at(p: &mut BitPoint, offset: u64, max_bits: usize) -> Result<u64> {
    let w = p.window64(offset);
    if w != 0 {
        return Ok(u64::from(w.leading_zeros()) + 1);
    }
    p.leading_zeros_from(offset, max_bits)
        .map(|z| z as u64 + 1)
        .ok_or(Error::ZeroPrefix { max_bits })
}

/// A point together with its τ and τ_B bookkeeping.
#[derive(Clone, Debug)]
pub struct OrbitState {
    pub point: BitPoint,
    /// τ-steps taken.
    pub step: u64,
    /// τ_B-steps taken.
    pub induced_step: u64,
    /// Sum of the φ values of all induced steps so far.
    pub phi_total: u64,
    pub max_bits: usize,
}

impl OrbitState {
    pub fn new(point: BitPoint) -> Self {
        Self::with_max_bits(point, DEFAULT_MAX_BITS)
    }

    pub fn with_max_bits(point: BitPoint, max_bits: usize) -> Self {
        OrbitState {
            point,
            step: 0,
            induced_step: 0,
            phi_total: 0,
            max_bits,
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(BitPoint::new(seed))
    }

    /// The digit of the current point, then one τ-step. Errors carry the
    /// one-based digit index.
    #[inline]
    pub fn next_digit(&mut self) -> Result<u64> {
        let a = chi_u64(&mut self.point, self.max_bits).map_err(|e| e.at_index(self.step + 1))?;
        self.point.shift();
        self.step += 1;
        Ok(a)
    }

    /// Applies τ_B and returns the φ it consumed.
    #[inline]
    pub fn induced_step(&mut self) -> Result<u64> {
        let phi = phi_of_point(&mut self.point, self.max_bits)?;
        self.point.shift_by(phi);
        self.step += phi;
        self.induced_step += 1;
        self.phi_total += phi;
        Ok(phi)
    }
}

/// One entry of a digit orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitRecord {
    /// One-based position n of `a_n`.
    pub index: u64,
    pub a: u64,
    /// True at the positions `1, φ₁+1, φ₂+1, …` where induced excursions start.
    pub is_induced_start: bool,
}

/// `a₁..a_n` along the orbit of the point drawn from `seed`.
pub fn digit_stream(seed: u64, n: u64, max_bits: usize) -> Result<Vec<DigitRecord>> {
    digit_stream_of(BitPoint::new(seed), n, max_bits)
}

/// As [`digit_stream`] for an arbitrary starting point.
pub fn digit_stream_of(point: BitPoint, n: u64, max_bits: usize) -> Result<Vec<DigitRecord>> {
    let mut orbit = OrbitState::with_max_bits(point, max_bits);
    let mut out = Vec::with_capacity(n as usize);
    let mut next_start = 1u64;
    for index in 1..=n {
        let is_start = index == next_start;
        if is_start {
            let phi = phi_of_point(&mut orbit.point, max_bits).map_err(|e| e.at_index(index))?;
            next_start += phi;
        }
        let a = orbit.next_digit()?;
        out.push(DigitRecord {
            index,
            a,
            is_induced_start: is_start,
        });
    }
    Ok(out)
}

/// Counts pairs `(i, j)` with `a_i = r ≥ 2`, `1 ≤ j ≤ ⌊log₂ r⌋` and `a_{i+j} ≠ ⌊r/2^j⌋`.
/// Pairs running past the end of `records` are not checked.
pub fn verify_digit_halving(records: &[DigitRecord]) -> u64 {
    let digits: Vec<u64> = records.iter().map(|r| r.a).collect();
    digit_halving_defect(&digits)
}

pub fn digit_halving_defect(digits: &[u64]) -> u64 {
    let mut defect = 0;
    for (i, &r) in digits.iter().enumerate() {
        if r < 2 {
            continue;
        }
        let depth = 63 - r.leading_zeros() as usize;
        for j in 1..=depth {
            match digits.get(i + j) {
                Some(&a) if a != r >> j => defect += 1,
                _ => {}
            }
        }
    }
    defect
}

/// Runs the induced orbit and, separately, the plain orbit of the same seed and
/// counts `k ≤ n` with `β_k ≠ a_{φ_{k−1}+1}`.
pub fn verify_beta_indexing(seed: u64, n: u64, max_bits: usize) -> Result<u64> {
    let mut induced = OrbitState::with_max_bits(BitPoint::new(seed), max_bits);
    let mut positions = Vec::with_capacity(n as usize);
    let mut betas = Vec::with_capacity(n as usize);
    for _ in 0..n {
        positions.push(induced.phi_total + 1);
        betas.push(chi_u64(&mut induced.point, max_bits)?);
        induced.induced_step()?;
    }
    let last = *positions.last().unwrap_or(&0);
    let mut plain = OrbitState::with_max_bits(BitPoint::new(seed), max_bits);
    let mut digits = Vec::with_capacity(last as usize);
    for _ in 0..last {
        digits.push(plain.next_digit()?);
    }
    Ok(positions
        .iter()
        .zip(&betas)
        .filter(|(&pos, &beta)| digits[pos as usize - 1] != beta)
        .count() as u64)
}

/// The induced image `τ_B x` of an exact rational `x ∈ (0,1)`, computed on its
/// bit expansion, and the affine prediction `−1 + 2^{n+1}x` for `x ∈ J_n`.
pub fn induced_affine_pair(x: &Rational, max_bits: usize) -> Result<(Rational, Rational)> {
    let mut orbit = OrbitState::with_max_bits(BitPoint::from_rational(x)?, max_bits);
    let phi = orbit.induced_step()?;
    let got = orbit.point.exact_value().expect("rational source");
    let pow = Rational::from_integer(num_bigint::BigInt::one() << phi as usize);
    let predicted = pow * x - Rational::one();
    Ok((got, predicted))
}

/// Level `n` with `x ∈ J_n = [2^{−(n+1)}, 2^{−n})`, for exact rationals in (0,1).
pub fn level_exact(x: &Rational) -> Result<u64> {
    if x <= &Rational::zero() || x >= &Rational::one() {
        return Err(Error::Domain(format!("{x} outside (0,1)")));
    }
    let mut n = 0u64;
    let mut y = x * Rational::from_integer(2.into());
    while y < Rational::one() {
        y *= Rational::from_integer(2.into());
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    fn pt(x: Rational) -> BitPoint {
        BitPoint::from_rational(&x).unwrap()
    }

    #[test]
    fn shift_examples() {
        assert_eq!(tau_rational(&rat(3, 8)), rat(3, 4));
        assert_eq!(tau_rational(&rat(7, 10)), rat(2, 5));
        let mut p = BitPoint::with_prefix(1, &[true, false, true]);
        shift(&mut p);
        assert_eq!(p.draw_bits(2), vec![false, true]);
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_of_point(&mut pt(rat(5, 8)), 4096).unwrap(), BigUint::from(1u32));
        assert_eq!(chi_of_point(&mut pt(rat(3, 8)), 4096).unwrap(), BigUint::from(2u32));
        assert_eq!(chi_of_point(&mut pt(rat(5, 16)), 4096).unwrap(), BigUint::from(3u32));
        // peeking does not consume
        let mut p = pt(rat(3, 8));
        chi_of_point(&mut p, 4096).unwrap();
        assert_eq!(p.consumed(), 0);
    }

    #[test]
    fn chi_errors() {
        assert!(matches!(chi_of_point(&mut pt(rat(0, 1)), 512), Err(Error::ZeroPrefix { .. })));
        // 1/3 = 0.010101… lies on a cell boundary (χ(1/3) = 3, χ just above = 2)
        assert!(matches!(chi_of_point(&mut pt(rat(1, 3)), 512), Err(Error::Unresolved { .. })));
        // long zero prefix gives a big digit through the slow path
        let mut prefix = vec![false; 100];
        prefix.push(true);
        let mut p = BitPoint::with_prefix(4, &prefix);
        let m = chi_of_point(&mut p, 4096).unwrap();
        assert!(m >= BigUint::one() << 99u32 && m <= BigUint::one() << 101u32);
        assert!(matches!(chi_u64(&mut p, 4096), Err(Error::DigitOverflow)));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_of_point(&mut pt(rat(3, 4)), 64).unwrap(), 1);
        assert_eq!(phi_of_point(&mut pt(rat(3, 16)), 64).unwrap(), 3);
        assert!(phi_of_point(&mut pt(rat(0, 1)), 256).is_err());
    }

    #[test]
    fn induced_examples() {
        let (g, p) = induced_affine_pair(&rat(3, 4), 64).unwrap();
        assert_eq!((g.clone(), p), (rat(1, 2), rat(1, 2)));
        let (g, p) = induced_affine_pair(&rat(3, 16), 64).unwrap();
        assert_eq!(g, rat(1, 2));
        assert_eq!(p, rat(1, 2));
        assert_eq!(level_exact(&rat(3, 16)).unwrap(), 2);
    }

    #[test]
    fn digits_of_three_eighths() {
        let recs = digit_stream_of(pt(rat(3, 8)), 2, 64).unwrap();
        assert_eq!(recs[0].a, 2);
        assert_eq!(recs[1].a, 1);
        assert!(recs[0].is_induced_start);
        assert!(!recs[1].is_induced_start);
    }

    #[test]
    fn halving_checker_examples() {
        assert_eq!(digit_halving_defect(&[11, 5, 2, 1]), 0);
        assert_eq!(digit_halving_defect(&[8, 4, 2, 1]), 0);
        assert_eq!(digit_halving_defect(&[1, 7]), 0);
        assert_eq!(digit_halving_defect(&[11, 5, 3, 1]), 2);
    }

    #[test]
    fn digit_after_eleven_is_five() {
        let mut seen = 0;
        for seed in 0..400u64 {
            let recs = digit_stream(seed, 2000, DEFAULT_MAX_BITS).unwrap();
            for w in recs.windows(2) {
                if w[0].a == 11 {
                    assert_eq!(w[1].a, 5);
                    seen += 1;
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn induced_starts_follow_first_exit_times() {
        let recs = digit_stream(17, 500, DEFAULT_MAX_BITS).unwrap();
        let mut orbit = OrbitState::from_seed(17);
        let mut starts = vec![];
        while orbit.phi_total < 500 {
            starts.push(orbit.phi_total + 1);
            orbit.induced_step().unwrap();
        }
        let marked: Vec<u64> = recs.iter().filter(|r| r.is_induced_start).map(|r| r.index).collect();
        assert_eq!(marked, starts);
        assert_eq!(verify_beta_indexing(17, 300, DEFAULT_MAX_BITS).unwrap(), 0);
    }

    #[test]
    fn fast_path_agrees_with_rational_oracle() {
        // finite dyadic prefixes with a tail of ones stay away from cell boundaries
        for v in 1u64..3000 {
            let x = rat(v as i64, 4096) + rat(1, 1 << 40);
            let mut p = pt(x.clone());
            assert_eq!(chi_of_point(&mut p, 4096).unwrap(), chi_exact(&x).unwrap(), "x={x}");
        }
    }

    proptest! {
        #[test]
        fn phi_is_log2_chi_plus_one(seed in any::<u64>(), skip in 0u64..200) {
            let mut p = BitPoint::new(seed);
            p.shift_by(skip);
            let chi = chi_u64(&mut p, DEFAULT_MAX_BITS).unwrap();
            let phi = phi_of_point(&mut p, DEFAULT_MAX_BITS).unwrap();
            prop_assert_eq!(phi, u64::from(63 - chi.leading_zeros()) + 1);
        }

        #[test]
        fn affine_form_on_rationals(p in 1i64..100_000, q in 2i64..100_000) {
            prop_assume!(p < q);
            let x = rat(p, q);
            let (got, predicted) = induced_affine_pair(&x, DEFAULT_MAX_BITS).unwrap();
            prop_assert_eq!(got, predicted);
        }

        #[test]
        fn induced_steps_consume_phi_total(seed in any::<u64>(), k in 1usize..200) {
            let mut o = OrbitState::from_seed(seed);
            let mut sum = 0;
            for _ in 0..k { sum += o.induced_step().unwrap(); }
            prop_assert_eq!(o.phi_total, sum);
            prop_assert_eq!(o.point.consumed(), sum);
        }
    }
}
