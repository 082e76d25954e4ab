//! The observable `χ(x) = ⌊1/x⌋`, its truncations, the excursion sum `η`, the
//! cell envelopes `v_m`, `w_m`, and their exact expectations.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::dynamics::{chi_at, phi_at};
use crate::error::{Error, Result};
use crate::exactnum::{int, pow2_inv, rat, sum_rationals, BitPoint, Rational, StepFunction};

/// `1/x` on (0,1).
pub fn chi_tilde_1(x: &Rational) -> Result<Rational> {
    if x <= &Rational::zero() || x >= &Rational::one() {
        return Err(Error::Domain(format!("χ̃₁ needs 0 < x < 1, got {x}")));
    }
    Ok(x.recip())
}

/// `a·1{a ≤ r}`.
pub fn truncate(a: u64, r: &Rational) -> u64 {
    if Rational::from_integer(BigInt::from(a)) <= *r {
        a
    } else {
        0
    }
}

/// `a·1{a ≤ r}` for an integer level; `a ≤ r ⇔ a ≤ ⌊r⌋` for integer digits.
#[inline]
pub fn truncate_int(a: u64, r: u64) -> u64 {
    if a <= r {
        a
    } else {
        0
    }
}

/// `⌊log₂ a⌋` for `a ≥ 1`.
#[inline]
pub fn log2_floor(a: u64) -> u32 {
    63 - a.leading_zeros()
}

/// `η(x) = Σ_{k<φ(x)} χ(τ^k x)`: digits summed over one induced excursion.
pub fn eta(p: &mut BitPoint, max_bits: usize) -> Result<u64> {
    eta_trunc(p, u64::MAX, max_bits)
}

/// `η^r(x) = Σ_{k<φ(x)} χ^r(τ^k x)` with integer truncation level `r`.
pub fn eta_trunc(p: &mut BitPoint, r: u64, max_bits: usize) -> Result<u64> {
    let phi = phi_at(p, 0, max_bits)?;
    let mut sum = 0u64;
    for k in 0..phi {
        let a = chi_at(p, k, max_bits)?;
        sum = sum.checked_add(truncate_int(a, r)).ok_or(Error::DigitOverflow)?;
    }
    Ok(sum)
}

/// `2χ − ⌊log₂χ⌋ + 1`, the lower bound in the stated form.
pub fn eta_lower_stated(chi: u64) -> i128 {
    2 * chi as i128 - log2_floor(chi) as i128 + 1
}

/// `2χ − ⌊log₂χ⌋ − 1`, which is attained exactly when χ is a power of two.
pub fn eta_lower_sharp(chi: u64) -> i128 {
    2 * chi as i128 - log2_floor(chi) as i128 - 1
}

pub fn eta_upper(chi: u64) -> i128 {
    2 * chi as i128
}

/// Cell `J_{j,i}^m = [2^{−j} − (i+1)2^{−(j+m)}, 2^{−j} − i·2^{−(j+m)})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub j: u32,
    pub i: u64,
    pub m: u32,
}

impl CellIndex {
    pub fn new(j: u32, i: u64, m: u32) -> Result<Self> {
        if m == 0 || m > 40 || i >= 1u64 << (m - 1) {
            return Err(Error::Domain(format!("no cell ({j},{i}) at resolution {m}")));
        }
        Ok(CellIndex { j, i, m })
    }

    pub fn lower(&self) -> Rational {
        pow2_inv(self.j) - Rational::from_integer(BigInt::from(self.i + 1)) * pow2_inv(self.j + self.m)
    }

    pub fn upper(&self) -> Rational {
        pow2_inv(self.j) - Rational::from_integer(BigInt::from(self.i)) * pow2_inv(self.j + self.m)
    }

    pub fn measure(&self) -> Rational {
        pow2_inv(self.j + self.m)
    }

    /// All cells of resolution `m` on levels `0..=level_cap`.
    pub fn enumerate(m: u32, level_cap: u32) -> impl Iterator<Item = CellIndex> {
        (0..=level_cap).flat_map(move |j| (0..1u64 << (m - 1)).map(move |i| CellIndex { j, i, m }))
    }
}

/// The cell of resolution `m` containing the point.
pub fn cell_of(p: &mut BitPoint, m: u32, max_bits: usize) -> Result<CellIndex> {
    if m == 0 || m > 40 {
        return Err(Error::Domain(format!("resolution {m} out of range")));
    }
    let j = phi_at(p, 0, max_bits)? - 1;
    // the m−1 bits after the leading one
    let b = if m == 1 {
        0
    } else {
        p.window64(j + 1) >> (64 - (m - 1))
    };
    let j = u32::try_from(j).map_err(|_| Error::Domain("level overflow".into()))?;
    Ok(CellIndex {
        j,
        i: (1u64 << (m - 1)) - 1 - b,
        m,
    })
}

/// Envelope values `y_{j,i}`, `z_{j,i}` of one cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeValues {
    pub y: Rational,
    pub z: Rational,
}

/// `y_{l,i} = 2^{l+m+1}/(2^m−i−1)`, allowing level `l = −1`.
fn y_at(l: i64, i: u64, m: u32) -> Rational {
    let num = two_pow(l + m as i64 + 1);
    num / Rational::from_integer(BigInt::from((1u64 << m) - i - 1))
}

/// `z_{l,i} = 2^{l+m+1}/(2^m−i) − l − 1`, allowing level `l = −1`.
fn z_at(l: i64, i: u64, m: u32) -> Rational {
    let num = two_pow(l + m as i64 + 1);
    num / Rational::from_integer(BigInt::from((1u64 << m) - i)) - Rational::from_integer(BigInt::from(l + 1))
}

fn two_pow(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        pow2_inv((-e) as u32)
    }
}

pub fn envelope_values(c: &CellIndex) -> EnvelopeValues {
    EnvelopeValues {
        y: y_at(c.j as i64, c.i, c.m),
        z: z_at(c.j as i64, c.i, c.m),
    }
}

/// `v_m^r` on a cell: `y_{min(j, ⌊log₂r⌋), i}`.
pub fn vm_cell(c: &CellIndex, r: u64) -> Rational {
    assert!(r >= 1, "truncation level must be ≥ 1");
    let q = log2_floor(r) as i64;
    y_at((c.j as i64).min(q), c.i, c.m)
}

/// `w_m^r` on a cell: `z_{min(j, ⌊log₂r⌋−1), i}`.
pub fn wm_cell(c: &CellIndex, r: u64) -> Rational {
    assert!(r >= 1, "truncation level must be ≥ 1");
    let q = log2_floor(r) as i64;
    z_at((c.j as i64).min(q - 1), c.i, c.m)
}

pub fn vm_eval(p: &mut BitPoint, m: u32, r: u64, max_bits: usize) -> Result<Rational> {
    Ok(vm_cell(&cell_of(p, m, max_bits)?, r))
}

pub fn wm_eval(p: &mut BitPoint, m: u32, r: u64, max_bits: usize) -> Result<Rational> {
    Ok(wm_cell(&cell_of(p, m, max_bits)?, r))
}

/// `Σ_{k=1}^{⌊r⌋} 1/(k+1)`, the exact mean of `χ·1{χ ≤ r}`.
pub fn expect_chi_trunc(r: u64) -> Rational {
    sum_rationals((1..=r).map(|k| rat(1, k as i64 + 1)))
}

/// Floating-point value of [`expect_chi_trunc`] for large `r`:
/// `H_{r+1} − 1` with a direct sum below 10⁶ and the Euler–Maclaurin series above.
pub fn expect_chi_trunc_f64(r: u64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if r < 1_000_000 {
        // sum small terms first
        return (1..=r).rev().map(|k| 1.0 / (k as f64 + 1.0)).sum();
    }
    let n = r as f64 + 1.0;
    let n2 = n * n;
    n.ln() + EULER_GAMMA + 1.0 / (2.0 * n) - 1.0 / (12.0 * n2) + 1.0 / (120.0 * n2 * n2) - 1.0
}

/// `E((χ^r)²) = Σ_{i=1}^{⌊r⌋} i/(i+1)`.
pub fn expect_chi_trunc_sq(r: u64) -> Rational {
    sum_rationals((1..=r).map(|i| rat(i as i64, i as i64 + 1)))
}

pub fn expect_chi_trunc_sq_f64(r: u64) -> f64 {
    r as f64 - expect_chi_trunc_f64(r)
}

/// `Σ_{k=1}^{⌊r⌋} k·2^{−k}`.
pub fn expect_phi_trunc(r: u64) -> Rational {
    sum_rationals((1..=r).map(|k| Rational::from_integer(BigInt::from(k)) * pow2_inv(k as u32)))
}

/// Mean and second moment of φ under λ: `Σ k2^{−k} = 2`, `Σ k²2^{−k} = 6`.
pub fn phi_moments() -> (Rational, Rational) {
    (int(2), int(6))
}

/// `χ·1{χ ≤ r}` as a step function. Constancy cells `(1/(k+1), 1/k]` are stored
/// half-open as `[1/(k+1), 1/k)`, which differs only on the null set of endpoints.
pub fn chi_trunc_step(r: u64) -> StepFunction {
    let mut breaks = vec![Rational::zero()];
    let mut values = vec![Rational::zero()];
    for k in (1..=r).rev() {
        breaks.push(rat(1, k as i64 + 1));
        values.push(Rational::from_integer(BigInt::from(k)));
    }
    breaks.push(Rational::one());
    StepFunction::new(breaks, values).expect("valid breakpoints")
}

/// Mass of all resolution-`m` cells on levels `0..=level_cap`, and the exact
/// mass of the levels beyond.
pub fn partition_mass(m: u32, level_cap: u32) -> (Rational, Rational) {
    let finite = sum_rationals(CellIndex::enumerate(m, level_cap).map(|c| c.measure()));
    (finite, pow2_inv(level_cap + 1))
}

/// `E(v_m^r)`: levels `j ≤ ⌊log₂r⌋` cell by cell, deeper levels folded into the
/// clamped value with their geometric weight `2^{−(q+m)}`.
pub fn expect_vm(m: u32, r: u64) -> Rational {
    let q = log2_floor(r);
    let width = 1u64 << (m - 1);
    let mut terms = Vec::new();
    for j in 0..=q {
        for i in 0..width {
            let c = CellIndex { j, i, m };
            terms.push(c.measure() * vm_cell(&c, r));
        }
    }
    for i in 0..width {
        terms.push(pow2_inv(q + m) * y_at(q as i64, i, m));
    }
    sum_rationals(terms.into_iter())
}

/// `E(w_m^r)` from the definition: levels `j < ⌊log₂r⌋` cell by cell, levels
/// `j ≥ ⌊log₂r⌋` all carry `z_{q−1,i}` with total weight `2^{−(q+m−1)}`.
pub fn expect_wm(m: u32, r: u64) -> Rational {
    let q = log2_floor(r);
    let width = 1u64 << (m - 1);
    let mut terms = Vec::new();
    for j in 0..q {
        for i in 0..width {
            let c = CellIndex { j, i, m };
            terms.push(c.measure() * wm_cell(&c, r));
        }
    }
    let tail_weight = two_pow(-(q as i64 + m as i64 - 1));
    for i in 0..width {
        terms.push(&tail_weight * z_at(q as i64 - 1, i, m));
    }
    sum_rationals(terms.into_iter())
}

/// `∫η^r dλ` through the level sets `J_l = [2^{−(l+1)}, 2^{−l})`: on `J_l` the
/// excursion visits `2^k x ∈ J_{l−k}` for `k ≤ l`, so the integral splits into
/// `Σ_k 2^{−k} Σ_l ∫_{J_l} χ^r`, with the geometric factor summed in closed form.
pub fn expect_eta_trunc(r: u64) -> Rational {
    let chi = chi_trunc_step(r);
    // χ^r vanishes below 1/(r+1) < 2^{−⌊log₂(r+1)⌋}
    let levels = log2_floor(r + 1) + 1;
    let per_level = sum_rationals((0..=levels).map(|l| {
        let j = StepFunction::indicator(pow2_inv(l + 1), pow2_inv(l)).expect("dyadic level");
        chi.inner(&j)
    }));
    int(2) * per_level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{chi_u64, DEFAULT_MAX_BITS};
    use proptest::prelude::*;

    fn pt(x: Rational) -> BitPoint {
        BitPoint::from_rational(&x).unwrap()
    }

    #[test]
    fn chi_tilde_examples() {
        assert_eq!(chi_tilde_1(&rat(1, 2)).unwrap(), int(2));
        assert_eq!(chi_tilde_1(&rat(3, 8)).unwrap() - int(2), rat(2, 3));
        assert_eq!(chi_tilde_1(&rat(2, 3)).unwrap() - int(1), rat(1, 2));
        assert!(chi_tilde_1(&int(0)).is_err());
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate(5, &int(5)), 5);
        assert_eq!(truncate(6, &int(5)), 0);
        assert_eq!(truncate(3, &rat(5, 2)), 0);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(&mut pt(rat(3, 4)), 64).unwrap(), 1);
        assert_eq!(eta(&mut pt(rat(3, 8)), 64).unwrap(), 3);
        assert_eq!(eta_trunc(&mut pt(rat(3, 8)), 1, 64).unwrap(), 1);
        assert_eq!(eta_trunc(&mut pt(rat(3, 8)), 0, 64).unwrap(), 0);
        // the stated lower bound already fails at χ = 1
        assert!(eta_lower_stated(1) > 1);
        assert_eq!(eta_lower_sharp(1), 1);
    }

    #[test]
    fn cells() {
        assert_eq!(cell_of(&mut pt(rat(3, 4)), 2, 64).unwrap(), CellIndex { j: 0, i: 0, m: 2 });
        assert_eq!(cell_of(&mut pt(rat(5, 8)), 2, 64).unwrap(), CellIndex { j: 0, i: 1, m: 2 });
        let c = CellIndex::new(0, 1, 2).unwrap();
        assert_eq!((c.lower(), c.upper()), (rat(1, 2), rat(3, 4)));
        let e = envelope_values(&CellIndex::new(2, 0, 1).unwrap());
        assert_eq!((e.y, e.z), (int(16), int(5)));
        assert!(CellIndex::new(0, 2, 2).is_err());
    }

    #[test]
    fn clamped_envelope_bound() {
        for p in 0..8u32 {
            let r = 1u64 << p;
            for m in 1..5 {
                for c in CellIndex::enumerate(m, 12) {
                    assert!(vm_cell(&c, r) <= Rational::from_integer(BigInt::one() << (p + 2)));
                }
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(expect_chi_trunc(1), rat(1, 2));
        assert_eq!(expect_chi_trunc(3), rat(13, 12));
        assert_eq!(expect_phi_trunc(1), rat(1, 2));
        assert_eq!(expect_phi_trunc(3), rat(11, 8));
        assert_eq!(expect_chi_trunc_sq(3), rat(23, 12));
        assert_eq!(chi_trunc_step(3).integral(), rat(13, 12));
        let rel = |r: u64| expect_chi_trunc_f64(r) / (r as f64).ln();
        assert!((rel(1000) - 1.0).abs() < 0.1);
        assert!((rel(1_000_000) - 1.0).abs() < 0.1);
        // the two evaluation regimes agree at the switch
        let direct: f64 = (1..=1_000_000u64).rev().map(|k| 1.0 / (k as f64 + 1.0)).sum();
        assert!((direct - expect_chi_trunc_f64(1_000_000)).abs() < 1e-9);
    }

    #[test]
    fn phi_truncations_increase_to_two() {
        let mut prev = int(0);
        for r in 1..40 {
            let v = expect_phi_trunc(r);
            assert!(v > prev && v < int(2));
            prev = v;
        }
    }

    #[test]
    fn vm_for_single_offset() {
        for r in [1u64, 2, 3, 4, 7, 8, 1000, 1 << 20] {
            assert_eq!(expect_vm(1, r), int(2 * (log2_floor(r) as i64 + 2)));
        }
    }

    #[test]
    fn vm_matches_harmonic_form() {
        for m in 1..6u32 {
            for r in [1u64, 5, 64, 1000] {
                let s = sum_rationals((0..1u64 << (m - 1)).map(|i| rat(1, ((1u64 << m) - i - 1) as i64)));
                let expect = int(2 * (log2_floor(r) as i64 + 2)) * s;
                assert_eq!(expect_vm(m, r), expect);
            }
        }
    }

    #[test]
    fn eta_integral_matches_twice_truncated_mean() {
        for r in [1u64, 2, 3, 10, 64, 100] {
            assert_eq!(expect_eta_trunc(r), int(2) * expect_chi_trunc(r));
        }
    }

    #[test]
    fn partition_sums_to_one() {
        for m in 1..5 {
            let (finite, tail) = partition_mass(m, 20);
            assert_eq!(finite + tail, int(1));
        }
    }

    proptest! {
        #[test]
        fn eta_upper_and_sharp_lower(seed in any::<u64>()) {
            let mut p = BitPoint::new(seed);
            let chi = chi_u64(&mut p, DEFAULT_MAX_BITS).unwrap();
            let e = eta(&mut p, DEFAULT_MAX_BITS).unwrap() as i128;
            prop_assert!(eta_lower_sharp(chi) <= e && e <= eta_upper(chi));
            // in fact η = 2χ − popcount(χ)
            prop_assert_eq!(e, 2 * chi as i128 - chi.count_ones() as i128);
        }

        #[test]
        fn vm_monotone_in_truncation(j in 0u32..30, i in 0u64..4, r in 1u64..5000, dr in 0u64..5000) {
            let c = CellIndex::new(j, i, 3).unwrap();
            prop_assert!(vm_cell(&c, r) <= vm_cell(&c, r + dr));
        }

        #[test]
        fn upper_envelope_dominates(seed in any::<u64>(), m in 1u32..4, r in 1u64..2000) {
            let mut p = BitPoint::new(seed);
            let e = eta_trunc(&mut p, r, DEFAULT_MAX_BITS).unwrap();
            let v = vm_eval(&mut p, m, r, DEFAULT_MAX_BITS).unwrap();
            prop_assert!(Rational::from_integer(BigInt::from(e)) <= v);
        }
    }
}
