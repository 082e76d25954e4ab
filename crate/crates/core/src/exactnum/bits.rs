//! Lazy bit streams representing points of [0,1).
//!
//! A [`BitPoint`] is the binary expansion `0.b₀b₁b₂…` of a point, generated on
//! demand and cached. Seeded points draw their bits from ChaCha8, which is
//! counter based: bit `i` of seed `s` can be recomputed in isolation with
//! [`BitPoint::reference_bit`], independent of the sequential cache.
//!
//! The doubling map acts as a left shift; shifting only advances `consumed`,
//! the cache keeps every bit so any index can be re-read.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Words generated per cache extension.
const CHUNK_WORDS: usize = 64;

#[derive(Clone, Debug)]
enum Source {
    /// Fair coin flips from ChaCha8 keyed by the seed; the first `prefix.len()`
    /// bits are overridden by a fixed pattern.
    Seeded { rng: ChaCha8Rng, prefix: Vec<bool> },
    /// Exact binary expansion of `rem / den` (state advances by 64 bits per word).
    Rational {
        rem: BigUint,
        den: BigUint,
        start_num: BigUint,
    },
}

/// A point of [0,1) as an append-only lazy bit sequence.
#[derive(Clone, Debug)]
pub struct BitPoint {
    seed: u64,
    consumed: u64,
    words: Vec<u64>,
    source: Source,
}

impl BitPoint {
    /// Uniformly random point driven by `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_prefix(seed, &[])
    }

    /// Random point whose expansion starts with `prefix`.
    pub fn with_prefix(seed: u64, prefix: &[bool]) -> Self {
        BitPoint {
            seed,
            consumed: 0,
            words: Vec::new(),
            source: Source::Seeded {
                rng: ChaCha8Rng::seed_from_u64(seed),
                prefix: prefix.to_vec(),
            },
        }
    }

    /// The exact point `x`, expanded in binary (terminating expansions end in zeros).
    pub fn from_rational(x: &BigRational) -> Result<Self> {
        if x.is_negative_or_ge_one() {
            return Err(Error::Domain(format!("{x} is not in [0,1)")));
        }
        let num = x.numer().to_biguint().expect("non-negative");
        let den = x.denom().to_biguint().expect("positive");
        Ok(BitPoint {
            seed: 0,
            consumed: 0,
            words: Vec::new(),
            source: Source::Rational {
                rem: num.clone(),
                den,
                start_num: num,
            },
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of bits already shifted away.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Number of bits generated so far (cached).
    pub fn generated(&self) -> u64 {
        self.words.len() as u64 * 64
    }

    /// Bit `index` of the seeded stream computed without the cache, by positioning
    /// the ChaCha8 counter directly.
    pub fn reference_bit(seed: u64, index: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(2 * u128::from(index / 64));
        let word = rng.next_u64();
        (word >> (63 - index % 64)) & 1 == 1
    }

    #[inline]
    fn ensure_words(&mut self, count: usize) {
        if self.words.len() < count {
            self.extend_words(count);
        }
    }

    #[cold]
    fn extend_words(&mut self, count: usize) {
        let target = count.div_ceil(CHUNK_WORDS) * CHUNK_WORDS;
        while self.words.len() < target {
            let idx = self.words.len();
            let w = match &mut self.source {
                Source::Seeded { rng, prefix } => {
                    let mut w = rng.next_u64();
                    let lo = idx * 64;
                    if lo < prefix.len() {
                        for (k, &b) in prefix[lo..].iter().take(64).enumerate() {
                            let mask = 1u64 << (63 - k);
                            if b {
                                w |= mask;
                            } else {
                                w &= !mask;
                            }
                        }
                    }
                    w
                }
                Source::Rational { rem, den, .. } => {
                    let shifted: BigUint = &*rem << 64u32;
                    let (q, r) = shifted.div_rem(den);
                    *rem = r;
                    q.iter_u64_digits().next().unwrap_or(0)
                }
            };
            self.words.push(w);
        }
    }

    /// Absolute bit `index` (counting from the original point, ignoring `consumed`).
    pub fn bit(&mut self, index: u64) -> bool {
        let w = (index / 64) as usize;
        self.ensure_words(w + 1);
        (self.words[w] >> (63 - index % 64)) & 1 == 1
    }

    /// Bit at `offset` past the consumed prefix.
    pub fn peek(&mut self, offset: u64) -> bool {
        self.bit(self.consumed + offset)
    }

    /// The next `k` unconsumed bits (does not consume them).
    pub fn draw_bits(&mut self, k: usize) -> Vec<bool> {
        (0..k as u64).map(|i| self.peek(i)).collect()
    }

    /// 64 bits starting `offset` past the consumed prefix, most significant first.
    #[inline]
    pub fn window64(&mut self, offset: u64) -> u64 {
        let pos = self.consumed + offset;
        let w = (pos >> 6) as usize;
        let o = (pos & 63) as u32;
        self.ensure_words(w + 2);
        let pair = (u128::from(self.words[w]) << 64) | u128::from(self.words[w + 1]);
        ((pair << o) >> 64) as u64
    }

    /// Integer formed by `k` bits starting `offset` past the consumed prefix.
    pub fn prefix_value(&mut self, offset: u64, k: usize) -> BigUint {
        let mut v = BigUint::zero();
        let mut taken = 0usize;
        while taken + 64 <= k {
            v = (v << 64u32) + BigUint::from(self.window64(offset + taken as u64));
            taken += 64;
        }
        let rest = k - taken;
        if rest > 0 {
            let w = self.window64(offset + taken as u64) >> (64 - rest);
            v = (v << rest) + BigUint::from(w);
        }
        v
    }

    /// The dyadic interval `[v/2^k, (v+1)/2^k)` fixed by the next `k` unconsumed bits.
    pub fn enclosing_interval(&mut self, k: u32) -> DyadicInterval {
        let v = self.prefix_value(0, k as usize);
        DyadicInterval::new(v, k).expect("prefix value below 2^k")
    }

    /// Count of leading zero bits after `offset`, or `None` if more than `max` are zero.
    pub fn leading_zeros_from(&mut self, offset: u64, max: usize) -> Option<usize> {
        let mut run = 0usize;
        loop {
            let w = self.window64(offset + run as u64);
            if w != 0 {
                let z = run + w.leading_zeros() as usize;
                return (z < max).then_some(z);
            }
            run += 64;
            if run >= max {
                return None;
            }
        }
    }

    /// One application of the doubling map: drop the leading bit.
    #[inline]
    pub fn shift(&mut self) {
        self.consumed += 1;
    }

    pub fn shift_by(&mut self, n: u64) {
        self.consumed += n;
    }

    /// Current value `2^consumed · x mod 1` for points built from a rational.
    pub fn exact_value(&self) -> Option<BigRational> {
        match &self.source {
            Source::Rational { den, start_num, .. } => {
                let p = BigUint::from(2u32).modpow(&BigUint::from(self.consumed), den) * start_num;
                let r = p % den;
                Some(BigRational::new(r.into(), den.clone().into()))
            }
            Source::Seeded { .. } => None,
        }
    }
}

trait UnitCheck {
    fn is_negative_or_ge_one(&self) -> bool;
}

impl UnitCheck for BigRational {
    fn is_negative_or_ge_one(&self) -> bool {
        self.numer() < &num_bigint::BigInt::zero() || self >= &BigRational::one()
    }
}

/// `[v/2^k, (v+1)/2^k)` with `0 ≤ v < 2^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    v: BigUint,
    k: u32,
}

impl DyadicInterval {
    pub fn new(v: BigUint, k: u32) -> Result<Self> {
        if v >= (BigUint::one() << k) {
            return Err(Error::Domain(format!("{v} ≥ 2^{k}")));
        }
        Ok(DyadicInterval { v, k })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.v
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(self.v.clone().into(), (BigUint::one() << self.k).into())
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new((&self.v + 1u32).into(), (BigUint::one() << self.k).into())
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(1.into(), (BigUint::one() << self.k).into())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower() <= x && x < &self.upper()
    }

    /// True when `other ⊆ self`.
    pub fn encloses(&self, other: &DyadicInterval) -> bool {
        other.k >= self.k && (&other.v >> (other.k - self.k)) == self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn repeated_draws_are_identical() {
        let mut p = BitPoint::new(7);
        let a = p.draw_bits(3);
        let b = p.draw_bits(3);
        assert_eq!(a, b);
    }

    #[test]
    fn cached_bits_match_reference_generator() {
        let mut p = BitPoint::new(12345);
        for i in [0u64, 1, 63, 64, 65, 127, 128, 1000, 4097] {
            assert_eq!(p.bit(i), BitPoint::reference_bit(12345, i), "bit {i}");
        }
    }

    #[test]
    fn million_bits_memory_is_linear() {
        let mut p = BitPoint::new(3);
        let bits = p.draw_bits(1_000_000);
        assert_eq!(bits.len(), 1_000_000);
        // cache holds the bits plus at most one chunk of look-ahead
        assert!(p.generated() <= 1_000_000 + 64 * (CHUNK_WORDS as u64 + 2));
    }

    #[test]
    fn enclosing_interval_examples() {
        let mut p = BitPoint::with_prefix(1, &[true, false, true]);
        let iv = p.enclosing_interval(3);
        assert_eq!(iv.lower(), rat(5, 8));
        assert_eq!(iv.upper(), rat(6, 8));

        let mut q = BitPoint::with_prefix(1, &[false, false]);
        let iv = q.enclosing_interval(2);
        assert_eq!(iv.lower(), rat(0, 1));
        assert_eq!(iv.upper(), rat(1, 4));
    }

    #[test]
    fn refinement_halves_and_nests() {
        let mut p = BitPoint::new(99);
        let mut prev = p.enclosing_interval(1);
        for k in 2..200 {
            let next = p.enclosing_interval(k);
            assert!(prev.encloses(&next));
            assert_eq!(next.width() * rat(2, 1), prev.width());
            prev = next;
        }
    }

    #[test]
    fn rational_expansion_and_exact_value() {
        let x = rat(7, 10);
        let mut p = BitPoint::from_rational(&x).unwrap();
        // 0.7 = 0.1011001100…
        assert_eq!(
            p.draw_bits(10),
            vec![true, false, true, true, false, false, true, true, false, false]
        );
        p.shift();
        assert_eq!(p.exact_value().unwrap(), rat(2, 5));
        assert!(BitPoint::from_rational(&rat(1, 1)).is_err());
    }

    #[test]
    fn window_crosses_word_boundary() {
        let mut p = BitPoint::new(5);
        let bits = p.draw_bits(200);
        for off in [0u64, 1, 37, 63, 64, 100] {
            let w = p.window64(off);
            for k in 0..64 {
                assert_eq!((w >> (63 - k)) & 1 == 1, bits[off as usize + k]);
            }
        }
    }

    #[test]
    fn leading_zero_runs() {
        let mut p = BitPoint::with_prefix(3, &[false, false, true]);
        assert_eq!(p.leading_zeros_from(0, 64), Some(2));
        let zero = BitPoint::from_rational(&rat(0, 1)).unwrap();
        let mut z = zero;
        assert_eq!(z.leading_zeros_from(0, 300), None);
    }
}
