//! Piecewise-constant functions on [0,1) with exact rational data.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default limit on the number of pieces produced by pullbacks and products.
pub const DEFAULT_PIECE_CAP: u64 = 1 << 22;

/// `n/d` as a rational.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// `2^-k`.
pub fn pow2_inv(k: u32) -> Rational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// A step function, constant `values[i]` on `[breaks[i], breaks[i+1])`.
///
/// Always canonical: `breaks` starts at 0, ends at 1, is strictly increasing, and
/// neighbouring pieces carry different values. Structural equality is therefore
/// functional equality.
#[derive(Clone, PartialEq, Eq)]
pub struct StepFunction {
    breaks: Vec<Rational>,
    values: Vec<Rational>,
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StepFunction[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{}, {}) ↦ {}", self.breaks[i], self.breaks[i + 1], v)?;
        }
        write!(f, "]")
    }
}

impl StepFunction {
    /// Builds from breakpoints `0 = x₀ ≤ … ≤ x_N = 1` and `N` values. Empty pieces
    /// are dropped and equal neighbours merged.
    pub fn new(breaks: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::Domain(format!(
                "{} breakpoints for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if !breaks[0].is_zero() || !breaks[breaks.len() - 1].is_one() {
            return Err(Error::Domain("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("breakpoints not sorted".into()));
        }
        Ok(Self::canonical(breaks, values))
    }

    /// Canonicalizes sorted input (non-decreasing breakpoints).
    fn canonical(breaks: Vec<Rational>, values: Vec<Rational>) -> Self {
        let mut b_out: Vec<Rational> = Vec::with_capacity(breaks.len());
        let mut v_out: Vec<Rational> = Vec::with_capacity(values.len());
        let mut bi = breaks.into_iter();
        let mut left = bi.next().expect("non-empty");
        for (right, v) in bi.zip(values) {
            if right == left {
                continue;
            }
            match v_out.last() {
                Some(last) if *last == v => {}
                _ => {
                    b_out.push(left);
                    v_out.push(v);
                }
            }
            left = right;
        }
        b_out.push(left);
        StepFunction {
            breaks: b_out,
            values: v_out,
        }
    }

    pub fn constant(c: Rational) -> Self {
        StepFunction {
            breaks: vec![Rational::zero(), Rational::one()],
            values: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    /// Indicator of `[a, b)` with `0 ≤ a ≤ b ≤ 1`.
    pub fn indicator(a: Rational, b: Rational) -> Result<Self> {
        Self::indicator_union(&[(a, b)])
    }

    /// Indicator of a union of disjoint half-open intervals, given in any order.
    pub fn indicator_union(intervals: &[(Rational, Rational)]) -> Result<Self> {
        let mut iv: Vec<&(Rational, Rational)> = intervals.iter().filter(|(a, b)| a < b).collect();
        iv.sort_by(|x, y| x.0.cmp(&y.0));
        let mut breaks = vec![Rational::zero()];
        let mut values = Vec::new();
        for (a, b) in iv {
            if a.is_negative() || b > &Rational::one() {
                return Err(Error::Domain(format!("[{a}, {b}) not inside [0,1)")));
            }
            if a < breaks.last().unwrap() {
                return Err(Error::Domain("intervals overlap".into()));
            }
            values.push(Rational::zero());
            breaks.push(a.clone());
            values.push(Rational::one());
            breaks.push(b.clone());
        }
        values.push(Rational::zero());
        breaks.push(Rational::one());
        Ok(Self::canonical(breaks, values))
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    /// Iterator over `(left, right, value)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (&self.breaks[i], &self.breaks[i + 1], v))
    }

    /// Value at `x ∈ [0,1)`.
    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if x.is_negative() || x >= &Rational::one() {
            return Err(Error::Domain(format!("{x} outside [0,1)")));
        }
        // last breakpoint ≤ x
        let idx = self.breaks.partition_point(|b| b <= x) - 1;
        Ok(self.values[idx].clone())
    }

    pub fn integral(&self) -> Rational {
        sum_rationals(self.iter().map(|(l, r, v)| v * (r - l)))
    }

    /// Sum of interior jump magnitudes.
    pub fn variation(&self) -> Rational {
        sum_rationals(self.values.windows(2).map(|w| (&w[1] - &w[0]).abs()))
    }

    pub fn sup_norm(&self) -> Rational {
        self.values
            .iter()
            .map(|v| v.abs())
            .max()
            .expect("at least one piece")
    }

    pub fn l1_norm(&self) -> Rational {
        sum_rationals(self.iter().map(|(l, r, v)| v.abs() * (r - l)))
    }

    pub fn bv_norm(&self) -> Rational {
        self.variation() + self.sup_norm()
    }

    /// Pointwise combination on the merged breakpoint grid.
    pub fn combine(&self, other: &StepFunction, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let mut breaks = Vec::with_capacity(self.breaks.len() + other.breaks.len());
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        breaks.push(Rational::zero());
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.values.len() && j < other.values.len() {
            values.push(op(&self.values[i], &other.values[j]));
            let (ri, rj) = (&self.breaks[i + 1], &other.breaks[j + 1]);
            match ri.cmp(rj) {
                Ordering::Less => {
                    breaks.push(ri.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    breaks.push(rj.clone());
                    j += 1;
                }
                Ordering::Equal => {
                    breaks.push(ri.clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::canonical(breaks, values)
    }

    pub fn add(&self, other: &StepFunction) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn product(&self, other: &StepFunction) -> Self {
        self.combine(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        StepFunction {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `ζ − ∫ζ`, the centred part.
    pub fn centered(&self) -> Self {
        let m = self.integral();
        StepFunction {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v - &m).collect(),
        }
    }

    /// `∫ self · other` without materializing the product.
    pub fn inner(&self, other: &StepFunction) -> Rational {
        let mut acc = Vec::with_capacity(self.values.len() + other.values.len());
        let (mut i, mut j) = (0usize, 0usize);
        let mut left = Rational::zero();
        while i < self.values.len() && j < other.values.len() {
            let (ri, rj) = (&self.breaks[i + 1], &other.breaks[j + 1]);
            let right = if ri <= rj { ri.clone() } else { rj.clone() };
            let p = &self.values[i] * &other.values[j];
            if !p.is_zero() {
                acc.push(p * (&right - &left));
            }
            if ri <= rj {
                i += 1;
            }
            if rj <= ri {
                j += 1;
            }
            left = right;
        }
        sum_rationals(acc.into_iter())
    }

    /// `x ↦ ζ(lo + (hi−lo)·x)`: the restriction to `[lo, hi)` stretched onto [0,1).
    pub fn restrict_rescale(&self, lo: &Rational, hi: &Rational) -> Result<Self> {
        if lo.is_negative() || hi > &Rational::one() || lo >= hi {
            return Err(Error::Domain(format!("bad window [{lo}, {hi})")));
        }
        let w = hi - lo;
        let start = self.breaks.partition_point(|b| b <= lo) - 1;
        let mut breaks = vec![Rational::zero()];
        let mut values = Vec::new();
        for i in start..self.values.len() {
            values.push(self.values[i].clone());
            let r = &self.breaks[i + 1];
            if r >= hi {
                breaks.push(Rational::one());
                break;
            }
            breaks.push((r - lo) / &w);
        }
        Ok(Self::canonical(breaks, values))
    }

    /// `x ↦ ζ(2ⁿx mod 1)`.
    pub fn pullback_tau(&self, n: u32, cap: u64) -> Result<Self> {
        let copies: u64 = 1u64.checked_shl(n).filter(|_| n < 63).ok_or(Error::PieceCap {
            requested: u64::MAX,
            cap,
        })?;
        let requested = copies.saturating_mul(self.values.len() as u64);
        if requested > cap {
            return Err(Error::PieceCap { requested, cap });
        }
        if n == 0 {
            return Ok(self.clone());
        }
        let scale = BigRational::new(BigInt::one(), BigInt::one() << n);
        let mut breaks = Vec::with_capacity(requested as usize + 1);
        let mut values = Vec::with_capacity(requested as usize);
        for c in 0..copies {
            let off = BigRational::from_integer(BigInt::from(c));
            for (i, v) in self.values.iter().enumerate() {
                breaks.push((&off + &self.breaks[i]) * &scale);
                values.push(v.clone());
            }
        }
        breaks.push(Rational::one());
        Ok(Self::canonical(breaks, values))
    }
}

/// Exact sum, accumulating pairwise to keep intermediate denominators balanced.
pub fn sum_rationals(it: impl Iterator<Item = Rational>) -> Rational {
    let mut terms: Vec<Rational> = it.collect();
    if terms.is_empty() {
        return Rational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}
