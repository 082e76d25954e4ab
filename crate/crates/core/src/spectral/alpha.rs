//! Exact α-mixing coefficients between finite digit algebras.
//!
//! The past algebra is generated by `a₁..a_k` and the future one by
//! `a_{k+n}..a_{k+n+f−1}`, each digit coarsened to `{1, …, D, >D}`. Both are
//! finite, so the supremum of `|λ(B∩C) − λ(B)λ(C)|` is attained on unions of
//! atoms. For a fixed future union the best past union is either all atoms with
//! positive signed mass or all with negative signed mass; the future unions are
//! enumerated in Gray-code order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{int, rat, Rational, StepFunction, DEFAULT_PIECE_CAP};

use super::transfer::transfer_pow;

/// Largest number of atoms enumerated exhaustively on the smaller side.
pub const ALPHA_ATOM_CAP: usize = 20;

/// The event `{a₁ = c}`, or `{a₁ > D}` for `c = None`.
fn first_digit_indicator(c: Option<u64>, cap: u64) -> StepFunction {
    match c {
        Some(i) => StepFunction::indicator(rat(1, i as i64 + 1), rat(1, i as i64)),
        None => StepFunction::indicator(int(0), rat(1, cap as i64 + 1)),
    }
    .expect("digit cell")
}

/// Indicators of the positive-measure atoms of `σ(a₁..a_len)` with digits
/// coarsened at `cap`, labelled by their digit tuples (`0` marks the tail).
pub fn block_atoms(len: u32, cap: u64) -> Result<Vec<(Vec<u64>, StepFunction)>> {
    let symbols: Vec<Option<u64>> = (1..=cap).map(Some).chain(std::iter::once(None)).collect();
    let mut atoms: Vec<(Vec<u64>, StepFunction)> = vec![(Vec::new(), StepFunction::constant(int(1)))];
    for pos in 0..len {
        let mut next = Vec::new();
        for (label, f) in &atoms {
            for s in &symbols {
                let g = first_digit_indicator(*s, cap).pullback_tau(pos, DEFAULT_PIECE_CAP)?;
                let h = f.product(&g);
                if h.integral().is_zero() {
                    continue;
                }
                let mut l = label.clone();
                l.push(s.unwrap_or(0));
                next.push((l, h));
            }
        }
        atoms = next;
    }
    Ok(atoms)
}

/// Signed masses `ν[p][f] = λ(P_p ∩ τ^{−(k+n−1)}F_f) − λ(P_p)λ(F_f)`.
pub fn signed_mass_table(k_len: u32, gap: u32, future_len: u32, cap: u64) -> Result<Vec<Vec<Rational>>> {
    if k_len == 0 || future_len == 0 || gap == 0 {
        return Err(Error::Domain("block lengths and gap must be ≥ 1".into()));
    }
    let past = block_atoms(k_len, cap)?;
    let future = block_atoms(future_len, cap)?;
    let lag = k_len + gap - 1;
    let fut_mass: Vec<Rational> = future.iter().map(|(_, f)| f.integral()).collect();
    past.iter()
        .map(|(_, p)| {
            let moved = transfer_pow(p, lag)?;
            let pm = p.integral();
            Ok(future
                .iter()
                .zip(&fut_mass)
                .map(|((_, f), fm)| moved.inner(f) - &pm * fm)
                .collect())
        })
        .collect()
}

/// `sup_{B,C} |Σ_{p∈B, f∈C} ν[p][f]|` over unions of atoms.
pub fn sup_over_unions(table: &[Vec<Rational>]) -> Result<Rational> {
    if table.is_empty() || table[0].is_empty() {
        return Ok(Rational::zero());
    }
    let rows = table.len();
    let cols = table[0].len();
    // enumerate subsets of the smaller side
    let (enum_n, other_n) = if cols <= rows { (cols, rows) } else { (rows, cols) };
    if enum_n > ALPHA_ATOM_CAP {
        return Err(Error::Combinatorial {
            atoms: enum_n,
            cap: ALPHA_ATOM_CAP,
        });
    }
    let entry = |e: usize, o: usize| if cols <= rows { &table[o][e] } else { &table[e][o] };
    let den = table
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<Vec<BigInt>> = (0..enum_n)
        .map(|e| (0..other_n).map(|o| (entry(e, o) * Rational::from_integer(den.clone())).to_integer()).collect())
        .collect();
    let total_abs: BigInt = ints.iter().flatten().map(|v| v.abs()).sum();
    let best: BigInt = if total_abs.bits() < 120 {
        let m: Vec<Vec<i128>> = ints.iter().map(|r| r.iter().map(|v| v.to_i128().unwrap()).collect()).collect();
        BigInt::from(gray_sup(&m, other_n))
    } else {
        gray_sup_big(&ints, other_n)
    };
    Ok(Rational::new(best, den))
}

fn gray_sup(m: &[Vec<i128>], other_n: usize) -> i128 {
    let n = m.len();
    let mut s = vec![0i128; other_n];
    let mut inside = vec![false; n];
    let mut best = 0i128;
    for step in 1u64..(1u64 << n) {
        let e = step.trailing_zeros() as usize;
        let sign = if inside[e] { -1 } else { 1 };
        inside[e] = !inside[e];
        for (acc, v) in s.iter_mut().zip(&m[e]) {
            *acc += sign * v;
        }
        let pos: i128 = s.iter().filter(|v| **v > 0).sum();
        let neg: i128 = -s.iter().filter(|v| **v < 0).sum::<i128>();
        best = best.max(pos).max(neg);
    }
    best
}

fn gray_sup_big(m: &[Vec<BigInt>], other_n: usize) -> BigInt {
    let n = m.len();
    let mut s = vec![BigInt::zero(); other_n];
    let mut inside = vec![false; n];
    let mut best = BigInt::zero();
    for step in 1u64..(1u64 << n) {
        let e = step.trailing_zeros() as usize;
        for (acc, v) in s.iter_mut().zip(&m[e]) {
            if inside[e] {
                *acc -= v;
            } else {
                *acc += v;
            }
        }
        inside[e] = !inside[e];
        let pos: BigInt = s.iter().filter(|v| v.is_positive()).sum();
        let neg: BigInt = -s.iter().filter(|v| v.is_negative()).sum::<BigInt>();
        best = best.max(pos).max(neg);
    }
    best
}

/// α between `σ(a₁..a_k)` and `σ(a_{k+n}..a_{k+n+f−1})` with digits capped at `D`.
pub fn alpha_coefficient(k_len: u32, gap: u32, future_len: u32, cap: u64) -> Result<Rational> {
    sup_over_unions(&signed_mass_table(k_len, gap, future_len, cap)?)
}

/// `α ≤ 2^{−n/2+2}`, decided exactly as `α²·2ⁿ ≤ 16`.
pub fn alpha_bound_holds(alpha: &Rational, gap: u32) -> bool {
    alpha * alpha * Rational::from_integer(BigInt::one() << gap) <= int(16)
}
