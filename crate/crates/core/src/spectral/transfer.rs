//! The transfer operator `τ̂ζ(x) = ½(ζ(x/2) + ζ((x+1)/2))` and the identities it
//! satisfies on step functions.

use num_traits::Signed;

use crate::error::Result;
use crate::exactnum::{pow2_inv, rat, Rational, StepFunction};

/// One application of τ̂.
pub fn transfer_apply(z: &StepFunction) -> Result<StepFunction> {
    let half = rat(1, 2);
    let left = z.restrict_rescale(&Rational::from_integer(0.into()), &half)?;
    let right = z.restrict_rescale(&half, &Rational::from_integer(1.into()))?;
    Ok(left.add(&right).scale(&half))
}

/// `τ̂ⁿζ`.
pub fn transfer_pow(z: &StepFunction, n: u32) -> Result<StepFunction> {
    let mut g = z.clone();
    for _ in 0..n {
        g = transfer_apply(&g)?;
    }
    Ok(g)
}

/// A snapshot of `τ̂ⁿζ` with its variation and sup norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTrace {
    pub iterate: u32,
    pub function: StepFunction,
    pub variation: Rational,
    pub sup: Rational,
}

impl OperatorTrace {
    pub fn of(iterate: u32, function: StepFunction) -> Self {
        OperatorTrace {
            iterate,
            variation: function.variation(),
            sup: function.sup_norm(),
            function,
        }
    }

    /// True when the cached norms agree with the function.
    pub fn verify(&self) -> bool {
        self.variation == self.function.variation() && self.sup == self.function.sup_norm()
    }
}

/// `τ̂⁰ζ, …, τ̂ⁿζ`.
pub fn transfer_iterates(z: &StepFunction, n: u32) -> Result<Vec<OperatorTrace>> {
    let mut out = vec![OperatorTrace::of(0, z.clone())];
    let mut g = z.clone();
    for k in 1..=n {
        g = transfer_apply(&g)?;
        out.push(OperatorTrace::of(k, g.clone()));
    }
    Ok(out)
}

/// `|∫(φ∘τ)ζ − ∫φ·τ̂ζ|`.
pub fn duality_check(phi: &StepFunction, z: &StepFunction, cap: u64) -> Result<Rational> {
    let lhs = phi.pullback_tau(1, cap)?.inner(z);
    let rhs = phi.inner(&transfer_apply(z)?);
    Ok((lhs - rhs).abs())
}

/// `(V(τ̂ⁿζ_H), 2^{−n}V(ζ))` with `ζ_H = ζ − ∫ζ`.
pub fn variation_decay_check(z: &StepFunction, n: u32) -> Result<(Rational, Rational)> {
    let v = transfer_pow(&z.centered(), n)?.variation();
    Ok((v, pow2_inv(n) * z.variation()))
}

/// `|∫(φ∘τⁿ)ζ − ∫φ∫ζ|`, with `φ∘τⁿ` materialized by pullback.
pub fn correlation(phi: &StepFunction, z: &StepFunction, n: u32, cap: u64) -> Result<Rational> {
    let joint = phi.pullback_tau(n, cap)?.inner(z);
    Ok((joint - phi.integral() * z.integral()).abs())
}

/// The same correlation through `∫φ·τ̂ⁿζ`.
pub fn correlation_transfer(phi: &StepFunction, z: &StepFunction, n: u32) -> Result<Rational> {
    let joint = phi.inner(&transfer_pow(z, n)?);
    Ok((joint - phi.integral() * z.integral()).abs())
}

/// `2^{−n}‖φ‖₁V(ζ)`.
pub fn correlation_bound(phi: &StepFunction, z: &StepFunction, n: u32) -> Rational {
    pow2_inv(n) * phi.l1_norm() * z.variation()
}
