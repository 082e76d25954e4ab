//! User-supplied growth functions ψ and their ω-transforms.
//!
//! Expressions use function-call syntax over the variable `n`:
//!
//! ```text
//! expr  := "n" | number | name "(" expr ("," expr)* ")"
//! name  := log | pow | mul | add
//! ```
//!
//! Numbers are exact decimals (`2`, `1.1`, `0.25`). Evaluation is interval
//! arithmetic at a caller-chosen precision; arguments are evaluated left to
//! right, each operation rounds outward. `pow(x, y)` with a non-negative integer
//! `y` is repeated multiplication (so `pow(log(1), 2) = 0` exactly), otherwise
//! it is `exp(y·log x)` and needs `x > 0`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{certify_floor_i64, ln2, Rational, Real};

/// Declared membership: summable reciprocals (Ψ) or divergent ones (Ψ̄).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiClass {
    Summable,
    Divergent,
}

impl std::str::FromStr for PsiClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "summable" => Ok(PsiClass::Summable),
            "divergent" => Ok(PsiClass::Divergent),
            other => Err(Error::Parse(format!("unknown ψ class `{other}`"))),
        }
    }
}

impl fmt::Display for PsiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsiClass::Summable => "summable",
            PsiClass::Divergent => "divergent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiExpr {
    N,
    Const(Rational),
    Log(Box<PsiExpr>),
    Pow(Box<PsiExpr>, Box<PsiExpr>),
    Mul(Box<PsiExpr>, Box<PsiExpr>),
    Add(Box<PsiExpr>, Box<PsiExpr>),
}

impl PsiExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("trailing input at byte {} of `{src}`", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, n: u64, prec: u32) -> Result<Real> {
        Ok(match self {
            PsiExpr::N => Real::from_bigint(BigInt::from(n), prec),
            PsiExpr::Const(c) => Real::from_rational(c, prec),
            PsiExpr::Log(a) => a.eval(n, prec)?.ln()?,
            PsiExpr::Mul(a, b) => a.eval(n, prec)?.mul(&b.eval(n, prec)?),
            PsiExpr::Add(a, b) => a.eval(n, prec)?.add(&b.eval(n, prec)?),
            PsiExpr::Pow(a, b) => {
                let base = a.eval(n, prec)?;
                match b.as_ref() {
                    PsiExpr::Const(c) if c.is_integer() && !c.is_negative() => {
                        let k = c.to_integer().to_u32().ok_or_else(|| Error::Domain("exponent too large".into()))?;
                        base.powi(k)
                    }
                    other => base.pow(&other.eval(n, prec)?)?,
                }
            }
        })
    }
}

impl fmt::Display for PsiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiExpr::N => write!(f, "n"),
            PsiExpr::Const(c) => write!(f, "{}", decimal_string(c)),
            PsiExpr::Log(a) => write!(f, "log({a})"),
            PsiExpr::Pow(a, b) => write!(f, "pow({a}, {b})"),
            PsiExpr::Mul(a, b) => write!(f, "mul({a}, {b})"),
            PsiExpr::Add(a, b) => write!(f, "add({a}, {b})"),
        }
    }
}

/// Prints decimals that came from the parser (denominator a power of ten).
fn decimal_string(c: &Rational) -> String {
    if c.is_integer() {
        return c.to_integer().to_string();
    }
    let mut den = c.denom().clone();
    let mut digits = 0usize;
    let ten = BigInt::from(10);
    let mut scale = BigInt::from(1);
    while !(&scale % &den).is_zero() && digits < 40 {
        scale *= &ten;
        digits += 1;
    }
    if (&scale % &den).is_zero() {
        den = scale.clone();
        let num = c.numer() * (&den / c.denom());
        let (ip, fp) = num.abs().div_rem(&den);
        let sign = if num.is_negative() { "-" } else { "" };
        format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits)
    } else {
        c.to_string()
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{}` at byte {}", c as char, self.pos)))
        }
    }

    /// `sum := product ('+' product)*`
    fn expr(&mut self) -> Result<PsiExpr> {
        let mut e = self.product()?;
        loop {
            self.skip_ws();
            if self.s.get(self.pos) != Some(&b'+') {
                return Ok(e);
            }
            self.pos += 1;
            e = PsiExpr::Add(Box::new(e), Box::new(self.product()?));
        }
    }

    /// `product := power ('*' power)*`
    fn product(&mut self) -> Result<PsiExpr> {
        let mut e = self.power()?;
        loop {
            self.skip_ws();
            if self.s.get(self.pos) != Some(&b'*') {
                return Ok(e);
            }
            self.pos += 1;
            e = PsiExpr::Mul(Box::new(e), Box::new(self.power()?));
        }
    }

    /// `power := atom ('^' power)?`, right associative.
    fn power(&mut self) -> Result<PsiExpr> {
        let base = self.atom()?;
        self.skip_ws();
        if self.s.get(self.pos) == Some(&b'^') {
            self.pos += 1;
            return Ok(PsiExpr::Pow(Box::new(base), Box::new(self.power()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PsiExpr> {
        self.skip_ws();
        let start = self.pos;
        match self.s.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                parse_decimal(text).map(PsiExpr::Const)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string();
                if name == "n" {
                    return Ok(PsiExpr::N);
                }
                self.expect(b'(')?;
                let mut args = vec![self.expr()?];
                loop {
                    self.skip_ws();
                    if self.s.get(self.pos) == Some(&b',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    } else {
                        break;
                    }
                }
                self.expect(b')')?;
                build(&name, args)
            }
            _ => Err(Error::Parse(format!("unexpected input at byte {}", self.pos))),
        }
    }
}

fn build(name: &str, mut args: Vec<PsiExpr>) -> Result<PsiExpr> {
    let arity = |k: usize, args: &Vec<PsiExpr>| {
        if args.len() == k {
            Ok(())
        } else {
            Err(Error::Parse(format!("`{name}` takes {k} argument(s), got {}", args.len())))
        }
    };
    match name {
        "log" => {
            arity(1, &args)?;
            Ok(PsiExpr::Log(Box::new(args.pop().unwrap())))
        }
        "pow" | "mul" | "add" => {
            arity(2, &args)?;
            let b = Box::new(args.pop().unwrap());
            let a = Box::new(args.pop().unwrap());
            Ok(match name {
                "pow" => PsiExpr::Pow(a, b),
                "mul" => PsiExpr::Mul(a, b),
                _ => PsiExpr::Add(a, b),
            })
        }
        other => Err(Error::Parse(format!("unknown function `{other}`"))),
    }
}

/// Exact value of a decimal literal such as `1.25`.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad number `{text}`"));
    let (ip, fp) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if ip.is_empty() || fp.contains('.') || !ip.bytes().all(|c| c.is_ascii_digit()) || !fp.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = BigInt::from(10).pow(fp.len() as u32);
    Ok(Rational::new(num, den))
}

type Evaluator = Arc<dyn Fn(u64, u32) -> Result<Real> + Send + Sync>;

#[derive(Clone)]
enum PsiKind {
    Expr(PsiExpr),
    OmegaMin(Box<PsiSpec>),
    OmegaMax(Box<PsiSpec>),
    Custom(Evaluator),
}

/// A growth function ψ with its declared class and a label.
#[derive(Clone)]
pub struct PsiSpec {
    kind: PsiKind,
    pub class: PsiClass,
    pub label: String,
}

impl fmt::Debug for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsiSpec({}, {})", self.label, self.class)
    }
}

impl PsiSpec {
    pub fn parse(src: &str, class: PsiClass) -> Result<Self> {
        let e = PsiExpr::parse(src)?;
        Ok(PsiSpec {
            label: e.to_string(),
            kind: PsiKind::Expr(e),
            class,
        })
    }

    pub fn from_expr(e: PsiExpr, class: PsiClass) -> Self {
        PsiSpec {
            label: e.to_string(),
            kind: PsiKind::Expr(e),
            class,
        }
    }

    /// Any evaluator returning an enclosure of ψ(n) at the given precision.
    pub fn custom(label: &str, class: PsiClass, f: impl Fn(u64, u32) -> Result<Real> + Send + Sync + 'static) -> Self {
        PsiSpec {
            kind: PsiKind::Custom(Arc::new(f)),
            class,
            label: label.to_string(),
        }
    }

    /// `n·(log n)^e`.
    pub fn n_log_pow(e: &str, class: PsiClass) -> Result<Self> {
        Self::parse(&format!("mul(n, pow(log(n), {e}))"), class)
    }

    pub fn expr(&self) -> Option<&PsiExpr> {
        match &self.kind {
            PsiKind::Expr(e) => Some(e),
            _ => None,
        }
    }

    pub fn eval(&self, n: u64, prec: u32) -> Result<Real> {
        match &self.kind {
            PsiKind::Expr(e) => e.eval(n, prec),
            PsiKind::Custom(f) => f(n, prec),
            PsiKind::OmegaMin(inner) => {
                let (a, b) = omega_args(n)?;
                Ok(inner.eval(a, prec)?.min(&inner.eval(b, prec)?))
            }
            PsiKind::OmegaMax(inner) => {
                let (a, b) = omega_args(n)?;
                Ok(inner.eval(a, prec)?.max(&inner.eval(b, prec)?))
            }
        }
    }

    pub fn eval_f64(&self, n: u64) -> Result<f64> {
        Ok(self.eval(n, 128)?.to_f64())
    }
}

/// `(⌊n·log 2⌋, ⌊n·log 2⌋ + 1)`.
pub fn omega_args(n: u64) -> Result<(u64, u64)> {
    let a = floor_n_log2(n)?;
    Ok((a, a + 1))
}

/// `⌊n·log 2⌋`, certified.
pub fn floor_n_log2(n: u64) -> Result<u64> {
    let v = certify_floor_i64(|p| Ok(Real::from_bigint(BigInt::from(n), p).mul(&ln2(p))))?;
    Ok(v as u64)
}

/// `ω(n) = min{ψ(⌊n log 2⌋ + j): j ∈ {0,1}}`.
pub fn omega_min(psi: &PsiSpec) -> PsiSpec {
    PsiSpec {
        label: format!("omega_min[{}]", psi.label),
        class: psi.class,
        kind: PsiKind::OmegaMin(Box::new(psi.clone())),
    }
}

/// `ω(n) = max{ψ(⌊n log 2⌋ + j): j ∈ {0,1}}`.
pub fn omega_max(psi: &PsiSpec) -> PsiSpec {
    PsiSpec {
        label: format!("omega_max[{}]", psi.label),
        class: psi.class,
        kind: PsiKind::OmegaMax(Box::new(psi.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn parse_and_print() {
        let e = PsiExpr::parse("mul(n, pow(log(n), 1.1))").unwrap();
        assert_eq!(e.to_string(), "mul(n, pow(log(n), 1.1))");
        assert_eq!(PsiExpr::parse(" add( n ,2 ) ").unwrap().to_string(), "add(n, 2)");
        assert!(PsiExpr::parse("mul(n)").is_err());
        assert!(PsiExpr::parse("sin(n)").is_err());
        assert_eq!(
            PsiExpr::parse("n*log(n)^2").unwrap(),
            PsiExpr::parse("mul(n, pow(log(n), 2))").unwrap()
        );
        assert_eq!(
            PsiExpr::parse("2 + n*(n+1)").unwrap().to_string(),
            "add(2, mul(n, add(n, 1)))"
        );
        assert!(PsiExpr::parse("n*").is_err());
        assert!(PsiExpr::parse("n n").is_err());
        assert!(parse_decimal("1..2").is_err());
        assert_eq!(parse_decimal("0.25").unwrap(), Rational::new(1.into(), 4.into()));
    }

    #[test]
    fn evaluation() {
        let psi = PsiSpec::n_log_pow("2", PsiClass::Summable).unwrap();
        let v = psi.eval(10, 128).unwrap().to_f64();
        assert!((v - 10.0 * 10f64.ln().powi(2)).abs() < 1e-12);
        // integer powers are exact at n = 1
        assert_eq!(psi.eval(1, 128).unwrap().lower(), Rational::from_integer(BigInt::from(0)));
        let frac = PsiSpec::n_log_pow("1.1", PsiClass::Summable).unwrap();
        assert!(frac.eval(1, 128).is_err());
        let c = PsiSpec::parse("3", PsiClass::Summable).unwrap();
        assert_eq!(c.eval_f64(99).unwrap(), 3.0);
    }

    #[test]
    fn omega_spot_values() {
        let id = PsiSpec::parse("n", PsiClass::Divergent).unwrap();
        let w = omega_min(&id);
        // ω_min(6) = ⌊6 log 2⌋ = 4
        assert_eq!(w.eval(6, 128).unwrap().certified_floor(), Some(BigInt::from(4)));
        assert_eq!(omega_max(&id).eval(6, 128).unwrap().certified_floor(), Some(BigInt::from(5)));
        let c = PsiSpec::parse("7", PsiClass::Summable).unwrap();
        assert_eq!(omega_min(&c).eval_f64(40).unwrap(), 7.0);
        assert_eq!(floor_n_log2(1_000_000).unwrap(), 693_147);
    }
}
