//! Exact arithmetic: lazy bit streams, dyadic intervals, rational step
//! functions and certified real enclosures.

pub mod bits;
pub mod real;
pub mod step;

pub use bits::{BitPoint, DyadicInterval};
pub use real::{certify_floor, certify_floor_i64, ln2, Real};
pub use step::{int, pow2_inv, rat, sum_rationals, Rational, StepFunction, DEFAULT_PIECE_CAP};
