//! Exact-arithmetic workbench for approval-based committee scoring (ABCS)
//! rules: evaluation, winner determination, sequential rules, feasibility
//! solvers, learning experiments, worst-case instance families, and
//! hardness-reduction generators. All scoring arithmetic is done with
//! arbitrary-precision rationals; every decision procedure is exact.

pub mod constructions;
pub mod eval;
pub mod io;
pub mod lp;
pub mod model;
pub mod pac;
pub mod reductions;
pub mod solvers;

use num::BigRational;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

/// Rational from an integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Rational from a numerator/denominator pair. Panics if `d == 0`.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
