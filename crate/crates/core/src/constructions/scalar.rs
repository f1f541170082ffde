//! Number types a hand-built network can be evaluated in.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Signed + Send + Sync {
    fn from_int(v: i64) -> Self;

    /// `self / m` for a positive count `m`.
    fn div_count(&self, m: usize) -> Self;

    /// Sign of a quantity known to be a multiple of `1/m` (or an integer).
    /// Exact types compare with zero; floats round to the nearest multiple.
    fn sign_at(&self, m: usize) -> Ordering;

    fn to_f64(&self) -> f64;

    fn render(&self) -> String;

    /// Whether `exp`-based softmax may be applied to this type.
    const EXACT: bool;

    /// `exp(x)`, only called when `EXACT` is false.
    fn exp(&self) -> Self;
}

impl Scalar for Rational64 {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }

    fn div_count(&self, m: usize) -> Self {
        self / Rational64::from_integer(m as i64)
    }

    fn sign_at(&self, _m: usize) -> Ordering {
        self.cmp(&Rational64::zero())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn exp(&self) -> Self {
        unreachable!("exact scalars never take exponentials")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn div_count(&self, m: usize) -> Self {
        self / m as f64
    }

    fn sign_at(&self, m: usize) -> Ordering {
        let half_step = 0.5 / m.max(1) as f64;
        if *self > half_step {
            Ordering::Greater
        } else if *self < -half_step {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        format!("{self:e}")
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }
}
