//! Scalar abstraction and log-domain arithmetic.
//!
//! Every exact kernel in this crate is written against [`Real`], so the same
//! dynamic programs run in `f32` or `f64`. Exact rational combinatorics live in
//! [`crate::walk::exact`] and only need `num_traits::Num`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used by the log-domain engines.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Max-anchored log-sum-exp of a slice. Empty input gives `-inf`.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max == T::infinity() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `log(exp(a) - exp(b))` for `a >= b`. Returns `-inf` when the two agree.
#[inline]
pub fn log_sub_exp<T: Real>(a: T, b: T) -> T {
    if b == T::neg_infinity() {
        return a;
    }
    let d = b - a;
    if d >= T::zero() {
        return T::neg_infinity();
    }
    a + (-d.exp()).ln_1p()
}

/// `log(1 + exp(x))`.
#[inline]
pub fn log1p_exp<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Streaming log-sum-exp accumulator.
///
/// Terms are rescaled whenever a new maximum arrives, so a single pass is
/// enough and no term is exponentiated at a positive argument.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator<T> {
    max: T,
    scaled: T,
}

impl<T: Real> Default for LogAccumulator<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogAccumulator<T> {
    pub fn new() -> Self {
        Self {
            max: T::neg_infinity(),
            scaled: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, log_term: T) {
        if log_term == T::neg_infinity() {
            return;
        }
        if log_term <= self.max {
            self.scaled += (log_term - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - log_term).exp() + T::one();
            self.max = log_term;
        }
    }

    #[inline]
    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Relative difference used by the engine cross-checks: `|a-b| / (1 + |a|)`.
#[inline]
pub fn rel_log_diff<T: Real>(a: T, b: T) -> T {
    if a == b {
        return T::zero();
    }
    (a - b).abs() / (T::one() + a.abs())
}
