//! Scalar abstractions shared by every numeric module.
//!
//! Two layers exist. [`ExprScalar`] is the minimal algebra the expression
//! evaluator needs and is implemented for `f32`, `f64` and for
//! [`Dual`](crate::expr::Dual) numbers over any `ExprScalar`, so nested duals
//! give second derivatives for free. [`Real`] adds the `num-traits` float
//! machinery the grid, quadrature and eigen code relies on.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::expr::{DomainError, Func};

/// Arithmetic carrier for expression evaluation.
pub trait ExprScalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Embeds a constant (zero derivative parts).
    fn lift(v: f64) -> Self;
    /// The primal (value) component, used for domain decisions.
    fn primal(&self) -> f64;
    /// True when every component is exactly zero.
    fn is_exact_zero(&self) -> bool;
    fn all_finite(&self) -> bool;
    fn checked_div(self, rhs: Self) -> Result<Self, DomainError>;
    fn checked_pow(self, exponent: Self) -> Result<Self, DomainError>;
    fn apply(self, f: Func) -> Result<Self, DomainError>;
}

macro_rules! impl_expr_scalar {
    ($t:ty) => {
        impl ExprScalar for $t {
            #[inline]
            fn lift(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn primal(&self) -> f64 {
                *self as f64
            }

            #[inline]
            fn is_exact_zero(&self) -> bool {
                *self == 0.0
            }

            #[inline]
            fn all_finite(&self) -> bool {
                self.is_finite()
            }

            fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
                if rhs == 0.0 {
                    return Err(DomainError::DivisionByZero);
                }
                Ok(self / rhs)
            }

            fn checked_pow(self, exponent: Self) -> Result<Self, DomainError> {
                if self < 0.0 && exponent.fract() != 0.0 {
                    return Err(DomainError::NegativeBase {
                        base: self as f64,
                        exponent: exponent as f64,
                    });
                }
                if self == 0.0 && exponent < 0.0 {
                    return Err(DomainError::DivisionByZero);
                }
                Ok(self.powf(exponent))
            }

            fn apply(self, f: Func) -> Result<Self, DomainError> {
                Ok(match f {
                    Func::Exp => self.exp(),
                    Func::Ln => {
                        if self <= 0.0 {
                            return Err(DomainError::LogNonPositive(self as f64));
                        }
                        self.ln()
                    }
                    Func::Sqrt => {
                        if self < 0.0 {
                            return Err(DomainError::SqrtNegative(self as f64));
                        }
                        self.sqrt()
                    }
                    Func::Sin => self.sin(),
                    Func::Cos => self.cos(),
                    Func::Sinh => self.sinh(),
                    Func::Cosh => self.cosh(),
                    Func::Asinh => self.asinh(),
                    Func::Abs => self.abs(),
                })
            }
        }
    };
}

impl_expr_scalar!(f32);
impl_expr_scalar!(f64);

/// Floating-point scalar for the numerical core (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + ExprScalar
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant; exact for `f64`, rounded for `f32`.
    #[inline]
    fn c(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite constant")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.primal()
    }

    /// A tolerance that is at least `requested`, floored by machine precision.
    #[inline]
    fn tol(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::c(64.0);
        Self::c(requested).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Weighted dot product `h * sum(a_i b_i)`.
pub fn weighted_dot<T: Real>(a: &[T], b: &[T], h: T) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>() * h
}

pub(crate) fn max_abs<T: Real>(v: impl IntoIterator<Item = T>) -> T {
    v.into_iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_floored_for_f32() {
        assert_eq!(<f64 as Real>::tol(1e-10), 1e-10);
        assert!(<f32 as Real>::tol(1e-10) > 1e-6);
    }

    #[test]
    fn pow_rejects_fractional_power_of_negative() {
        assert!((-2.0f64).checked_pow(0.5).is_err());
        assert_eq!((-2.0f64).checked_pow(3.0).unwrap(), -8.0);
        assert!(0.0f64.checked_pow(-1.0).is_err());
    }
}
