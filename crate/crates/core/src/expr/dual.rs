use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::{DomainError, Func};
use crate::scalar::ExprScalar;

/// A first-order dual number `value + deriv·ε`, `ε² = 0`.
///
/// `Dual<Dual<T>>` carries second derivatives: seed the inner and outer
/// derivative slots with one and read the mixed component.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct Dual<S> {
    pub value: S,
    pub deriv: S,
}

impl<S: ExprScalar> Dual<S> {
    pub fn new(value: S, deriv: S) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: S) -> Self {
        Self { value, deriv: S::lift(0.0) }
    }

    /// The independent variable at `x`.
    pub fn variable(x: S) -> Self {
        Self { value: x, deriv: S::lift(1.0) }
    }

    // chain rule with an outer derivative factor
    fn chain(value: S, outer: S, inner: S) -> Self {
        Self { value, deriv: outer * inner }
    }
}

impl<S: ExprScalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<S: ExprScalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<S: ExprScalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl<S: ExprScalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl<S: ExprScalar> ExprScalar for Dual<S> {
    fn lift(v: f64) -> Self {
        Self::constant(S::lift(v))
    }

    fn primal(&self) -> f64 {
        self.value.primal()
    }

    fn is_exact_zero(&self) -> bool {
        self.value.is_exact_zero() && self.deriv.is_exact_zero()
    }

    fn all_finite(&self) -> bool {
        self.value.all_finite() && self.deriv.all_finite()
    }

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
        let q = self.value.checked_div(rhs.value)?;
        let d = (self.deriv - q * rhs.deriv).checked_div(rhs.value)?;
        Ok(Self::new(q, d))
    }

    fn checked_pow(self, exponent: Self) -> Result<Self, DomainError> {
        let value = self.value.checked_pow(exponent.value)?;
        if exponent.deriv.is_exact_zero() {
            if self.deriv.is_exact_zero() {
                return Ok(Self::constant(value));
            }
            // d(u^c) = c u^(c-1) u'
            let reduced = self
                .value
                .checked_pow(exponent.value - S::lift(1.0))
                .map_err(|_| DomainError::NonDifferentiable("power at zero base"))?;
            return Ok(Self::chain(value, exponent.value * reduced, self.deriv));
        }
        if self.value.primal() <= 0.0 {
            return Err(DomainError::NegativeBase {
                base: self.value.primal(),
                exponent: exponent.value.primal(),
            });
        }
        // d(u^v) = u^v (v' ln u + v u'/u)
        let log_base = self.value.apply(Func::Ln)?;
        let ratio = self.deriv.checked_div(self.value)?;
        let deriv = value * (exponent.deriv * log_base + exponent.value * ratio);
        Ok(Self::new(value, deriv))
    }

    fn apply(self, f: Func) -> Result<Self, DomainError> {
        let u = self.value;
        let du = self.deriv;
        let one = S::lift(1.0);
        Ok(match f {
            Func::Exp => {
                let e = u.apply(Func::Exp)?;
                Self::chain(e, e, du)
            }
            Func::Ln => {
                let l = u.apply(Func::Ln)?;
                Self::new(l, du.checked_div(u)?)
            }
            Func::Sqrt => {
                let s = u.apply(Func::Sqrt)?;
                if du.is_exact_zero() {
                    Self::constant(s)
                } else if s.primal() == 0.0 {
                    return Err(DomainError::NonDifferentiable("sqrt at zero"));
                } else {
                    Self::new(s, du.checked_div(S::lift(2.0) * s)?)
                }
            }
            Func::Sin => Self::chain(u.apply(Func::Sin)?, u.apply(Func::Cos)?, du),
            Func::Cos => Self::chain(u.apply(Func::Cos)?, -u.apply(Func::Sin)?, du),
            Func::Sinh => Self::chain(u.apply(Func::Sinh)?, u.apply(Func::Cosh)?, du),
            Func::Cosh => Self::chain(u.apply(Func::Cosh)?, u.apply(Func::Sinh)?, du),
            Func::Asinh => {
                let r = (one + u * u).apply(Func::Sqrt)?;
                Self::new(u.apply(Func::Asinh)?, du.checked_div(r)?)
            }
            Func::Abs => {
                let p = u.primal();
                if p > 0.0 {
                    self
                } else if p < 0.0 {
                    -self
                } else if du.is_exact_zero() {
                    Self::constant(u.apply(Func::Abs)?)
                } else {
                    return Err(DomainError::NonDifferentiable("abs at zero"));
                }
            }
        })
    }
}
