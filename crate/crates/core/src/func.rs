//! Evaluable scalar functions of `x` with derivatives.

use std::fmt::Debug;
use std::sync::Arc;

use crate::expr::{DomainError, Dual, EvalError, Expression, Params};
use crate::scalar::Real;

/// A real function of one variable that can report its derivatives.
pub trait UnivariateFn<T: Real>: Send + Sync + Debug {
    fn dual(&self, x: T) -> Result<Dual<T>, EvalError>;

    fn value(&self, x: T) -> Result<T, EvalError> {
        self.dual(x).map(|d| d.value)
    }

    /// `[f, f', f'']`; not every implementation can supply it.
    fn second(&self, _x: T) -> Result<[T; 3], EvalError> {
        Err(DomainError::NonDifferentiable("second derivative unavailable").into())
    }
}

pub type SharedFn<T> = Arc<dyn UnivariateFn<T>>;

/// An expression with its parameters bound.
///
/// `origin` optionally replaces the expression near `x = 0` by a Taylor
/// polynomial, for expressions with a removable singularity there such as
/// `(asinh(x)/x)^2` whose derivatives cancel badly close to the origin.
#[derive(Clone, Debug)]
pub struct BoundExpr {
    pub expr: Expression,
    pub params: Params,
    pub origin: Option<OriginSeries>,
}

/// `Σ c_k x^k`, used for `|x| < radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginSeries {
    pub coeffs: Vec<f64>,
    pub radius: f64,
}

impl OriginSeries {
    pub fn new(coeffs: Vec<f64>, radius: f64) -> Self {
        Self { coeffs, radius }
    }

    /// `[f, f', f'']` by Horner's rule.
    pub fn jet<T: Real>(&self, x: T) -> [T; 3] {
        let (mut v, mut d, mut dd) = (T::zero(), T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            dd = dd * x + T::c(2.0) * d;
            d = d * x + v;
            v = v * x + T::c(c);
        }
        [v, d, dd]
    }
}

impl BoundExpr {
    pub fn new(expr: Expression, params: Params) -> Self {
        Self { expr, params, origin: None }
    }

    /// Parses `text`, panicking on syntax errors. For built-in formulas only.
    pub(crate) fn builtin(text: &str, params: &Params) -> Self {
        let expr = Expression::parse(text).unwrap_or_else(|e| panic!("built-in formula {text:?}: {e}"));
        Self::new(expr, params.clone())
    }

    pub fn with_origin(mut self, series: OriginSeries) -> Self {
        self.origin = Some(series);
        self
    }

    pub fn shared<T: Real>(self) -> SharedFn<T> {
        Arc::new(self)
    }

    fn origin_jet<T: Real>(&self, x: T) -> Option<[T; 3]> {
        match &self.origin {
            Some(s) if x.abs() < T::c(s.radius) => Some(s.jet(x)),
            _ => None,
        }
    }
}

impl<T: Real> UnivariateFn<T> for BoundExpr {
    fn dual(&self, x: T) -> Result<Dual<T>, EvalError> {
        if let Some([v, d, _]) = self.origin_jet(x) {
            return Ok(Dual::new(v, d));
        }
        self.expr.eval_dual(x, &self.params)
    }

    fn value(&self, x: T) -> Result<T, EvalError> {
        if let Some([v, _, _]) = self.origin_jet(x) {
            return Ok(v);
        }
        self.expr.eval(x, &self.params)
    }

    fn second(&self, x: T) -> Result<[T; 3], EvalError> {
        if let Some(j) = self.origin_jet(x) {
            return Ok(j);
        }
        self.expr.eval_second(x, &self.params)
    }
}

/// `f(x) = c`.
#[derive(Clone, Copy, Debug)]
pub struct Constant<T>(pub T);

impl<T: Real> UnivariateFn<T> for Constant<T> {
    fn dual(&self, _x: T) -> Result<Dual<T>, EvalError> {
        Ok(Dual::constant(self.0))
    }

    fn second(&self, _x: T) -> Result<[T; 3], EvalError> {
        Ok([self.0, T::zero(), T::zero()])
    }
}

/// `f(x) = factor * g(x)`.
#[derive(Clone, Debug)]
pub struct Scaled<T> {
    pub inner: SharedFn<T>,
    pub factor: T,
}

impl<T: Real> UnivariateFn<T> for Scaled<T> {
    fn dual(&self, x: T) -> Result<Dual<T>, EvalError> {
        let d = self.inner.dual(x)?;
        Ok(Dual::new(d.value * self.factor, d.deriv * self.factor))
    }

    fn value(&self, x: T) -> Result<T, EvalError> {
        Ok(self.inner.value(x)? * self.factor)
    }

    fn second(&self, x: T) -> Result<[T; 3], EvalError> {
        let [v, d, dd] = self.inner.second(x)?;
        Ok([v * self.factor, d * self.factor, dd * self.factor])
    }
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn real_line() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn contains(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_closed(&self, lo: T, hi: T) -> bool {
        lo > self.lo && hi < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Intersection with `(lo, hi)`.
    pub fn clip(&self, lo: T, hi: T) -> Self {
        Self { lo: self.lo.max(lo), hi: self.hi.min(hi) }
    }

    /// `count` evenly spaced points strictly inside a finite interval.
    pub fn interior_points(&self, count: usize) -> Vec<T> {
        let step = (self.hi - self.lo) / T::count(count + 1);
        (1..=count).map(|i| self.lo + step * T::count(i)).collect()
    }
}
