//! Uniform grids and the coordinate map `q(x) = ∫ √m dx`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{DomainError, EvalError};
use crate::func::{Interval, SharedFn};
use crate::profiles::MassProfile;
use crate::quad::{adaptive_simpson, adaptive_simpson_budget, QuadError};
use crate::scalar::Real;

/// Breakpoints in the cached forward table.
pub const BREAKPOINTS: usize = 1024;
/// Absolute tolerance per quadrature panel.
pub const PANEL_TOL: f64 = 1e-10;
/// How close range detection gets to a finite domain end.
pub const ENDPOINT_GAP: f64 = 1e-6;
const RANGE_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Q,
}

/// `n` interior nodes of `[lo, hi]`: `x_i = lo + (i+1) h`, `h = (hi-lo)/(n+1)`.
///
/// The bounds themselves carry the Dirichlet condition and are not nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    lo: T,
    hi: T,
    h: T,
    points: Vec<T>,
    axis: Axis,
}

impl<T: Real> Grid<T> {
    pub fn new(lo: T, hi: T, n: usize, axis: Axis) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("grid bounds [{lo}, {hi}] must be finite and increasing")));
        }
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
        }
        let h = (hi - lo) / T::count(n + 1);
        let points = (1..=n).map(|i| lo + h * T::count(i)).collect();
        Ok(Self { lo, hi, h, points, axis })
    }

    pub fn x(lo: T, hi: T, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, Axis::X)
    }

    pub fn q(lo: T, hi: T, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, Axis::Q)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// `x_{i+½}` for `i` in `-1..n`.
    pub fn midpoint(&self, i: isize) -> T {
        self.lo + self.h * (T::c(i as f64) + T::c(1.5))
    }

    pub fn map<F: FnMut(T) -> Result<T>>(&self, f: F) -> Result<Vec<T>> {
        self.points.iter().copied().map(f).collect()
    }
}

/// Attainable `q` range; `None` marks an unbounded end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QRange<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
}

impl<T: Real> QRange<T> {
    pub fn is_onto_reals(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    pub fn contains(&self, q: T) -> bool {
        self.lo.map_or(true, |lo| q > lo) && self.hi.map_or(true, |hi| q < hi)
    }
}

impl<T: Real> std::fmt::Display for QRange<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let end = |v: Option<T>, inf: &str| v.map_or(inf.to_string(), |v| format!("{v}"));
        write!(f, "({}, {})", end(self.lo, "-inf"), end(self.hi, "inf"))
    }
}

/// Monotone map `q(x)` with `q(x0) = q0` and `q' = √m`.
#[derive(Clone, Debug)]
pub struct CoordinateMap<T: Real> {
    m: SharedFn<T>,
    domain: Interval<T>,
    x0: T,
    q0: T,
    xs: Vec<T>,
    qs: Vec<T>,
    range: QRange<T>,
}

/// Default anchor: `x0 = 0` when the domain holds it and `m(0) > 0`, else the
/// window midpoint.
pub fn default_anchor<T: Real>(p: &MassProfile<T>) -> T {
    if p.domain().contains(T::zero()) && p.m(T::zero()).is_ok_and(|m| m > T::zero() && m.is_finite()) {
        T::zero()
    } else {
        let w = p.window();
        (w.lo + w.hi) * T::c(0.5)
    }
}

impl<T: Real> CoordinateMap<T> {
    /// The map anchored by the default convention with `q0 = 0`.
    pub fn build_default(p: &MassProfile<T>) -> Result<Self> {
        Self::build(p, default_anchor(p), T::zero())
    }

    pub fn build(p: &MassProfile<T>, x0: T, q0: T) -> Result<Self> {
        let domain = p.domain();
        if !domain.contains(x0) {
            return Err(Error::OutsideDomain {
                x: x0.to_f64_lossy(),
                lo: domain.lo.to_f64_lossy(),
                hi: domain.hi.to_f64_lossy(),
            });
        }
        let w = p.window();
        let mut lo = w.lo.min(x0);
        let mut hi = w.hi.max(x0);
        // keep the table off the domain ends
        let nudge = (hi - lo) * T::c(1e-9);
        if lo <= domain.lo {
            lo = domain.lo + nudge;
        }
        if hi >= domain.hi {
            hi = domain.hi - nudge;
        }
        let mut map = Self {
            m: p.function().clone(),
            domain,
            x0,
            q0,
            xs: Vec::with_capacity(BREAKPOINTS),
            qs: Vec::with_capacity(BREAKPOINTS),
            range: QRange { lo: None, hi: None },
        };
        let step = (hi - lo) / T::count(BREAKPOINTS - 1);
        map.xs = (0..BREAKPOINTS).map(|i| lo + step * T::count(i)).collect();
        *map.xs.last_mut().expect("nonempty") = hi;
        let mut acc = Vec::with_capacity(BREAKPOINTS);
        acc.push(T::zero());
        for i in 1..BREAKPOINTS {
            let panel = map.integral(map.xs[i - 1], map.xs[i])?;
            acc.push(acc[i - 1] + panel);
        }
        let k = map.nearest(x0);
        let at_anchor = acc[k] + map.integral(map.xs[k], x0)?;
        map.qs = acc.iter().map(|&c| q0 + (c - at_anchor)).collect();
        map.range = QRange { lo: map.end_limit(false), hi: map.end_limit(true) };
        Ok(map)
    }

    fn root(&self, x: T) -> std::result::Result<T, EvalError> {
        let m = self.m.value(x)?;
        if !(m > T::zero()) {
            return Err(DomainError::SqrtNegative(m.to_f64_lossy()).into());
        }
        Ok(m.sqrt())
    }

    fn integral(&self, a: T, b: T) -> Result<T> {
        Ok(adaptive_simpson(|x| self.root(x), a, b, T::tol(PANEL_TOL))?)
    }

    fn nearest(&self, x: T) -> usize {
        let step = (self.xs[BREAKPOINTS - 1] - self.xs[0]) / T::count(BREAKPOINTS - 1);
        let k = ((x - self.xs[0]) / step).round();
        if k <= T::zero() {
            0
        } else {
            k.to_usize().unwrap_or(BREAKPOINTS - 1).min(BREAKPOINTS - 1)
        }
    }

    pub fn anchor(&self) -> (T, T) {
        (self.x0, self.q0)
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn range(&self) -> QRange<T> {
        self.range
    }

    /// The breakpoint table `(x, q)`.
    pub fn table(&self) -> (&[T], &[T]) {
        (&self.xs, &self.qs)
    }

    fn check(&self, x: T) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x: x.to_f64_lossy(),
                lo: self.domain.lo.to_f64_lossy(),
                hi: self.domain.hi.to_f64_lossy(),
            })
        }
    }

    pub fn forward(&self, x: T) -> Result<T> {
        self.check(x)?;
        if x == self.x0 {
            return Ok(self.q0);
        }
        let k = self.nearest(x);
        Ok(self.qs[k] + self.integral(self.xs[k], x)?)
    }

    pub fn dq_dx(&self, x: T) -> Result<T> {
        self.check(x)?;
        Ok(self.root(x)?)
    }

    /// `x` with `|q(x) - q| <= 1e-10`.
    pub fn inverse(&self, q: T) -> Result<T> {
        if !self.range.contains(q) {
            return Err(self.out_of_range(q));
        }
        let (mut a, mut b) = self.bracket(q)?;
        let tol = T::tol(1e-10);
        let mut fa = self.forward(a)? - q;
        let step_tol = T::tol(1e-13);
        let mut x = a;
        for _ in 0..200 {
            let fx = self.forward(x)? - q;
            let step = fx / self.root(x)?;
            if fx == T::zero() || (fx.abs() <= tol && step.abs() <= step_tol * (T::one() + x.abs())) {
                return Ok(x);
            }
            if (fx < T::zero()) == (fa < T::zero()) {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let newton = x - step;
            x = if newton > a.min(b) && newton < a.max(b) { newton } else { (a + b) * T::c(0.5) };
            if (b - a).abs() <= T::epsilon() * x.abs().max(T::one()) {
                break;
            }
        }
        let fx = self.forward(x)? - q;
        if fx.abs() <= tol * T::c(10.0) {
            Ok(x)
        } else {
            Err(Error::NoConvergence { index: 0 })
        }
    }

    fn out_of_range(&self, q: T) -> Error {
        Error::OutOfRange {
            q: q.to_f64_lossy(),
            lo: self.range.lo.map_or(f64::NEG_INFINITY, |v| v.to_f64_lossy()),
            hi: self.range.hi.map_or(f64::INFINITY, |v| v.to_f64_lossy()),
        }
    }

    // an x-interval whose q-image contains q
    fn bracket(&self, q: T) -> Result<(T, T)> {
        let first = self.qs[0];
        let last = self.qs[BREAKPOINTS - 1];
        if q >= first && q <= last {
            let j = self.qs.partition_point(|&v| v < q).clamp(1, BREAKPOINTS - 1);
            return Ok((self.xs[j - 1], self.xs[j]));
        }
        let up = q > last;
        let mut a = if up { self.xs[BREAKPOINTS - 1] } else { self.xs[0] };
        let mut step = self.xs[1] - self.xs[0];
        for _ in 0..400 {
            let edge = if up { self.domain.hi } else { self.domain.lo };
            let b = if edge.is_finite() {
                let jump = if up { a + step } else { a - step };
                let half = (a + edge) * T::c(0.5);
                if up { jump.min(half) } else { jump.max(half) }
            } else if up {
                a + step
            } else {
                a - step
            };
            let qb = self.forward(b)?;
            if (up && qb >= q) || (!up && qb <= q) {
                return Ok(if up { (a, b) } else { (b, a) });
            }
            a = b;
            step = step * T::c(2.0);
        }
        Err(self.out_of_range(q))
    }

    // limit of q toward one domain end, or None when it grows without bound
    fn end_limit(&self, upper: bool) -> Option<T> {
        let (s, qs) = if upper {
            (self.xs[BREAKPOINTS - 1], self.qs[BREAKPOINTS - 1])
        } else {
            (self.xs[0], self.qs[0])
        };
        let edge = if upper { self.domain.hi } else { self.domain.lo };
        let points: Vec<T> = if edge.is_finite() {
            let d0 = (edge - s).abs();
            let decades = ((d0 / T::c(ENDPOINT_GAP)).log10().ceil().to_usize().unwrap_or(0)).max(3);
            (0..=decades).map(|k| edge - (edge - s) * T::c(10f64.powi(-(k as i32)))).collect()
        } else {
            let w = (self.xs[BREAKPOINTS - 1] - self.xs[0]).max(T::one());
            let dir = if upper { T::one() } else { -T::one() };
            (0..=8).map(|k| s + dir * w * T::c(10f64.powi(k) - 1.0)).collect()
        };
        let mut total = T::zero();
        let mut deltas = Vec::with_capacity(points.len());
        for pair in points.windows(2) {
            // far decades of a noisy mass may not resolve; classify from the rest
            let Ok(d) = self.relative_integral(pair[0], pair[1]) else { break };
            if !d.is_finite() {
                return None;
            }
            total += d;
            deltas.push(d);
        }
        let k = deltas.len();
        if k < 3 {
            return None;
        }
        let ratio = |i: usize| -> T {
            if deltas[i - 1] == T::zero() {
                if deltas[i] == T::zero() { T::zero() } else { T::infinity() }
            } else {
                (deltas[i] / deltas[i - 1]).abs()
            }
        };
        let (r1, r2) = (ratio(k - 2), ratio(k - 1));
        let limit = T::c(0.9);
        if r1 < limit && r2 < limit {
            let tail = deltas[k - 1] * r2 / (T::one() - r2);
            Some(qs + total + tail)
        } else {
            None
        }
    }

    // signed ∫ √m with tolerance relative to a first Simpson estimate
    fn relative_integral(&self, a: T, b: T) -> std::result::Result<T, QuadError> {
        let wrap = |x: T| QuadError::Integrand { x: x.to_f64_lossy(), source: DomainError::NonFinite.into() };
        // far out the mass may underflow to zero
        let root = |x: T| -> std::result::Result<T, EvalError> {
            let m = self.m.value(x)?;
            if m < T::zero() {
                return Err(DomainError::SqrtNegative(m.to_f64_lossy()).into());
            }
            Ok(m.sqrt())
        };
        let m = (a + b) * T::c(0.5);
        let f = |x: T| root(x).map_err(|source| QuadError::Integrand { x: x.to_f64_lossy(), source });
        let est = (b - a) / T::c(6.0) * (f(a)? + T::c(4.0) * f(m)? + f(b)?);
        if !est.is_finite() {
            return Err(wrap(m));
        }
        let tol = (est.abs() * T::tol(1e-9)).max(T::min_positive_value());
        adaptive_simpson_budget(root, a, b, tol, RANGE_BUDGET)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::profiles::builtin;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn grid_is_interior_and_uniform() {
        let g = Grid::<f64>::x(0.0, 1.0, 3).unwrap();
        assert_eq!(g.points(), &[0.25, 0.5, 0.75]);
        assert_eq!(g.midpoint(-1), 0.125);
        assert_eq!(g.midpoint(2), 0.875);
        assert!(Grid::<f64>::x(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn rational_cubic_forward_inverse_and_range() {
        let b = builtin::<f64>("rational_cubic", &params(&[("lambda", 1.0)])).unwrap();
        let map = CoordinateMap::build(&b.mass, 0.0, 0.0).unwrap();
        assert!((map.forward(1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        assert!((map.inverse(0.5f64.sqrt()).unwrap() - 1.0).abs() < 1e-9);
        let r = map.range();
        assert!((r.lo.unwrap() + 1.0).abs() < 1e-6 && (r.hi.unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(map.inverse(1.1), Err(Error::OutOfRange { .. })));
        assert_eq!(map.forward(0.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_map_is_identity() {
        let b = builtin::<f64>("constant", &Params::new()).unwrap();
        let map = CoordinateMap::build_default(&b.mass).unwrap();
        for x in [-19.0, -3.3, 0.2, 7.0, 35.0] {
            assert!((map.forward(x).unwrap() - x).abs() < 1e-10);
            assert!((map.inverse(x).unwrap() - x).abs() < 1e-10);
        }
        assert!(map.range().is_onto_reals());
    }

    #[test]
    fn asinh_log_map() {
        let b = builtin::<f64>("asinh_log", &params(&[("alpha", 2.0)])).unwrap();
        let map = CoordinateMap::build_default(&b.mass).unwrap();
        assert!((map.forward(1.0).unwrap() - 2f64.asinh() / 2.0).abs() < 1e-10);
        assert!(map.range().is_onto_reals());
    }

    #[test]
    fn ranges_of_singular_profiles() {
        let yuk = builtin::<f64>("yukawa", &params(&[("V0", -1.0), ("delta", 1.0)])).unwrap();
        let q = yuk.closed.q.clone().unwrap();
        let x0 = 2.0;
        let map = CoordinateMap::build(&yuk.mass, x0, q.value(x0).unwrap()).unwrap();
        let r = map.range();
        assert!(r.lo.is_none());
        assert!(r.hi.unwrap().abs() < 1e-6, "{r}");

        let morse = builtin::<f64>("morse", &params(&[("lambda", 1.0), ("beta", 1.0)])).unwrap();
        let q = morse.closed.q.clone().unwrap();
        let map = CoordinateMap::build(&morse.mass, -3.0, q.value(-3.0).unwrap()).unwrap();
        let r = map.range();
        assert!(r.lo.is_none());
        assert!(r.hi.unwrap().abs() < 1e-3, "{r}");

        let lr = builtin::<f64>("log_ratio", &params(&[("alpha", 1.0)])).unwrap();
        let map = CoordinateMap::build_default(&lr.mass).unwrap();
        assert!(map.range().is_onto_reals());
    }
}
