//! Mass profiles, deformation functions and the built-in examples.
//!
//! A mass profile `m(x)` and a deformation `Q(x)` are tied together by
//! `√m = √Q (1 + x Q'/(2Q))`, which is what `q(x) = √Q x` with `q' = √m`
//! requires. The oscillator potential is then `V = ½ω²Q x² = ½ω²q²`.

use std::sync::Arc;

use crate::coord::CoordinateMap;
use crate::error::{Error, Result};
use crate::expr::{Dual, EvalError, Expression, Params};
use crate::func::{BoundExpr, Interval, OriginSeries, SharedFn, UnivariateFn};
use crate::quad::adaptive_simpson;
use crate::scalar::Real;

/// Points sampled when a profile is constructed.
pub const VALIDATION_SAMPLES: usize = 512;

pub const BUILTIN_NAMES: [&str; 8] = [
    "constant",
    "rational_cubic",
    "singular_cubic",
    "power_law",
    "asinh_log",
    "log_ratio",
    "morse",
    "yukawa",
];

fn check_window<T: Real>(domain: &Interval<T>, window: &Interval<T>) -> Result<()> {
    let ok = window.lo < window.hi
        && window.lo.is_finite()
        && window.hi.is_finite()
        && window.lo >= domain.lo
        && window.hi <= domain.hi;
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "window [{}, {}] is not a finite subinterval of the domain ({}, {})",
            window.lo, window.hi, domain.lo, domain.hi
        )))
    }
}

fn outside<T: Real>(x: T, domain: &Interval<T>) -> Error {
    Error::OutsideDomain { x: x.to_f64_lossy(), lo: domain.lo.to_f64_lossy(), hi: domain.hi.to_f64_lossy() }
}

/// A position-dependent mass `m(x) > 0` on an open domain.
///
/// `window` is the finite stretch used for validation and as the default
/// grid; it lies inside the (closed) domain.
#[derive(Clone, Debug)]
pub struct MassProfile<T: Real> {
    name: String,
    params: Params,
    m: SharedFn<T>,
    domain: Interval<T>,
    window: Interval<T>,
}

impl<T: Real> MassProfile<T> {
    pub fn new(
        name: impl Into<String>,
        params: Params,
        m: SharedFn<T>,
        domain: Interval<T>,
        window: Interval<T>,
    ) -> Result<Self> {
        check_window(&domain, &window)?;
        let p = Self { name: name.into(), params, m, domain, window };
        p.validate()?;
        Ok(p)
    }

    /// A profile from an expression in `x`.
    pub fn from_expr(expr: Expression, params: Params, domain: Interval<T>, window: Interval<T>) -> Result<Self> {
        let name = expr.to_string();
        let f = BoundExpr::new(expr, params.clone()).shared();
        Self::new(name, params, f, domain, window)
    }

    fn validate(&self) -> Result<()> {
        for x in self.window.interior_points(VALIDATION_SAMPLES) {
            let d = self.m_dual(x)?;
            if !(d.value > T::zero()) {
                return Err(Error::NotPositive { what: "m", x: x.to_f64_lossy(), value: d.value.to_f64_lossy() });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn window(&self) -> Interval<T> {
        self.window
    }

    pub fn function(&self) -> &SharedFn<T> {
        &self.m
    }

    /// The same profile validated on a different window.
    pub fn with_window(&self, window: Interval<T>) -> Result<Self> {
        Self::new(self.name.clone(), self.params.clone(), self.m.clone(), self.domain, window)
    }

    fn check(&self, x: T) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(outside(x, &self.domain))
        }
    }

    pub fn m(&self, x: T) -> Result<T> {
        self.check(x)?;
        Ok(self.m.value(x)?)
    }

    pub fn m_dual(&self, x: T) -> Result<Dual<T>> {
        self.check(x)?;
        Ok(self.m.dual(x)?)
    }

    pub fn m_prime(&self, x: T) -> Result<T> {
        Ok(self.m_dual(x)?.deriv)
    }

    pub fn sqrt_m(&self, x: T) -> Result<T> {
        Ok(self.m(x)?.sqrt())
    }

    /// `m(x)^p` at every point of `xs`.
    pub fn powers(&self, xs: &[T], p: T) -> Result<Vec<T>> {
        xs.iter().map(|&x| self.m(x).map(|m| m.powf(p))).collect()
    }
}

/// A deformation function `Q(x) > 0`.
///
/// `qx2` optionally evaluates `Q(x) x²` directly, for profiles where `Q` is
/// singular at the origin but the product is not.
#[derive(Clone, Debug)]
pub struct DeformationProfile<T: Real> {
    q: SharedFn<T>,
    qx2: Option<SharedFn<T>>,
    domain: Interval<T>,
    window: Interval<T>,
}

impl<T: Real> DeformationProfile<T> {
    pub fn new(q: SharedFn<T>, domain: Interval<T>, window: Interval<T>) -> Result<Self> {
        check_window(&domain, &window)?;
        let d = Self { q, qx2: None, domain, window };
        for x in window.interior_points(VALIDATION_SAMPLES) {
            let v = d.value(x)?;
            if !(v > T::zero()) {
                return Err(Error::NotPositive { what: "Q", x: x.to_f64_lossy(), value: v.to_f64_lossy() });
            }
        }
        Ok(d)
    }

    pub fn from_expr(expr: Expression, params: Params, domain: Interval<T>, window: Interval<T>) -> Result<Self> {
        Self::new(BoundExpr::new(expr, params).shared(), domain, window)
    }

    pub fn with_qx2(mut self, f: SharedFn<T>) -> Self {
        self.qx2 = Some(f);
        self
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn window(&self) -> Interval<T> {
        self.window
    }

    pub fn function(&self) -> &SharedFn<T> {
        &self.q
    }

    fn check(&self, x: T) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(outside(x, &self.domain))
        }
    }

    pub fn value(&self, x: T) -> Result<T> {
        self.check(x)?;
        Ok(self.q.value(x)?)
    }

    pub fn dual(&self, x: T) -> Result<Dual<T>> {
        self.check(x)?;
        Ok(self.q.dual(x)?)
    }

    /// `Q(x) x²` and its derivative.
    pub fn qx2_dual(&self, x: T) -> Result<Dual<T>> {
        self.check(x)?;
        match &self.qx2 {
            Some(f) => Ok(f.dual(x)?),
            None => {
                let q = self.q.dual(x)?;
                Ok(Dual::new(q.value * x * x, q.deriv * x * x + T::c(2.0) * q.value * x))
            }
        }
    }

    /// The bracket `1 + x Q'/(2Q)`; `√m = √Q` times this.
    pub fn bracket(&self, x: T) -> Result<T> {
        let q = self.dual(x)?;
        Ok(T::one() + x * q.deriv / (T::c(2.0) * q.value))
    }
}

/// Closed forms of `q(x)` and `V(x)` for a built-in profile.
///
/// The potential expression references the parameter `omega`.
#[derive(Clone, Debug, Default)]
pub struct ClosedForms<T: Real> {
    pub q: Option<SharedFn<T>>,
    pub potential: Option<BoundExpr>,
}

impl<T: Real> ClosedForms<T> {
    /// The closed-form potential at frequency `omega`.
    pub fn potential(&self, omega: f64) -> Option<SharedFn<T>> {
        self.potential.as_ref().map(|v| {
            let mut v = v.clone();
            v.params.insert("omega".into(), omega);
            v.shared()
        })
    }
}

/// A built-in example profile.
#[derive(Clone, Debug)]
pub struct Builtin<T: Real> {
    pub mass: MassProfile<T>,
    pub deformation: DeformationProfile<T>,
    pub closed: ClosedForms<T>,
    pub formulas: Formulas,
    /// Non-fatal remarks about the parameters.
    pub warnings: Vec<String>,
}

/// The defining formulas of a built-in, as expression text in `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formulas {
    pub m: String,
    pub deformation: String,
    pub q: String,
    pub potential: String,
}

struct Spec<'a> {
    name: &'a str,
    params: Params,
    domain: (f64, f64),
    window: (f64, f64),
    m: String,
    q_def: String,
    q_origin: Option<OriginSeries>,
    qx2: String,
    q: String,
    v: String,
}

fn param_names(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "constant" => &[],
        "rational_cubic" | "singular_cubic" => &["lambda"],
        "power_law" => &["lambda", "sigma"],
        "asinh_log" | "log_ratio" => &["alpha", "offset"],
        "morse" => &["lambda", "beta"],
        "yukawa" => &["V0", "delta"],
        _ => return None,
    })
}

fn default_param(name: &str) -> f64 {
    match name {
        "sigma" => 2.0,
        "V0" => -1.0,
        "offset" => 0.0,
        _ => 1.0,
    }
}

fn invalid(name: &str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter { name: name.into(), value, reason }
}

/// Builds a named example profile. Missing parameters take defaults
/// (`lambda = alpha = beta = delta = 1`, `sigma = 2`, `V0 = -1`, `offset = 0`).
pub fn builtin<T: Real>(name: &str, params: &Params) -> Result<Builtin<T>> {
    let allowed = param_names(name).ok_or_else(|| Error::UnknownProfile(name.into()))?;
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::UnknownParameter { profile: name.into(), name: extra.clone() });
    }
    let mut p = Params::new();
    for &k in allowed {
        let v = params.get(k).copied().unwrap_or_else(|| default_param(k));
        if !v.is_finite() {
            return Err(invalid(k, v, "must be finite"));
        }
        p.insert(k.to_string(), v);
    }
    let get = |k: &str| p[k];
    let mut warnings = Vec::new();
    let inf = f64::INFINITY;
    let s = |t: &str| t.to_string();

    let spec = match name {
        "constant" => Spec {
            name,
            params: p.clone(),
            domain: (-inf, inf),
            window: (-20.0, 20.0),
            m: s("1"),
            q_def: s("1"),
            q_origin: None,
            qx2: s("x^2"),
            q: s("x"),
            v: s("omega^2/2*x^2"),
        },
        "rational_cubic" => {
            let l = get("lambda");
            if l <= 0.0 {
                return Err(invalid("lambda", l, "rational_cubic needs lambda > 0"));
            }
            Spec {
                name,
                params: p.clone(),
                domain: (-inf, inf),
                window: (-20.0, 20.0),
                m: s("(1+lambda*x^2)^(-3)"),
                q_def: s("1/(1+lambda*x^2)"),
                q_origin: None,
                qx2: s("x^2/(1+lambda*x^2)"),
                q: s("x/sqrt(1+lambda*x^2)"),
                v: s("omega^2/2*(x^2/(1+lambda*x^2))"),
            }
        }
        "singular_cubic" => {
            let l = get("lambda");
            if l <= 0.0 {
                return Err(invalid("lambda", l, "singular_cubic needs lambda > 0"));
            }
            let r = l.sqrt().recip();
            Spec {
                name,
                params: p.clone(),
                domain: (r, inf),
                window: (1.1 * r, 6.0 * r),
                m: s("(lambda*x^2-1)^(-3)"),
                q_def: s("1/(lambda*x^2-1)"),
                q_origin: None,
                qx2: s("x^2/(lambda*x^2-1)"),
                // increasing branch, so that q' = +sqrt(m)
                q: s("-x/sqrt(lambda*x^2-1)"),
                v: s("omega^2/2*(x^2/(lambda*x^2-1))"),
            }
        }
        "power_law" => {
            let l = get("lambda");
            let sigma = get("sigma");
            if l <= 0.0 {
                return Err(invalid("lambda", l, "power_law needs lambda > 0"));
            }
            if sigma == -2.0 || sigma == 0.0 {
                return Err(invalid("sigma", sigma, "sigma = -2 and sigma = 0 are excluded"));
            }
            if sigma < 1.0 || sigma.fract() != 0.0 {
                warnings.push(format!("sigma = {sigma} is not a natural number; the formulas are used as written"));
            }
            let sign = if sigma > -2.0 { "" } else { "-" };
            Spec {
                name,
                params: p.clone(),
                domain: (0.0, inf),
                window: (0.5, 5.0),
                m: s("(1+sigma/2)^2*lambda*x^sigma"),
                q_def: s("lambda*x^sigma"),
                q_origin: None,
                qx2: s("lambda*x^(sigma+2)"),
                q: format!("{sign}sqrt(lambda)*x^((sigma+2)/2)"),
                v: s("omega^2/2*lambda*x^(sigma+2)"),
            }
        }
        "asinh_log" => {
            let a = get("alpha");
            if a <= 0.0 {
                return Err(invalid("alpha", a, "asinh_log needs alpha > 0"));
            }
            Spec {
                name,
                params: p.clone(),
                domain: (-inf, inf),
                window: (-20.0, 20.0),
                m: s("1/(alpha^2*x^2+1)"),
                q_def: s("((asinh(alpha*x)+offset)/(alpha*x))^2"),
                q_origin: (get("offset") == 0.0).then(|| even_series(a, &[1.0, -1.0 / 3.0, 8.0 / 45.0, -4.0 / 35.0])),
                qx2: s("((asinh(alpha*x)+offset)/alpha)^2"),
                q: s("(asinh(alpha*x)+offset)/alpha"),
                v: s("omega^2/(2*alpha^2)*(ln(alpha*x+sqrt(alpha^2*x^2+1))+offset)^2"),
            }
        }
        "log_ratio" => {
            let a = get("alpha");
            if a <= 0.0 {
                return Err(invalid("alpha", a, "log_ratio needs alpha > 0"));
            }
            Spec {
                name,
                params: p.clone(),
                domain: (-1.0 / a, 1.0 / a),
                window: (-0.95 / a, 0.95 / a),
                m: s("(1-alpha^2*x^2)^(-2)"),
                q_def: s("((ln((1+alpha*x)/(1-alpha*x))+offset)/(2*alpha*x))^2"),
                q_origin: (get("offset") == 0.0).then(|| even_series(a, &[1.0, 2.0 / 3.0, 23.0 / 45.0, 44.0 / 105.0])),
                qx2: s("((ln((1+alpha*x)/(1-alpha*x))+offset)/(2*alpha))^2"),
                q: s("(ln((1+alpha*x)/(1-alpha*x))+offset)/(2*alpha)"),
                v: s("omega^2/(8*alpha^2)*(ln((1+alpha*x)/(1-alpha*x))+offset)^2"),
            }
        }
        "morse" => {
            let l = get("lambda");
            let b = get("beta");
            if b <= 0.0 {
                return Err(invalid("beta", b, "morse needs beta > 0"));
            }
            if l == 0.0 {
                return Err(invalid("lambda", l, "lambda = 0 makes m vanish"));
            }
            let edge = -std::f64::consts::LN_2 / b;
            let (domain, window) = if l > 0.0 {
                ((-inf, edge), (-4.0 / b, -0.8 / b))
            } else {
                ((0.0, inf), (0.8 / b, 6.0 / b))
            };
            Spec {
                name,
                params: p.clone(),
                domain,
                window,
                m: s("lambda*beta^2*(1-exp(-beta*x))^2/(1-2*exp(beta*x))"),
                q_def: s("lambda*(exp(-2*beta*x)-2*exp(-beta*x))/x^2"),
                q_origin: None,
                qx2: s("lambda*(exp(-2*beta*x)-2*exp(-beta*x))"),
                q: s("-sqrt(lambda*(exp(-2*beta*x)-2*exp(-beta*x)))"),
                v: s("lambda*omega^2/2*(exp(-2*beta*x)-2*exp(-beta*x))"),
            }
        }
        "yukawa" => {
            let v0 = get("V0");
            let d = get("delta");
            if v0 >= 0.0 {
                return Err(invalid("V0", v0, "yukawa needs V0 < 0 for a positive mass"));
            }
            if d < 0.0 {
                return Err(invalid("delta", d, "yukawa needs delta >= 0"));
            }
            Spec {
                name,
                params: p.clone(),
                domain: (0.0, inf),
                window: (0.5, 6.0),
                m: s("-V0*(1+delta*x)^2*exp(-delta*x)/(4*x^3)"),
                q_def: s("-V0*exp(-delta*x)/x^3"),
                q_origin: None,
                qx2: s("-V0*exp(-delta*x)/x"),
                q: s("-sqrt(-V0*exp(-delta*x)/x)"),
                v: s("-V0*omega^2/2*(exp(-delta*x)/x)"),
            }
        }
        _ => unreachable!("checked by param_names"),
    };
    build(spec, warnings)
}

/// `Σ c_k (αx)^{2k}` in powers of `x`, trusted for `|αx| < 1e-3`.
fn even_series(alpha: f64, c: &[f64]) -> OriginSeries {
    let mut coeffs = Vec::with_capacity(2 * c.len());
    for (k, &ck) in c.iter().enumerate() {
        if k > 0 {
            coeffs.push(0.0);
        }
        coeffs.push(ck * alpha.powi(2 * k as i32));
    }
    OriginSeries::new(coeffs, 1e-3 / alpha)
}

fn build<T: Real>(spec: Spec<'_>, warnings: Vec<String>) -> Result<Builtin<T>> {
    let domain = Interval::new(T::c(spec.domain.0), T::c(spec.domain.1));
    let window = Interval::new(T::c(spec.window.0), T::c(spec.window.1));
    let f = |text: &str| BoundExpr::builtin(text, &spec.params);
    let mass = MassProfile::new(spec.name, spec.params.clone(), f(&spec.m).shared(), domain, window)?;
    let mut qexpr = f(&spec.q_def);
    qexpr.origin = spec.q_origin;
    let deformation = DeformationProfile::new(qexpr.shared(), domain, window)?.with_qx2(f(&spec.qx2).shared());
    let closed = ClosedForms { q: Some(f(&spec.q).shared()), potential: Some(f(&spec.v)) };
    let formulas = Formulas { m: spec.m, deformation: spec.q_def, q: spec.q, potential: spec.v };
    Ok(Builtin { mass, deformation, closed, formulas, warnings })
}

/// `m = (√Q (1 + x Q'/(2Q)))²`; needs `Q''` for `m'`.
#[derive(Clone, Debug)]
struct MassFromDeformation<T: Real> {
    q: SharedFn<T>,
}

impl<T: Real> MassFromDeformation<T> {
    // √m (signed) and its derivative
    fn root(&self, x: T) -> std::result::Result<(T, T), EvalError> {
        let [q, dq, ddq] = self.q.second(x)?;
        let r = q.sqrt();
        let two = T::c(2.0);
        let s = r + x * dq / (two * r);
        let ds = dq / r + x * ddq / (two * r) - x * dq * dq / (T::c(4.0) * q * r);
        Ok((s, ds))
    }
}

impl<T: Real> UnivariateFn<T> for MassFromDeformation<T> {
    fn dual(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let (s, ds) = self.root(x)?;
        Ok(Dual::new(s * s, T::c(2.0) * s * ds))
    }

    fn value(&self, x: T) -> std::result::Result<T, EvalError> {
        let d = self.q.dual(x)?;
        let s = d.value.sqrt() * (T::one() + x * d.deriv / (T::c(2.0) * d.value));
        Ok(s * s)
    }
}

/// `q = sgn(1 + x Q'/(2Q)) √Q x`, the branch with `q' = +√m`.
#[derive(Clone, Debug)]
struct MapFromDeformation<T: Real> {
    q: SharedFn<T>,
}

impl<T: Real> UnivariateFn<T> for MapFromDeformation<T> {
    fn dual(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let d = self.q.dual(x)?;
        let r = d.value.sqrt();
        let bracket = T::one() + x * d.deriv / (T::c(2.0) * d.value);
        let sign = if bracket < T::zero() { -T::one() } else { T::one() };
        Ok(Dual::new(sign * r * x, sign * r * bracket))
    }
}

/// Derives `m` from `Q`. The domain is trimmed to the longest stretch of the
/// window on which the bracket `1 + x Q'/(2Q)` keeps a nonzero sign.
pub fn mass_from_deformation<T: Real>(d: &DeformationProfile<T>) -> Result<MassProfile<T>> {
    let w = d.window();
    let xs = w.interior_points(VALIDATION_SAMPLES);
    let signs: Vec<i8> = xs
        .iter()
        .map(|&x| {
            d.bracket(x).map(|b| {
                if b > T::zero() {
                    1
                } else if b < T::zero() {
                    -1
                } else {
                    0
                }
            })
        })
        .collect::<Result<_>>()?;

    // longest run of equal nonzero sign
    let (mut best, mut start) = ((0usize, 0usize), 0usize);
    for i in 1..=signs.len() {
        if i == signs.len() || signs[i] != signs[start] {
            if signs[start] != 0 && i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i;
        }
    }
    if best.1 == best.0 {
        return Err(Error::NowherePositive { what: "m", lo: w.lo.to_f64_lossy(), hi: w.hi.to_f64_lossy() });
    }
    let (i0, i1) = best;
    let mut domain = d.domain();
    let mut window = w;
    if i0 > 0 {
        domain.lo = bisect_sign(|x| d.bracket(x), xs[i0 - 1], xs[i0])?.1;
        window.lo = xs[i0];
    }
    if i1 < xs.len() {
        domain.hi = bisect_sign(|x| d.bracket(x), xs[i1 - 1], xs[i1])?.0;
        window.hi = xs[i1 - 1];
    }
    let m = Arc::new(MassFromDeformation { q: d.function().clone() });
    MassProfile::new("from Q", Params::new(), m, domain, window)
}

/// The closed-form map `q = √Q x` (on the branch with `q' > 0`) implied by `Q`.
pub fn map_from_deformation<T: Real>(d: &DeformationProfile<T>) -> SharedFn<T> {
    Arc::new(MapFromDeformation { q: d.function().clone() })
}

// shrinks [a, b] around a sign change of f, keeping f(a)'s sign at a
fn bisect_sign<T: Real>(f: impl Fn(T) -> Result<T>, mut a: T, mut b: T) -> Result<(T, T)> {
    let fa = f(a)?;
    for _ in 0..200 {
        let mid = (a + b) * T::c(0.5);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid)?;
        if (fm > T::zero()) == (fa > T::zero()) && fm != T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a, b))
}

/// `Q = (q/x)²` from a coordinate map, with `Q(0) = m(0)`.
#[derive(Clone, Debug)]
struct DeformationFromMap<T: Real> {
    m: SharedFn<T>,
    map: CoordinateMap<T>,
    q_origin: T,
    near: T,
}

impl<T: Real> DeformationFromMap<T> {
    /// `q/x = ∫₀¹ √m(t x) dt` and its derivative, free of cancellation near 0.
    fn mean_root(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let tol = T::tol(1e-14);
        let avg = adaptive_simpson(|t| self.m.value(t * x).map(|m| m.sqrt()), T::zero(), T::one(), tol);
        let slope = adaptive_simpson(
            |t| {
                let d = self.m.dual(t * x)?;
                Ok(t * d.deriv / (T::c(2.0) * d.value.sqrt()))
            },
            T::zero(),
            T::one(),
            tol,
        );
        match (avg, slope) {
            (Ok(a), Ok(s)) => Ok(Dual::new(a, s)),
            (Err(e), _) | (_, Err(e)) => Err(quad_to_eval(e)),
        }
    }
}

fn quad_to_eval(e: crate::quad::QuadError) -> EvalError {
    match e {
        crate::quad::QuadError::Integrand { source, .. } => source,
        crate::quad::QuadError::NoConvergence { .. } => {
            crate::expr::DomainError::NonDifferentiable("quadrature did not converge").into()
        }
    }
}

impl<T: Real> UnivariateFn<T> for DeformationFromMap<T> {
    fn dual(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let ratio = if x.abs() < self.near {
            self.mean_root(x)?
        } else {
            let q = self.map.forward(x).map_err(|e| match e {
                Error::Eval(e) => e,
                Error::Quad(q) => quad_to_eval(q),
                _ => crate::expr::DomainError::NonFinite.into(),
            })? - self.q_origin;
            let root = self.m.value(x)?.sqrt();
            Dual::new(q / x, (root * x - q) / (x * x))
        };
        Ok(Dual::new(ratio.value * ratio.value, T::c(2.0) * ratio.value * ratio.deriv))
    }
}

/// `Q(x) = (q(x)/x)²` from a map built on `p`.
///
/// When the domain contains the origin the map must pass through `q(0) = 0`;
/// the removable limit `Q(0) = m(0)` is then used.
pub fn deformation_from_mass<T: Real>(p: &MassProfile<T>, map: &CoordinateMap<T>) -> Result<DeformationProfile<T>> {
    let domain = p.domain();
    let window = p.window();
    let mut near = T::zero();
    if domain.contains(T::zero()) && p.m(T::zero()).is_ok_and(|m| m > T::zero() && m.is_finite()) {
        let q0 = map.forward(T::zero())?;
        if q0.abs() > T::tol(1e-9) {
            return Err(Error::OriginOffset { q0: q0.to_f64_lossy() });
        }
        near = (window.hi - window.lo) * T::c(1e-2);
    }
    let f = DeformationFromMap { m: p.function().clone(), map: map.clone(), q_origin: T::zero(), near };
    DeformationProfile::new(Arc::new(f), domain, window)
}

/// `V(x) = ½ω² Q(x) x²`.
#[derive(Clone, Debug)]
struct DeformedPotential<T: Real> {
    d: DeformationProfile<T>,
    half_w2: T,
}

impl<T: Real> UnivariateFn<T> for DeformedPotential<T> {
    fn dual(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let v = self.d.qx2_dual(x).map_err(|e| match e {
            Error::Eval(e) => e,
            _ => crate::expr::DomainError::NonFinite.into(),
        })?;
        Ok(Dual::new(v.value * self.half_w2, v.deriv * self.half_w2))
    }
}

pub fn deformed_potential<T: Real>(d: &DeformationProfile<T>, omega: T) -> Result<SharedFn<T>> {
    if !(omega > T::zero()) {
        return Err(invalid("omega", omega.to_f64_lossy(), "must be positive"));
    }
    Ok(Arc::new(DeformedPotential { d: d.clone(), half_w2: omega * omega * T::c(0.5) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn rational_cubic_values() {
        let b = builtin::<f64>("rational_cubic", &params(&[("lambda", 1.0)])).unwrap();
        assert!((b.mass.m(1.0).unwrap() - 0.125).abs() < 1e-15);
        let q = b.closed.q.as_ref().unwrap().value(1.0).unwrap();
        assert!((q - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn power_law_sigma_two() {
        let b = builtin::<f64>("power_law", &params(&[("lambda", 1.0), ("sigma", 2.0)])).unwrap();
        assert!(b.warnings.is_empty());
        for x in [0.7, 1.3, 2.0] {
            assert!((b.mass.m(x).unwrap() - 4.0 * x * x).abs() < 1e-12);
            assert!((b.closed.q.as_ref().unwrap().value(x).unwrap() - x * x).abs() < 1e-12);
            let v = deformed_potential(&b.deformation, 1.5).unwrap().value(x).unwrap();
            assert!((v - 1.5f64.powi(2) * x.powi(4) / 2.0).abs() < 1e-12);
        }
        assert!(builtin::<f64>("power_law", &params(&[("sigma", -2.0)])).is_err());
        assert!(builtin::<f64>("power_law", &params(&[("sigma", 0.0)])).is_err());
        let b = builtin::<f64>("power_law", &params(&[("sigma", 1.5)])).unwrap();
        assert_eq!(b.warnings.len(), 1);
    }

    #[test]
    fn unknown_names_and_parameters() {
        assert!(matches!(builtin::<f64>("quartic", &Params::new()), Err(Error::UnknownProfile(_))));
        assert!(matches!(
            builtin::<f64>("morse", &params(&[("alpha", 1.0)])),
            Err(Error::UnknownParameter { .. })
        ));
        assert!(builtin::<f64>("yukawa", &params(&[("V0", 1.0)])).is_err());
    }

    #[test]
    fn deformed_potential_examples() {
        let b = builtin::<f64>("rational_cubic", &params(&[("lambda", 1.0)])).unwrap();
        assert!((deformed_potential(&b.deformation, 1.0).unwrap().value(1.0).unwrap() - 0.25).abs() < 1e-15);
        let c = builtin::<f64>("constant", &Params::new()).unwrap();
        assert!((deformed_potential(&c.deformation, 2.0).unwrap().value(1.0).unwrap() - 2.0).abs() < 1e-15);
        let m = builtin::<f64>("morse", &params(&[("lambda", 1.0), ("beta", 1.0)])).unwrap();
        // x = 0 sits outside the lambda > 0 domain; the closed form still evaluates there
        let v = m.closed.potential(1.0).unwrap().value(0.0).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        let inside = -2.0;
        let a = deformed_potential(&m.deformation, 1.0).unwrap().value(inside).unwrap();
        let b = m.closed.potential(1.0).unwrap().value(inside).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mass_from_deformation_examples() {
        let b = builtin::<f64>("rational_cubic", &params(&[("lambda", 1.0)])).unwrap();
        let m = mass_from_deformation(&b.deformation).unwrap();
        for x in [-3.0f64, -0.4, 0.0, 1.0, 2.5] {
            let want = (1.0 + x * x).powi(-3);
            assert!((m.m(x).unwrap() - want).abs() < 1e-12);
            let dm = m.m_prime(x).unwrap();
            assert!((dm + 6.0 * x * (1.0 + x * x).powi(-4)).abs() < 1e-12);
        }
        let c = builtin::<f64>("constant", &Params::new()).unwrap();
        let m = mass_from_deformation(&c.deformation).unwrap();
        assert_eq!(m.m(3.0).unwrap(), 1.0);
    }

    #[test]
    fn bracket_sign_change_trims_domain() {
        // Q = 1 - x^2/4 on (-1.9, 1.9): bracket = (1 - x^2/2)/(1 - x^2/4) vanishes at ±√2
        let e = Expression::parse("1-x^2/4").unwrap();
        let d = DeformationProfile::from_expr(e, Params::new(), Interval::new(-1.9, 1.9), Interval::new(-1.8, 1.8))
            .unwrap();
        let m = mass_from_deformation(&d).unwrap();
        let dom = m.domain();
        assert!((dom.lo + 2f64.sqrt()).abs() < 1e-9 && (dom.hi - 2f64.sqrt()).abs() < 1e-9);
    }
}
