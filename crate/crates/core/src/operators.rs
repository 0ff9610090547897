//! Banded grid operators and the discretized oscillator operators.
//!
//! Everything is real: the momentum `p = -i π` is represented by
//! `π = ∂ - m'/(4m)`, so `[x, p] = i` becomes `[X, π] = -I` and the ladder
//! operators carry no imaginary unit.

use std::sync::Arc;

use serde::Serialize;

use crate::coord::{CoordinateMap, Grid, QRange};
use crate::error::{Error, Result};
use crate::expr::{Dual, EvalError};
use crate::func::{SharedFn, UnivariateFn};
use crate::profiles::MassProfile;
use crate::scalar::{max_abs, Real};

/// Rows excluded at each end by interior residuals.
pub const INTERIOR_MARGIN: usize = 5;

/// Real banded matrix on a grid, stored row-wise with `2 band + 1` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct GridOperator<T: Real> {
    grid: Grid<T>,
    band: usize,
    data: Vec<T>,
    symmetric: bool,
}

impl<T: Real> GridOperator<T> {
    pub fn zeros(grid: &Grid<T>, band: usize) -> Self {
        let n = grid.n();
        Self { grid: grid.clone(), band, data: vec![T::zero(); n * (2 * band + 1)], symmetric: false }
    }

    pub fn identity(grid: &Grid<T>) -> Self {
        Self::diagonal(grid, &vec![T::one(); grid.n()])
    }

    pub fn diagonal(grid: &Grid<T>, d: &[T]) -> Self {
        assert_eq!(d.len(), grid.n(), "diagonal length");
        Self { grid: grid.clone(), band: 0, data: d.to_vec(), symmetric: true }
    }

    /// `(u_{i+1} - u_{i-1}) / 2h` with zero outside the grid.
    pub fn central_difference(grid: &Grid<T>) -> Self {
        let mut op = Self::zeros(grid, 1);
        let c = T::one() / (T::c(2.0) * grid.h());
        for i in 0..grid.n() {
            if i > 0 {
                op.set(i, i - 1, -c);
            }
            if i + 1 < grid.n() {
                op.set(i, i + 1, c);
            }
        }
        op
    }

    /// `(u_{i+1} - 2u_i + u_{i-1}) / h²`.
    pub fn laplacian(grid: &Grid<T>) -> Self {
        let mut op = Self::zeros(grid, 1);
        let c = T::one() / (grid.h() * grid.h());
        for i in 0..grid.n() {
            op.set(i, i, -T::c(2.0) * c);
            if i > 0 {
                op.set(i, i - 1, c);
            }
            if i + 1 < grid.n() {
                op.set(i, i + 1, c);
            }
        }
        op.symmetric = true;
        op
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// Whether the operator is symmetric by construction.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn width(&self) -> usize {
        2 * self.band + 1
    }

    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.band)..(i + self.band + 1).min(self.n())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i.abs_diff(j) > self.band || i >= self.n() || j >= self.n() {
            return T::zero();
        }
        self.data[i * self.width() + j + self.band - i]
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i.abs_diff(j) <= self.band && i < self.n() && j < self.n(), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.band - i] = v;
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.n() {
            return Err(Error::GridMismatch);
        }
        Ok((0..self.n()).map(|i| self.cols(i).map(|j| self.get(i, j) * v[j]).sum()).collect())
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut out = Self::zeros(&self.grid, self.band + other.band);
        for i in 0..self.n() {
            for k in self.cols(i) {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in other.cols(k) {
                    let w = out.width();
                    let slot = i * w + j + out.band - i;
                    out.data[slot] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self · other - other · self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        self.same_grid(other)?;
        let mut out = Self::zeros(&self.grid, self.band.max(other.band));
        for i in 0..self.n() {
            for j in out.cols(i) {
                out.set(i, j, self.get(i, j) + sign * other.get(i, j));
            }
        }
        out.symmetric = self.symmetric && other.symmetric;
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add_diagonal(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.n(), "diagonal length");
        let mut out = self.clone();
        for (i, &v) in d.iter().enumerate() {
            let cur = out.get(i, i);
            out.set(i, i, cur + v);
        }
        out
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n() {
            for j in self.cols(i) {
                out.set(i, j, self.get(i, j) * d[i]);
            }
        }
        out.symmetric = false;
        out
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n() {
            for j in self.cols(i) {
                out.set(i, j, self.get(i, j) * d[j]);
            }
        }
        out.symmetric = false;
        out
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n()).map(|i| self.cols(i).map(|j| self.get(i, j)).sum()).collect()
    }

    fn interior(&self, margin: usize) -> std::ops::Range<usize> {
        margin.min(self.n())..self.n().saturating_sub(margin)
    }

    /// `max |(self · v)_i|` over rows at least `margin` from either end.
    pub fn interior_action(&self, v: &[T], margin: usize) -> Result<T> {
        let r = self.apply(v)?;
        Ok(max_abs(self.interior(margin).map(|i| r[i])))
    }

    /// Interior residual on the constant vector, i.e. the largest row sum.
    pub fn interior_row_residual(&self, margin: usize) -> T {
        let sums = self.row_sums();
        max_abs(self.interior(margin).map(|i| sums[i]))
    }

    pub fn max_abs_entry(&self) -> T {
        max_abs(self.data.iter().copied())
    }

    pub fn max_interior_entry(&self, margin: usize) -> T {
        max_abs(self.interior(margin).flat_map(|i| self.cols(i).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)))
    }

    /// `max |a_ij - a_ji|` within the band.
    pub fn symmetry_defect(&self) -> T {
        max_abs((0..self.n()).flat_map(|i| self.cols(i).map(move |j| (i, j))).map(|(i, j)| self.get(i, j) - self.get(j, i)))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.grid, self.band);
        for i in 0..self.n() {
            for j in self.cols(i) {
                out.set(j, i, self.get(i, j));
            }
        }
        out.symmetric = self.symmetric;
        out
    }

    /// Diagonal and sub-diagonal of a symmetric operator with band ≤ 1.
    pub fn tridiagonal(&self) -> Option<(Vec<T>, Vec<T>)> {
        if self.band > 1 {
            return None;
        }
        let scale = self.max_abs_entry();
        if self.symmetry_defect() > T::c(1e-12) * scale {
            return None;
        }
        let d = (0..self.n()).map(|i| self.get(i, i)).collect();
        let e = (1..self.n()).map(|i| self.get(i, i - 1)).collect();
        Some((d, e))
    }

    /// Dense row-major copy, for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Von Roos ordering exponents with `a + b = -½`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderingParams {
    pub a: f64,
    pub b: f64,
}

impl OrderingParams {
    /// The ordering the ladder commutator forces.
    pub const FORCED: Self = Self { a: -0.25, b: -0.25 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || (a + b + 0.5).abs() > 1e-12 {
            return Err(Error::Config(format!("ordering needs a + b = -1/2, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    /// `b = -½ - a`.
    pub fn from_a(a: f64) -> Result<Self> {
        Self::new(a, -0.5 - a)
    }
}

impl Default for OrderingParams {
    fn default() -> Self {
        Self::FORCED
    }
}

/// Frequency, grid and ordering (units with ħ = m∘ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillatorConfig<T> {
    pub omega: T,
    pub lo: T,
    pub hi: T,
    pub n: usize,
    pub ordering: OrderingParams,
}

impl<T: Real> OscillatorConfig<T> {
    pub const MIN_POINTS: usize = 16;

    pub fn new(omega: T, lo: T, hi: T, n: usize) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::Config(format!("need at least {} grid points, got {n}", Self::MIN_POINTS)));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("grid bounds [{lo}, {hi}] must be finite and increasing")));
        }
        Ok(Self { omega, lo, hi, n, ordering: OrderingParams::FORCED })
    }

    pub fn with_ordering(mut self, ordering: OrderingParams) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_omega(mut self, omega: T) -> Self {
        self.omega = omega;
        self
    }

    pub fn grid(&self) -> Result<Grid<T>> {
        Grid::x(self.lo, self.hi, self.n)
    }
}

fn at_nodes<T: Real>(p: &MassProfile<T>, g: &Grid<T>, power: T) -> Result<Vec<T>> {
    p.powers(g.points(), power)
}

// m^power at x_{i+½} for i = -1..n
fn at_midpoints<T: Real>(p: &MassProfile<T>, g: &Grid<T>, power: T) -> Result<Vec<T>> {
    (-1..g.n() as isize).map(|i| p.m(g.midpoint(i)).map(|m| m.powf(power))).collect()
}

/// `q(x_i)` at every node.
pub fn map_nodes<T: Real>(map: &CoordinateMap<T>, g: &Grid<T>) -> Result<Vec<T>> {
    g.map(|x| map.forward(x))
}

/// `π = ∂ - m'/(4m)`.
pub fn momentum_pi<T: Real>(p: &MassProfile<T>, g: &Grid<T>) -> Result<GridOperator<T>> {
    let shift = g.map(|x| {
        let d = p.m_dual(x)?;
        Ok(-d.deriv / (T::c(4.0) * d.value))
    })?;
    Ok(GridOperator::central_difference(g).add_diagonal(&shift))
}

/// `T = -½ m^a ∂ m^{2b} ∂ m^a` with node weights `m^a` and midpoint weights `m^{2b}`.
pub fn kinetic_vonroos<T: Real>(p: &MassProfile<T>, g: &Grid<T>, ord: OrderingParams) -> Result<GridOperator<T>> {
    let ord = OrderingParams::new(ord.a, ord.b)?;
    let f = at_nodes(p, g, T::c(ord.a))?;
    let w = at_midpoints(p, g, T::c(2.0 * ord.b))?;
    let c = T::one() / (T::c(2.0) * g.h() * g.h());
    let n = g.n();
    let mut op = GridOperator::zeros(g, 1);
    for i in 0..n {
        // w[i] sits at x_{i-½}, w[i+1] at x_{i+½}
        op.set(i, i, c * f[i] * f[i] * (w[i] + w[i + 1]));
        if i + 1 < n {
            let v = -c * f[i] * w[i + 1] * f[i + 1];
            op.set(i, i + 1, v);
            op.set(i + 1, i, v);
        }
    }
    op.symmetric = true;
    Ok(op)
}

/// `T₁ = -½ m^{-¼} ∂ m^{-½} ∂ m^{-¼}`.
pub fn kinetic_t1<T: Real>(p: &MassProfile<T>, g: &Grid<T>) -> Result<GridOperator<T>> {
    kinetic_vonroos(p, g, OrderingParams::FORCED)
}

fn potential_nodes<T: Real>(g: &Grid<T>, v: &dyn UnivariateFn<T>) -> Result<Vec<T>> {
    g.map(|x| Ok(v.value(x)?))
}

/// `H₁ = T₁ + V`.
pub fn hamiltonian_h1<T: Real>(p: &MassProfile<T>, g: &Grid<T>, v: &dyn UnivariateFn<T>) -> Result<GridOperator<T>> {
    hamiltonian_vonroos(p, g, OrderingParams::FORCED, v)
}

/// Von Roos kinetic term for any admissible ordering plus `V`.
pub fn hamiltonian_vonroos<T: Real>(
    p: &MassProfile<T>,
    g: &Grid<T>,
    ord: OrderingParams,
    v: &dyn UnivariateFn<T>,
) -> Result<GridOperator<T>> {
    Ok(kinetic_vonroos(p, g, ord)?.add_diagonal(&potential_nodes(g, v)?))
}

/// A q-grid spanning `[q(lo), q(hi)]` with the same number of nodes.
pub fn q_grid<T: Real>(map: &CoordinateMap<T>, g: &Grid<T>) -> Result<Grid<T>> {
    Grid::q(map.forward(g.lo())?, map.forward(g.hi())?, g.n())
}

/// `H₂ = -½ ∂_q² + V(q)` on a q-grid inside the attainable range.
pub fn hamiltonian_h2_on_q<T: Real>(
    gq: &Grid<T>,
    v: &dyn UnivariateFn<T>,
    range: &QRange<T>,
) -> Result<GridOperator<T>> {
    for q in [gq.lo(), gq.hi()] {
        let inside = range.lo.map_or(true, |lo| q >= lo) && range.hi.map_or(true, |hi| q <= hi);
        if !inside {
            return Err(Error::OutOfRange {
                q: q.to_f64_lossy(),
                lo: range.lo.map_or(f64::NEG_INFINITY, |v| v.to_f64_lossy()),
                hi: range.hi.map_or(f64::INFINITY, |v| v.to_f64_lossy()),
            });
        }
    }
    let lap = GridOperator::laplacian(gq).scale(T::c(-0.5));
    Ok(lap.add_diagonal(&potential_nodes(gq, v)?))
}

/// `H₂ = -½ m^{-½} ∂ m^{-½} ∂ + V` by composing first-order factors (band 2).
pub fn hamiltonian_h2_on_x<T: Real>(p: &MassProfile<T>, g: &Grid<T>, v: &dyn UnivariateFn<T>) -> Result<GridOperator<T>> {
    let u = at_nodes(p, g, T::c(-0.5))?;
    let d = GridOperator::central_difference(g);
    let first = d.scale_rows(&u);
    let kin = first.compose(&first)?.scale(T::c(-0.5));
    Ok(kin.add_diagonal(&potential_nodes(g, v)?))
}

/// `A = c m^b ∂ m^a + k q` and `A† = -c m^a ∂ m^b + k q`,
/// `c = 1/√(2ω)`, `k = √(ω/2)`.
pub fn ladder_a<T: Real>(
    p: &MassProfile<T>,
    g: &Grid<T>,
    q: &[T],
    omega: T,
    ord: OrderingParams,
    dagger: bool,
) -> Result<GridOperator<T>> {
    let ma = at_nodes(p, g, T::c(ord.a))?;
    let mb = at_nodes(p, g, T::c(ord.b))?;
    let c = T::one() / (T::c(2.0) * omega).sqrt();
    let k = (omega * T::c(0.5)).sqrt();
    let d = GridOperator::central_difference(g);
    let (left, right, sign) = if dagger { (&ma, &mb, -c) } else { (&mb, &ma, c) };
    let kq: Vec<T> = q.iter().map(|&v| k * v).collect();
    Ok(d.scale_rows(left).scale_cols(right).scale(sign).add_diagonal(&kq))
}

/// `B = c m^{-½} ∂ + k q` and `B† = -c m^{-½} ∂ + k q`.
pub fn ladder_b<T: Real>(p: &MassProfile<T>, g: &Grid<T>, q: &[T], omega: T, dagger: bool) -> Result<GridOperator<T>> {
    let u = at_nodes(p, g, T::c(-0.5))?;
    let c = T::one() / (T::c(2.0) * omega).sqrt();
    let k = (omega * T::c(0.5)).sqrt();
    let sign = if dagger { -c } else { c };
    let kq: Vec<T> = q.iter().map(|&v| k * v).collect();
    Ok(GridOperator::central_difference(g).scale_rows(&u).scale(sign).add_diagonal(&kq))
}

/// `P = (1/√(2m)) ∂`.
pub fn noether_momentum<T: Real>(p: &MassProfile<T>, g: &Grid<T>) -> Result<GridOperator<T>> {
    let w = g.map(|x| Ok(T::one() / (T::c(2.0) * p.m(x)?).sqrt()))?;
    Ok(GridOperator::central_difference(g).scale_rows(&w))
}

/// `V = ½ω² q(x)²` with `V' = ω² q √m`.
#[derive(Clone, Debug)]
pub struct OscillatorPotential<T: Real> {
    map: CoordinateMap<T>,
    half_w2: T,
}

impl<T: Real> UnivariateFn<T> for OscillatorPotential<T> {
    fn dual(&self, x: T) -> std::result::Result<Dual<T>, EvalError> {
        let conv = |e: Error| match e {
            Error::Eval(e) => e,
            _ => crate::expr::DomainError::NonFinite.into(),
        };
        let q = self.map.forward(x).map_err(conv)?;
        let dq = self.map.dq_dx(x).map_err(conv)?;
        Ok(Dual::new(self.half_w2 * q * q, T::c(2.0) * self.half_w2 * q * dq))
    }
}

pub fn oscillator_potential<T: Real>(map: &CoordinateMap<T>, omega: T) -> SharedFn<T> {
    Arc::new(OscillatorPotential { map: map.clone(), half_w2: omega * omega * T::c(0.5) })
}

/// `V = ½ω² y²` in the variable itself (for q-grids or constant mass).
#[derive(Clone, Copy, Debug)]
pub struct Harmonic<T>(pub T);

impl<T: Real> UnivariateFn<T> for Harmonic<T> {
    fn dual(&self, y: T) -> std::result::Result<Dual<T>, EvalError> {
        let w2 = self.0 * self.0;
        Ok(Dual::new(w2 * y * y * T::c(0.5), w2 * y))
    }

    fn second(&self, y: T) -> std::result::Result<[T; 3], EvalError> {
        let w2 = self.0 * self.0;
        Ok([w2 * y * y * T::c(0.5), w2 * y, w2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::profiles::builtin;

    fn profile(name: &str, kv: &[(&str, f64)]) -> MassProfile<f64> {
        let p: Params = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        builtin::<f64>(name, &p).unwrap().mass
    }

    #[test]
    fn banded_algebra() {
        let g = Grid::<f64>::x(0.0, 1.0, 20).unwrap();
        let d = GridOperator::central_difference(&g);
        let l = GridOperator::laplacian(&g);
        assert_eq!(d.commutator(&d).unwrap().max_abs_entry(), 0.0);
        let dd = d.compose(&d).unwrap();
        assert_eq!(dd.band(), 2);
        let v: Vec<f64> = g.points().iter().map(|x| x.sin()).collect();
        let a = dd.apply(&v).unwrap();
        let b = d.apply(&d.apply(&v).unwrap()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        assert_eq!(l.apply(&vec![0.0; 20]).unwrap(), vec![0.0; 20]);
        assert!(l.is_symmetric() && l.symmetry_defect() == 0.0);
        let other = GridOperator::identity(&Grid::x(0.0, 2.0, 20).unwrap());
        assert!(matches!(d.compose(&other), Err(Error::GridMismatch)));
    }

    #[test]
    fn momentum_diagonal() {
        let p = profile("rational_cubic", &[("lambda", 1.0)]);
        // node at x = 1 exactly: [-3, 3] with n = 5 gives nodes -2..2
        let g = Grid::x(-3.0, 3.0, 5).unwrap();
        let pi = momentum_pi(&p, &g).unwrap();
        assert!((pi.get(3, 3) - 0.75).abs() < 1e-14);
        let c = profile("constant", &[]);
        let pi = momentum_pi(&c, &g).unwrap();
        assert_eq!(pi, GridOperator::central_difference(&g));
    }

    #[test]
    fn pi_on_constant_vector_gives_shift() {
        let p = profile("rational_cubic", &[("lambda", 1.0)]);
        let g = Grid::x(-3.0, 3.0, 200).unwrap();
        let pi = momentum_pi(&p, &g).unwrap();
        let r = pi.apply(&vec![1.0; 200]).unwrap();
        for i in 1..199 {
            let x = g.points()[i];
            let want = 6.0 * x / (4.0 * (1.0 + x * x));
            assert!((r[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kinetic_orderings() {
        let g = Grid::x(-3.0, 3.0, 64).unwrap();
        let c = profile("constant", &[]);
        let lap = GridOperator::laplacian(&g).scale(-0.5);
        for a in [-0.25, 0.0, -0.5, 0.3] {
            let t = kinetic_vonroos(&c, &g, OrderingParams::from_a(a).unwrap()).unwrap();
            assert!(t.sub(&lap).unwrap().max_abs_entry() <= 1e-12 * lap.max_abs_entry());
        }
        let p = profile("rational_cubic", &[("lambda", 1.0)]);
        let t1 = kinetic_t1(&p, &g).unwrap();
        let forced = kinetic_vonroos(&p, &g, OrderingParams::new(-0.25, -0.25).unwrap()).unwrap();
        assert_eq!(t1, forced);
        assert_eq!(t1.symmetry_defect(), 0.0);
        let bdd = kinetic_vonroos(&p, &g, OrderingParams::from_a(0.0).unwrap()).unwrap();
        assert_eq!(bdd.symmetry_defect(), 0.0);
        assert!(bdd.sub(&t1).unwrap().max_abs_entry() > 1e-3);
        assert!(OrderingParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn constant_mass_ladders_coincide() {
        let g = Grid::x(-5.0, 5.0, 50).unwrap();
        let c = profile("constant", &[]);
        let q = g.points().to_vec();
        for dagger in [false, true] {
            let a = ladder_a(&c, &g, &q, 1.0, OrderingParams::FORCED, dagger).unwrap();
            let b = ladder_b(&c, &g, &q, 1.0, dagger).unwrap();
            assert!(a.sub(&b).unwrap().max_abs_entry() < 1e-15);
        }
        let a = ladder_a(&c, &g, &q, 1.0, OrderingParams::FORCED, false).unwrap();
        let s = 0.5f64.sqrt();
        let want = GridOperator::central_difference(&g).add_diagonal(&q).scale(s);
        assert!(a.sub(&want).unwrap().max_abs_entry() < 1e-14);
    }

    #[test]
    fn h2_on_x_constant_limit() {
        let g = Grid::x(-5.0, 5.0, 60).unwrap();
        let c = profile("constant", &[]);
        let v = Harmonic(1.0);
        let h2 = hamiltonian_h2_on_x(&c, &g, &v).unwrap();
        let d = GridOperator::central_difference(&g);
        let want = d.compose(&d).unwrap().scale(-0.5).add_diagonal(&potential_nodes(&g, &v).unwrap());
        assert!(h2.sub(&want).unwrap().max_abs_entry() < 1e-12);
        assert_eq!(h2.band(), 2);
    }

    #[test]
    fn canonical_commutator_is_exact() {
        let g = Grid::x(-3.0, 3.0, 500).unwrap();
        for p in [profile("constant", &[]), profile("rational_cubic", &[("lambda", 1.0)])] {
            let x = GridOperator::diagonal(&g, g.points());
            let pi = momentum_pi(&p, &g).unwrap();
            let r = x.commutator(&pi).unwrap().add(&GridOperator::identity(&g)).unwrap();
            assert!(r.interior_row_residual(INTERIOR_MARGIN) < 1e-12);
        }
    }
}
