//! Classical motion with position-dependent mass.
//!
//! The equation of motion `√m d/dt(√m ẋ) = -V'` is integrated as
//! `ẍ = (-V' - ½ m' ẋ²) / m` with fixed-step RK4.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::UnivariateFn;
use crate::profiles::MassProfile;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint<T> {
    pub t: T,
    pub x: T,
    pub v: T,
    /// `½ m v² + V`.
    pub energy: T,
    /// `√m v`.
    pub pseudo_momentum: T,
}

/// Integrated points and, when the run stopped early, the reason.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub points: Vec<TrajectoryPoint<T>>,
    pub stopped: Option<Error>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &TrajectoryPoint<T> {
        self.points.last().expect("a trajectory holds its initial point")
    }

    /// `max |E(t) - E(0)| / |E(0)|`, or the absolute drift when `E(0) = 0`.
    pub fn energy_drift(&self) -> T {
        let e0 = self.points[0].energy;
        let scale = if e0 == T::zero() { T::one() } else { e0.abs() };
        self.points.iter().fold(T::zero(), |a, p| a.max((p.energy - e0).abs() / scale))
    }

    /// `max |√m v - √m₀ v₀|`.
    pub fn pseudo_momentum_drift(&self) -> T {
        let p0 = self.points[0].pseudo_momentum;
        self.points.iter().fold(T::zero(), |a, p| a.max((p.pseudo_momentum - p0).abs()))
    }
}

fn in_domain<T: Real>(p: &MassProfile<T>, x: T) -> Result<()> {
    let d = p.domain();
    if d.contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideDomain { x: x.to_f64_lossy(), lo: d.lo.to_f64_lossy(), hi: d.hi.to_f64_lossy() })
    }
}

/// `ẍ = (-V'(x) - ½ m'(x) v²) / m(x)`.
pub fn acceleration<T: Real>(p: &MassProfile<T>, potential: &dyn UnivariateFn<T>, x: T, v: T) -> Result<T> {
    in_domain(p, x)?;
    let m = p.m_dual(x)?;
    if !(m.value > T::zero()) {
        return Err(Error::NotPositive { what: "m", x: x.to_f64_lossy(), value: m.value.to_f64_lossy() });
    }
    let force = potential.dual(x)?.deriv;
    Ok((-force - T::c(0.5) * m.deriv * v * v) / m.value)
}

fn point<T: Real>(p: &MassProfile<T>, potential: &dyn UnivariateFn<T>, t: T, x: T, v: T) -> Result<TrajectoryPoint<T>> {
    let m = p.m(x)?;
    Ok(TrajectoryPoint {
        t,
        x,
        v,
        energy: T::c(0.5) * m * v * v + potential.value(x)?,
        pseudo_momentum: m.sqrt() * v,
    })
}

fn rk4_step<T: Real>(p: &MassProfile<T>, potential: &dyn UnivariateFn<T>, x: T, v: T, dt: T) -> Result<(T, T)> {
    let half = dt * T::c(0.5);
    let a1 = acceleration(p, potential, x, v)?;
    let (x2, v2) = (x + half * v, v + half * a1);
    let a2 = acceleration(p, potential, x2, v2)?;
    let (x3, v3) = (x + half * v2, v + half * a2);
    let a3 = acceleration(p, potential, x3, v3)?;
    let (x4, v4) = (x + dt * v3, v + dt * a3);
    let a4 = acceleration(p, potential, x4, v4)?;
    let sixth = dt / T::c(6.0);
    let xn = x + sixth * (v + T::c(2.0) * (v2 + v3) + v4);
    let vn = v + sixth * (a1 + T::c(2.0) * (a2 + a3) + a4);
    in_domain(p, xn)?;
    Ok((xn, vn))
}

/// Classic RK4 from `(x0, v0)` for `steps` steps of `dt`.
///
/// Leaving the domain stops the run; the points so far are kept and the
/// reason is stored in [`Trajectory::stopped`].
pub fn integrate<T: Real>(
    p: &MassProfile<T>,
    potential: &dyn UnivariateFn<T>,
    x0: T,
    v0: T,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    in_domain(p, x0)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(point(p, potential, T::zero(), x0, v0)?);
    let (mut x, mut v) = (x0, v0);
    for k in 1..=steps {
        let next = rk4_step(p, potential, x, v, dt).and_then(|(xn, vn)| {
            let pt = point(p, potential, T::count(k) * dt, xn, vn)?;
            Ok((xn, vn, pt))
        });
        match next {
            Ok((xn, vn, pt)) => {
                x = xn;
                v = vn;
                points.push(pt);
            }
            Err(e) => return Ok(Trajectory { points, stopped: Some(e) }),
        }
    }
    Ok(Trajectory { points, stopped: None })
}

/// Energy drift over `[0, t_final]` for each step size, with the order
/// estimated from the last two.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftStudy {
    pub steps: Vec<f64>,
    pub drifts: Vec<f64>,
    pub order: Option<f64>,
}

pub fn energy_drift_study<T: Real>(
    p: &MassProfile<T>,
    potential: &dyn UnivariateFn<T>,
    x0: T,
    v0: T,
    t_final: T,
    dts: &[T],
) -> Result<DriftStudy> {
    let mut drifts = Vec::with_capacity(dts.len());
    for &dt in dts {
        let steps = (t_final / dt).round().to_f64_lossy() as usize;
        let tr = integrate(p, potential, x0, v0, dt, steps)?;
        if let Some(e) = tr.stopped {
            return Err(e);
        }
        drifts.push(tr.energy_drift().to_f64_lossy());
    }
    let steps: Vec<f64> = dts.iter().map(|d| d.to_f64_lossy()).collect();
    let k = drifts.len();
    let order = (k >= 2 && drifts[k - 1] > 0.0)
        .then(|| (drifts[k - 2] / drifts[k - 1]).ln() / (steps[k - 2] / steps[k - 1]).ln());
    Ok(DriftStudy { steps, drifts, order })
}
