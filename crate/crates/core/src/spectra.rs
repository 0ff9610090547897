//! Symmetric tridiagonal eigensolvers and the analytic oscillator states.

use serde::Serialize;

use crate::coord::{CoordinateMap, Grid};
use crate::error::{Error, Result};
use crate::operators::{ladder_a, ladder_b, map_nodes, GridOperator, OrderingParams};
use crate::profiles::MassProfile;
use crate::scalar::{weighted_dot, Real};

/// Matrices up to this size go straight to QL.
pub const DENSE_LIMIT: usize = 400;
const QL_MAX_SWEEPS: usize = 60;

/// Lowest eigenpairs of a grid Hamiltonian.
///
/// Eigenvectors satisfy `h Σ v_i² = 1`; the first component above
/// `1e-8 · max|v|` is positive.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Vec<T>>,
    pub grid: Grid<T>,
}

/// Which eigensolver to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// QL for small matrices or many levels, bisection otherwise.
    Auto,
    /// Implicit-shift QL on the whole matrix.
    Ql,
    /// Sturm bisection plus inverse iteration.
    Bisection,
}

/// The lowest `k` eigenpairs of a symmetric tridiagonal operator.
pub fn eigen_symmetric_tridiagonal<T: Real>(h: &GridOperator<T>, k: usize) -> Result<Spectrum<T>> {
    eigen_with(h, k, Method::Auto)
}

pub fn eigen_with<T: Real>(h: &GridOperator<T>, k: usize, method: Method) -> Result<Spectrum<T>> {
    let n = h.n();
    if k == 0 || k > n {
        return Err(Error::Config(format!("requested {k} levels from a {n}-point grid")));
    }
    let (d, e) = h.tridiagonal().ok_or(Error::NotSymmetricTridiagonal)?;
    let use_ql = match method {
        Method::Ql => true,
        Method::Bisection => false,
        Method::Auto => n <= DENSE_LIMIT || 4 * k > n,
    };
    let (values, mut vectors) = if use_ql { ql_lowest(&d, &e, k)? } else { bisection_lowest(&d, &e, k) };
    let step = h.grid().h();
    for v in &mut vectors {
        normalize(v, step);
    }
    Ok(Spectrum { eigenvalues: values, eigenvectors: vectors, grid: h.grid().clone() })
}

fn normalize<T: Real>(v: &mut [T], h: T) {
    let norm = weighted_dot(v, v, h).sqrt();
    let peak = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let first = v.iter().copied().find(|x| x.abs() > T::c(1e-8) * peak).unwrap_or(T::one());
    let s = if first < T::zero() { -norm } else { norm };
    v.iter_mut().for_each(|x| *x /= s);
}

/// Eigenvalues of the whole matrix, ascending, with eigenvectors, by
/// implicit-shift QL.
pub fn ql<T: Real>(d: &[T], sub: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<T> = sub.to_vec();
    e.push(T::zero());
    // z[row][col]; column j is eigenvector j
    let mut z: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let two = T::c(2.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = order.iter().map(|&j| z.iter().map(|row| row[j]).collect()).collect();
    Ok((values, vectors))
}

fn ql_lowest<T: Real>(d: &[T], e: &[T], k: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let (mut values, mut vectors) = ql(d, e)?;
    values.truncate(k);
    vectors.truncate(k);
    Ok((values, vectors))
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
pub fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = T::one();
    for i in 0..d.len() {
        let off = if i == 0 { T::zero() } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == T::zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn gershgorin<T: Real>(d: &[T], e: &[T]) -> (T, T) {
    let n = d.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { T::zero() } + if i + 1 < n { e[i].abs() } else { T::zero() };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The `j`-th smallest eigenvalue (0-based) by bisection.
pub fn bisect_eigenvalue<T: Real>(d: &[T], e: &[T], j: usize) -> T {
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs());
    for _ in 0..400 {
        let mid = (lo + hi) * T::c(0.5);
        if mid <= lo || mid >= hi || hi - lo <= T::c(2.0) * T::epsilon() * scale {
            break;
        }
        if sturm_count(d, e, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * T::c(0.5)
}

// Solves (T - shift) x = b in place by LU with partial pivoting.
fn shifted_solve<T: Real>(d: &[T], e: &[T], shift: T, b: &mut [T]) {
    let n = d.len();
    let scale = d.iter().chain(e).fold(T::zero(), |a, x| a.max(x.abs())).max(T::min_positive_value());
    let tiny = T::epsilon() * scale;
    let mut diag: Vec<T> = d.iter().map(|&x| x - shift).collect();
    let mut lower = e.to_vec();
    let mut upper = e.to_vec();
    let mut upper2 = vec![T::zero(); n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        if diag[i].abs() >= lower[i].abs() {
            if diag[i] == T::zero() {
                diag[i] = tiny;
            }
            let f = lower[i] / diag[i];
            lower[i] = f;
            diag[i + 1] -= f * upper[i];
        } else {
            let f = diag[i] / lower[i];
            diag[i] = lower[i];
            lower[i] = f;
            let t = upper[i];
            upper[i] = diag[i + 1];
            diag[i + 1] = t - f * diag[i + 1];
            if i + 2 < n {
                upper2[i] = upper[i + 1];
                upper[i + 1] = -f * upper[i + 1];
            }
            swapped[i] = true;
        }
    }
    for v in diag.iter_mut() {
        if *v == T::zero() {
            *v = tiny;
        }
    }
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - lower[i] * b[i];
        } else {
            b[i + 1] = b[i + 1] - lower[i] * b[i];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= upper[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= upper2[i] * b[i + 2];
        }
        b[i] = s / diag[i];
    }
}

fn bisection_lowest<T: Real>(d: &[T], e: &[T], k: usize) -> (Vec<T>, Vec<Vec<T>>) {
    let n = d.len();
    let values: Vec<T> = (0..k).map(|j| bisect_eigenvalue(d, e, j)).collect();
    let (glo, ghi) = gershgorin(d, e);
    let spread = (ghi - glo).max(T::min_positive_value());
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
    for (j, &lambda) in values.iter().enumerate() {
        // deterministic start vector with components along every mode
        let mut v: Vec<T> = (0..n).map(|i| T::one() + T::c(((i * 7919 + j * 104729) % 1013) as f64 / 1013.0)).collect();
        for _ in 0..4 {
            shifted_solve(d, e, lambda, &mut v);
            // keep clustered levels apart
            for (prev, &mu) in vectors.iter().zip(&values) {
                if (mu - lambda).abs() < T::c(1e-10) * spread {
                    let c = prev.iter().zip(&v).map(|(&a, &b)| a * b).sum::<T>();
                    v.iter_mut().zip(prev).for_each(|(x, &p)| *x -= c * p);
                }
            }
            let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        vectors.push(v);
    }
    (values, vectors)
}

/// `E_n = ω(n + ½)`.
pub fn analytic_energy<T: Real>(n: usize, omega: T) -> T {
    omega * (T::count(n) + T::c(0.5))
}

/// Physicists' Hermite polynomial by `H_{k+1} = 2y H_k - 2k H_{k-1}`.
pub fn hermite<T: Real>(n: usize, y: T) -> T {
    let two = T::c(2.0);
    let (mut prev, mut cur) = (T::one(), two * y);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = two * y * cur - two * T::count(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `Ψ_n(q) = (ω/π)^{1/4} (2ⁿ n!)^{-1/2} H_n(√ω q) e^{-ωq²/2}`, evaluated by the
/// normalized recurrence so large `n` neither overflows nor cancels.
pub fn analytic_psi<T: Real>(n: usize, omega: T, q: T) -> T {
    let y = omega.sqrt() * q;
    let mut prev = (omega / T::PI()).powf(T::c(0.25)) * (-y * y * T::c(0.5)).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = T::c(2.0).sqrt() * y * prev;
    for k in 1..n {
        let kk = T::count(k);
        let next = (T::c(2.0) / (kk + T::one())).sqrt() * y * cur - (kk / (kk + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `φ_n(x) = m(x)^{1/4} Ψ_n(q(x))`.
pub fn analytic_phi<T: Real>(n: usize, omega: T, p: &MassProfile<T>, map: &CoordinateMap<T>, x: T) -> Result<T> {
    Ok(p.m(x)?.powf(T::c(0.25)) * analytic_psi(n, omega, map.forward(x)?))
}

/// An analytic eigenstate with its normalization constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticState<T> {
    pub n: usize,
    pub omega: T,
    /// `(ω/π)^{1/4} (2ⁿ n!)^{-1/2}`.
    pub norm: T,
}

impl<T: Real> AnalyticState<T> {
    pub fn new(n: usize, omega: T) -> Self {
        let mut log_fact = T::zero();
        for k in 1..=n {
            log_fact += T::count(k).ln();
        }
        let log_norm = T::c(0.25) * (omega / T::PI()).ln() - T::c(0.5) * (T::count(n) * T::LN_2() + log_fact);
        Self { n, omega, norm: log_norm.exp() }
    }

    pub fn energy(&self) -> T {
        analytic_energy(self.n, self.omega)
    }

    pub fn psi(&self, q: T) -> T {
        analytic_psi(self.n, self.omega, q)
    }

    pub fn phi(&self, p: &MassProfile<T>, map: &CoordinateMap<T>, x: T) -> Result<T> {
        analytic_phi(self.n, self.omega, p, map, x)
    }
}

/// `⟨a, b⟩ / (‖a‖ ‖b‖)` under a common weight.
pub fn normalized_overlap<T: Real>(a: &[T], b: &[T]) -> T {
    let ab: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let aa: T = a.iter().map(|&x| x * x).sum();
    let bb: T = b.iter().map(|&x| x * x).sum();
    ab / (aa * bb).sqrt()
}

/// Sign changes, ignoring components below `tol · max|v|`.
pub fn sign_changes<T: Real>(v: &[T], tol: T) -> usize {
    let peak = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let mut last: Option<bool> = None;
    let mut count = 0;
    for &x in v {
        if x.abs() <= tol * peak {
            continue;
        }
        let pos = x > T::zero();
        if last.is_some_and(|l| l != pos) {
            count += 1;
        }
        last = Some(pos);
    }
    count
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Raise,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ladder {
    A,
    B,
}

/// Quadrature value of `⟨n±1 | op | n⟩` with analytic states on the grid.
///
/// The `A` pair acts on `φ` states with weight `dx`; the `B` pair acts on
/// `Ψ(q(x))` states with weight `√m dx = dq`. Lowering the ground state
/// returns the norm of the result, which should vanish.
pub fn ladder_matrix_element<T: Real>(
    n: usize,
    direction: Direction,
    which: Ladder,
    p: &MassProfile<T>,
    map: &CoordinateMap<T>,
    g: &Grid<T>,
    omega: T,
) -> Result<T> {
    let q = map_nodes(map, g)?;
    let target_n = match direction {
        Direction::Raise => Some(n + 1),
        Direction::Lower => n.checked_sub(1),
    };
    // the states must decay inside the grid
    let top = target_n.unwrap_or(0).max(n);
    for &edge in [q[0], q[q.len() - 1]].iter() {
        let peak = (omega / T::PI()).powf(T::c(0.25));
        if analytic_psi(top, omega, edge).abs() > T::c(1e-6) * peak {
            return Err(Error::Config(format!(
                "q-range [{}, {}] of the grid is too small to hold level {top}",
                q[0],
                q[q.len() - 1]
            )));
        }
    }
    let dagger = direction == Direction::Raise;
    let root_m = g.map(|x| p.sqrt_m(x))?;
    let quarter = g.map(|x| Ok(p.m(x)?.powf(T::c(0.25))))?;
    let state = |k: usize| -> Vec<T> {
        q.iter()
            .zip(&quarter)
            .map(|(&qi, &mq)| {
                let psi = analytic_psi(k, omega, qi);
                if which == Ladder::A { mq * psi } else { psi }
            })
            .collect()
    };
    let (op, weight): (GridOperator<T>, Vec<T>) = match which {
        Ladder::A => (ladder_a(p, g, &q, omega, OrderingParams::FORCED, dagger)?, vec![T::one(); g.n()]),
        Ladder::B => (ladder_b(p, g, &q, omega, dagger)?, root_m),
    };
    let out = op.apply(&state(n))?;
    let h = g.h();
    Ok(match target_n {
        Some(t) => {
            let target = state(t);
            out.iter().zip(&target).zip(&weight).map(|((&o, &s), &w)| o * s * w).sum::<T>() * h
        }
        None => (out.iter().zip(&weight).map(|(&o, &w)| o * o * w).sum::<T>() * h).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::GridOperator;

    fn tridiag(d: &[f64], e: &[f64]) -> GridOperator<f64> {
        let g = Grid::x(0.0, 1.0, d.len()).unwrap();
        let mut op = GridOperator::diagonal(&g, d).add(&GridOperator::zeros(&g, 1)).unwrap();
        for (i, &v) in e.iter().enumerate() {
            op.set(i + 1, i, v);
            op.set(i, i + 1, v);
        }
        op
    }

    #[test]
    fn diagonal_two_by_two() {
        let s = eigen_symmetric_tridiagonal(&tridiag(&[3.0, 2.0], &[0.0]), 2).unwrap();
        assert_eq!(s.eigenvalues, vec![2.0, 3.0]);
    }

    #[test]
    fn ql_and_bisection_agree() {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| 1.0 + (i as f64 * 0.11).cos()).collect();
        let op = tridiag(&d, &e);
        let a = eigen_with(&op, 8, Method::Ql).unwrap();
        let b = eigen_with(&op, 8, Method::Bisection).unwrap();
        for j in 0..8 {
            assert!((a.eigenvalues[j] - b.eigenvalues[j]).abs() < 1e-12);
            let ov = normalized_overlap(&a.eigenvectors[j], &b.eigenvectors[j]);
            assert!((ov - 1.0).abs() < 1e-10, "level {j}: {ov}");
        }
        for w in a.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let g = Grid::x(0.0, 1.0, 10).unwrap();
        let d = GridOperator::<f64>::central_difference(&g);
        assert!(matches!(eigen_symmetric_tridiagonal(&d, 1), Err(Error::NotSymmetricTridiagonal)));
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(1, 0.3), 0.6);
        assert_eq!(hermite(2, 1.0), 2.0);
        assert_eq!(hermite(4, 0.0), 12.0);
    }

    #[test]
    fn psi_values() {
        assert!((analytic_psi(0, 1.0, 0.0) - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(analytic_psi(1, 1.0, 0.0), 0.0);
        assert!((analytic_psi(0, 4.0, 0.0) - (4.0 / std::f64::consts::PI).powf(0.25)).abs() < 1e-15);
        // recurrence agrees with the closed formula
        for n in 0..8 {
            let st = AnalyticState::new(n, 2.0);
            for q in [-1.3, 0.2, 0.9] {
                let direct = st.norm * hermite(n, 2f64.sqrt() * q) * (-q * q).exp();
                assert!((st.psi(q) - direct).abs() < 1e-13);
            }
        }
        assert_eq!(analytic_energy(3, 2.0), 7.0);
    }

    #[test]
    fn sign_changes_counts_nodes() {
        assert_eq!(sign_changes(&[1.0, 2.0, -1.0, 0.0, -2.0, 3.0], 1e-8), 2);
    }
}
