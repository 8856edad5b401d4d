// SPDX-License-Identifier: Apache-2.0

//! Adaptive Simpson quadrature for scalar and matrix-valued integrands.

use nalgebra::DMatrix;

const MAX_DEPTH: u32 = 48;

/// Values that can be integrated: a vector space with a norm.
pub trait Integrand: Clone {
    fn lin2(a: f64, x: &Self, b: f64, y: &Self) -> Self;
    fn norm(&self) -> f64;
}

impl Integrand for f64 {
    fn lin2(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        a * x + b * y
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for DMatrix<f64> {
    fn lin2(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn norm(&self) -> f64 {
        self.norm()
    }
}

fn simpson<T: Integrand>(fa: &T, fm: &T, fb: &T, width: f64) -> T {
    // (fa + 4 fm + fb) * width / 6
    let ends = T::lin2(1.0, fa, 1.0, fb);
    T::lin2(width / 6.0, &ends, 4.0 * width / 6.0, fm)
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol` (relative to
/// the norm of the integral, with `abs_floor` as absolute floor).
pub fn adaptive_simpson<T, F>(f: &F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> T
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);

    // Coarse estimate of the integral's size from a 5-point pass, so the
    // tolerance is relative to the answer rather than to one bad panel.
    let q1 = f(0.5 * (a + m));
    let q3 = f(0.5 * (m + b));
    let left = simpson(&fa, &q1, &fm, m - a);
    let right = simpson(&fm, &q3, &fb, b - m);
    let refined = T::lin2(1.0, &left, 1.0, &right);
    let tol = (rel_tol * refined.norm()).max(abs_floor);

    let l = recurse(f, a, m, &fa, &q1, &fm, left, 0.5 * tol, 1);
    let r = recurse(f, m, b, &fm, &q3, &fb, right, 0.5 * tol, 1);
    T::lin2(1.0, &l, 1.0, &r)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(f: &F, a: f64, b: f64, fa: &T, fm: &T, fb: &T, whole: T, tol: f64, depth: u32) -> T
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, &flm, fm, m - a);
    let right = simpson(fm, &frm, fb, b - m);
    let sum = T::lin2(1.0, &left, 1.0, &right);
    let diff = T::lin2(1.0, &sum, -1.0, &whole);
    if depth >= MAX_DEPTH || diff.norm() <= 15.0 * tol {
        // Richardson correction
        return T::lin2(1.0, &sum, 1.0 / 15.0, &diff);
    }
    let l = recurse(f, a, m, fa, &flm, fm, left, 0.5 * tol, depth + 1);
    let r = recurse(f, m, b, fm, &frm, fb, right, 0.5 * tol, depth + 1);
    T::lin2(1.0, &l, 1.0, &r)
}

/// Scalar integral over `[a, b]`, split at the given interior breakpoints
/// (kinks of the integrand) before adapting.
pub fn integrate_piecewise<F>(f: &F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    pts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], rel_tol, 1e-300))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_exponential() {
        let v: f64 = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 1.0, 1e-12, 0.0);
        assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn matrix_integrand() {
        let v: DMatrix<f64> = adaptive_simpson(
            &|x: f64| DMatrix::from_row_slice(1, 2, &[x * x, x.cos()]),
            0.0,
            2.0,
            1e-12,
            0.0,
        );
        assert!((v[(0, 0)] - 8.0 / 3.0).abs() < 1e-12);
        assert!((v[(0, 1)] - 2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_piecewise(&f, 0.0, 1.0, &[0.3], 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-13);
    }
}
