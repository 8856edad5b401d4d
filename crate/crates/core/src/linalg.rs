// SPDX-License-Identifier: Apache-2.0

//! Dense linear-algebra helpers used by the productivity model.
//!
//! Matrices here are small (one row per economic sector), so everything is
//! plain `DMatrix<f64>` and clarity wins over blocking or in-place tricks.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Padé(13) numerator/denominator coefficients for `exp`.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled Padé(13) approximant is accurate to
/// double precision.
const THETA_13: f64 = 5.371_920_351_148_152;

/// Matrix exponential `exp(m * t)` by scaling and squaring with a degree-13
/// Padé approximant.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "matrix_exponential: expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !t.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix_exponential: non-finite input"));
    }
    let n = m.nrows();
    let a = m * t;
    let norm = one_norm(&a);
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = &a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("matrix_exponential: singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Checks that every eigenvalue of `gamma` has a strictly positive real part
/// (equivalently `-gamma` is Hurwitz). Returns the spectrum sorted by
/// decreasing real part.
pub fn hurwitz_spectrum(gamma: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let mut eig = eigenvalues(gamma);
    eig.sort_by(|a, b| b.re.total_cmp(&a.re));
    if let Some(bad) = eig.iter().find(|z| z.re <= 0.0) {
        return Err(Error::Numerical(format!(
            "-Gamma is not Hurwitz: eigenvalue {:.6}{:+.6}i has nonpositive real part",
            bad.re, bad.im
        )));
    }
    Ok(eig)
}

/// Solves the continuous Lyapunov equation `A S + S Aᵀ = Q` through the
/// Kronecker form `(I ⊗ A + A ⊗ I) vec(S) = vec(Q)`, followed by one step of
/// iterative refinement.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::invalid("solve_lyapunov: dimension mismatch"));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let kron = id.kronecker(a) + a.kronecker(&id);
    let lu = kron.lu();
    let vec_q = DVector::from_column_slice(q.as_slice());
    let mut x = lu
        .solve(&vec_q)
        .ok_or_else(|| Error::Numerical("solve_lyapunov: singular Kronecker system".into()))?;
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    let resid = q - (a * &s + &s * a.transpose());
    if let Some(dx) = lu.solve(&DVector::from_column_slice(resid.as_slice())) {
        x += dx;
    }
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok(symmetrize(&s))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric positive semi-definite square root; negative eigenvalues coming
/// from round-off are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Factor `L` with `L Lᵀ = m` for a symmetric PSD `m`: Cholesky when it
/// succeeds, symmetric square root otherwise (singular covariances).
pub fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    match symmetrize(m).cholesky() {
        Some(c) => c.l(),
        None => psd_sqrt(m),
    }
}

/// 2-norm condition number; infinite for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
