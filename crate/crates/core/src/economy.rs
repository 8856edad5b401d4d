// SPDX-License-Identifier: Apache-2.0

//! Multisector productivity: the Ornstein–Uhlenbeck state `Z`
//! (`dZ = -Γ Z dt + Σ dB^Z`) and the integrated productivity `A`
//! (`dA = (μ + ς Z) dt`).
//!
//! Exact Gaussian conditional laws are evaluated with the matrix exponential
//! and adaptive quadrature; paths are simulated with Euler–Maruyama on a
//! uniform grid and read back as piecewise-constant functions of time.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, matrix_exponential};
use crate::quadrature::adaptive_simpson;
use crate::rng::{path_rng, Domain};

const COV_REL_TOL: f64 = 1e-10;

/// Parameters of the productivity process for `I` sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductivityParams {
    /// Long-run productivity growth per sector (per year).
    pub mu: DVector<f64>,
    /// Mean-reversion matrix (per year).
    pub gamma: DMatrix<f64>,
    /// Noise loading (per sqrt-year).
    pub sigma: DMatrix<f64>,
    /// Noise intensity, in `(0, 1]`.
    pub varsigma: f64,
    pub a0: DVector<f64>,
    pub z0_mean: DVector<f64>,
    pub z0_cov: DMatrix<f64>,
}

impl ProductivityParams {
    /// Parameters with `A_0 = 0` and the default initial law
    /// `Z_0 ~ N(0, Σ Σᵀ)`.
    pub fn new(mu: DVector<f64>, gamma: DMatrix<f64>, sigma: DMatrix<f64>, varsigma: f64) -> Self {
        let n = mu.len();
        let z0_cov = &sigma * sigma.transpose();
        Self {
            mu,
            gamma,
            sigma,
            varsigma,
            a0: DVector::zeros(n),
            z0_mean: DVector::zeros(n),
            z0_cov,
        }
    }

    /// Starts `Z` from its stationary law instead of `N(0, Σ Σᵀ)`.
    pub fn with_stationary_start(mut self) -> Result<Self> {
        self.z0_cov = stationary_covariance(&self)?;
        self.z0_mean = DVector::zeros(self.n_sectors());
        Ok(self)
    }

    /// Starts `Z` at a fixed point.
    pub fn with_fixed_start(mut self, z0: DVector<f64>) -> Self {
        let n = z0.len();
        self.z0_mean = z0;
        self.z0_cov = DMatrix::zeros(n, n);
        self
    }

    pub fn n_sectors(&self) -> usize {
        self.mu.len()
    }

    pub fn noise_covariance(&self) -> DMatrix<f64> {
        &self.sigma * self.sigma.transpose()
    }

    /// Dimension checks only; degenerate matrices (zero noise, zero reversion)
    /// stay usable for simulation and limiting cases.
    pub fn check_shapes(&self) -> Result<()> {
        let n = self.n_sectors();
        if n == 0 {
            return Err(Error::invalid("productivity: at least one sector is required"));
        }
        let square = |m: &DMatrix<f64>| m.shape() == (n, n);
        if !square(&self.gamma) || !square(&self.sigma) || !square(&self.z0_cov) {
            return Err(Error::invalid(format!(
                "productivity: gamma, sigma and z0_cov must be {n}x{n}"
            )));
        }
        if self.a0.len() != n || self.z0_mean.len() != n {
            return Err(Error::invalid(format!(
                "productivity: a0 and z0_mean must have {n} entries"
            )));
        }
        let finite = self.mu.iter().chain(self.gamma.iter()).chain(self.sigma.iter());
        if finite.into_iter().any(|v| !v.is_finite()) || !self.varsigma.is_finite() {
            return Err(Error::invalid("productivity: non-finite parameter"));
        }
        Ok(())
    }

    /// Full model invariants: Σ positive definite, `-Γ` Hurwitz,
    /// `0 < ς <= 1`, symmetric PSD initial covariance.
    pub fn validate(&self) -> Result<()> {
        self.validate_nonstationary()?;
        linalg::hurwitz_spectrum(&self.gamma).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(())
    }

    /// [`Self::validate`] without the Hurwitz requirement on `-Γ`.
    pub fn validate_nonstationary(&self) -> Result<()> {
        self.check_shapes()?;
        if !(self.varsigma > 0.0 && self.varsigma <= 1.0) {
            return Err(Error::invalid(format!(
                "productivity: varsigma must lie in (0, 1], got {}",
                self.varsigma
            )));
        }
        let min_eig = linalg::min_sym_eigenvalue(&self.noise_covariance());
        if min_eig <= 0.0 {
            return Err(Error::invalid(format!(
                "productivity: sigma is not positive definite (smallest eigenvalue of sigma sigma^T is {min_eig:e})"
            )));
        }
        if (&self.z0_cov - self.z0_cov.transpose()).amax() > 1e-10 || linalg::min_sym_eigenvalue(&self.z0_cov) < -1e-10
        {
            return Err(Error::invalid("productivity: z0_cov must be symmetric PSD"));
        }
        Ok(())
    }
}

/// Gaussian law `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalGaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

fn check_horizon(h: f64) -> Result<()> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("horizon must be finite and >= 0, got {h}")));
    }
    Ok(())
}

/// `Υ_h = ∫_0^h exp(-Γ s) ds`, in closed form `Γ⁻¹ (I - exp(-Γ h))` unless Γ
/// is near-singular, where the integral is evaluated by quadrature.
pub fn upsilon(params: &ProductivityParams, h: f64) -> Result<DMatrix<f64>> {
    check_horizon(h)?;
    upsilon_of(&params.gamma, h)
}

fn upsilon_of(gamma: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let n = gamma.nrows();
    if h == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    if linalg::condition_number(gamma) > 1e12 {
        let neg = -gamma;
        let f = |s: f64| matrix_exponential(&neg, s).unwrap_or_else(|_| DMatrix::zeros(n, n));
        return Ok(adaptive_simpson(&f, 0.0, h, 1e-12, 1e-300));
    }
    let e = matrix_exponential(&-gamma, h)?;
    let rhs = DMatrix::identity(n, n) - e;
    gamma
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("upsilon: singular Gamma".into()))
}

/// Law of `Z_{t+h}` given `Z_t = z_t`.
pub fn conditional_law_z(params: &ProductivityParams, z_t: &DVector<f64>, h: f64) -> Result<ConditionalGaussian> {
    check_horizon(h)?;
    params.check_shapes()?;
    let n = params.n_sectors();
    let neg = -&params.gamma;
    let mean = matrix_exponential(&neg, h)? * z_t;
    if h == 0.0 {
        return Ok(ConditionalGaussian {
            mean,
            cov: DMatrix::zeros(n, n),
        });
    }
    let q = params.noise_covariance();
    let integrand = |u: f64| {
        let e = matrix_exponential(&neg, u).unwrap_or_else(|_| DMatrix::zeros(n, n));
        &e * &q * e.transpose()
    };
    let cov: DMatrix<f64> = adaptive_simpson(&integrand, 0.0, h, COV_REL_TOL, 1e-300);
    Ok(ConditionalGaussian {
        mean,
        cov: linalg::symmetrize(&cov),
    })
}

/// Law of `A_{t+h}` given `(A_t, Z_t) = (a_t, z_t)`.
pub fn conditional_law_a(
    params: &ProductivityParams,
    a_t: &DVector<f64>,
    z_t: &DVector<f64>,
    h: f64,
) -> Result<ConditionalGaussian> {
    check_horizon(h)?;
    params.check_shapes()?;
    let n = params.n_sectors();
    let ups = upsilon_of(&params.gamma, h)?;
    let mean = &params.mu * h + &ups * z_t * params.varsigma + a_t;
    if h == 0.0 {
        return Ok(ConditionalGaussian {
            mean,
            cov: DMatrix::zeros(n, n),
        });
    }
    let q = params.noise_covariance();
    let gamma = params.gamma.clone();
    let integrand = |u: f64| {
        let y = upsilon_of(&gamma, u).unwrap_or_else(|_| DMatrix::zeros(n, n));
        &y * &q * y.transpose()
    };
    let cov: DMatrix<f64> = adaptive_simpson(&integrand, 0.0, h, COV_REL_TOL, 1e-300);
    let s2 = params.varsigma * params.varsigma;
    Ok(ConditionalGaussian {
        mean,
        cov: linalg::symmetrize(&cov) * s2,
    })
}

/// Stationary covariance `S` of `Z`: the solution of `Γ S + S Γᵀ = Σ Σᵀ`.
pub fn stationary_covariance(params: &ProductivityParams) -> Result<DMatrix<f64>> {
    params.check_shapes()?;
    linalg::hurwitz_spectrum(&params.gamma)?;
    let q = params.noise_covariance();
    let s = linalg::solve_lyapunov(&params.gamma, &q)?;
    let resid = (&params.gamma * &s + &s * params.gamma.transpose() - &q).norm();
    if resid > 1e-9 * q.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "stationary covariance: Lyapunov residual {resid:e} above tolerance"
        )));
    }
    Ok(s)
}

/// Uniform time grid `u_k = t_start + k (t_end - t_start) / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("time grid: n_steps must be >= 1"));
        }
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::invalid(format!(
                "time grid: need finite t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_steps,
        })
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    /// Index `k` of the node with `u_k <= t < u_{k+1}` (the last node for
    /// `t = t_end`), or `None` outside the grid.
    pub fn node_at(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.dt();
        if t < self.t_start - tol || t > self.t_end + tol {
            return None;
        }
        let x = (t - self.t_start) / self.dt();
        let k = (x + 1e-9).floor().max(0.0) as usize;
        Some(k.min(self.n_steps))
    }
}

/// A path sampled on a [`TimeGrid`]: `n_steps + 1` vectors of dimension `dim`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub grid: TimeGrid,
    pub dim: usize,
    data: Vec<f64>,
}

impl PathGrid {
    pub fn from_rows(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != (grid.n_steps + 1) * dim {
            return Err(Error::invalid(format!(
                "path: expected {} values, got {}",
                (grid.n_steps + 1) * dim,
                data.len()
            )));
        }
        Ok(Self { grid, dim, data })
    }

    pub fn len(&self) -> usize {
        self.grid.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    /// Piecewise-constant reading: `Z_t = Z_{u_k}` for `u_k <= t < u_{k+1}`.
    pub fn at(&self, t: f64) -> Result<&[f64]> {
        self.grid
            .node_at(t)
            .map(|k| self.node(k))
            .ok_or_else(|| Error::invalid(format!("time {t} outside the simulated grid")))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// One Euler–Maruyama productivity path together with the Brownian increments
/// that drove it (row `k` is `B^Z_{u_{k+1}} - B^Z_{u_k}`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZPath {
    pub z: PathGrid,
    pub increments: Vec<f64>,
}

impl ZPath {
    pub fn increment(&self, k: usize) -> &[f64] {
        let d = self.z.dim;
        &self.increments[k * d..(k + 1) * d]
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn matvec_into(m: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m[i * n..(i + 1) * n];
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Simulates path number `path` of `Z` on `grid`; independent of how many
/// other paths are simulated or in which order.
pub fn simulate_z_path(params: &ProductivityParams, grid: &TimeGrid, seed: u64, path: u64) -> ZPath {
    let n = params.n_sectors();
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let mut rng = path_rng(seed, Domain::Economy, path);

    let l0 = row_major(&linalg::psd_factor(&params.z0_cov));
    let step = row_major(&(DMatrix::identity(n, n) - &params.gamma * dt));
    let sigma = row_major(&params.sigma);

    let mut xi = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut noise = vec![0.0; n];

    for v in xi.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    matvec_into(&l0, &xi, &mut tmp);
    let mut z: Vec<f64> = params.z0_mean.iter().zip(&tmp).map(|(m, e)| m + e).collect();

    let mut data = Vec::with_capacity((grid.n_steps + 1) * n);
    let mut increments = Vec::with_capacity(grid.n_steps * n);
    data.extend_from_slice(&z);
    for _ in 0..grid.n_steps {
        for v in xi.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v = sqrt_dt * e;
        }
        increments.extend_from_slice(&xi);
        matvec_into(&step, &z, &mut tmp);
        matvec_into(&sigma, &xi, &mut noise);
        for i in 0..n {
            z[i] = tmp[i] + noise[i];
        }
        data.extend_from_slice(&z);
    }
    ZPath {
        z: PathGrid {
            grid: *grid,
            dim: n,
            data,
        },
        increments,
    }
}

/// Simulates `n_paths` independent paths of `Z` (in parallel; the result does
/// not depend on the thread count).
pub fn simulate_z(params: &ProductivityParams, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<Vec<ZPath>> {
    params.check_shapes()?;
    if n_paths == 0 {
        return Err(Error::invalid("simulate_z: n_paths must be >= 1"));
    }
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|p| simulate_z_path(params, grid, seed, p))
        .collect())
}

/// Integrated productivity at an arbitrary time `t` of the grid, from the
/// exact integral of the piecewise-constant path:
/// `A_t = A_0 + μ (t - u_0) + ς [ (t - u_k) Z_{u_k} + Δ Σ_{i<k} Z_{u_i} ]`.
pub fn integrated_productivity_at(params: &ProductivityParams, z: &PathGrid, t: f64) -> Result<DVector<f64>> {
    let grid = &z.grid;
    let k = grid
        .node_at(t)
        .ok_or_else(|| Error::invalid(format!("time {t} outside the simulated grid")))?;
    let n = z.dim;
    if n != params.n_sectors() {
        return Err(Error::invalid("integrated productivity: dimension mismatch"));
    }
    let dt = grid.dt();
    let mut acc = vec![0.0; n];
    for i in 0..k {
        for (a, v) in acc.iter_mut().zip(z.node(i)) {
            *a += dt * v;
        }
    }
    let tail = t - grid.time(k);
    if tail > 0.0 {
        for (a, v) in acc.iter_mut().zip(z.node(k)) {
            *a += tail * v;
        }
    }
    let elapsed = t - grid.t_start;
    Ok(DVector::from_fn(n, |i, _| {
        params.a0[i] + params.mu[i] * elapsed + params.varsigma * acc[i]
    }))
}

/// `A` on the grid nodes of each `Z` path (left-rectangle accumulation).
pub fn simulate_a(params: &ProductivityParams, z_paths: &[PathGrid]) -> Result<Vec<PathGrid>> {
    params.check_shapes()?;
    let Some(first) = z_paths.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid;
    let n = params.n_sectors();
    z_paths
        .iter()
        .map(|z| {
            if z.grid != grid || z.dim != n {
                return Err(Error::invalid(
                    "simulate_a: all paths must share the grid and the sector count",
                ));
            }
            let dt = grid.dt();
            let mut acc = vec![0.0; n];
            let mut data = Vec::with_capacity(z.len() * n);
            for k in 0..=grid.n_steps {
                if k > 0 {
                    for (a, v) in acc.iter_mut().zip(z.node(k - 1)) {
                        *a += dt * v;
                    }
                }
                let elapsed = grid.time(k) - grid.t_start;
                data.extend((0..n).map(|i| params.a0[i] + params.mu[i] * elapsed + params.varsigma * acc[i]));
            }
            PathGrid::from_rows(grid, n, data)
        })
        .collect()
}
