// SPDX-License-Identifier: Apache-2.0

//! Parameter estimation from annual (or any uniformly spaced) series.
//!
//! Productivity: sample mean, pooled scale, then a VAR(1) on the standardized
//! states. Housing: linear trend by OLS, moment estimators for the
//! mean-reversion speed and volatility, and a regression of the housing noise
//! on the productivity noise for the correlation loadings.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Observations on a uniform grid of years.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub years: Vec<f64>,
    pub dim: usize,
    data: Vec<f64>,
}

impl TimeSeries {
    /// Rows of `dim` values, one per year. Years must be increasing and
    /// uniformly spaced, with at least three observations.
    pub fn new(years: Vec<f64>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != years.len() * dim {
            return Err(Error::invalid(format!(
                "time series: {} years with dimension {dim} need {} values, got {}",
                years.len(),
                years.len() * dim,
                data.len()
            )));
        }
        if years.len() < 3 {
            return Err(Error::invalid("time series: at least three observations are required"));
        }
        if years.iter().chain(data.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("time series: non-finite value"));
        }
        let step = years[1] - years[0];
        if !(step > 0.0) {
            return Err(Error::invalid("time series: years must be increasing"));
        }
        for (i, w) in years.windows(2).enumerate() {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(Error::invalid(format!(
                    "time series: non-uniform spacing between {} and {} (row {})",
                    w[0],
                    w[1],
                    i + 2
                )));
            }
        }
        Ok(Self { years, dim, data })
    }

    pub fn scalar(years: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(years, 1, values)
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }

    pub fn row_vector(&self, m: usize) -> DVector<f64> {
        DVector::from_column_slice(self.row(m))
    }

    /// Scalar value of row `m` (first column).
    pub fn value(&self, m: usize) -> f64 {
        self.data[m * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Grid step in years.
    pub fn dt(&self) -> f64 {
        (self.years[self.len() - 1] - self.years[0]) / (self.len() - 1) as f64
    }
}

/// VAR(1) fit `Z_m = B Z_{m-1} + E_m` and its continuous-time reading.
#[derive(Debug, Clone, PartialEq)]
pub struct VarEstimate {
    pub b_hat: DMatrix<f64>,
    pub gamma_hat: DMatrix<f64>,
    pub sigma_hat: DMatrix<f64>,
    /// Residuals `E_m`, labelled by the year of `Z_m`.
    pub residuals: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductivityEstimate {
    pub mu_hat: DVector<f64>,
    pub varsigma_hat: f64,
    pub gamma_hat: DMatrix<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub z_hat: TimeSeries,
    pub residuals: TimeSeries,
}

/// `μ̂` is the sample mean, `ς̂² = Σ |Θ_m - μ̂|² / (n - 1)` pools all sectors,
/// and `Ẑ = (Θ - μ̂) / ς̂`. A constant series yields `ς̂ = 0` and no `Ẑ`.
pub fn standardize(theta: &TimeSeries) -> Result<(DVector<f64>, f64, Option<TimeSeries>)> {
    let n = theta.len();
    let dim = theta.dim;
    let mut mu = DVector::zeros(dim);
    for m in 0..n {
        mu += theta.row_vector(m);
    }
    mu /= n as f64;
    let mut ss = 0.0;
    for m in 0..n {
        ss += (theta.row_vector(m) - &mu).norm_squared();
    }
    let varsigma = (ss / (n - 1) as f64).sqrt();
    if varsigma == 0.0 {
        return Ok((mu, 0.0, None));
    }
    let data: Vec<f64> = (0..n)
        .flat_map(|m| {
            let mu = &mu;
            theta
                .row(m)
                .iter()
                .enumerate()
                .map(move |(i, v)| (v - mu[i]) / varsigma)
        })
        .collect();
    let z = TimeSeries::new(theta.years.clone(), dim, data)?;
    Ok((mu, varsigma, Some(z)))
}

/// Least-squares VAR(1) without intercept: `B̂ = (Σ Z_m Z_{m-1}ᵀ)(Σ Z_{m-1} Z_{m-1}ᵀ)⁻¹`,
/// `Γ̂ = (I - B̂)/Δ`, and `Σ̂` the symmetric square root of the residual
/// covariance divided by `Δ`.
pub fn estimate_var1(z: &TimeSeries) -> Result<VarEstimate> {
    let n = z.len();
    let dim = z.dim;
    let need = (dim + 2).max(4);
    if n < need {
        return Err(Error::Estimation(format!(
            "VAR(1) needs at least {need} observations for {dim} sectors, got {n}"
        )));
    }
    let mut sxx = DMatrix::zeros(dim, dim);
    let mut syx = DMatrix::zeros(dim, dim);
    for m in 1..n {
        let x = z.row_vector(m - 1);
        let y = z.row_vector(m);
        sxx += &x * x.transpose();
        syx += &y * x.transpose();
    }
    if linalg::condition_number(&sxx) > 1e12 {
        return Err(Error::Estimation(
            "VAR(1): singular regressor moment matrix (degenerate or constant states)".into(),
        ));
    }
    let b = sxx
        .clone()
        .lu()
        .solve(&syx.transpose())
        .ok_or_else(|| Error::Estimation("VAR(1): singular regressor moment matrix".into()))?
        .transpose();
    let mut cov = DMatrix::zeros(dim, dim);
    let mut resid = Vec::with_capacity((n - 1) * dim);
    for m in 1..n {
        let e = z.row_vector(m) - &b * z.row_vector(m - 1);
        cov += &e * e.transpose();
        resid.extend(e.iter());
    }
    cov /= (n - 1) as f64;
    let dt = z.dt();
    let gamma = (DMatrix::identity(dim, dim) - &b) / dt;
    let sigma = linalg::psd_sqrt(&(cov / dt));
    Ok(VarEstimate {
        b_hat: b,
        gamma_hat: gamma,
        sigma_hat: sigma,
        residuals: TimeSeries::new(z.years[1..].to_vec(), dim, resid)?,
    })
}

/// Full productivity calibration.
pub fn estimate_productivity(theta: &TimeSeries) -> Result<ProductivityEstimate> {
    let dim = theta.dim;
    if theta.len() < dim + 2 {
        return Err(Error::Estimation(format!(
            "productivity: need at least {} observations for {dim} sectors, got {}",
            dim + 2,
            theta.len()
        )));
    }
    let (mu, varsigma, z) = standardize(theta)?;
    let Some(z) = z else {
        return Err(Error::Estimation(format!(
            "productivity: constant series (mu_hat = {:?}, varsigma_hat = 0); VAR step rejected",
            mu.as_slice()
        )));
    };
    let var = estimate_var1(&z)?;
    Ok(ProductivityEstimate {
        mu_hat: mu,
        varsigma_hat: varsigma,
        gamma_hat: var.gamma_hat,
        sigma_hat: var.sigma_hat,
        z_hat: z,
        residuals: var.residuals,
    })
}

/// Linear trend `χ(s) = ϱ s + ϑ` with `s` in years since the first observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpiTrend {
    pub varrho: f64,
    pub vartheta: f64,
    /// Calendar year at which `s = 0`.
    pub origin: f64,
}

impl HpiTrend {
    pub fn at_year(&self, year: f64) -> f64 {
        self.varrho * (year - self.origin) + self.vartheta
    }
}

/// OLS of `K` on `(s, 1)`.
pub fn estimate_hpi_trend(k: &TimeSeries) -> Result<HpiTrend> {
    let n = k.len() as f64;
    let origin = k.years[0];
    let s: Vec<f64> = k.years.iter().map(|y| y - origin).collect();
    let s_mean = s.iter().sum::<f64>() / n;
    let k_mean = (0..k.len()).map(|m| k.value(m)).sum::<f64>() / n;
    let sxx: f64 = s.iter().map(|x| (x - s_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Estimation(
            "HPI trend: degenerate design (all dates equal)".into(),
        ));
    }
    let sxy: f64 = s
        .iter()
        .enumerate()
        .map(|(m, x)| (x - s_mean) * (k.value(m) - k_mean))
        .sum();
    let varrho = sxy / sxx;
    Ok(HpiTrend {
        varrho,
        vartheta: k_mean - varrho * s_mean,
        origin,
    })
}

/// Scaling of the housing moment estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HpiScaling {
    /// Per-observation values, exactly as the formulas read.
    #[default]
    Raw,
    /// Per-year values: `ν̂ / Δ` and `σ̄̂² / Δ`.
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpiDynamics {
    pub nu: f64,
    pub sigma_bar: f64,
    pub scaling: HpiScaling,
    pub detrended: bool,
}

/// `ν̂ = log(Σ K²_{m-1} / Σ K_m K_{m-1})` and `σ̄̂² = (1/M) Σ (K_m - K_{m-1})²`,
/// on the raw series or, with `trend`, on the deviations `K - χ̂`.
pub fn estimate_hpi_dynamics(k: &TimeSeries, trend: Option<&HpiTrend>, scaling: HpiScaling) -> Result<HpiDynamics> {
    let x: Vec<f64> = (0..k.len())
        .map(|m| match trend {
            Some(tr) => k.value(m) - tr.at_year(k.years[m]),
            None => k.value(m),
        })
        .collect();
    let num: f64 = x[..x.len() - 1].iter().map(|v| v * v).sum();
    let den: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
    // A constant series (including the all-zero one a constant CSV rebases
    // to) has ratio 1.
    let flat = x.windows(2).all(|w| w[0] == w[1]);
    if !flat && (!(num > 0.0) || !(den > 0.0)) {
        return Err(Error::Estimation(format!(
            "HPI dynamics: log ratio undefined (sum K_(m-1)^2 = {num:e}, sum K_m K_(m-1) = {den:e})"
        )));
    }
    let mut nu = if flat { 0.0 } else { (num / den).ln() };
    let big_m = (k.len() - 1) as f64;
    let mut s2 = k.values().windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / big_m;
    if scaling == HpiScaling::Rescaled {
        nu /= k.dt();
        s2 /= k.dt();
    }
    Ok(HpiDynamics {
        nu,
        sigma_bar: s2.sqrt(),
        scaling,
        detrended: trend.is_some(),
    })
}

/// Correlation loadings and whether `|ρ̂|` had to be clamped to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate {
    pub rho: DVector<f64>,
    pub raw_norm: f64,
    pub clamped: bool,
    pub n_increments: usize,
}

/// `ρ̂ᵀ = Cov(u^Z, u^B̄) Var(u^Z)⁻¹` from paired increments, clamped to the
/// unit ball.
pub fn rho_from_increments(u_z: &[DVector<f64>], u_bar: &[f64]) -> Result<RhoEstimate> {
    let n = u_z.len();
    if n != u_bar.len() || n < 2 {
        return Err(Error::Estimation(format!(
            "rho: need at least two paired increments, got {n} and {}",
            u_bar.len()
        )));
    }
    let dim = u_z[0].len();
    let mz = u_z.iter().fold(DVector::zeros(dim), |a, v| a + v) / n as f64;
    let mb = u_bar.iter().sum::<f64>() / n as f64;
    let mut vzz = DMatrix::zeros(dim, dim);
    let mut czb = DVector::zeros(dim);
    for (z, &b) in u_z.iter().zip(u_bar) {
        let dz = z - &mz;
        vzz += &dz * dz.transpose();
        czb += &dz * (b - mb);
    }
    vzz /= n as f64;
    czb /= n as f64;
    if linalg::condition_number(&vzz) > 1e12 {
        return Err(Error::Estimation(
            "rho: singular covariance of the productivity increments".into(),
        ));
    }
    // ρ̂ = Var⁻¹ Cov (Var symmetric)
    let rho = vzz
        .lu()
        .solve(&czb)
        .ok_or_else(|| Error::Estimation("rho: singular covariance of the productivity increments".into()))?;
    let raw_norm = rho.norm();
    let clamped = raw_norm > 1.0;
    let rho = if clamped { rho / raw_norm } else { rho };
    Ok(RhoEstimate {
        rho,
        raw_norm,
        clamped,
        n_increments: n,
    })
}

/// Builds the housing increments `u^B̄` and the productivity increments
/// `u^Z = Σ̂⁻¹ E` on the years both series share, and regresses one on the
/// other. `nu` and `sigma_bar` are per-year rates.
pub fn estimate_rho(
    k: &TimeSeries,
    trend: &HpiTrend,
    nu: f64,
    sigma_bar: f64,
    productivity: &ProductivityEstimate,
) -> Result<RhoEstimate> {
    if !(sigma_bar > 0.0) {
        return Err(Error::Estimation("rho: sigma_bar_hat is zero".into()));
    }
    let dt = k.dt();
    let sigma_inv = productivity
        .sigma_hat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Estimation("rho: sigma_hat is singular".into()))?;
    let resid = &productivity.residuals;
    let tol = 1e-6 * dt;
    let mut u_z = Vec::new();
    let mut u_bar = Vec::new();
    for m in 1..k.len() {
        let year = k.years[m];
        let Some(r) = resid.years.iter().position(|y| (y - year).abs() <= tol) else {
            continue;
        };
        let prev = k.value(m - 1);
        let drift = trend.varrho + nu * (trend.at_year(k.years[m - 1]) - prev);
        u_bar.push(((k.value(m) - prev) - drift * dt) / sigma_bar);
        u_z.push(&sigma_inv * resid.row_vector(r));
    }
    if u_z.is_empty() {
        return Err(Error::Estimation(
            "rho: the HPI and productivity series share no years".into(),
        ));
    }
    rho_from_increments(&u_z, &u_bar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HpiEstimate {
    pub trend: HpiTrend,
    pub dynamics: HpiDynamics,
    pub rho: Option<RhoEstimate>,
}

fn parse_field(raw: &str, path: &Path, line: u64, column: &str) -> Result<f64> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line,
            reason: format!("missing value in column `{column}`"),
        });
    }
    trimmed
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Csv {
            path: path.to_path_buf(),
            line,
            reason: format!("column `{column}`: `{trimmed}` is not a finite number"),
        })
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 || header[0] != "year" {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: format!(
                "expected header `year,...` with at least one value column, got `{}`",
                header.join(",")
            ),
        });
    }
    let mut years = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line,
                reason: format!("expected {} columns, found {}", header.len(), rec.len()),
            });
        }
        years.push(parse_field(&rec[0], path, line, "year")?);
        for (j, col) in header.iter().enumerate().skip(1) {
            data.push(parse_field(&rec[j], path, line, col)?);
        }
    }
    Ok((header, years, data))
}

fn series_from(path: &Path, years: Vec<f64>, dim: usize, data: Vec<f64>) -> Result<TimeSeries> {
    TimeSeries::new(years, dim, data).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })
}

/// Reads `year,sector_1,...,sector_I`.
pub fn read_productivity_csv(path: &Path) -> Result<TimeSeries> {
    let (header, years, data) = read_table(path)?;
    series_from(path, years, header.len() - 1, data)
}

/// Reads `year,index`, rebases the index on its last value and takes logs.
pub fn read_hpi_csv(path: &Path) -> Result<TimeSeries> {
    let (header, years, data) = read_table(path)?;
    if header.len() != 2 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: "expected header `year,index`".into(),
        });
    }
    if let Some(i) = data.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            reason: format!("index must be positive, got {}", data[i]),
        });
    }
    let Some(&last) = data.last() else {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: "no observations".into(),
        });
    };
    let logs = data.iter().map(|v| (v / last).ln()).collect();
    series_from(path, years, 1, logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn years(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn constant_productivity_rejects_var() {
        let ts = TimeSeries::new(years(10), 2, vec![3.0; 20]).unwrap();
        let (mu, s, z) = standardize(&ts).unwrap();
        assert_eq!(mu.as_slice(), &[3.0, 3.0]);
        assert_eq!(s, 0.0);
        assert!(z.is_none());
        let err = estimate_productivity(&ts).unwrap_err();
        assert!(matches!(err, Error::Estimation(_)));
    }

    #[test]
    fn unit_persistence_gives_zero_gamma() {
        let ts = TimeSeries::scalar(years(6), vec![0.7; 6]).unwrap();
        let v = estimate_var1(&ts).unwrap();
        assert!((v.b_hat[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(v.gamma_hat[(0, 0)].abs() < 1e-15);
        assert!(v.sigma_hat[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn standardization_identity() {
        let data: Vec<f64> = (0..40).map(|i| ((i * 7919) % 97) as f64 / 13.0).collect();
        let ts = TimeSeries::new(years(20), 2, data).unwrap();
        let est = estimate_productivity(&ts).unwrap();
        let z = &est.z_hat;
        let mut mean = DVector::<f64>::zeros(2);
        let mut ss = 0.0;
        for m in 0..z.len() {
            mean += z.row_vector(m);
            ss += z.row_vector(m).norm_squared();
        }
        assert!(mean.amax() < 1e-10 * z.len() as f64);
        assert!((ss / (z.len() - 1) as f64 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_observations() {
        let ts = TimeSeries::new(years(4), 3, (0..12).map(f64::from).collect()).unwrap();
        assert!(estimate_productivity(&ts).is_err());
    }

    #[test]
    fn trend_examples() {
        let ts = TimeSeries::scalar(years(8), (0..8).map(|t| 2.0 * t as f64 + 1.0).collect()).unwrap();
        let tr = estimate_hpi_trend(&ts).unwrap();
        assert!((tr.varrho - 2.0).abs() < 1e-12 && (tr.vartheta - 1.0).abs() < 1e-12);
        let ts = TimeSeries::scalar(years(5), vec![-0.3; 5]).unwrap();
        let tr = estimate_hpi_trend(&ts).unwrap();
        assert!(tr.varrho.abs() < 1e-15 && (tr.vartheta + 0.3).abs() < 1e-15);
    }

    #[test]
    fn trend_residuals_orthogonal() {
        let vals: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() + 0.01 * i as f64).collect();
        let ts = TimeSeries::scalar((1990..2020).map(f64::from).collect(), vals).unwrap();
        let tr = estimate_hpi_trend(&ts).unwrap();
        let mut s1 = 0.0;
        let mut st = 0.0;
        for m in 0..ts.len() {
            let r = ts.value(m) - tr.at_year(ts.years[m]);
            s1 += r;
            st += r * (ts.years[m] - tr.origin);
        }
        assert!(s1.abs() < 1e-8 && st.abs() < 1e-8 * 30.0);
    }

    #[test]
    fn constant_hpi_dynamics() {
        let ts = TimeSeries::scalar(years(10), vec![0.4; 10]).unwrap();
        let d = estimate_hpi_dynamics(&ts, None, HpiScaling::Raw).unwrap();
        assert_eq!(d.nu, 0.0);
        assert_eq!(d.sigma_bar, 0.0);
        let zero = TimeSeries::scalar(years(10), vec![0.0; 10]).unwrap();
        let tr = estimate_hpi_trend(&zero).unwrap();
        let d = estimate_hpi_dynamics(&zero, Some(&tr), HpiScaling::Rescaled).unwrap();
        assert_eq!((d.nu, d.sigma_bar), (0.0, 0.0));
        let ts = TimeSeries::scalar(years(4), vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!(estimate_hpi_dynamics(&ts, None, HpiScaling::Raw).is_err());
    }

    #[test]
    fn rho_perfect_correlation() {
        let u: Vec<f64> = (0..50).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let uz: Vec<DVector<f64>> = u.iter().map(|&v| DVector::from_element(1, v)).collect();
        let est = rho_from_increments(&uz, &u).unwrap();
        assert!((est.rho[0] - 1.0).abs() < 1e-12);
        assert!(!est.clamped);
        let doubled: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        let est = rho_from_increments(&uz, &doubled).unwrap();
        assert!(est.clamped);
        assert!((est.rho.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("prod.csv");
        std::fs::write(&p, "year,sector_1,sector_2\n2000,1,2\n2001,1.5,2.5\n2002,1.2,2.2\n").unwrap();
        let ts = read_productivity_csv(&p).unwrap();
        assert_eq!(ts.dim, 2);
        assert_eq!(ts.row(1), &[1.5, 2.5]);

        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "year,sector_1,sector_2\n2000,1,2\n2001,1.5\n2002,1,1\n").unwrap();
        let err = read_productivity_csv(&p).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");

        let p = dir.path().join("missing.csv");
        std::fs::write(&p, "year,index\n2000,1\n2001,\n2002,1\n").unwrap();
        let err = read_hpi_csv(&p).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");

        let p = dir.path().join("hpi.csv");
        let mut f = std::fs::File::create(&p).unwrap();
        writeln!(f, "year,index\n2019,50\n2020,80\n2021,100").unwrap();
        let ts = read_hpi_csv(&p).unwrap();
        assert!((ts.value(0) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(ts.value(2), 0.0);

        let err = read_hpi_csv(&dir.path().join("nope.csv")).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::scalar(vec![0.0, 1.0, 3.0], vec![1.0; 3]).is_err());
        assert!(TimeSeries::scalar(vec![0.0, 1.0], vec![1.0; 2]).is_err());
        assert!(TimeSeries::scalar(vec![2.0, 1.0, 0.0], vec![1.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn noiseless_decay_recovers_nu(
            nu in 0.01f64..2.0, dt in 0.01f64..1.0, x0 in -5.0f64..5.0, n in 5usize..200, scale in 0.1f64..10.0,
        ) {
            prop_assume!(x0.abs() > 1e-3);
            let ys: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
            let xs: Vec<f64> = ys.iter().map(|t| x0 * (-nu * t).exp()).collect();
            let k = TimeSeries::scalar(ys.clone(), xs.clone()).unwrap();
            let est = estimate_hpi_dynamics(&k, None, HpiScaling::Rescaled).unwrap();
            prop_assert!((est.nu - nu).abs() <= 1e-9 * nu.max(1.0));
            // Raw scaling is per step; the ratio estimate ignores the scale of the series.
            let raw = estimate_hpi_dynamics(&k, None, HpiScaling::Raw).unwrap();
            let scaled = TimeSeries::scalar(ys, xs.iter().map(|x| scale * x).collect()).unwrap();
            let raw_scaled = estimate_hpi_dynamics(&scaled, None, HpiScaling::Raw).unwrap();
            prop_assert!((raw.nu - nu * dt).abs() <= 1e-9);
            prop_assert!((raw_scaled.nu - raw.nu).abs() <= 1e-12);
            prop_assert!((raw_scaled.sigma_bar - scale * raw.sigma_bar).abs() <= 1e-12 * raw_scaled.sigma_bar.max(1.0));
        }
    }
}
