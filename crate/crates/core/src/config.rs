// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration.
//!
//! A [`RunConfig`] is the raw file; [`RunConfig::resolve`] checks it, reads
//! any referenced data, calibrates where asked and returns model objects.
//! Every rejection is an [`Error::Config`] naming the offending field.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calibration::{
    estimate_hpi_dynamics, estimate_hpi_trend, estimate_productivity, estimate_rho, read_hpi_csv,
    read_productivity_csv, HpiEstimate, HpiScaling, ProductivityEstimate,
};
use crate::economy::ProductivityParams;
use crate::error::{Error, Result};
use crate::scenario::{
    default_renovation_cost, min_energy_price_on_transition, CarbonScenario, EnergyPriceParams, EnergySpec,
    RenovationCostParams,
};
use crate::sweep::{SweepSpec, XMode};
use crate::valuation::{Building, CostQuadrature, HousingIndexParams};

/// Name under which the built-in French configuration is addressed.
pub const BUILTIN_FRANCE: &str = "builtin:france";

const FRANCE_TOML: &str = include_str!("../configs/france.toml");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varsigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<f64>>,
    /// Fixed initial state; otherwise `N(0, ΣΣᵀ)` or the stationary law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
    #[serde(default)]
    pub stationary_start: bool,
    #[serde(default)]
    pub allow_nonstationary: bool,
    /// Productivity CSV (`year,sector_1,...`) to calibrate from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingName {
    #[default]
    Raw,
    Rescaled,
}

impl From<ScalingName> for HpiScaling {
    fn from(s: ScalingName) -> Self {
        match s {
            ScalingName::Raw => HpiScaling::Raw,
            ScalingName::Rescaled => HpiScaling::Rescaled,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HousingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varrho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vartheta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend_offset: Option<f64>,
    /// HPI CSV (`year,index`) to calibrate from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub scaling: ScalingName,
    /// Estimate ν and σ̄ on deviations from the fitted trend.
    #[serde(default = "yes")]
    pub detrend: bool,
}

impl Default for HousingSection {
    fn default() -> Self {
        Self {
            varrho: None,
            vartheta: None,
            nu: None,
            sigma_bar: None,
            rho: None,
            k0: None,
            trend_offset: None,
            data: None,
            scaling: ScalingName::Raw,
            detrend: true,
        }
    }
}

/// One energy source: `f1`/`f0`, or `price0`/`pass_through`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_through: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureName {
    #[default]
    Rectangle,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Reoptimize,
    Frozen,
}

fn default_paths() -> usize {
    10_000
}
fn default_seed() -> u64 {
    2021
}
fn default_points() -> usize {
    1024
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Calendar year of model time 0 (default: first scenario's start).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    /// Explicit valuation dates; otherwise `t_from..=t_to` by `t_step`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_step: Option<f64>,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub quadrature: QuadratureName,
    #[serde(default = "default_points")]
    pub quadrature_points: usize,
    #[serde(default = "default_rel_tol")]
    pub quadrature_rel_tol: f64,
    #[serde(default = "one")]
    pub steps_per_year: usize,
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slowdown_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slowdown_to: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        toml::from_str("").expect("all sweep fields have defaults")
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: default_format(),
        }
    }
}

/// Provenance block written into manifests; ignored on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub n_paths: usize,
    /// How the slowdown column is defined.
    pub slowdown: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub economy: EconomySection,
    #[serde(default)]
    pub housing: HousingSection,
    #[serde(default)]
    pub scenarios: Vec<CarbonScenario>,
    #[serde(default)]
    pub energy: Vec<EnergySection>,
    #[serde(default = "default_renovation_cost")]
    pub renovation: RenovationCostParams,
    #[serde(default)]
    pub buildings: Vec<Building>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

/// Estimates produced while resolving data-backed sections.
#[derive(Debug, Clone, Default)]
pub struct Calibrated {
    pub productivity: Option<ProductivityEstimate>,
    pub hpi: Option<HpiEstimate>,
}

/// A checked configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub economy: ProductivityParams,
    pub housing: HousingIndexParams,
    pub sweep: SweepSpec,
    pub slowdown_to: f64,
    pub output_dir: PathBuf,
    pub calibrated: Calibrated,
    /// Non-fatal findings (negative energy prices, non-stationary economy).
    pub warnings: Vec<String>,
}

fn at<T>(field: impl Into<String>, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        Error::Io { .. } | Error::Csv { .. } | Error::Estimation(_) => e,
        other => {
            let reason = match other {
                Error::InvalidInput(m) => m,
                o => o.to_string(),
            };
            Error::config(field, reason)
        }
    })
}

fn need<T: Clone>(field: &str, v: &Option<T>) -> Result<T> {
    v.clone().ok_or_else(|| Error::config(field, "missing value"))
}

fn matrix(field: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::config(field, format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn vector(field: &str, v: &[f64], n: usize) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(Error::config(field, format!("expected {n} entries, got {}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

fn resolve_path(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn check_exists(field: &str, p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::config(field, format!("file `{}` does not exist", p.display())))
    }
}

impl RunConfig {
    /// Parses TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("unknown field"))
                .unwrap_or("<file>")
                .to_string();
            Error::config(field, e.to_string().trim_end().to_string())
        })
    }

    /// Loads a file, or the built-in French setup for [`BUILTIN_FRANCE`].
    /// Relative data paths are made absolute against the file's directory.
    pub fn load(path: &str) -> Result<Self> {
        if path == BUILTIN_FRANCE {
            return Self::builtin_france();
        }
        let p = Path::new(path);
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = p
            .parent()
            .map(|d| if d.as_os_str().is_empty() { Path::new(".") } else { d });
        let base = base.and_then(|b| b.canonicalize().ok());
        cfg.absolutize(base.as_deref());
        Ok(cfg)
    }

    pub fn builtin_france() -> Result<Self> {
        Self::from_toml(FRANCE_TOML)
    }

    fn absolutize(&mut self, base: Option<&Path>) {
        if let Some(d) = self.economy.data.take() {
            self.economy.data = Some(resolve_path(base, &d));
        }
        if let Some(d) = self.housing.data.take() {
            self.housing.data = Some(resolve_path(base, &d));
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<file>", e.to_string()))
    }

    /// Manifest text: this configuration plus a provenance block. Loading it
    /// back as a configuration reproduces the run.
    pub fn manifest(&self, command: &str) -> Result<String> {
        let mut m = self.clone();
        m.manifest = Some(ManifestInfo {
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: self.sweep.seed,
            n_paths: self.sweep.n_paths,
            slowdown: "(exp(g - g_ref) - 1) * 100, g = annualized log-growth of the mean value since slowdown_from"
                .into(),
        });
        m.to_toml()
    }

    pub fn scenario_names(&self) -> Vec<&str> {
        self.scenarios.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn building_names(&self) -> Vec<&str> {
        self.buildings.iter().map(|b| b.name.as_str()).collect()
    }

    /// Transition scenarios, energy models, costs and buildings, checked.
    pub fn resolve_scenarios(&self) -> Result<(Vec<CarbonScenario>, Vec<EnergySpec>, Vec<String>)> {
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "at least one scenario is required"));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            at(format!("scenarios[{i}]"), s.validate())?;
            if self.scenarios[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::config(
                    format!("scenarios[{i}].name"),
                    format!("duplicate name `{}`", s.name),
                ));
            }
        }
        at("renovation", self.renovation.validate())?;
        let mut energy = Vec::with_capacity(self.energy.len());
        for (i, e) in self.energy.iter().enumerate() {
            let f = |name: &str| format!("energy[{i}].{name}");
            let spec = match (e.f1, e.f0, e.price0, e.pass_through) {
                (Some(f1), Some(f0), None, None) => {
                    EnergySpec::Affine(at(f("f1"), EnergyPriceParams::new(e.source.clone(), f1, f0))?)
                }
                (None, None, Some(price0), Some(k)) => {
                    if !(k >= 0.0) || !price0.is_finite() || !k.is_finite() {
                        return Err(Error::config(f("pass_through"), "must be a finite value >= 0"));
                    }
                    EnergySpec::PassThrough {
                        source: e.source.clone(),
                        price0,
                        k,
                    }
                }
                _ => {
                    return Err(Error::config(
                        format!("energy[{i}]"),
                        "give exactly one of (f1, f0) or (price0, pass_through)",
                    ))
                }
            };
            if energy.iter().any(|o: &EnergySpec| o.source() == e.source) {
                return Err(Error::config(f("source"), format!("duplicate source `{}`", e.source)));
            }
            energy.push(spec);
        }
        if self.buildings.is_empty() {
            return Err(Error::config("buildings", "at least one building is required"));
        }
        let mut warnings = Vec::new();
        for (i, b) in self.buildings.iter().enumerate() {
            at(format!("buildings[{i}]"), b.validate())?;
            if self.buildings[..i].iter().any(|o| o.name == b.name) {
                return Err(Error::config(
                    format!("buildings[{i}].name"),
                    format!("duplicate name `{}`", b.name),
                ));
            }
            let Some(spec) = energy.iter().find(|e| e.source() == b.source) else {
                return Err(Error::config(
                    format!("buildings[{i}].source"),
                    format!("no [[energy]] entry for source `{}`", b.source),
                ));
            };
            for s in &self.scenarios {
                let p = at(format!("buildings[{i}].source"), spec.resolve(s))?;
                let lo = min_energy_price_on_transition(&p, s);
                if lo < 0.0
                    && !warnings
                        .iter()
                        .any(|w: &String| w.contains(&s.name) && w.contains(spec.source()))
                {
                    warnings.push(format!(
                        "energy price of `{}` falls to {lo:.6} under scenario `{}`",
                        spec.source(),
                        s.name
                    ));
                }
            }
        }
        Ok((self.scenarios.clone(), energy, warnings))
    }

    /// Productivity parameters, calibrated from data if the section says so.
    pub fn resolve_economy(
        &self,
        warnings: &mut Vec<String>,
    ) -> Result<(ProductivityParams, Option<ProductivityEstimate>)> {
        let e = &self.economy;
        let inline = e.mu.is_some() || e.gamma.is_some() || e.sigma.is_some() || e.varsigma.is_some();
        let (mut params, est) = match (&e.data, inline) {
            (Some(_), true) => {
                return Err(Error::config(
                    "economy",
                    "give either inline parameters or `data`, not both",
                ))
            }
            (None, false) => {
                return Err(Error::config(
                    "economy",
                    "missing parameters (mu, gamma, sigma, varsigma) or `data`",
                ))
            }
            (Some(path), false) => {
                check_exists("economy.data", path)?;
                let theta = read_productivity_csv(path)?;
                let est = estimate_productivity(&theta)?;
                let p = ProductivityParams::new(
                    est.mu_hat.clone(),
                    est.gamma_hat.clone(),
                    est.sigma_hat.clone(),
                    est.varsigma_hat,
                );
                (p, Some(est))
            }
            (None, true) => {
                let mu = need("economy.mu", &e.mu)?;
                let n = mu.len();
                if n == 0 {
                    return Err(Error::config("economy.mu", "at least one sector is required"));
                }
                let p = ProductivityParams::new(
                    DVector::from_vec(mu),
                    matrix("economy.gamma", &need("economy.gamma", &e.gamma)?, n)?,
                    matrix("economy.sigma", &need("economy.sigma", &e.sigma)?, n)?,
                    need("economy.varsigma", &e.varsigma)?,
                );
                (p, None)
            }
        };
        let n = params.n_sectors();
        if let Some(a0) = &e.a0 {
            params.a0 = vector("economy.a0", a0, n)?;
        }
        at("economy", params.validate_nonstationary())?;
        let stationary = crate::linalg::hurwitz_spectrum(&params.gamma);
        match (&stationary, e.allow_nonstationary) {
            (Err(err), false) => {
                return Err(Error::config(
                    "economy.gamma",
                    format!("{err}; set allow_nonstationary = true to simulate anyway"),
                ))
            }
            (Err(err), true) => warnings.push(format!("economy: {err}")),
            _ => {}
        }
        params = match (&e.z0, e.stationary_start) {
            (Some(_), true) => {
                return Err(Error::config(
                    "economy.z0",
                    "z0 and stationary_start are mutually exclusive",
                ))
            }
            (Some(z0), false) => params.with_fixed_start(vector("economy.z0", z0, n)?),
            (None, true) => at("economy.stationary_start", params.with_stationary_start())?,
            (None, false) => match &est {
                // Calibrated runs start from the last standardized observation.
                Some(est) => {
                    let z = &est.z_hat;
                    params.with_fixed_start(z.row_vector(z.len() - 1))
                }
                None => params,
            },
        };
        Ok((params, est))
    }

    fn resolve_housing(
        &self,
        start: f64,
        productivity: Option<&ProductivityEstimate>,
        n_sectors: usize,
    ) -> Result<(HousingIndexParams, Option<HpiEstimate>)> {
        let h = &self.housing;
        let rho = |v: &Option<Vec<f64>>| -> Result<Option<DVector<f64>>> {
            v.as_ref().map(|r| vector("housing.rho", r, n_sectors)).transpose()
        };
        match &h.data {
            None => {
                let p = HousingIndexParams {
                    varrho: need("housing.varrho", &h.varrho)?,
                    vartheta: need("housing.vartheta", &h.vartheta)?,
                    nu: need("housing.nu", &h.nu)?,
                    sigma_bar: need("housing.sigma_bar", &h.sigma_bar)?,
                    rho: rho(&h.rho)?.ok_or_else(|| Error::config("housing.rho", "missing value"))?,
                    k0: h.k0.unwrap_or(0.0),
                    trend_offset: h.trend_offset.unwrap_or(0.0),
                };
                at("housing", p.validate())?;
                Ok((p, None))
            }
            Some(path) => {
                let inline = [h.varrho, h.vartheta, h.nu, h.sigma_bar, h.k0, h.trend_offset];
                if inline.iter().any(Option::is_some) {
                    return Err(Error::config(
                        "housing",
                        "with `data`, only `rho`, `scaling` and `detrend` may be given",
                    ));
                }
                check_exists("housing.data", path)?;
                let k = read_hpi_csv(path)?;
                let trend = estimate_hpi_trend(&k)?;
                let dynamics = estimate_hpi_dynamics(&k, h.detrend.then_some(&trend), h.scaling.into())?;
                let dt = k.dt();
                let (nu, sigma_bar) = match dynamics.scaling {
                    HpiScaling::Raw => (dynamics.nu / dt, dynamics.sigma_bar / dt.sqrt()),
                    HpiScaling::Rescaled => (dynamics.nu, dynamics.sigma_bar),
                };
                let (rho_vec, rho_est) = match (rho(&h.rho)?, productivity) {
                    (Some(r), _) => (r, None),
                    (None, Some(prod)) => {
                        let est = estimate_rho(&k, &trend, nu, sigma_bar, prod)?;
                        (est.rho.clone(), Some(est))
                    }
                    (None, None) => {
                        return Err(Error::config(
                            "housing.rho",
                            "needed when the economy is not calibrated from data",
                        ))
                    }
                };
                let k0 = k
                    .years
                    .iter()
                    .position(|y| (y - start).abs() < 1e-9)
                    .map_or(0.0, |m| k.value(m));
                let p = HousingIndexParams {
                    varrho: trend.varrho,
                    vartheta: trend.vartheta,
                    nu,
                    sigma_bar,
                    rho: rho_vec,
                    k0,
                    trend_offset: start - trend.origin,
                };
                at("housing", p.validate())?;
                Ok((
                    p,
                    Some(HpiEstimate {
                        trend,
                        dynamics,
                        rho: rho_est,
                    }),
                ))
            }
        }
    }

    fn resolve_sweep(&self, scenarios: Vec<CarbonScenario>, energy: Vec<EnergySpec>) -> Result<(SweepSpec, f64)> {
        let s = &self.sweep;
        let start = s.start.unwrap_or(scenarios[0].t_start);
        if !start.is_finite() {
            return Err(Error::config("sweep.start", "must be finite"));
        }
        let t_grid = match (&s.t_grid, s.t_from, s.t_to, s.t_step) {
            (Some(g), None, None, None) => g.clone(),
            (Some(_), ..) => {
                return Err(Error::config(
                    "sweep.t_grid",
                    "give either t_grid or t_from/t_to/t_step",
                ))
            }
            (None, from, to, step) => {
                let from = from.unwrap_or(start);
                let to = to.unwrap_or(from + 13.0);
                let step = step.unwrap_or(1.0);
                if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
                    return Err(Error::config("sweep.t_step", "need t_step > 0 and t_to >= t_from"));
                }
                let n = ((to - from) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| from + step * i as f64).collect()
            }
        };
        if t_grid.iter().any(|t| !t.is_finite() || *t < start) {
            return Err(Error::config(
                "sweep.t_grid",
                format!("dates must be finite and not before start {start}"),
            ));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("sweep.t_grid", "dates must be strictly ascending"));
        }
        // Every valuation date must land on the simulation grid.
        for &t in &t_grid {
            let k = (t - start) * s.steps_per_year as f64;
            if (k - k.round()).abs() > 1e-9 {
                return Err(Error::config(
                    "sweep.t_grid",
                    format!("date {t} is not a multiple of 1/steps_per_year after start"),
                ));
            }
        }
        if s.n_paths == 0 {
            return Err(Error::config("sweep.n_paths", "must be >= 1"));
        }
        if s.steps_per_year == 0 {
            return Err(Error::config("sweep.steps_per_year", "must be >= 1"));
        }
        let quadrature = match s.quadrature {
            QuadratureName::Rectangle => {
                if s.quadrature_points == 0 {
                    return Err(Error::config("sweep.quadrature_points", "must be >= 1"));
                }
                CostQuadrature::Rectangle(s.quadrature_points)
            }
            QuadratureName::Adaptive => {
                if !(s.quadrature_rel_tol > 0.0) {
                    return Err(Error::config("sweep.quadrature_rel_tol", "must be positive"));
                }
                CostQuadrature::Adaptive {
                    rel_tol: s.quadrature_rel_tol,
                }
            }
        };
        if let Some(r) = &s.reference {
            if !scenarios.iter().any(|sc| &sc.name == r) {
                let names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
                return Err(Error::config(
                    "sweep.reference",
                    format!("unknown scenario `{r}` (available: {})", names.join(", ")),
                ));
            }
        }
        let slowdown_from = s.slowdown_from.or_else(|| t_grid.first().copied());
        let slowdown_to = s.slowdown_to.or_else(|| t_grid.last().copied()).unwrap_or(start);
        let spec = SweepSpec {
            scenarios,
            energy,
            costs: self.renovation,
            buildings: self.buildings.clone(),
            start,
            t_grid,
            n_paths: s.n_paths,
            seed: s.seed,
            quadrature,
            steps_per_year: s.steps_per_year,
            normalize: s.normalize,
            reference: s.reference.clone(),
            mode: match s.mode {
                ModeName::Reoptimize => XMode::Reoptimize,
                ModeName::Frozen => XMode::Frozen,
            },
            slowdown_from,
        };
        at("sweep", spec.validate())?;
        Ok((spec, slowdown_to))
    }

    /// Calendar year of model time 0: `sweep.start`, else the first
    /// scenario's start.
    pub fn start_year(&self) -> Result<f64> {
        self.sweep
            .start
            .or_else(|| self.scenarios.first().map(|s| s.t_start))
            .ok_or_else(|| Error::config("sweep.start", "missing value (and no scenarios to default from)"))
    }

    /// Economy and housing parameters only.
    pub fn resolve_model(&self) -> Result<(ProductivityParams, HousingIndexParams, Calibrated, Vec<String>)> {
        let mut warnings = Vec::new();
        let start = self.start_year()?;
        let (economy, productivity) = self.resolve_economy(&mut warnings)?;
        let (housing, hpi) = self.resolve_housing(start, productivity.as_ref(), economy.n_sectors())?;
        Ok((economy, housing, Calibrated { productivity, hpi }, warnings))
    }

    /// Checks the whole configuration and builds the model objects.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.output.format != "csv" {
            return Err(Error::config(
                "output.format",
                format!("unsupported format `{}`", self.output.format),
            ));
        }
        let (scenarios, energy, mut warnings) = self.resolve_scenarios()?;
        let (economy, productivity) = self.resolve_economy(&mut warnings)?;
        let (sweep, slowdown_to) = self.resolve_sweep(scenarios, energy)?;
        let (housing, hpi) = self.resolve_housing(sweep.start, productivity.as_ref(), economy.n_sectors())?;
        Ok(Resolved {
            economy,
            housing,
            sweep,
            slowdown_to,
            output_dir: self.output.dir.clone(),
            calibrated: Calibrated { productivity, hpi },
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn builtin_resolves_with_warning() {
        let cfg = RunConfig::builtin_france().unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.sweep.scenarios.len(), 4);
        assert_eq!(r.sweep.buildings.len(), 5);
        assert_eq!(r.sweep.t_grid.len(), 14);
        assert_eq!(r.sweep.t_grid[13], 2034.0);
        assert_eq!(r.sweep.n_paths, 10_000);
        assert_eq!(r.housing.trend_offset, 41.0);
        assert!(r.warnings.iter().any(|w| w.contains("economy")));
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = RunConfig::builtin_france().unwrap();
        let text = cfg.manifest("sweep").unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back.manifest.as_ref().unwrap().seed, 2021);
        let mut plain = back.clone();
        plain.manifest = None;
        assert_eq!(plain, cfg);
    }

    #[test]
    fn rejects_unknown_fields_with_path() {
        let mut t = RunConfig::builtin_france().unwrap().to_toml().unwrap();
        t = t.replacen("[sweep]", "[sweep]\nn_pathz = 3", 1);
        let e = RunConfig::from_toml(&t).unwrap_err();
        assert_eq!(field_of(e), "n_pathz");
    }

    #[test]
    fn field_paths_on_invalid_values() {
        let base = RunConfig::builtin_france().unwrap();

        let mut c = base.clone();
        c.buildings[2].surface = -1.0;
        assert_eq!(field_of(c.resolve().unwrap_err()), "buildings[2]");

        let mut c = base.clone();
        c.economy.allow_nonstationary = false;
        assert_eq!(field_of(c.resolve().unwrap_err()), "economy.gamma");

        let mut c = base.clone();
        c.economy.gamma.as_mut().unwrap().pop();
        assert_eq!(field_of(c.resolve().unwrap_err()), "economy.gamma");

        let mut c = base.clone();
        c.energy[0].f1 = Some(1.0);
        assert_eq!(field_of(c.resolve().unwrap_err()), "energy[0]");

        let mut c = base.clone();
        c.sweep.n_paths = 0;
        assert_eq!(field_of(c.resolve().unwrap_err()), "sweep.n_paths");

        let mut c = base.clone();
        c.sweep.reference = Some("Nope".into());
        assert_eq!(field_of(c.resolve().unwrap_err()), "sweep.reference");

        let mut c = base.clone();
        c.housing.rho = Some(vec![0.9, 0.9, 0.0, 0.0]);
        assert_eq!(field_of(c.resolve().unwrap_err()), "housing");

        let mut c = base.clone();
        c.economy.data = Some("/definitely/missing.csv".into());
        assert_eq!(field_of(c.resolve().unwrap_err()), "economy");

        let mut c = base;
        c.economy = EconomySection {
            data: Some("/definitely/missing.csv".into()),
            allow_nonstationary: true,
            ..Default::default()
        };
        let e = c.resolve().unwrap_err();
        assert!(e.to_string().contains("/definitely/missing.csv"));
    }

    #[test]
    fn negative_energy_price_warns() {
        let mut c = RunConfig::builtin_france().unwrap();
        c.energy[0] = EnergySection {
            source: "electricity".into(),
            f1: Some(0.001),
            f0: Some(-0.5),
            price0: None,
            pass_through: None,
        };
        let r = c.resolve().unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("energy price")));
    }

    #[test]
    fn off_grid_dates_rejected() {
        let mut c = RunConfig::builtin_france().unwrap();
        c.sweep.t_from = None;
        c.sweep.t_to = None;
        c.sweep.t_step = None;
        c.sweep.t_grid = Some(vec![2021.0, 2021.5]);
        assert_eq!(field_of(c.resolve().unwrap_err()), "sweep.t_grid");
        c.sweep.steps_per_year = 2;
        c.resolve().unwrap();
    }
}
