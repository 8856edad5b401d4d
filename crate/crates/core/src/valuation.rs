// SPDX-License-Identifier: Apache-2.0

//! Housing prices and the renovation decision.
//!
//! The log housing index follows `dK = (χ' + ν (χ - K)) dt + σ̄ dB̄` around
//! the linear trend `χ(s) = ϱ (s + trend_offset) + ϑ`, where `s` is model time
//! in years since the start of the transition and `dB̄ = ρᵀ dB^Z +
//! sqrt(1 - |ρ|²) dW̄`. An efficient building is worth `R C0 e^K`; an
//! inefficient one loses `R X`, with `X` the discounted cost of renovating at
//! the optimal date plus the excess energy bill until then.

use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::economy::{PathGrid, ZPath};
use crate::error::{Error, Result};
use crate::quadrature::integrate_piecewise;
use crate::rng::{path_rng, Domain};
use crate::scenario::{energy_price_at, renovation_cost, CarbonScenario, EnergyPriceParams, RenovationCostParams};

/// Parameters of the exponential-OU housing index.
#[derive(Debug, Clone, PartialEq)]
pub struct HousingIndexParams {
    /// Trend slope ϱ (per year).
    pub varrho: f64,
    /// Trend intercept ϑ.
    pub vartheta: f64,
    /// Mean-reversion speed ν (per year).
    pub nu: f64,
    /// Volatility σ̄ (per sqrt-year).
    pub sigma_bar: f64,
    /// Correlation loadings on the productivity noise.
    pub rho: DVector<f64>,
    /// Log-index at model time 0.
    pub k0: f64,
    /// Years between the origin of the trend regression and model time 0.
    pub trend_offset: f64,
}

impl HousingIndexParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.varrho,
            self.vartheta,
            self.nu,
            self.sigma_bar,
            self.k0,
            self.trend_offset,
        ]
        .iter()
        .chain(self.rho.iter())
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("housing: non-finite parameter"));
        }
        if !(self.nu > 0.0) {
            return Err(Error::invalid(format!("housing: nu must be positive, got {}", self.nu)));
        }
        if self.sigma_bar < 0.0 {
            return Err(Error::invalid(format!(
                "housing: sigma_bar must be >= 0, got {}",
                self.sigma_bar
            )));
        }
        if self.rho.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "housing: |rho| must be <= 1, got {}",
                self.rho.norm()
            )));
        }
        Ok(())
    }

    /// Trend `χ(s)` at model time `s`.
    pub fn chi(&self, s: f64) -> f64 {
        self.varrho * (s + self.trend_offset) + self.vartheta
    }

    /// Weight of the idiosyncratic noise, `sqrt(1 - |ρ|²)`.
    pub fn residual_weight(&self) -> f64 {
        (1.0 - self.rho.norm_squared()).max(0.0).sqrt()
    }
}

fn default_rbar() -> f64 {
    0.05
}

/// One dwelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub name: String,
    /// Price per m² of an efficient dwelling at model time 0 (€/m²).
    pub c0_price: f64,
    /// Surface R (m²).
    pub surface: f64,
    /// Energy consumption α (kWh/m²/yr).
    pub alpha: f64,
    /// Target consumption after renovation α★ (kWh/m²/yr).
    pub alpha_star: f64,
    /// Energy source label.
    pub source: String,
    /// Discount rate r̄ (per year).
    #[serde(default = "default_rbar")]
    pub rbar: f64,
}

impl Building {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.c0_price, self.surface, self.alpha, self.alpha_star, self.rbar]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(format!("building `{}`: non-finite field", self.name)));
        }
        if !(self.surface > 0.0) {
            return Err(Error::invalid(format!(
                "building `{}`: surface must be positive",
                self.name
            )));
        }
        if !(self.alpha_star >= 0.0) || self.alpha < self.alpha_star {
            return Err(Error::invalid(format!(
                "building `{}`: need alpha >= alpha_star >= 0, got alpha = {}, alpha_star = {}",
                self.name, self.alpha, self.alpha_star
            )));
        }
        if !(self.rbar > 0.0) {
            return Err(Error::invalid(format!(
                "building `{}`: rbar must be positive",
                self.name
            )));
        }
        Ok(())
    }

    pub fn is_efficient(&self) -> bool {
        self.alpha == self.alpha_star
    }
}

/// Outcome of the stopping problem at a valuation date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenovationDecision {
    Now,
    At(f64),
    Never,
}

impl RenovationDecision {
    /// Renovation date as a calendar year (`+inf` for never).
    pub fn date(&self, t: f64) -> f64 {
        match *self {
            RenovationDecision::Now => t,
            RenovationDecision::At(d) => d,
            RenovationDecision::Never => f64::INFINITY,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RenovationDecision::Now => "now",
            RenovationDecision::At(_) => "renovate_at",
            RenovationDecision::Never => "never",
        }
    }
}

/// `LN(m, v)` on the log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalLaw {
    pub m: f64,
    pub v: f64,
}

impl LogNormalLaw {
    pub fn mean(&self) -> f64 {
        (self.m + 0.5 * self.v).exp()
    }
}

/// Simulates the log index on the grid of `zpath`, path number `path`.
pub fn simulate_log_index(h: &HousingIndexParams, zpath: &ZPath, seed: u64, path: u64) -> Result<Vec<f64>> {
    let grid = zpath.z.grid;
    if zpath.z.dim != h.rho.len() || zpath.increments.len() != grid.n_steps * h.rho.len() {
        return Err(Error::invalid(format!(
            "housing: rho has {} loadings but the productivity path has dimension {} and {} increments",
            h.rho.len(),
            zpath.z.dim,
            zpath.increments.len()
        )));
    }
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let w = h.residual_weight();
    let mut rng = path_rng(seed, Domain::Housing, path);
    let mut k = h.k0;
    let mut out = Vec::with_capacity(grid.n_steps + 1);
    out.push(k);
    for step in 0..grid.n_steps {
        let s = step as f64 * dt;
        let db_z: f64 = zpath.increment(step).iter().zip(h.rho.iter()).map(|(a, b)| a * b).sum();
        let xi: f64 = StandardNormal.sample(&mut rng);
        let db_bar = db_z + w * sqrt_dt * xi;
        k += (h.varrho + h.nu * (h.chi(s) - k)) * dt + h.sigma_bar * db_bar;
        out.push(k);
    }
    Ok(out)
}

/// Efficient-building price paths `R C0 e^{K}` driven by the given
/// productivity paths (path `i` of the slice uses housing stream `i`).
pub fn efficient_value_paths(
    h: &HousingIndexParams,
    building: &Building,
    z_paths: &[ZPath],
    seed: u64,
) -> Result<Vec<PathGrid>> {
    h.validate()?;
    let Some(first) = z_paths.first() else {
        return Ok(Vec::new());
    };
    let grid = first.z.grid;
    let scale = building.surface * building.c0_price;
    z_paths
        .par_iter()
        .enumerate()
        .map(|(i, zp)| {
            if zp.z.grid != grid {
                return Err(Error::invalid("housing: productivity paths do not share one grid"));
            }
            let k = simulate_log_index(h, zp, seed, i as u64)?;
            PathGrid::from_rows(grid, 1, k.into_iter().map(|v| scale * v.exp()).collect())
        })
        .collect()
}

/// Law of the price at model time `t + T` given the productivity noise up to
/// `t`. The stochastic integral is the left-point sum along `zpath`, whose
/// grid must start at model time 0 and contain `t` as a node. `zpath` may be
/// omitted when `t = 0`.
pub fn conditional_price_law(
    h: &HousingIndexParams,
    building: &Building,
    t: f64,
    horizon: f64,
    zpath: Option<&ZPath>,
) -> Result<LogNormalLaw> {
    if !(t >= 0.0) || !(horizon >= 0.0) || !t.is_finite() || !horizon.is_finite() {
        return Err(Error::invalid(format!(
            "conditional price law: need finite t, T >= 0, got t = {t}, T = {horizon}"
        )));
    }
    let nu = h.nu;
    let end = t + horizon;
    let mut stoch = 0.0;
    if t > 0.0 {
        let zp = zpath.ok_or_else(|| Error::invalid("conditional price law: t > 0 needs a productivity path"))?;
        let grid = zp.z.grid;
        let dt = grid.dt();
        let n_t = ((t / dt) + 0.5).floor() as usize;
        if (n_t as f64 * dt - t).abs() > 1e-9 * dt.max(t) || n_t > grid.n_steps {
            return Err(Error::invalid(format!(
                "conditional price law: t = {t} is not a node of the productivity grid"
            )));
        }
        if zp.z.dim != h.rho.len() {
            return Err(Error::invalid("conditional price law: rho and path dimensions differ"));
        }
        for step in 0..n_t {
            let s = step as f64 * dt;
            let db: f64 = zp.increment(step).iter().zip(h.rho.iter()).map(|(a, b)| a * b).sum();
            stoch += (-nu * (end - s)).exp() * db;
        }
    }
    let m = (building.surface * building.c0_price).ln() + h.chi(end) - (h.chi(0.0) - h.k0) * (-nu * end).exp()
        + h.sigma_bar * stoch;
    let r2 = h.rho.norm_squared().min(1.0);
    let s2 = h.sigma_bar * h.sigma_bar;
    let v = s2 * r2 * (1.0 - (-2.0 * nu * horizon).exp()) / (2.0 * nu)
        + s2 * (1.0 - r2) * (1.0 - (-2.0 * nu * end).exp()) / (2.0 * nu);
    Ok(LogNormalLaw { m, v })
}

/// Energy price at which saving energy pays for the annualized renovation:
/// `r̄ c0 |α - α★|^{c1}`.
pub fn marginal_threshold(building: &Building, costs: &RenovationCostParams) -> Result<f64> {
    let gap = building.alpha - building.alpha_star;
    if !(gap > 0.0) {
        return Err(Error::invalid(format!(
            "building `{}`: threshold undefined for alpha = alpha_star",
            building.name
        )));
    }
    Ok(building.rbar * renovation_cost(costs, building.alpha, building.alpha_star) / gap)
}

fn check_inputs(
    building: &Building,
    scenario: &CarbonScenario,
    energy: &EnergyPriceParams,
    costs: &RenovationCostParams,
    t: f64,
) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("valuation date must be finite, got {t}")));
    }
    building.validate()?;
    scenario.validate()?;
    energy.validate()?;
    costs.validate()
}

const BISECTION_TOL: f64 = 1e-9;

/// Optimal renovation date seen from calendar date `t`.
pub fn optimal_renovation_date(
    building: &Building,
    scenario: &CarbonScenario,
    energy: &EnergyPriceParams,
    costs: &RenovationCostParams,
    t: f64,
) -> Result<RenovationDecision> {
    check_inputs(building, scenario, energy, costs, t)?;
    if building.is_efficient() {
        return Ok(RenovationDecision::Never);
    }
    let tau = marginal_threshold(building, costs)?;
    let gap = |s: f64| energy_price_at(energy, scenario, s) - tau;

    if gap(t) >= 0.0 {
        return Ok(RenovationDecision::Now);
    }
    if gap(scenario.t_end) < 0.0 {
        return Ok(RenovationDecision::Never);
    }
    // f(δ_t) < τ <= f(δ_{t★}) and t < t★: a single crossing in (t, t★].
    let lo = t.max(scenario.t_start);
    if scenario.eta_delta > 0.0 && energy.f1 > 0.0 && tau > energy.f0 {
        let theta = scenario.t_start + ((tau - energy.f0) / (energy.f1 * scenario.p_carbon0)).ln() / scenario.eta_delta;
        if theta.is_finite() {
            if theta <= t {
                return Ok(RenovationDecision::Now);
            }
            if theta <= scenario.t_end {
                return Ok(RenovationDecision::At(theta));
            }
        }
    }
    let (mut a, mut b) = (lo, scenario.t_end);
    while b - a > BISECTION_TOL {
        let m = 0.5 * (a + b);
        if gap(m) >= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(RenovationDecision::At(b))
}

/// Quadrature used for the energy-cost integral in `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostQuadrature {
    /// `P` equal panels, integrand at the right end of each panel.
    Rectangle(usize),
    /// Adaptive Simpson, split at the kinks of the carbon price.
    Adaptive { rel_tol: f64 },
}

impl Default for CostQuadrature {
    fn default() -> Self {
        CostQuadrature::Rectangle(1024)
    }
}

fn discounted_energy_integral(
    energy: &EnergyPriceParams,
    scenario: &CarbonScenario,
    rbar: f64,
    t: f64,
    end: f64,
    quad: CostQuadrature,
) -> Result<f64> {
    if end <= t {
        return Ok(0.0);
    }
    let f = |u: f64| energy_price_at(energy, scenario, u) * (-rbar * (u - t)).exp();
    match quad {
        CostQuadrature::Rectangle(p) => {
            if p == 0 {
                return Err(Error::invalid("transition cost: quadrature_points must be >= 1"));
            }
            let w = (end - t) / p as f64;
            Ok(w * (1..=p).map(|i| f(t + w * i as f64)).sum::<f64>())
        }
        CostQuadrature::Adaptive { rel_tol } => Ok(integrate_piecewise(
            &f,
            t,
            end,
            &[scenario.t_start, scenario.t_end],
            rel_tol,
        )),
    }
}

/// Transition cost `X` (€/m²) when renovating at `date` (calendar year,
/// `None` for never), seen from `t`. Dates before `t` mean the works are done
/// at `t`.
#[allow(clippy::too_many_arguments)]
pub fn transition_cost_for_date(
    building: &Building,
    scenario: &CarbonScenario,
    energy: &EnergyPriceParams,
    costs: &RenovationCostParams,
    t: f64,
    date: Option<f64>,
    quad: CostQuadrature,
) -> Result<f64> {
    check_inputs(building, scenario, energy, costs, t)?;
    if let CostQuadrature::Rectangle(0) = quad {
        return Err(Error::invalid("transition cost: quadrature_points must be >= 1"));
    }
    if building.is_efficient() {
        return Ok(0.0);
    }
    let r = building.rbar;
    let da = building.alpha - building.alpha_star;
    let cost = renovation_cost(costs, building.alpha, building.alpha_star);
    match date {
        Some(d) => {
            let d = d.max(t);
            let integral = discounted_energy_integral(energy, scenario, r, t, d, quad)?;
            Ok(cost * (-r * (d - t)).exp() + da * integral)
        }
        None => {
            let split = t.max(scenario.t_end);
            let integral = discounted_energy_integral(energy, scenario, r, t, split, quad)?;
            let plateau = energy.f1 * scenario.plateau() + energy.f0;
            let tail = plateau * (-r * (split - t)).exp() / r;
            Ok(da * (integral + tail))
        }
    }
}

/// Transition cost `X` at the optimal renovation date seen from `t`.
pub fn transition_cost_x(
    building: &Building,
    scenario: &CarbonScenario,
    energy: &EnergyPriceParams,
    costs: &RenovationCostParams,
    t: f64,
    quad: CostQuadrature,
) -> Result<f64> {
    let decision = optimal_renovation_date(building, scenario, energy, costs, t)?;
    let date = match decision {
        RenovationDecision::Never => None,
        d => Some(d.date(t)),
    };
    transition_cost_for_date(building, scenario, energy, costs, t, date, quad)
}

/// Climate-adjusted value `C - R X`; may be negative.
pub fn climate_adjusted_value(efficient_value: f64, building: &Building, x: f64) -> f64 {
    efficient_value - building.surface * x
}

/// Stopping objective `H(θ)` (€/m²): renovation cost discounted from `θ` plus
/// the discounted excess energy bill on `[t, θ]`. `θ = +inf` is allowed.
pub fn h_objective(
    building: &Building,
    scenario: &CarbonScenario,
    energy: &EnergyPriceParams,
    costs: &RenovationCostParams,
    t: f64,
    theta: f64,
) -> Result<f64> {
    if !(theta >= t) {
        return Err(Error::invalid(format!(
            "h_objective: theta ({theta}) must be >= t ({t})"
        )));
    }
    let date = if theta.is_finite() { Some(theta) } else { None };
    transition_cost_for_date(
        building,
        scenario,
        energy,
        costs,
        t,
        date,
        CostQuadrature::Adaptive { rel_tol: 1e-14 },
    )
}

/// The five dwellings of the French example (C0 = 4000 €/m², R = 25 m²,
/// electric heating, α★ = 70).
pub fn example_buildings() -> Vec<Building> {
    [320.0, 253.0, 187.0, 120.0, 70.0]
        .iter()
        .enumerate()
        .map(|(i, &alpha)| Building {
            name: format!("Building {}", i + 1),
            c0_price: 4000.0,
            surface: 25.0,
            alpha,
            alpha_star: 70.0,
            source: "electricity".into(),
            rbar: default_rbar(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{simulate_z, ProductivityParams, TimeGrid};
    use crate::scenario::carbon_price;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn toy() -> (Building, CarbonScenario, EnergyPriceParams, RenovationCostParams) {
        (
            Building {
                name: "toy".into(),
                c0_price: 1.0,
                surface: 1.0,
                alpha: 1.0,
                alpha_star: 0.0,
                source: "e".into(),
                rbar: 4.0,
            },
            CarbonScenario::new("toy", 0.0, 10.0, 1.0, 2f64.ln()).unwrap(),
            EnergyPriceParams::new("e", 1.0, 0.0).unwrap(),
            RenovationCostParams::new(1.0, 0.0).unwrap(),
        )
    }

    fn housing(sigma_bar: f64, rho: Vec<f64>) -> HousingIndexParams {
        HousingIndexParams {
            varrho: 0.0,
            vartheta: 0.3,
            nu: 0.5,
            sigma_bar,
            rho: DVector::from_vec(rho),
            k0: 0.3,
            trend_offset: 0.0,
        }
    }

    #[test]
    fn toy_date_is_two() {
        let (b, s, e, c) = toy();
        let d = optimal_renovation_date(&b, &s, &e, &c, 0.0).unwrap();
        match d {
            RenovationDecision::At(x) => assert!((x - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn now_and_never_cases() {
        let (b, s, _, c) = toy();
        let e = EnergyPriceParams::new("e", 0.0, 5.0).unwrap();
        assert_eq!(
            optimal_renovation_date(&b, &s, &e, &c, 3.0).unwrap(),
            RenovationDecision::Now
        );
        let e = EnergyPriceParams::new("e", 0.001, 0.0).unwrap();
        assert_eq!(
            optimal_renovation_date(&b, &s, &e, &c, 0.0).unwrap(),
            RenovationDecision::Never
        );
        let mut eff = b.clone();
        eff.alpha = 0.0;
        assert_eq!(
            optimal_renovation_date(&eff, &s, &e, &c, 0.0).unwrap(),
            RenovationDecision::Never
        );
        let flat = CarbonScenario::new("flat", 0.0, 10.0, 1.0, 0.0).unwrap();
        let e = EnergyPriceParams::new("e", 1.0, 2.0).unwrap();
        assert_eq!(
            optimal_renovation_date(&b, &flat, &e, &c, 0.0).unwrap(),
            RenovationDecision::Never
        );
    }

    #[test]
    fn past_crossing_means_now() {
        let (b, s, e, c) = toy();
        assert_eq!(
            optimal_renovation_date(&b, &s, &e, &c, 2.5).unwrap(),
            RenovationDecision::Now
        );
        assert_eq!(
            optimal_renovation_date(&b, &s, &e, &c, 12.0).unwrap(),
            RenovationDecision::Now
        );
    }

    #[test]
    fn negative_intercept_crossing() {
        let (b, s, _, c) = toy();
        let e = EnergyPriceParams::new("e", 2.0, -4.0).unwrap();
        let RenovationDecision::At(x) = optimal_renovation_date(&b, &s, &e, &c, 0.0).unwrap() else {
            panic!()
        };
        // 2·2^θ - 4 = 4  ⇒  θ = 2
        assert!((x - 2.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_examples() {
        let (mut b, _, _, c) = toy();
        b.rbar = 1.0;
        assert_eq!(marginal_threshold(&b, &c).unwrap(), 1.0);
        b.rbar = 2.0;
        assert_eq!(marginal_threshold(&b, &c).unwrap(), 2.0);
        let b1 = &example_buildings()[0];
        let v = marginal_threshold(b1, &RenovationCostParams::new(0.01, 0.1).unwrap()).unwrap();
        assert!((v - 0.05 * 0.01 * 250f64.powf(0.1)).abs() < 1e-16);
        assert!((v - 8.684e-4).abs() < 1e-6);
        assert!(marginal_threshold(&example_buildings()[4], &c).is_err());
    }

    #[test]
    fn transition_cost_edge_cases() {
        let (b, s, e, c) = toy();
        let mut eff = b.clone();
        eff.alpha = 0.0;
        assert_eq!(
            transition_cost_x(&eff, &s, &e, &c, 0.0, CostQuadrature::default()).unwrap(),
            0.0
        );
        let x = transition_cost_x(&b, &s, &e, &c, 3.0, CostQuadrature::default()).unwrap();
        assert_eq!(x, renovation_cost(&c, 1.0, 0.0));
        assert!(transition_cost_x(&b, &s, &e, &c, 0.0, CostQuadrature::Rectangle(0)).is_err());
    }

    #[test]
    fn transition_cost_rectangle_converges_to_adaptive() {
        let (b, s, e, c) = toy();
        // exact: e^{-8} + ∫_0^2 2^u e^{-4u} du
        let k = 2f64.ln() - 4.0;
        let exact = (-8f64).exp() + ((k * 2.0).exp() - 1.0) / k;
        let adaptive = transition_cost_x(&b, &s, &e, &c, 0.0, CostQuadrature::Adaptive { rel_tol: 1e-13 }).unwrap();
        assert!((adaptive - exact).abs() < 1e-12);
        let xs: Vec<f64> = (6..=12)
            .map(|p| transition_cost_x(&b, &s, &e, &c, 0.0, CostQuadrature::Rectangle(1 << p)).unwrap())
            .collect();
        let rich: Vec<f64> = xs.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
        assert!((rich[rich.len() - 1] - rich[rich.len() - 2]).abs() < 1e-6);
        assert!((rich[rich.len() - 1] - exact).abs() < 1e-6);
    }

    #[test]
    fn never_has_analytic_tail() {
        let (b, _, _, c) = toy();
        let flat = CarbonScenario::new("flat", 0.0, 10.0, 1.0, 0.0).unwrap();
        let e = EnergyPriceParams::new("e", 0.5, 0.0).unwrap();
        // constant price 0.5 forever: X = 0.5 / 4
        for (q, tol) in [
            (CostQuadrature::Rectangle(1 << 16), 1e-4),
            (CostQuadrature::Adaptive { rel_tol: 1e-12 }, 1e-12),
        ] {
            let x = transition_cost_x(&b, &flat, &e, &c, 0.0, q).unwrap();
            assert!((x - 0.125).abs() < tol, "{x}");
            // past the transition only the analytic tail remains
            let x = transition_cost_x(&b, &flat, &e, &c, 20.0, q).unwrap();
            assert!((x - 0.125).abs() < 1e-15, "{x}");
        }
    }

    #[test]
    fn h_objective_basics() {
        let (b, s, e, c) = toy();
        assert_eq!(h_objective(&b, &s, &e, &c, 0.0, 0.0).unwrap(), 1.0);
        assert!(h_objective(&b, &s, &e, &c, 1.0, 0.5).is_err());
        let mut eff = b.clone();
        eff.alpha = 0.0;
        for th in [0.0, 1.0, 30.0, f64::INFINITY] {
            assert_eq!(h_objective(&eff, &s, &e, &c, 0.0, th).unwrap(), 0.0);
        }
        let d = 2.0;
        let n = 5000;
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for i in 0..=n {
            let th = 50.0 * i as f64 / n as f64;
            let v = h_objective(&b, &s, &e, &c, 0.0, th).unwrap();
            if v < best {
                best = v;
                arg = th;
            }
        }
        assert!((arg - d).abs() <= 50.0 / n as f64);
    }

    #[test]
    fn climate_adjusted_arithmetic() {
        let mut b = example_buildings()[0].clone();
        assert_eq!(climate_adjusted_value(1234.5, &b, 0.0), 1234.5);
        b.surface = 25.0;
        assert_eq!(climate_adjusted_value(100_000.0, &b, 4.0), 99_900.0);
    }

    #[test]
    fn price_law_degenerate_and_stationary() {
        let h = housing(0.2, vec![0.0]);
        let b = example_buildings()[0].clone();
        let law = conditional_price_law(&h, &b, 0.0, 0.0, None).unwrap();
        assert!((law.m - ((25.0f64 * 4000.0).ln() + 0.3)).abs() < 1e-12);
        assert_eq!(law.v, 0.0);
        let law = conditional_price_law(&h, &b, 0.0, 1e3, None).unwrap();
        assert!((law.v - 0.04 / 1.0).abs() < 1e-12);
        assert!(conditional_price_law(&h, &b, -1.0, 1.0, None).is_err());
        assert!(conditional_price_law(&h, &b, 1.0, 1.0, None).is_err());
    }

    #[test]
    fn price_law_matches_fine_riemann_sum() {
        // scalar ρ = 1: the stochastic term is the left-point sum itself, and
        // the deterministic terms are checked against the defining integrals.
        let p = ProductivityParams::new(
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            1.0,
        );
        let grid = TimeGrid::new(0.0, 1.0, 10_000).unwrap();
        let zp = simulate_z(&p, &grid, 1, 3).unwrap().remove(0);
        let h = HousingIndexParams {
            varrho: 0.02,
            vartheta: -0.1,
            nu: 0.4,
            sigma_bar: 0.1,
            rho: DVector::from_element(1, 1.0),
            k0: 0.05,
            trend_offset: 3.0,
        };
        let b = example_buildings()[1].clone();
        let law = conditional_price_law(&h, &b, 1.0, 1.0, Some(&zp)).unwrap();
        let mut stoch = 0.0;
        for k in 0..10_000 {
            let s = k as f64 * 1e-4;
            stoch += (-0.4f64 * (2.0 - s)).exp() * zp.increment(k)[0];
        }
        let m = (25.0f64 * 4000.0).ln() + 0.02 * 5.0 - 0.1 - (0.02 * 3.0 - 0.1 - 0.05) * (-0.8f64).exp() + 0.1 * stoch;
        assert!((law.m - m).abs() < 1e-4);
        // v by a 10^4-point midpoint sum of σ̄² e^{-2ν(t+T-s)} over [t, t+T]
        let v: f64 = (0..10_000)
            .map(|i| {
                let s = 1.0 + (i as f64 + 0.5) * 1e-4;
                0.01 * (-0.8 * (2.0 - s)).exp() * 1e-4
            })
            .sum();
        assert!((law.v - v).abs() < 1e-4);
    }

    #[test]
    fn equilibrium_without_noise_is_constant() {
        let p = ProductivityParams::new(DVector::zeros(2), DMatrix::identity(2, 2), DMatrix::identity(2, 2), 1.0);
        let grid = TimeGrid::new(2021.0, 2031.0, 100).unwrap();
        let z = simulate_z(&p, &grid, 3, 1).unwrap();
        let h = housing(0.0, vec![0.3, 0.1]);
        let b = example_buildings()[0].clone();
        let v = efficient_value_paths(&h, &b, &z, 1).unwrap();
        let target = 25.0 * 4000.0 * 0.3f64.exp();
        for path in &v {
            assert!(path.as_slice().iter().all(|x| (x - target).abs() < 1e-9 * target));
        }
        let h = housing(0.2, vec![0.3, 0.1]);
        let v = efficient_value_paths(&h, &b, &z, 1).unwrap();
        assert_eq!(v[0].node(0)[0], target);
    }

    #[test]
    fn rho_dimension_mismatch_is_rejected() {
        let p = ProductivityParams::new(DVector::zeros(1), DMatrix::identity(1, 1), DMatrix::identity(1, 1), 1.0);
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let z = simulate_z(&p, &grid, 1, 1).unwrap();
        let h = housing(0.2, vec![0.3, 0.1]);
        assert!(efficient_value_paths(&h, &example_buildings()[0], &z, 1).is_err());
    }

    proptest! {
        #[test]
        fn renovate_now_bound_and_positivity(
            i in 0usize..5, s in 0usize..4, t in 2015.0f64..2045.0, rbar in 0.01f64..0.2,
            c0 in 0.001f64..50.0, c1 in -0.5f64..0.5, f1 in 0.0f64..0.01, f0 in 0.0f64..0.3,
        ) {
            let mut b = example_buildings()[i].clone();
            b.rbar = rbar;
            let sc = crate::scenario::scenario_library()[s].clone();
            let e = EnergyPriceParams::new("electricity", f1, f0).unwrap();
            let c = RenovationCostParams::new(c0, c1).unwrap();
            let x = transition_cost_x(&b, &sc, &e, &c, t, CostQuadrature::default()).unwrap();
            let cost = renovation_cost(&c, b.alpha, b.alpha_star);
            prop_assert!(x <= cost * (1.0 + 1e-9) + 1e-12);
            prop_assert!(x >= 0.0);
        }

        #[test]
        fn decision_invariant_under_joint_scaling(
            lambda in 0.01f64..100.0, eta in 0.01f64..0.3, p0 in 10.0f64..100.0,
            c0 in 0.01f64..10.0, gap in 10.0f64..300.0,
        ) {
            let b = Building { alpha: 70.0 + gap, ..example_buildings()[0].clone() };
            let sc = CarbonScenario::new("s", 2021.0, 2030.0, p0, eta).unwrap();
            let e = EnergyPriceParams::new("electricity", 0.001, 0.01).unwrap();
            let c = RenovationCostParams::new(c0, 0.1).unwrap();
            let es = EnergyPriceParams::new("electricity", 0.001 * lambda, 0.01 * lambda).unwrap();
            let cs = RenovationCostParams::new(c0 * lambda, 0.1).unwrap();
            let d1 = optimal_renovation_date(&b, &sc, &e, &c, 2021.0).unwrap();
            let d2 = optimal_renovation_date(&b, &sc, &es, &cs, 2021.0).unwrap();
            match (d1, d2) {
                (RenovationDecision::At(a), RenovationDecision::At(b)) => prop_assert!((a - b).abs() < 1e-9),
                (a, b) => prop_assert_eq!(a.kind(), b.kind()),
            }
        }

        #[test]
        fn date_monotone_in_policy(eta in 0.01f64..0.3, deta in 0.0f64..0.1, p0 in 10.0f64..100.0, dp in 0.0f64..20.0) {
            let b = example_buildings()[0].clone();
            let e = EnergyPriceParams::new("electricity", 0.001, 0.0).unwrap();
            let c = RenovationCostParams::new(2.0, 0.1).unwrap();
            let date = |p: f64, et: f64| {
                let sc = CarbonScenario::new("s", 2021.0, 2030.0, p, et).unwrap();
                optimal_renovation_date(&b, &sc, &e, &c, 2021.0).unwrap().date(2021.0)
            };
            prop_assert!(date(p0, eta + deta) <= date(p0, eta));
            prop_assert!(date(p0 + dp, eta) <= date(p0, eta));
        }
    }

    #[test]
    fn x_equals_cost_after_renovation_date() {
        let (b, s, e, c) = toy();
        for t in [2.0, 2.5, 5.0, 10.0, 50.0] {
            let x = transition_cost_x(&b, &s, &e, &c, t, CostQuadrature::default()).unwrap();
            assert_eq!(x, 1.0);
        }
    }

    #[test]
    fn x_is_continuous_in_t() {
        let (b, s, e, c) = toy();
        let q = CostQuadrature::Adaptive { rel_tol: 1e-12 };
        for i in 0..100 {
            let t = -1.0 + 0.03 * i as f64;
            let a = transition_cost_x(&b, &s, &e, &c, t, q).unwrap();
            let z = transition_cost_x(&b, &s, &e, &c, t + 1e-4, q).unwrap();
            assert!((a - z).abs() < 1e-3);
        }
    }

    #[test]
    fn carbon_price_used_in_energy() {
        let s = crate::scenario::scenario_library()[0].clone();
        let e = EnergyPriceParams::new("e", 0.1, 0.0).unwrap();
        assert_eq!(energy_price_at(&e, &s, 2025.0), 0.1 * carbon_price(&s, 2025.0));
    }

    proptest! {
        #[test]
        fn euler_index_mean_is_first_order(
            nu in 0.1f64..1.5, varrho in -0.05f64..0.05, vartheta in -1.0f64..1.0, k0 in -1.0f64..1.0,
        ) {
            prop_assume!((k0 - vartheta).abs() > 0.1);
            let h = HousingIndexParams { varrho, vartheta, nu, sigma_bar: 0.0, rho: DVector::zeros(1), k0, trend_offset: 0.0 };
            let p = ProductivityParams::new(DVector::zeros(1), DMatrix::identity(1, 1), DMatrix::identity(1, 1), 1.0);
            let horizon = 4.0;
            let exact = h.chi(horizon) + (k0 - h.chi(0.0)) * (-nu * horizon).exp();
            let err = |n: usize| {
                let grid = TimeGrid::new(0.0, horizon, n).unwrap();
                let zp = crate::economy::simulate_z_path(&p, &grid, 1, 0);
                let k = simulate_log_index(&h, &zp, 1, 0).unwrap();
                (k[n] - exact).abs()
            };
            let ratio = err(400) / err(800);
            prop_assert!((ratio - 2.0).abs() < 0.05, "ratio {}", ratio);
        }
    }
}
