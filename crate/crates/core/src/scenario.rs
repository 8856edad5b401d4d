// SPDX-License-Identifier: Apache-2.0

//! Deterministic transition scenarios: the carbon price `δ_t`, the energy
//! price `f(δ) = f1 δ + f0` and the renovation cost `c0 |α - α★|^(1 + c1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-exponential carbon price: flat at `p_carbon0` until `t_start`,
/// growing at rate `eta_delta` until `t_end`, flat afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonScenario {
    pub name: String,
    /// Start of the transition (calendar year).
    pub t_start: f64,
    /// End of the transition (calendar year).
    pub t_end: f64,
    /// Carbon price at the start, in €/tCO2.
    pub p_carbon0: f64,
    /// Growth rate per year.
    pub eta_delta: f64,
}

impl CarbonScenario {
    pub fn new(name: impl Into<String>, t_start: f64, t_end: f64, p_carbon0: f64, eta_delta: f64) -> Result<Self> {
        let s = Self {
            name: name.into(),
            t_start,
            t_end,
            p_carbon0,
            eta_delta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.t_start, self.t_end, self.p_carbon0, self.eta_delta]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid(format!(
                "scenario `{}`: non-finite parameter",
                self.name
            )));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::invalid(format!(
                "scenario `{}`: t_end ({}) must be after t_start ({})",
                self.name, self.t_end, self.t_start
            )));
        }
        if !(self.p_carbon0 > 0.0) {
            return Err(Error::invalid(format!(
                "scenario `{}`: p_carbon0 must be positive, got {}",
                self.name, self.p_carbon0
            )));
        }
        if self.eta_delta < 0.0 {
            return Err(Error::invalid(format!(
                "scenario `{}`: eta_delta must be >= 0, got {}",
                self.name, self.eta_delta
            )));
        }
        Ok(())
    }

    /// Carbon price once the transition is over.
    pub fn plateau(&self) -> f64 {
        carbon_price(self, self.t_end)
    }
}

/// `δ_t`. The argument is clamped to `[t_start, t_end]`, so the plateau is
/// bitwise equal to the value at `t_end`.
pub fn carbon_price(scenario: &CarbonScenario, t: f64) -> f64 {
    let s = t.clamp(scenario.t_start, scenario.t_end);
    if s <= scenario.t_start {
        return scenario.p_carbon0;
    }
    scenario.p_carbon0 * (scenario.eta_delta * (s - scenario.t_start)).exp()
}

/// Energy price as an affine function of the carbon price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPriceParams {
    pub source: String,
    /// €/kWh per €/tCO2.
    pub f1: f64,
    /// €/kWh; may be negative.
    pub f0: f64,
}

impl EnergyPriceParams {
    pub fn new(source: impl Into<String>, f1: f64, f0: f64) -> Result<Self> {
        let p = Self {
            source: source.into(),
            f1,
            f0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Pass-through form: the energy price equals `price0` when the carbon
    /// price is `p_carbon0`, and moves by `k` per unit of carbon price.
    pub fn pass_through(source: impl Into<String>, price0: f64, k: f64, p_carbon0: f64) -> Result<Self> {
        Self::new(source, k, price0 - k * p_carbon0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.f1.is_finite() || !self.f0.is_finite() {
            return Err(Error::invalid(format!(
                "energy `{}`: non-finite coefficient",
                self.source
            )));
        }
        if self.f1 < 0.0 {
            return Err(Error::invalid(format!(
                "energy `{}`: f1 must be >= 0, got {}",
                self.source, self.f1
            )));
        }
        Ok(())
    }
}

/// Energy price model for one source: fixed coefficients, or a pass-through
/// rate anchored at each scenario's initial carbon price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnergySpec {
    Affine(EnergyPriceParams),
    PassThrough { source: String, price0: f64, k: f64 },
}

impl EnergySpec {
    pub fn source(&self) -> &str {
        match self {
            EnergySpec::Affine(p) => &p.source,
            EnergySpec::PassThrough { source, .. } => source,
        }
    }

    /// Coefficients `(f1, f0)` under `scenario`.
    pub fn resolve(&self, scenario: &CarbonScenario) -> Result<EnergyPriceParams> {
        match self {
            EnergySpec::Affine(p) => {
                p.validate()?;
                Ok(p.clone())
            }
            EnergySpec::PassThrough { source, price0, k } => {
                EnergyPriceParams::pass_through(source.clone(), *price0, *k, scenario.p_carbon0)
            }
        }
    }
}

/// `f(δ) = f1 δ + f0`.
pub fn energy_price(p: &EnergyPriceParams, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!(
            "energy price: carbon price must be >= 0, got {delta}"
        )));
    }
    Ok(p.f1 * delta + p.f0)
}

/// Energy price along a scenario, `f(δ_t)`.
pub fn energy_price_at(p: &EnergyPriceParams, scenario: &CarbonScenario, t: f64) -> f64 {
    p.f1 * carbon_price(scenario, t) + p.f0
}

/// Lowest energy price on the transition window. Since `f ∘ δ` is
/// non-decreasing it is the value at `t_start`.
pub fn min_energy_price_on_transition(p: &EnergyPriceParams, scenario: &CarbonScenario) -> f64 {
    energy_price_at(p, scenario, scenario.t_start)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenovationCostParams {
    pub c0: f64,
    pub c1: f64,
}

impl RenovationCostParams {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        let p = Self { c0, c1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) || !self.c0.is_finite() {
            return Err(Error::invalid(format!(
                "renovation: c0 must be positive, got {}",
                self.c0
            )));
        }
        if !(self.c1 >= -1.0) || !self.c1.is_finite() {
            return Err(Error::invalid(format!("renovation: c1 must be >= -1, got {}", self.c1)));
        }
        Ok(())
    }
}

/// `c0 |α - α★|^(1 + c1)` in €/m².
pub fn renovation_cost(p: &RenovationCostParams, alpha: f64, alpha_star: f64) -> f64 {
    let gap = (alpha - alpha_star).abs();
    if p.c1 == -1.0 {
        return p.c0;
    }
    p.c0 * gap.powf(1.0 + p.c1)
}

pub const NGFS_T_START: f64 = 2021.0;
pub const NGFS_T_END: f64 = 2030.0;

/// The four NGFS scenarios, from the mildest to the most stringent.
pub fn scenario_library() -> Vec<CarbonScenario> {
    [
        ("Current Policies", 30.957, 0.01693),
        ("NDCs", 33.321, 0.07994),
        ("Divergent Net Zero", 32.963, 0.12893),
        ("Net Zero 2050", 34.315, 0.17935),
    ]
    .into_iter()
    .map(|(name, p0, eta)| CarbonScenario {
        name: name.to_string(),
        t_start: NGFS_T_START,
        t_end: NGFS_T_END,
        p_carbon0: p0,
        eta_delta: eta,
    })
    .collect()
}

/// Electricity price at the start of the transition (€/kWh).
pub const ELECTRICITY_PRICE0: f64 = 0.2161;
/// Electricity pass-through rate of the carbon price.
pub const ELECTRICITY_PASS_THROUGH: f64 = 0.55;

/// Renovation cost parameters of the French example.
pub fn default_renovation_cost() -> RenovationCostParams {
    RenovationCostParams { c0: 0.01, c1: 0.1 }
}
