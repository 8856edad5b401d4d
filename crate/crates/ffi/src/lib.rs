// SPDX-License-Identifier: Apache-2.0

//! C ABI over `carbon_housing`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! functions and released by the matching `*_free`. Fallible calls return a
//! [`ChStatus`]; on failure [`ch_last_error`] describes the problem. Panics
//! never unwind into C: they are reported as [`ChStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use carbon_housing::config::RunConfig;
use carbon_housing::scenario::{
    carbon_price, scenario_library, CarbonScenario, EnergyPriceParams, RenovationCostParams,
};
use carbon_housing::sweep::{emit_results, run_sweep, SweepResult};
use carbon_housing::valuation::{
    optimal_renovation_date, transition_cost_x, Building, CostQuadrature, RenovationDecision,
};
use carbon_housing::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// Invalid argument, configuration or data.
    Invalid = 2,
    /// Numerical failure.
    Numerical = 3,
    /// File system error.
    Io = 4,
    /// Internal panic, caught at the boundary.
    Panic = 5,
}

/// Kind of renovation decision.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChDecision {
    Now = 0,
    At = 1,
    Never = 2,
}

/// Energy price `f1 * carbon_price + f0` (EUR/kWh).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChEnergy {
    pub f1: f64,
    pub f0: f64,
}

/// Renovation cost `c0 * |alpha - alpha_star|^(1 + c1)` (EUR/m2).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChCosts {
    pub c0: f64,
    pub c1: f64,
}

/// Numeric columns of one sweep row.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ChSweepRow {
    pub t: f64,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub x: f64,
    /// Calendar year, `+inf` for never.
    pub renovation_date: f64,
    /// Percent; NaN where undefined.
    pub slowdown: f64,
}

pub struct ChScenario(CarbonScenario);

pub struct ChBuilding(Building);

pub struct ChConfig(RunConfig);

pub struct ChSweepResult {
    result: SweepResult,
    names: Vec<(CString, CString)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChStatus {
    match e {
        Error::Numerical(_) => ChStatus::Numerical,
        Error::Io { .. } => ChStatus::Io,
        _ => ChStatus::Invalid,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChStatus::Ok,
        Ok(Err(Fail::Null(arg))) => {
            set_error(format!("null pointer argument `{arg}`"));
            ChStatus::Null
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            ChStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn string(p: *const c_char, name: &'static str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Fail::Lib(Error::InvalidInput(format!("`{name}` is not valid UTF-8"))))
}

fn energy(e: ChEnergy) -> Result<EnergyPriceParams, Fail> {
    Ok(EnergyPriceParams::new("ffi", e.f1, e.f0)?)
}

fn costs(c: ChCosts) -> Result<RenovationCostParams, Fail> {
    Ok(RenovationCostParams::new(c.c0, c.c1)?)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_scenario_new(
    name: *const c_char,
    t_start: f64,
    t_end: f64,
    p_carbon0: f64,
    eta_delta: f64,
    out_scenario: *mut *mut ChScenario,
) -> ChStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let s = CarbonScenario::new(string(name, "name")?, t_start, t_end, p_carbon0, eta_delta)?;
        *slot = Box::into_raw(Box::new(ChScenario(s)));
        Ok(())
    })
}

/// Number of built-in scenarios.
#[no_mangle]
pub extern "C" fn ch_scenario_builtin_count() -> usize {
    scenario_library().len()
}

/// Built-in scenario `index`, ordered from the mildest to the most
/// stringent policy.
///
/// # Safety
/// `out_scenario` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_scenario_builtin(index: usize, out_scenario: *mut *mut ChScenario) -> ChStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let s = scenario_library()
            .into_iter()
            .nth(index)
            .ok_or_else(|| Error::InvalidInput(format!("no built-in scenario {index}")))?;
        *slot = Box::into_raw(Box::new(ChScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ch_scenario_free(scenario: *mut ChScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_carbon_price(scenario: *const ChScenario, t: f64, out_price: *mut f64) -> ChStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let slot = out(out_price, "out_price")?;
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("t must be finite, got {t}")).into());
        }
        *slot = carbon_price(&s.0, t);
        Ok(())
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out_building` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_building_new(
    name: *const c_char,
    c0_price: f64,
    surface: f64,
    alpha: f64,
    alpha_star: f64,
    rbar: f64,
    out_building: *mut *mut ChBuilding,
) -> ChStatus {
    guard(|| {
        let slot = out(out_building, "out_building")?;
        let b = Building {
            name: string(name, "name")?,
            c0_price,
            surface,
            alpha,
            alpha_star,
            source: "ffi".into(),
            rbar,
        };
        b.validate()?;
        *slot = Box::into_raw(Box::new(ChBuilding(b)));
        Ok(())
    })
}

/// # Safety
/// `building` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ch_building_free(building: *mut ChBuilding) {
    if !building.is_null() {
        drop(Box::from_raw(building));
    }
}

/// Optimal renovation decision seen from calendar date `t`. `out_date`
/// receives the renovation year (`t` for now, `+inf` for never).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_optimal_renovation_date(
    building: *const ChBuilding,
    scenario: *const ChScenario,
    energy_price: ChEnergy,
    renovation: ChCosts,
    t: f64,
    out_kind: *mut ChDecision,
    out_date: *mut f64,
) -> ChStatus {
    guard(|| {
        let b = deref(building, "building")?;
        let s = deref(scenario, "scenario")?;
        let kind = out(out_kind, "out_kind")?;
        let date = out(out_date, "out_date")?;
        let d = optimal_renovation_date(&b.0, &s.0, &energy(energy_price)?, &costs(renovation)?, t)?;
        *kind = match d {
            RenovationDecision::Now => ChDecision::Now,
            RenovationDecision::At(_) => ChDecision::At,
            RenovationDecision::Never => ChDecision::Never,
        };
        *date = d.date(t);
        Ok(())
    })
}

/// Transition cost per m² at `t`. `points > 0` selects the rectangle rule
/// with that many panels, `0` adaptive quadrature.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_transition_cost(
    building: *const ChBuilding,
    scenario: *const ChScenario,
    energy_price: ChEnergy,
    renovation: ChCosts,
    t: f64,
    points: usize,
    out_cost: *mut f64,
) -> ChStatus {
    guard(|| {
        let b = deref(building, "building")?;
        let s = deref(scenario, "scenario")?;
        let slot = out(out_cost, "out_cost")?;
        let quad = if points == 0 {
            CostQuadrature::Adaptive { rel_tol: 1e-12 }
        } else {
            CostQuadrature::Rectangle(points)
        };
        *slot = transition_cost_x(&b.0, &s.0, &energy(energy_price)?, &costs(renovation)?, t, quad)?;
        Ok(())
    })
}

/// Loads a TOML run configuration, or the built-in one for
/// `"builtin:france"`. The configuration is checked in full.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_config` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_config_load(path: *const c_char, out_config: *mut *mut ChConfig) -> ChStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        let cfg = RunConfig::load(&string(path, "path")?)?;
        cfg.resolve()?;
        *slot = Box::into_raw(Box::new(ChConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `config` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_config_set_seed(config: *mut ChConfig, seed: u64) -> ChStatus {
    guard(|| {
        out(config, "config")?.0.sweep.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_config_set_paths(config: *mut ChConfig, n_paths: usize) -> ChStatus {
    guard(|| {
        if n_paths == 0 {
            return Err(Error::InvalidInput("n_paths must be >= 1".into()).into());
        }
        out(config, "config")?.0.sweep.n_paths = n_paths;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ch_config_free(config: *mut ChConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the Monte Carlo sweep described by `config`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_run(config: *const ChConfig, out_result: *mut *mut ChSweepResult) -> ChStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let slot = out(out_result, "out_result")?;
        let r = cfg.0.resolve()?;
        let result = run_sweep(&r.sweep, &r.economy, &r.housing)?;
        let names = result
            .rows
            .iter()
            .map(|row| {
                let c = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
                (c(&row.scenario), c(&row.building))
            })
            .collect();
        *slot = Box::into_raw(Box::new(ChSweepResult { result, names }));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `result` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_len(result: *const ChSweepResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.rows.len())
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_row(
    result: *const ChSweepResult,
    index: usize,
    out_row: *mut ChSweepRow,
) -> ChStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let slot = out(out_row, "out_row")?;
        let row =
            r.result.rows.get(index).ok_or_else(|| {
                Error::InvalidInput(format!("row {index} out of range ({} rows)", r.result.rows.len()))
            })?;
        *slot = ChSweepRow {
            t: row.t,
            mean: row.mean,
            ci_lo: row.ci_lo,
            ci_hi: row.ci_hi,
            x: row.x,
            renovation_date: row.renovation_date,
            slowdown: row.slowdown,
        };
        Ok(())
    })
}

/// Scenario and building names of row `index`. The strings belong to
/// `result` and live until it is freed.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_row_names(
    result: *const ChSweepResult,
    index: usize,
    out_scenario: *mut *const c_char,
    out_building: *mut *const c_char,
) -> ChStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let s = out(out_scenario, "out_scenario")?;
        let b = out(out_building, "out_building")?;
        let (sn, bn) = r
            .names
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("row {index} out of range ({} rows)", r.names.len())))?;
        *s = sn.as_ptr();
        *b = bn.as_ptr();
        Ok(())
    })
}

/// Writes the result table as CSV.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_write_csv(result: *const ChSweepResult, path: *const c_char) -> ChStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let p = string(path, "path")?;
        emit_results(&r.result, Path::new(&p), None)?;
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ch_sweep_free(result: *mut ChSweepResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
