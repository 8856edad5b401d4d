// SPDX-License-Identifier: Apache-2.0

//! Scenario sweeps: joint productivity/housing paths, climate-adjusted values
//! with normal confidence intervals, slowdown statistics and result files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::economy::{simulate_z_path, ProductivityParams, TimeGrid};
use crate::error::{Error, Result};
use crate::scenario::{CarbonScenario, EnergyPriceParams, EnergySpec, RenovationCostParams};
use crate::valuation::{
    optimal_renovation_date, simulate_log_index, transition_cost_for_date, transition_cost_x, Building, CostQuadrature,
    HousingIndexParams, RenovationDecision,
};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// How `X` is evaluated along the valuation dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XMode {
    /// Solve the stopping problem again at every date.
    #[default]
    Reoptimize,
    /// Keep the renovation date chosen at the start of the sweep.
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenarios: Vec<CarbonScenario>,
    pub energy: Vec<EnergySpec>,
    pub costs: RenovationCostParams,
    pub buildings: Vec<Building>,
    /// Calendar year of model time 0 (start of the simulated paths).
    pub start: f64,
    /// Valuation dates (calendar years), ascending, not before `start`.
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub quadrature: CostQuadrature,
    /// Euler steps per year for the simulated paths.
    pub steps_per_year: usize,
    /// Divide values by the start value of the most efficient building.
    pub normalize: bool,
    /// Scenario the slowdown is measured against (default: the first one).
    pub reference: Option<String>,
    pub mode: XMode,
    /// Start of the growth window for the slowdown column (default: first date).
    pub slowdown_from: Option<f64>,
}

impl SweepSpec {
    pub fn reference_name(&self) -> Option<&str> {
        self.reference
            .as_deref()
            .or_else(|| self.scenarios.first().map(|s| s.name.as_str()))
    }

    fn energy_for(&self, building: &Building, scenario: &CarbonScenario) -> Result<EnergyPriceParams> {
        let spec = self
            .energy
            .iter()
            .find(|e| e.source() == building.source)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "building `{}` uses energy source `{}` with no price model",
                    building.name, building.source
                ))
            })?;
        spec.resolve(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::invalid("sweep: no scenarios"));
        }
        if self.buildings.is_empty() {
            return Err(Error::invalid("sweep: no buildings"));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("sweep: n_paths must be >= 1"));
        }
        if self.steps_per_year == 0 {
            return Err(Error::invalid("sweep: steps_per_year must be >= 1"));
        }
        if !self.start.is_finite() {
            return Err(Error::invalid("sweep: start must be finite"));
        }
        if self.t_grid.iter().any(|t| !t.is_finite() || *t < self.start) {
            return Err(Error::invalid(format!(
                "sweep: valuation dates must be finite and not before {}",
                self.start
            )));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep: valuation dates must be strictly ascending"));
        }
        if let Some(r) = self.reference_name() {
            if !self.scenarios.iter().any(|s| s.name == r) {
                return Err(Error::invalid(format!("sweep: unknown reference scenario `{r}`")));
            }
        }
        self.costs.validate()?;
        for s in &self.scenarios {
            s.validate()?;
        }
        for b in &self.buildings {
            b.validate()?;
            for s in &self.scenarios {
                self.energy_for(b, s)?;
            }
        }
        Ok(())
    }

    /// Index of the normalization building: smallest α, first listed on ties.
    pub fn normalization_building(&self) -> usize {
        let mut best = 0;
        for (i, b) in self.buildings.iter().enumerate() {
            if b.alpha < self.buildings[best].alpha {
                best = i;
            }
        }
        best
    }
}

/// One `(scenario, building, t)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub building: String,
    pub t: f64,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub x: f64,
    /// Calendar year of the renovation (`inf` for never).
    pub renovation_date: f64,
    /// Annual slowdown in percent against the reference scenario since the
    /// start of the window (`NaN` where undefined).
    pub slowdown: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, scenario: &str, building: &str, t: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.building == building && r.t == t)
    }
}

fn mean_and_halfwidth(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * (var / n as f64).sqrt())
}

/// Simulates `exp(K)` at each valuation date for every path.
fn simulate_index_at_dates(
    spec: &SweepSpec,
    econ: &ProductivityParams,
    hpi: &HousingIndexParams,
) -> Result<Vec<Vec<f64>>> {
    let last = spec.t_grid.last().copied().unwrap_or(spec.start).max(spec.start);
    let span = (last - spec.start).max(1.0);
    let n_steps = ((span * spec.steps_per_year as f64) - 1e-9).ceil().max(1.0) as usize;
    let grid = TimeGrid::new(spec.start, spec.start + span, n_steps)?;
    let nodes: Vec<usize> = spec
        .t_grid
        .iter()
        .map(|&t| grid.node_at(t).expect("valuation dates lie inside the simulated grid"))
        .collect();
    (0..spec.n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let zp = simulate_z_path(econ, &grid, spec.seed, p);
            let k = simulate_log_index(hpi, &zp, spec.seed, p)?;
            Ok(nodes.iter().map(|&i| k[i].exp()).collect())
        })
        .collect()
}

/// Runs the sweep. Rows are ordered by scenario, then building, then date.
pub fn run_sweep(spec: &SweepSpec, econ: &ProductivityParams, hpi: &HousingIndexParams) -> Result<SweepResult> {
    spec.validate()?;
    econ.check_shapes()?;
    hpi.validate()?;
    let index = simulate_index_at_dates(spec, econ, hpi)?;
    let n_t = spec.t_grid.len();

    // Efficient-building statistics per (building, date).
    let mut stats = Vec::with_capacity(spec.buildings.len());
    let mut column = vec![0.0; spec.n_paths];
    for b in &spec.buildings {
        let scale = b.surface * b.c0_price;
        let per_t: Vec<(f64, f64)> = (0..n_t)
            .map(|j| {
                for (c, path) in column.iter_mut().zip(&index) {
                    *c = scale * path[j];
                }
                mean_and_halfwidth(&column)
            })
            .collect();
        stats.push(per_t);
    }

    let reference = spec.reference_name().unwrap_or_default().to_string();
    let norm = if spec.normalize {
        let i = spec.normalization_building();
        let b = &spec.buildings[i];
        let sc = spec
            .scenarios
            .iter()
            .find(|s| s.name == reference)
            .unwrap_or(&spec.scenarios[0]);
        let e = spec.energy_for(b, sc)?;
        let x0 = transition_cost_x(b, sc, &e, &spec.costs, spec.start, spec.quadrature)?;
        let v0 = b.surface * b.c0_price * hpi.k0.exp() - b.surface * x0;
        if !(v0 > 0.0) {
            return Err(Error::Numerical(format!(
                "normalization value of building `{}` is not positive ({v0})",
                b.name
            )));
        }
        v0
    } else {
        1.0
    };

    let mut rows = Vec::with_capacity(spec.scenarios.len() * spec.buildings.len() * n_t);
    for sc in &spec.scenarios {
        for (bi, b) in spec.buildings.iter().enumerate() {
            let e = spec.energy_for(b, sc)?;
            let frozen = optimal_renovation_date(b, sc, &e, &spec.costs, spec.start)?;
            for (j, &t) in spec.t_grid.iter().enumerate() {
                let (decision, x) = match spec.mode {
                    XMode::Reoptimize => {
                        let d = optimal_renovation_date(b, sc, &e, &spec.costs, t)?;
                        (d, transition_cost_x(b, sc, &e, &spec.costs, t, spec.quadrature)?)
                    }
                    XMode::Frozen => {
                        let date = match frozen {
                            RenovationDecision::Never => None,
                            d => Some(d.date(spec.start)),
                        };
                        let x = transition_cost_for_date(b, sc, &e, &spec.costs, t, date, spec.quadrature)?;
                        (frozen, x)
                    }
                };
                let (mean_c, half) = stats[bi][j];
                let shift = b.surface * x;
                let mean = (mean_c - shift) / norm;
                let half = half / norm;
                let renovation_date = match (spec.mode, decision) {
                    (XMode::Frozen, RenovationDecision::Now) => spec.start,
                    (_, d) => d.date(t),
                };
                rows.push(SweepRow {
                    scenario: sc.name.clone(),
                    building: b.name.clone(),
                    t,
                    mean,
                    ci_lo: mean - half,
                    ci_hi: mean + half,
                    x,
                    renovation_date,
                    slowdown: f64::NAN,
                });
            }
        }
    }
    let mut result = SweepResult { rows };
    let from = spec.slowdown_from.or_else(|| spec.t_grid.first().copied());
    if let Some(from) = from {
        fill_slowdown(&mut result, &reference, from);
    }
    Ok(result)
}

/// Annualized growth of the mean value between two dates.
fn annual_log_growth(v_from: f64, v_to: f64, t_from: f64, t_to: f64) -> Option<f64> {
    if !(v_from > 0.0) || !(v_to > 0.0) || !(t_to > t_from) {
        return None;
    }
    Some((v_to / v_from).ln() / (t_to - t_from))
}

/// Slowdown in percent: `(exp(g_s - g_ref) - 1) · 100`.
pub fn slowdown_percent(g: f64, g_ref: f64) -> f64 {
    ((g - g_ref).exp() - 1.0) * 100.0
}

fn fill_slowdown(result: &mut SweepResult, reference: &str, from: f64) {
    let values: Vec<Option<f64>> = result
        .rows
        .iter()
        .map(|row| {
            if row.scenario == reference {
                return Some(0.0);
            }
            let g = growth(result, &row.scenario, &row.building, from, row.t)?;
            let g_ref = growth(result, reference, &row.building, from, row.t)?;
            Some(slowdown_percent(g, g_ref))
        })
        .collect();
    for (row, v) in result.rows.iter_mut().zip(values) {
        row.slowdown = v.unwrap_or(f64::NAN);
    }
}

fn growth(result: &SweepResult, scenario: &str, building: &str, from: f64, to: f64) -> Option<f64> {
    let a = result.get(scenario, building, from)?;
    let b = result.get(scenario, building, to)?;
    annual_log_growth(a.mean, b.mean, from, to)
}

/// One entry of the slowdown table; `None` when a mean value is not positive
/// or a date is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownEntry {
    pub scenario: String,
    pub building: String,
    pub value: Option<f64>,
}

/// Average annual slowdown of each `(scenario, building)` against
/// `reference` between `t_from` and `t_to`.
pub fn annual_slowdown(result: &SweepResult, reference: &str, t_from: f64, t_to: f64) -> Result<Vec<SlowdownEntry>> {
    if !result.rows.iter().any(|r| r.scenario == reference) {
        return Err(Error::invalid(format!(
            "slowdown: reference scenario `{reference}` not in result"
        )));
    }
    if !(t_to > t_from) {
        return Err(Error::invalid("slowdown: t_to must be after t_from"));
    }
    let mut seen: Vec<(String, String)> = Vec::new();
    for r in &result.rows {
        let key = (r.scenario.clone(), r.building.clone());
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    Ok(seen
        .into_iter()
        .map(|(scenario, building)| {
            let value = if scenario == reference {
                growth(result, reference, &building, t_from, t_to).map(|_| 0.0)
            } else {
                growth(result, &scenario, &building, t_from, t_to).and_then(|g| {
                    growth(result, reference, &building, t_from, t_to).map(|g_ref| slowdown_percent(g, g_ref))
                })
            };
            SlowdownEntry {
                scenario,
                building,
                value,
            }
        })
        .collect())
}

pub const CSV_HEADER: &str = "scenario,building,t,mean,ci_lo,ci_hi,x,renovation_date,slowdown";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the result table as CSV text.
pub fn results_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .map_err(|e| Error::Numerical(e.to_string()))?;
    for r in &result.rows {
        w.write_record([
            r.scenario.clone(),
            r.building.clone(),
            num(r.t),
            num(r.mean),
            num(r.ci_lo),
            num(r.ci_hi),
            num(r.x),
            num(r.renovation_date),
            num(r.slowdown),
        ])
        .map_err(|e| Error::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp"));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Writes the result CSV and, when given, the run manifest next to it. On
/// failure no partial file is left behind.
pub fn emit_results(result: &SweepResult, csv_path: &Path, manifest: Option<(&Path, &str)>) -> Result<()> {
    let text = results_csv(result)?;
    write_atomic(csv_path, text.as_bytes())?;
    if let Some((path, body)) = manifest {
        if let Err(e) = write_atomic(path, body.as_bytes()) {
            let _ = fs::remove_file(csv_path);
            return Err(e);
        }
    }
    Ok(())
}

/// Reads a result CSV written by [`emit_results`].
pub fn read_results(path: &Path) -> Result<SweepResult> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unexpected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| Error::Csv {
                path: path.to_path_buf(),
                line,
                reason: format!("column `{}`: `{}` is not a number", header[i], &rec[i]),
            })
        };
        rows.push(SweepRow {
            scenario: rec[0].to_string(),
            building: rec[1].to_string(),
            t: f(2)?,
            mean: f(3)?,
            ci_lo: f(4)?,
            ci_hi: f(5)?,
            x: f(6)?,
            renovation_date: f(7)?,
            slowdown: f(8)?,
        });
    }
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{scenario_library, EnergySpec};
    use crate::valuation::example_buildings;
    use nalgebra::{DMatrix, DVector};

    fn econ(sigma: f64) -> ProductivityParams {
        ProductivityParams::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2) * sigma,
            1.0,
        )
    }

    fn hpi(sigma_bar: f64) -> HousingIndexParams {
        HousingIndexParams {
            varrho: 0.02,
            vartheta: 0.0,
            nu: 0.3,
            sigma_bar,
            rho: DVector::from_vec(vec![0.2, -0.1]),
            k0: 0.0,
            trend_offset: 0.0,
        }
    }

    fn spec(n_paths: usize) -> SweepSpec {
        SweepSpec {
            scenarios: scenario_library(),
            energy: vec![EnergySpec::Affine(
                EnergyPriceParams::new("electricity", 0.002, 0.0).unwrap(),
            )],
            costs: RenovationCostParams::new(2.0, 0.1).unwrap(),
            buildings: example_buildings(),
            start: 2021.0,
            t_grid: (2021..=2034).map(f64::from).collect(),
            n_paths,
            seed: 7,
            quadrature: CostQuadrature::default(),
            steps_per_year: 4,
            normalize: false,
            reference: None,
            mode: XMode::Reoptimize,
            slowdown_from: None,
        }
    }

    #[test]
    fn deterministic_world_has_zero_width() {
        let r = run_sweep(&spec(1), &econ(0.0), &hpi(0.0)).unwrap();
        assert_eq!(r.rows.len(), 4 * 5 * 14);
        assert!(r.rows.iter().all(|row| row.ci_lo == row.mean && row.ci_hi == row.mean));
    }

    #[test]
    fn efficient_building_is_scenario_free() {
        let r = run_sweep(&spec(50), &econ(1.0), &hpi(0.05)).unwrap();
        for t in 2021..=2034 {
            let vals: Vec<f64> = scenario_library()
                .iter()
                .map(|s| r.get(&s.name, "Building 5", t as f64).unwrap().mean)
                .collect();
            assert!(vals.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn same_seed_same_result() {
        let a = run_sweep(&spec(64), &econ(1.0), &hpi(0.05)).unwrap();
        let b = run_sweep(&spec(64), &econ(1.0), &hpi(0.05)).unwrap();
        assert_eq!(results_csv(&a).unwrap(), results_csv(&b).unwrap());
    }

    #[test]
    fn ci_brackets_mean_and_reference_slowdown_is_zero() {
        let r = run_sweep(&spec(200), &econ(1.0), &hpi(0.05)).unwrap();
        for row in &r.rows {
            assert!(row.ci_lo <= row.mean && row.mean <= row.ci_hi);
            if row.scenario == "Current Policies" {
                assert_eq!(row.slowdown, 0.0);
            }
        }
        let table = annual_slowdown(&r, "Current Policies", 2021.0, 2030.0).unwrap();
        assert_eq!(table.len(), 20);
        assert!(table
            .iter()
            .filter(|e| e.scenario == "Current Policies")
            .all(|e| e.value == Some(0.0)));
        assert!(annual_slowdown(&r, "nope", 2021.0, 2030.0).is_err());
    }

    #[test]
    fn slowdown_constant_offset_toy() {
        // Two scenarios whose values differ by a constant d at every date.
        let (c0, g, d) = (100.0_f64, 0.03_f64, 5.0_f64);
        let mut rows = Vec::new();
        for (name, off) in [("ref", 0.0), ("alt", d)] {
            for t in [0.0, 10.0] {
                let mean = c0 * (g * t).exp() - off;
                rows.push(SweepRow {
                    scenario: name.into(),
                    building: "b".into(),
                    t,
                    mean,
                    ci_lo: mean,
                    ci_hi: mean,
                    x: 0.0,
                    renovation_date: f64::INFINITY,
                    slowdown: f64::NAN,
                });
            }
        }
        let r = SweepResult { rows };
        let tab = annual_slowdown(&r, "ref", 0.0, 10.0).unwrap();
        let alt = tab.iter().find(|e| e.scenario == "alt").unwrap().value.unwrap();
        let v0 = c0 - d;
        let v1 = c0 * (g * 10.0).exp() - d;
        let exact = (((v1 / v0).ln() / 10.0 - g).exp() - 1.0) * 100.0;
        assert!((alt - exact).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_values_are_undefined() {
        let row = |s: &str, t: f64, mean: f64| SweepRow {
            scenario: s.into(),
            building: "b".into(),
            t,
            mean,
            ci_lo: mean,
            ci_hi: mean,
            x: 0.0,
            renovation_date: 0.0,
            slowdown: f64::NAN,
        };
        let r = SweepResult {
            rows: vec![
                row("ref", 0.0, 1.0),
                row("ref", 1.0, 1.1),
                row("alt", 0.0, 1.0),
                row("alt", 1.0, -0.5),
            ],
        };
        let tab = annual_slowdown(&r, "ref", 0.0, 1.0).unwrap();
        assert_eq!(tab[1].value, None);
    }

    #[test]
    fn round_trip_and_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_sweep(&spec(20), &econ(1.0), &hpi(0.05)).unwrap();
        let p = dir.path().join("results.csv");
        let m = dir.path().join("manifest.toml");
        emit_results(&r, &p, Some((&m, "seed = 7\n"))).unwrap();
        let back = read_results(&p).unwrap();
        assert_eq!(back.rows.len(), r.rows.len());
        for (a, b) in r.rows.iter().zip(&back.rows) {
            assert_eq!(a.scenario, b.scenario);
            for (x, y) in [
                (a.mean, b.mean),
                (a.x, b.x),
                (a.ci_lo, b.ci_lo),
                (a.renovation_date, b.renovation_date),
            ] {
                assert!(x == y || (x - y).abs() <= 1e-12 * x.abs());
            }
            assert!(a.slowdown.is_nan() == b.slowdown.is_nan());
        }
        let mut s = spec(3);
        s.t_grid.clear();
        let empty = run_sweep(&s, &econ(1.0), &hpi(0.05)).unwrap();
        emit_results(&empty, &p, None).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let r = SweepResult { rows: vec![] };
        let err = emit_results(&r, Path::new("/nonexistent-dir/x/results.csv"), None).unwrap_err();
        assert!(err.to_string().contains("nonexistent-dir"));
    }

    #[test]
    fn validation_errors() {
        let mut s = spec(1);
        s.scenarios.clear();
        assert!(run_sweep(&s, &econ(1.0), &hpi(0.05)).is_err());
        let mut s = spec(1);
        s.buildings.clear();
        assert!(run_sweep(&s, &econ(1.0), &hpi(0.05)).is_err());
        let mut s = spec(1);
        s.t_grid = vec![2022.0, 2021.5];
        assert!(run_sweep(&s, &econ(1.0), &hpi(0.05)).is_err());
        let mut s = spec(1);
        s.buildings[0].source = "gas".into();
        assert!(run_sweep(&s, &econ(1.0), &hpi(0.05)).is_err());
    }

    #[test]
    fn x_equals_cost_after_renovation() {
        let r = run_sweep(&spec(1), &econ(0.0), &hpi(0.0)).unwrap();
        let costs = RenovationCostParams::new(2.0, 0.1).unwrap();
        for row in &r.rows {
            if row.t >= row.renovation_date {
                let b = example_buildings()
                    .into_iter()
                    .find(|b| b.name == row.building)
                    .unwrap();
                assert_eq!(row.x, crate::scenario::renovation_cost(&costs, b.alpha, b.alpha_star));
            }
        }
    }

    #[test]
    fn normalization_uses_most_efficient_building() {
        let mut s = spec(1);
        s.normalize = true;
        let r = run_sweep(&s, &econ(0.0), &hpi(0.0)).unwrap();
        let first = r.get("Current Policies", "Building 5", 2021.0).unwrap();
        assert!((first.mean - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frozen_mode_keeps_start_date() {
        let mut s = spec(1);
        s.mode = XMode::Frozen;
        let r = run_sweep(&s, &econ(0.0), &hpi(0.0)).unwrap();
        for sc in scenario_library() {
            let dates: Vec<f64> = r
                .rows
                .iter()
                .filter(|row| row.scenario == sc.name && row.building == "Building 1")
                .map(|row| row.renovation_date)
                .collect();
            assert!(dates
                .windows(2)
                .all(|w| w[0] == w[1] || (w[0].is_infinite() && w[1].is_infinite())));
        }
    }
}
