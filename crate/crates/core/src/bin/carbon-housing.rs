// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use carbon_housing::calibration::{
    estimate_hpi_dynamics, estimate_hpi_trend, estimate_productivity, estimate_rho, read_hpi_csv,
    read_productivity_csv, HpiScaling,
};
use carbon_housing::config::{RunConfig, BUILTIN_FRANCE};
use carbon_housing::economy::{simulate_a, simulate_z, TimeGrid};
use carbon_housing::sweep::{annual_slowdown, emit_results, run_sweep, write_atomic};
use carbon_housing::valuation::{
    conditional_price_law, optimal_renovation_date, simulate_log_index, transition_cost_x, RenovationDecision,
};
use carbon_housing::{Error, Result};

#[derive(Parser)]
#[command(
    name = "carbon-housing",
    version,
    about = "Housing valuation under carbon-price transition scenarios"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML), or `builtin:france`.
    #[arg(long, global = true, default_value = BUILTIN_FRANCE)]
    config: String,
    /// Overrides `sweep.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Suppress informational output and warnings.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate productivity and housing parameters from the configured CSVs.
    Calibrate,
    /// Simulate productivity and housing index paths.
    SimulateEconomy {
        /// Length of the simulation in years.
        #[arg(long, default_value_t = 20.0)]
        years: f64,
        /// Euler steps per year (default: `sweep.steps_per_year`).
        #[arg(long)]
        steps_per_year: Option<usize>,
    },
    /// Optimal renovation date of one building under one scenario.
    RenovationDate {
        /// Scenario name as in the config
        #[arg(long)]
        scenario: String,
        /// Building name as in the config
        #[arg(long)]
        building: String,
        /// Calendar year of the decision (default: the scenario start).
        #[arg(long)]
        at: Option<f64>,
    },
    /// Transition cost and closed-form expected values at one date.
    Valuate {
        /// Restrict to one scenario (default: all)
        #[arg(long)]
        scenario: Option<String>,
        /// Restrict to one building (default: all)
        #[arg(long)]
        building: Option<String>,
        /// Calendar year of the valuation (default: model time 0).
        #[arg(long)]
        at: Option<f64>,
    },
    /// Monte Carlo sweep over all scenarios, buildings and dates.
    Sweep,
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
    paths_override: Option<usize>,
}

impl Ctx {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn warn_all(&self, warnings: &[String]) {
        for w in warnings {
            self.info(format!("warning: {w}"));
        }
    }

    fn ensure_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).map_err(|e| Error::Io {
            path: self.out.clone(),
            source: e,
        })
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn pick<'a, T>(kind: &str, wanted: &str, items: &'a [T], name: impl Fn(&T) -> &str) -> Result<&'a T> {
    items.iter().find(|x| name(x) == wanted).ok_or_else(|| {
        let names: Vec<&str> = items.iter().map(&name).collect();
        Error::InvalidInput(format!("unknown {kind} `{wanted}` (available: {})", names.join(", ")))
    })
}

#[derive(Serialize)]
struct ProductivityReport {
    source: String,
    n_obs: usize,
    dt: f64,
    mu_hat: Vec<f64>,
    varsigma_hat: f64,
    gamma_hat: Vec<Vec<f64>>,
    sigma_hat: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RhoReport {
    rho: Vec<f64>,
    raw_norm: f64,
    clamped: bool,
    n_increments: usize,
}

#[derive(Serialize)]
struct HpiReport {
    source: String,
    n_obs: usize,
    dt: f64,
    varrho: f64,
    vartheta: f64,
    trend_origin: f64,
    nu: f64,
    sigma_bar: f64,
    scaling: &'static str,
    detrended: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<RhoReport>,
}

#[derive(Serialize)]
struct CalibrationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    productivity: Option<ProductivityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hpi: Option<HpiReport>,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn cmd_calibrate(ctx: &Ctx) -> Result<()> {
    let e = &ctx.cfg.economy;
    let h = &ctx.cfg.housing;
    if e.data.is_none() && h.data.is_none() {
        return Err(Error::Config {
            field: "economy.data".into(),
            reason: "calibrate needs economy.data and/or housing.data".into(),
        });
    }
    let mut report = CalibrationReport {
        productivity: None,
        hpi: None,
    };
    let mut prod = None;
    if let Some(path) = &e.data {
        let theta = read_productivity_csv(path)?;
        let est = estimate_productivity(&theta)?;
        report.productivity = Some(ProductivityReport {
            source: path.display().to_string(),
            n_obs: theta.len(),
            dt: theta.dt(),
            mu_hat: est.mu_hat.iter().copied().collect(),
            varsigma_hat: est.varsigma_hat,
            gamma_hat: rows(&est.gamma_hat),
            sigma_hat: rows(&est.sigma_hat),
        });
        prod = Some(est);
    }
    if let Some(path) = &h.data {
        let k = read_hpi_csv(path)?;
        let trend = estimate_hpi_trend(&k)?;
        let scaling: HpiScaling = h.scaling.into();
        let dynamics = estimate_hpi_dynamics(&k, h.detrend.then_some(&trend), scaling)?;
        let dt = k.dt();
        let (nu, sb) = match scaling {
            HpiScaling::Raw => (dynamics.nu / dt, dynamics.sigma_bar / dt.sqrt()),
            HpiScaling::Rescaled => (dynamics.nu, dynamics.sigma_bar),
        };
        let rho = match &prod {
            Some(p) if sb > 0.0 => {
                let r = estimate_rho(&k, &trend, nu, sb, p)?;
                Some(RhoReport {
                    rho: r.rho.iter().copied().collect(),
                    raw_norm: r.raw_norm,
                    clamped: r.clamped,
                    n_increments: r.n_increments,
                })
            }
            _ => None,
        };
        if let Some(r) = &rho {
            if r.clamped {
                ctx.info(format!("warning: |rho_hat| = {} clamped to 1", r.raw_norm));
            }
        }
        report.hpi = Some(HpiReport {
            source: path.display().to_string(),
            n_obs: k.len(),
            dt,
            varrho: trend.varrho,
            vartheta: trend.vartheta,
            trend_origin: trend.origin,
            nu: dynamics.nu,
            sigma_bar: dynamics.sigma_bar,
            scaling: match scaling {
                HpiScaling::Raw => "raw",
                HpiScaling::Rescaled => "rescaled",
            },
            detrended: dynamics.detrended,
            rho,
        });
    }
    let text = toml::to_string(&report).map_err(|e| Error::Numerical(e.to_string()))?;
    ctx.ensure_out()?;
    let path = ctx.out.join("calibration.toml");
    write_atomic(&path, text.as_bytes())?;
    if !ctx.quiet {
        emit(&text);
    }
    ctx.info(format!("wrote {}", path.display()));
    Ok(())
}

fn cmd_simulate(ctx: &Ctx, years: f64, steps_per_year: Option<usize>) -> Result<()> {
    let (econ, hpi, _, warnings) = ctx.cfg.resolve_model()?;
    ctx.warn_all(&warnings);
    let start = ctx.cfg.start_year()?;
    let spy = steps_per_year.unwrap_or(ctx.cfg.sweep.steps_per_year);
    if !(years > 0.0) || spy == 0 {
        return Err(Error::InvalidInput("need --years > 0 and --steps-per-year >= 1".into()));
    }
    let n_steps = (years * spy as f64).round().max(1.0) as usize;
    let grid = TimeGrid::new(start, start + n_steps as f64 / spy as f64, n_steps)?;
    let n_paths = ctx.paths_override.unwrap_or(1);
    let seed = ctx.cfg.sweep.seed;
    let z = simulate_z(&econ, &grid, n_paths, seed)?;
    let z_grids: Vec<_> = z.iter().map(|p| p.z.clone()).collect();
    let a = simulate_a(&econ, &z_grids)?;
    let k: Vec<Vec<f64>> = z
        .iter()
        .enumerate()
        .map(|(i, zp)| simulate_log_index(&hpi, zp, seed, i as u64))
        .collect::<Result<_>>()?;

    let n = econ.n_sectors();
    let num = |v: f64| format!("{v:.16e}");
    let mut paths = String::from("path,t");
    for i in 1..=n {
        paths.push_str(&format!(",z_{i}"));
    }
    for i in 1..=n {
        paths.push_str(&format!(",a_{i}"));
    }
    paths.push_str(",k\n");
    for p in 0..n_paths {
        for step in 0..=n_steps {
            let mut line = format!("{p},{}", num(grid.time(step)));
            for v in z[p].z.node(step).iter().chain(a[p].node(step)) {
                line.push(',');
                line.push_str(&num(*v));
            }
            line.push(',');
            line.push_str(&num(k[p][step]));
            line.push('\n');
            paths.push_str(&line);
        }
    }
    // Calibration-ready series from path 0: growth rates and the index level.
    let mut prod = String::from("year");
    for i in 1..=n {
        prod.push_str(&format!(",sector_{i}"));
    }
    prod.push('\n');
    let mut index = String::from("year,index\n");
    for step in 0..=n_steps {
        let t = num(grid.time(step));
        prod.push_str(&t);
        for (i, zv) in z[0].z.node(step).iter().enumerate() {
            prod.push(',');
            prod.push_str(&num(econ.mu[i] + econ.varsigma * zv));
        }
        prod.push('\n');
        index.push_str(&format!("{t},{}\n", num(k[0][step].exp())));
    }
    ctx.ensure_out()?;
    let files = [("paths.csv", paths), ("productivity.csv", prod), ("hpi.csv", index)];
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, body) in &files {
        let p = ctx.out.join(name);
        if let Err(e) = write_atomic(&p, body.as_bytes()) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            return Err(e);
        }
        written.push(p);
    }
    ctx.info(format!(
        "wrote {n_paths} path(s) of {n_steps} steps to {}",
        ctx.out.display()
    ));
    Ok(())
}

fn cmd_renovation_date(ctx: &Ctx, scenario: &str, building: &str, at: Option<f64>) -> Result<()> {
    let cfg = &ctx.cfg;
    let (scenarios, energy, warnings) = cfg.resolve_scenarios()?;
    ctx.warn_all(&warnings);
    let sc = pick("scenario", scenario, &scenarios, |s| s.name.as_str())?;
    let b = pick("building", building, &cfg.buildings, |b| b.name.as_str())?;
    let e = pick("energy source", &b.source, &energy, |e| e.source())?.resolve(sc)?;
    let t = at.unwrap_or(sc.t_start);
    match optimal_renovation_date(b, sc, &e, &cfg.renovation, t)? {
        RenovationDecision::Now => emit("now\n"),
        RenovationDecision::Never => emit("never\n"),
        RenovationDecision::At(date) => emit(&format!("renovate_at {:.6} {:.6}\n", date - sc.t_start, date)),
    }
    Ok(())
}

fn cmd_valuate(ctx: &Ctx, scenario: Option<&str>, building: Option<&str>, at: Option<f64>) -> Result<()> {
    let cfg = &ctx.cfg;
    let (scenarios, energy, mut warnings) = cfg.resolve_scenarios()?;
    let (_, hpi, _, w2) = cfg.resolve_model()?;
    warnings.extend(w2);
    ctx.warn_all(&warnings);
    let start = cfg.start_year()?;
    let t = at.unwrap_or(start);
    if !(t >= start) {
        return Err(Error::InvalidInput(format!(
            "--at {t} is before the start year {start}"
        )));
    }
    let sel_s: Vec<_> = match scenario {
        Some(n) => vec![pick("scenario", n, &scenarios, |s| s.name.as_str())?],
        None => scenarios.iter().collect(),
    };
    let sel_b: Vec<_> = match building {
        Some(n) => vec![pick("building", n, &cfg.buildings, |b| b.name.as_str())?],
        None => cfg.buildings.iter().collect(),
    };
    let quad = match cfg.sweep.quadrature {
        carbon_housing::config::QuadratureName::Rectangle => {
            carbon_housing::valuation::CostQuadrature::Rectangle(cfg.sweep.quadrature_points.max(1))
        }
        carbon_housing::config::QuadratureName::Adaptive => carbon_housing::valuation::CostQuadrature::Adaptive {
            rel_tol: cfg.sweep.quadrature_rel_tol,
        },
    };
    let mut table =
        String::from("scenario,building,t,decision,renovation_date,x,mean_value,mean_adjusted,log_m,log_v\n");
    for sc in &sel_s {
        for b in &sel_b {
            let e = pick("energy source", &b.source, &energy, |e| e.source())?.resolve(sc)?;
            let d = optimal_renovation_date(b, sc, &e, &cfg.renovation, t)?;
            let x = transition_cost_x(b, sc, &e, &cfg.renovation, t, quad)?;
            let law = conditional_price_law(&hpi, b, 0.0, t - start, None)?;
            let mean = law.mean();
            table.push_str(&format!(
                "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                sc.name,
                b.name,
                t,
                d.kind(),
                d.date(t),
                x,
                mean,
                mean - b.surface * x,
                law.m,
                law.v
            ));
        }
    }
    emit(&table);
    Ok(())
}

fn cmd_sweep(ctx: &Ctx) -> Result<()> {
    let r = ctx.cfg.resolve()?;
    ctx.warn_all(&r.warnings);
    let result = run_sweep(&r.sweep, &r.economy, &r.housing)?;
    let reference = r.sweep.reference_name().unwrap_or_default().to_string();
    let from = r.sweep.slowdown_from.unwrap_or(r.sweep.start);
    let table = if r.slowdown_to > from {
        annual_slowdown(&result, &reference, from, r.slowdown_to)?
    } else {
        Vec::new()
    };

    ctx.ensure_out()?;
    let csv_path = ctx.out.join("results.csv");
    let manifest_path = ctx.out.join("manifest.toml");
    let slow_path = ctx.out.join("slowdown.csv");
    let manifest = ctx.cfg.manifest("sweep")?;
    let mut slow = format!(
        "# reference = {reference}, from = {from}, to = {}\nscenario,building,slowdown\n",
        r.slowdown_to
    );
    for e in &table {
        slow.push_str(&format!(
            "{},{},{}\n",
            e.scenario,
            e.building,
            e.value.map_or("NaN".to_string(), |v| format!("{v:.16e}"))
        ));
    }
    let res = emit_results(&result, &csv_path, Some((&manifest_path, &manifest)))
        .and_then(|_| write_atomic(&slow_path, slow.as_bytes()));
    if let Err(e) = res {
        for p in [&csv_path, &manifest_path, &slow_path] {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    if !ctx.quiet {
        eprintln!(
            "wrote {} rows to {} (reference `{reference}`)",
            result.rows.len(),
            csv_path.display()
        );
        for e in &table {
            let v = e.value.map_or("undefined".to_string(), |v| format!("{v:.3}%"));
            eprintln!("  {:<22} {:<12} {v}", e.scenario, e.building);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(&cli.global.config)?;
    if let Some(s) = cli.global.seed {
        cfg.sweep.seed = s;
    }
    if let Some(n) = cli.global.paths {
        cfg.sweep.n_paths = n;
    }
    if let Some(o) = &cli.global.out {
        cfg.output.dir = o.clone();
    }
    let ctx = Ctx {
        out: cfg.output.dir.clone(),
        cfg,
        quiet: cli.global.quiet,
        paths_override: cli.global.paths,
    };
    match &cli.command {
        Command::Calibrate => cmd_calibrate(&ctx),
        Command::SimulateEconomy { years, steps_per_year } => cmd_simulate(&ctx, *years, *steps_per_year),
        Command::RenovationDate { scenario, building, at } => cmd_renovation_date(&ctx, scenario, building, *at),
        Command::Valuate { scenario, building, at } => cmd_valuate(&ctx, scenario.as_deref(), building.as_deref(), *at),
        Command::Sweep => cmd_sweep(&ctx),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
