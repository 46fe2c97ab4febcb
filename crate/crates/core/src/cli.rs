//! Configuration-driven front end: `synth | evolve | sweep | check`.
//!
//! A run reads a TOML file, writes CSV tables into the output directory and
//! a `summary.txt` of `key = value` lines. Frequencies are written in units
//! of `1/t_f`; `t_f` itself is echoed in the summary. Numbers use Rust's
//! shortest round-trip formatting, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::{self, compare_passages};
use crate::dynamics::{self, adiabatic_state, fidelity, invariant_state, DensityMatrix, Weights};
use crate::error::Error;
use crate::pulse;
use crate::schedule::{self, beta_dot0_from_units, SchedulePair};

/// Environment variable holding the worker count for parallel sections.
pub const WORKERS_ENV: &str = "LRI_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "lri-control",
    version,
    about = "Invariant-based fast two-level control pulses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample Ω_R(t) and Δ(t) on the configured grid.
    Synth(Paths),
    /// Integrate the passage and tabulate it next to the adiabatic reference.
    Evolve(Paths),
    /// Sweep β̇(0) for an antedated passage and locate the cheapest pulse.
    Sweep(Paths),
    /// Validate the schedule and report the invariant-equation residual.
    Check(Paths),
}

#[derive(Debug, Clone, PartialEq, Eq, clap::Args)]
pub struct Paths {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command {
    pub fn paths(&self) -> &Paths {
        match self {
            Command::Synth(p) | Command::Evolve(p) | Command::Sweep(p) | Command::Check(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Third,
    Fourth,
    Antedated,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub family: FamilyName,
    pub gamma_mid: Option<f64>,
    /// Switch time in time units.
    pub t_a: Option<f64>,
    /// `β̇(0)` in units of `π / 2t_f`.
    pub beta_dot0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lo: 0.1,
            hi: 8.0,
            n: 200,
        }
    }
}

fn default_weights() -> [f64; 2] {
    [0.2, 0.8]
}

fn default_grid() -> usize {
    1000
}

fn default_steps() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_f: f64,
    /// `[p_plus, p_minus]`.
    #[serde(default = "default_weights")]
    pub weights: [f64; 2],
    pub schedule: ScheduleConfig,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default = "default_steps")]
    pub rk4_steps: usize,
    pub sweep: Option<SweepConfig>,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("schedule infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::ConditionCount { .. } => {
                CliError::Config(e.to_string())
            }
            Error::UnphysicalSchedule(_) | Error::NoCrossing | Error::NoFeasiblePoint => {
                CliError::Infeasible(e.to_string())
            }
            Error::SingularSystem { .. }
            | Error::DivergentPulse { .. }
            | Error::DegeneratePoint { .. }
            | Error::StepTooCoarse { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return bad(format!("t_f must be positive, got {}", self.t_f));
        }
        Weights::new(self.weights[0], self.weights[1])?;
        let s = &self.schedule;
        match s.family {
            FamilyName::Third => {}
            FamilyName::Fourth if s.gamma_mid.is_none() => {
                return bad("family 'fourth' requires schedule.gamma_mid".into())
            }
            FamilyName::Antedated if s.t_a.is_none() => {
                return bad("family 'antedated' requires schedule.t_a".into())
            }
            _ => {}
        }
        if self.grid_n < 2 {
            return bad(format!("grid_n must be at least 2, got {}", self.grid_n));
        }
        if self.rk4_steps < 100 {
            return bad(format!(
                "rk4_steps must be at least 100, got {}",
                self.rk4_steps
            ));
        }
        Ok(())
    }

    pub fn weights(&self) -> Weights {
        Weights::new(self.weights[0], self.weights[1]).expect("validated on load")
    }

    /// `β̇(0)` in units of `π / 2t_f`, defaulting to 1.
    pub fn beta_dot0_units(&self) -> f64 {
        self.schedule.beta_dot0.unwrap_or(1.0)
    }

    pub fn build_pair(&self) -> Result<SchedulePair, CliError> {
        let s = &self.schedule;
        let pair = match s.family {
            FamilyName::Third => schedule::third_order_pair(self.t_f)?,
            FamilyName::Fourth => {
                schedule::fourth_order_pair(self.t_f, s.gamma_mid.expect("validated"))?
            }
            FamilyName::Antedated => schedule::antedated_pair(
                self.t_f,
                s.t_a.expect("validated"),
                beta_dot0_from_units(self.beta_dot0_units(), self.t_f),
            )?,
        };
        Ok(pair)
    }
}

/// Ordered `key = value` record written as `summary.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Self { entries }
    }
}

/// Shortest round-trip text for `x`, switching to exponent form at the extremes.
pub fn num(x: f64) -> String {
    let x = x + 0.0;
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e7).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn push_row(csv: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
    csv.push_str(&cells.join(","));
    csv.push('\n');
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn base_summary(cmd: &str, cfg: &RunConfig, pair: &SchedulePair) -> Summary {
    let mut s = Summary::default();
    s.push("command", cmd);
    s.push("t_f", num(cfg.t_f));
    s.push(
        "family",
        match cfg.schedule.family {
            FamilyName::Third => "third",
            FamilyName::Fourth => "fourth",
            FamilyName::Antedated => "antedated",
        },
    );
    if let Some(t_a) = pair.t_a {
        s.push("t_a", num(t_a));
    }
    s.push("beta_dot0_units", num(pair.beta_dot0_units()));
    s
}

fn synth(cfg: &RunConfig, pair: &SchedulePair, out: &Path) -> Result<Summary, CliError> {
    let table = pulse::synthesize(pair, cfg.grid_n)?;
    let t_f = cfg.t_f;
    let mut csv = String::from("t,omega_r,delta,gamma,beta\n");
    for x in &table.samples {
        push_row(
            &mut csv,
            &[x.t, x.omega_r * t_f, x.delta * t_f, x.gamma, x.beta],
        );
    }
    write_file(out, "pulse.csv", &csv)?;
    let mut s = base_summary("synth", cfg, pair);
    s.push("energy_cost", num(analysis::energy_cost(pair)?));
    s.push("max_omega_r", num(table.max_omega_r() * t_f));
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    Ok(s)
}

const TRAJECTORY_HEADER: &str =
    "t,rho11,rho22,re_rho12,im_rho12,bloch_x,bloch_y,bloch_z,fidelity\n";

fn trajectory_row(csv: &mut String, t: f64, rho: &DensityMatrix, fid: f64) {
    let b = rho.bloch();
    let r12 = rho.rho12();
    push_row(
        csv,
        &[
            t,
            rho.rho11(),
            rho.rho22(),
            r12.re,
            r12.im,
            b.x,
            b.y,
            b.z,
            fid,
        ],
    );
}

fn evolve(cfg: &RunConfig, pair: &SchedulePair, out: &Path) -> Result<Summary, CliError> {
    let w = cfg.weights();
    let rho0 = invariant_state(pair, w, 0.0);
    let target = invariant_state(pair, w, pair.terminal_s());
    let traj = dynamics::evolve(pair, rho0, cfg.rk4_steps)?;

    let mut iec = String::from(TRAJECTORY_HEADER);
    let mut adiabatic = String::from(TRAJECTORY_HEADER);
    for x in &traj.samples {
        trajectory_row(&mut iec, x.t, &x.rho, x.fidelity);
        let ad = adiabatic_state(pair, w, x.t / pair.t_f)?;
        trajectory_row(&mut adiabatic, x.t, &ad, fidelity(&ad, &target));
    }
    write_file(out, "evolve_iec.csv", &iec)?;
    write_file(out, "evolve_adiabatic.csv", &adiabatic)?;

    let report = compare_passages(std::slice::from_ref(pair), w, cfg.grid_n)?.remove(0);
    let mut s = base_summary("evolve", cfg, pair);
    s.push(
        "max_error_vs_invariant",
        num(dynamics::max_error_vs_invariant(pair, w, &traj)),
    );
    s.push("max_population_gap", num(report.max_population_gap));
    s.push(
        "inversion_time",
        report.inversion_time.map_or("none".to_string(), num),
    );
    s.push(
        "final_fidelity",
        num(traj.samples.last().map_or(0.0, |x| x.fidelity)),
    );
    Ok(s)
}

fn sweep(cfg: &RunConfig, pair: &SchedulePair, out: &Path) -> Result<Summary, CliError> {
    let t_a = pair
        .t_a
        .ok_or_else(|| CliError::Config("sweep requires family 'antedated'".into()))?;
    let sc = cfg.sweep.clone().unwrap_or_default();
    let result = analysis::sweep_beta_dot0(cfg.t_f, t_a, sc.lo, sc.hi, sc.n)?;
    let mut csv = String::from("beta_dot0_units,cost,feasible\n");
    for p in &result.grid {
        match p.cost {
            Some(c) => {
                let _ = writeln!(csv, "{},{},true", num(p.beta_dot0_units), num(c));
            }
            None => {
                let _ = writeln!(csv, "{},,false", num(p.beta_dot0_units));
            }
        }
    }
    write_file(out, "sweep.csv", &csv)?;
    let mut s = base_summary("sweep", cfg, pair);
    s.push("min_cost", num(result.minimum.1));
    s.push("argmin_beta_dot0", num(result.minimum.0));
    s.push("infeasible_points", result.infeasible_points.len());
    Ok(s)
}

fn check(cfg: &RunConfig, pair: &SchedulePair, out: &Path) -> Result<Summary, CliError> {
    let report = analysis::validate_schedule(pair);
    let n = cfg.grid_n;
    let mut csv = String::from("t,residual\n");
    let mut max_residual = 0.0_f64;
    for i in 1..n {
        let s = i as f64 / n as f64;
        let r = dynamics::invariant_residual(pair, s)?;
        max_residual = max_residual.max(r);
        push_row(&mut csv, &[s * pair.t_f, r]);
    }
    write_file(out, "residual.csv", &csv)?;
    let mut s = base_summary("check", cfg, pair);
    s.push("omega_r_nonnegative", report.omega_r_nonnegative);
    s.push("delta_finite", report.delta_finite);
    s.push("gamma_range_ok", report.gamma_range_ok);
    s.push("max_residual", num(max_residual));
    s.push(
        "max_adiabaticity_metric",
        num(report.max_adiabaticity_metric),
    );
    s.push("energy_cost", num(analysis::energy_cost(pair)?));
    for m in &report.messages {
        s.push("message", m);
    }
    Ok(s)
}

/// Runs one subcommand and writes its outputs; returns the summary.
pub fn execute(command: &Command, config: &Path, out: &Path) -> Result<Summary, CliError> {
    let cfg = RunConfig::load(config)?;
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let pair = cfg.build_pair()?;
    let summary = match command {
        Command::Synth(_) => synth(&cfg, &pair, out)?,
        Command::Evolve(_) => evolve(&cfg, &pair, out)?,
        Command::Sweep(_) => sweep(&cfg, &pair, out)?,
        Command::Check(_) => check(&cfg, &pair, out)?,
    };
    write_file(out, "summary.txt", &summary.render())?;
    Ok(summary)
}

/// Sizes the global worker pool from the environment, if requested.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{WORKERS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Parses arguments already split off the process, runs, and returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = configure_workers().and_then(|()| {
        let p = cli.command.paths();
        execute(&cli.command, &p.config, &p.out)
    });
    match outcome {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
