//! Run configurations: a TOML key tree with units spelled out in key names
//! (all frequencies in units of the system frequency Ω, times in 1/Ω),
//! expanded into scenario jobs and executed into CSV artifacts.
//!
//! ```toml
//! [output]
//! stem = "demo"
//!
//! [system]
//! splitting_over_omega = 1.0
//! coupling = "sigma-x"
//!
//! [bath]
//! coupling_strength = 0.05
//! cutoff_over_omega = 100.0
//! # inverse_temperature_times_omega = 1.0   (omitted: zero temperature)
//!
//! [grid]
//! t_max_times_omega = 2.0
//! decimate = 10
//!
//! [[scenario]]
//! name = "switched"
//! preparation = "switched"
//! switch_time_times_cutoff = 16.0
//!
//! [[sweep]]
//! path = "scenario.switched.switch_time_times_cutoff"
//! values = [1.0, 2.0, 4.0]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, CorrelationFunction, SpectralDensity};
use crate::coefficients::ExponentialSwitch;
use crate::error::{Error, Result};
use crate::evolve::{integrate_with, IntegrateOptions, JoltMetrics, Trajectory};
use crate::io::{format_number, trajectory_rows, write_table, TRAJECTORY_HEADER};
use crate::operator::{pauli, Operator, StateVector};
use crate::quad;
use crate::scenario::{self, Grid, Scenario, System};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingName {
    SigmaX,
    SigmaY,
    SigmaZ,
}

impl CouplingName {
    pub fn operator(self) -> Operator {
        match self {
            CouplingName::SigmaX => pauli::sigma_x(),
            CouplingName::SigmaY => pauli::sigma_y(),
            CouplingName::SigmaZ => pauli::sigma_z(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateName {
    Excited,
    Ground,
    Plus,
    Minus,
}

impl StateName {
    pub fn vector(self) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            StateName::Excited => pauli::excited(),
            StateName::Ground => pauli::ground(),
            StateName::Plus => StateVector::from_real(&[h, h]).expect("normalized"),
            StateName::Minus => StateVector::from_real(&[h, -h]).expect("normalized"),
        }
    }
}

/// Two-level system `H₀ = (splitting/2) σ_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "one")]
    pub splitting_over_omega: f64,
    pub coupling: CouplingName,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub coupling_strength: f64,
    pub cutoff_over_omega: f64,
    /// Omitted or `inf`: zero temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_temperature_times_omega: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max_times_omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_times_omega: Option<f64>,
    #[serde(default = "one_usize")]
    pub decimate: usize,
    #[serde(default = "yes")]
    pub step_halving: bool,
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Rerun every two-level job at `2Λ` and report the relative peak change.
    #[serde(default)]
    pub cutoff_sensitivity: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreparationKind {
    Factorized,
    Switched,
    Decoherence,
    Equilibration,
    Freezing,
    Flip,
    Swap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub preparation: PreparationKind,
    /// Initial state of factorized and switched runs (default excited).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_time_times_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_time_times_omega: Option<f64>,
    /// Pure target of freezing and flipping (default excited).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateName>,
    /// Diagonal target of decoherence and equilibration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_populations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freezing_depth_over_cutoff: Option<f64>,
    /// `H₋ = (s/2) σ_z` before flipping or swapping (default: the system splitting).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub past_splitting_over_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_time_times_omega: Option<f64>,
    /// Ancilla state swapped in (default excited).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<StateName>,
}

impl ScenarioConfig {
    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut note = |present: bool, k: &'static str| {
            if present {
                keys.push(k)
            }
        };
        note(self.initial.is_some(), "initial");
        note(self.switch_time_times_cutoff.is_some(), "switch_time_times_cutoff");
        note(self.switch_time_times_omega.is_some(), "switch_time_times_omega");
        note(self.target.is_some(), "target");
        note(self.target_populations.is_some(), "target_populations");
        note(self.freezing_depth_over_cutoff.is_some(), "freezing_depth_over_cutoff");
        note(self.past_splitting_over_omega.is_some(), "past_splitting_over_omega");
        note(self.drive_time_times_omega.is_some(), "drive_time_times_omega");
        note(self.ancilla.is_some(), "ancilla");
        keys
    }

    fn allowed_keys(&self) -> &'static [&'static str] {
        match self.preparation {
            PreparationKind::Factorized => &["initial"],
            PreparationKind::Switched => &["initial", "switch_time_times_cutoff", "switch_time_times_omega"],
            PreparationKind::Decoherence | PreparationKind::Equilibration => &["target_populations"],
            PreparationKind::Freezing => &["target", "freezing_depth_over_cutoff"],
            PreparationKind::Flip => &["target", "past_splitting_over_omega", "drive_time_times_omega"],
            PreparationKind::Swap => &["ancilla", "past_splitting_over_omega", "drive_time_times_omega"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `bath.<key>`, `system.<key>`, `grid.<key>` or `scenario.<name>.<key>`.
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output: OutputConfig,
    pub system: SystemConfig,
    pub bath: BathConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepConfig>,
    /// Present in manifests; ignored on input.
    #[serde(default, skip_serializing)]
    pub manifest: Option<toml::Table>,
}

fn config_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Parse a `key=value` override; the value is read as TOML, else as a string.
pub fn parse_override(spec: &str) -> Result<(String, toml::Value)> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Validation(format!("override {spec:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Validation(format!("override {spec:?} has an empty key")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Set `path` in a raw config tree. `scenario.<name>.<key>` addresses the
/// scenario entry with that name.
pub fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Validation(format!("malformed key path {path:?}")));
    }
    if parts[0] == "scenario" {
        if parts.len() != 3 {
            return Err(Error::Validation(format!("scenario paths look like scenario.<name>.<key>, got {path:?}")));
        }
        let list = root
            .get_mut("scenario")
            .and_then(|v| v.as_array_mut())
            .ok_or_else(|| Error::Validation("config has no [[scenario]] entries".into()))?;
        let entry = list
            .iter_mut()
            .filter_map(|v| v.as_table_mut())
            .find(|t| t.get("name").and_then(|n| n.as_str()) == Some(parts[1]))
            .ok_or_else(|| Error::Validation(format!("no scenario named {:?}", parts[1])))?;
        entry.insert(parts[2].to_string(), value);
        return Ok(());
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let next = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = next
            .as_table_mut()
            .ok_or_else(|| Error::Validation(format!("{path:?} descends into a non-table value")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parse config text, applying `overrides` before validation.
    pub fn parse(text: &str, source: &Path, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let cfg: RunConfig = if overrides.is_empty() {
            toml::from_str(text).map_err(|e| config_error(source, e.to_string()))?
        } else {
            let mut table: toml::Table = toml::from_str(text).map_err(|e| config_error(source, e.to_string()))?;
            for (k, v) in overrides {
                set_path(&mut table, k, v.clone()).map_err(|e| config_error(source, e.to_string()))?;
            }
            toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| config_error(source, e.to_string()))?
        };
        cfg.check().map_err(|e| config_error(source, e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, toml::Value)]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, overrides)
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| Error::Validation(format!("cannot serialize config: {e}")))
    }

    fn check(&self) -> Result<()> {
        let positive = |v: f64, what: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{what} must be positive and finite, got {v}")))
            }
        };
        positive(self.system.splitting_over_omega, "system.splitting_over_omega")?;
        positive(self.bath.cutoff_over_omega, "bath.cutoff_over_omega")?;
        if !(self.bath.coupling_strength >= 0.0) || !self.bath.coupling_strength.is_finite() {
            return Err(Error::Validation(format!(
                "bath.coupling_strength must be >= 0, got {}",
                self.bath.coupling_strength
            )));
        }
        if let Some(b) = self.bath.inverse_temperature_times_omega {
            if !(b > 0.0) {
                return Err(Error::Validation(format!("bath.inverse_temperature_times_omega must be > 0, got {b}")));
            }
        }
        positive(self.grid.t_max_times_omega, "grid.t_max_times_omega")?;
        if let Some(dt) = self.grid.dt_times_omega {
            positive(dt, "grid.dt_times_omega")?;
        }
        if self.grid.decimate == 0 {
            return Err(Error::Validation("grid.decimate must be >= 1".into()));
        }
        if let Some(stem) = &self.output.stem {
            check_name(stem, "output.stem")?;
        }
        if self.scenarios.is_empty() {
            return Err(Error::Validation("at least one [[scenario]] is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &self.scenarios {
            check_name(&s.name, "scenario name")?;
            if !seen.insert(&s.name) {
                return Err(Error::Validation(format!("duplicate scenario name {:?}", s.name)));
            }
            let allowed = s.allowed_keys();
            for k in s.present_keys() {
                if !allowed.contains(&k) {
                    return Err(Error::Validation(format!(
                        "scenario {:?}: key `{k}` does not apply to preparation {:?}",
                        s.name, s.preparation
                    )));
                }
            }
        }
        for sw in &self.sweep {
            if sw.values.is_empty() {
                return Err(Error::Validation(format!("sweep over {:?} has no values", sw.path)));
            }
            let head = sw.path.split('.').next().unwrap_or("");
            if !["system", "bath", "grid", "scenario"].contains(&head) {
                return Err(Error::Validation(format!("cannot sweep {:?}", sw.path)));
            }
        }
        Ok(())
    }

    fn output_stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| "run".into())
    }
}

fn check_name(name: &str, what: &str) -> Result<()> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} {name:?} must be non-empty and use only [A-Za-z0-9_-]")))
    }
}

fn value_label(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(x) => format!("{x}"),
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One scenario at one sweep point.
#[derive(Clone, Debug)]
pub struct Job {
    pub name: String,
    pub scenario_name: String,
    pub parameters: Vec<(String, toml::Value)>,
    pub scenario: Scenario,
    pub metrics: MetricsConfig,
    pub step_halving: bool,
}

fn sweep_applies(path: &str, scenario: &str) -> bool {
    let parts: Vec<&str> = path.split('.').collect();
    parts[0] != "scenario" || parts.get(1) == Some(&scenario)
}

/// Expand scenarios and sweeps into jobs, in config order.
pub fn expand_jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let base = cfg.to_table()?;
    let mut jobs = Vec::new();
    for sc in &cfg.scenarios {
        let sweeps: Vec<&SweepConfig> = cfg.sweep.iter().filter(|s| sweep_applies(&s.path, &sc.name)).collect();
        let mut points: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
        for sw in &sweeps {
            points = points
                .into_iter()
                .flat_map(|p| {
                    sw.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((sw.path.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        for point in points {
            let resolved = if point.is_empty() {
                cfg.clone()
            } else {
                let mut table = base.clone();
                table.remove("sweep");
                for (path, v) in &point {
                    set_path(&mut table, path, v.clone())?;
                }
                let c: RunConfig = toml::Value::Table(table)
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Validation(format!("sweep point {point:?}: {e}")))?;
                c.check()?;
                c
            };
            let this = resolved
                .scenarios
                .iter()
                .find(|s| s.name == sc.name)
                .expect("sweeps never rename scenarios");
            let mut name = sc.name.clone();
            for (path, v) in &point {
                let key = path.rsplit('.').next().unwrap_or(path);
                name.push_str(&format!("_{key}-{}", value_label(v)));
            }
            let scenario = build_scenario(&resolved, this, &name).map_err(|e| e.in_scenario(&name))?;
            jobs.push(Job {
                name,
                scenario_name: sc.name.clone(),
                parameters: point,
                scenario,
                metrics: cfg.metrics.clone(),
                step_halving: resolved.grid.step_halving,
            });
        }
    }
    let mut names = std::collections::HashSet::new();
    for j in &jobs {
        if !names.insert(j.name.clone()) {
            return Err(Error::Validation(format!("two jobs share the name {:?}", j.name)));
        }
    }
    Ok(jobs)
}

fn diagonal_target(pops: &Option<Vec<f64>>, name: &str) -> Result<Operator> {
    let p = pops
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("scenario {name:?} needs target_populations")))?;
    if p.len() != 2 {
        return Err(Error::Validation(format!("target_populations needs 2 entries, got {}", p.len())));
    }
    Ok(Operator::diagonal(p))
}

/// Build the simulation scenario described by one config entry.
pub fn build_scenario(cfg: &RunConfig, sc: &ScenarioConfig, name: &str) -> Result<Scenario> {
    let splitting = cfg.system.splitting_over_omega;
    let density = SpectralDensity::ohmic(cfg.bath.coupling_strength, cfg.bath.cutoff_over_omega)?;
    let bath = BathSpec::thermal(density, cfg.bath.inverse_temperature_times_omega.unwrap_or(f64::INFINITY))?;
    let lam = cfg.bath.cutoff_over_omega;
    let system = System::new(&pauli::sigma_z() * (0.5 * splitting), cfg.system.coupling.operator(), bath)?;
    let mut grid = Grid::new(cfg.grid.t_max_times_omega).with_decimate(cfg.grid.decimate);
    if let Some(dt) = cfg.grid.dt_times_omega {
        grid = grid.with_dt(dt);
    }
    let initial = || Operator::projector(&sc.initial.unwrap_or(StateName::Excited).vector());
    let target = || sc.target.unwrap_or(StateName::Excited).vector();
    let past = || &pauli::sigma_z() * (0.5 * sc.past_splitting_over_omega.unwrap_or(splitting));
    let drive_time = || {
        sc.drive_time_times_omega
            .ok_or_else(|| Error::Validation(format!("scenario {name:?} needs drive_time_times_omega")))
    };
    let mut s = match sc.preparation {
        PreparationKind::Factorized => Scenario::factorized(name, &system, initial(), grid)?,
        PreparationKind::Switched => {
            let tau = match (sc.switch_time_times_cutoff, sc.switch_time_times_omega) {
                (Some(k), None) => k / lam,
                (None, Some(t)) => t,
                _ => {
                    return Err(Error::Validation(format!(
                        "scenario {name:?} needs exactly one of switch_time_times_cutoff, switch_time_times_omega"
                    )))
                }
            };
            Scenario::switched(name, &system, Arc::new(ExponentialSwitch::new(tau)?), initial(), grid)?
        }
        PreparationKind::Decoherence => {
            scenario::prepare_by_decoherence(&system, &diagonal_target(&sc.target_populations, name)?, grid)?
        }
        PreparationKind::Equilibration => {
            scenario::prepare_by_equilibration(&system, &diagonal_target(&sc.target_populations, name)?, grid)?.0
        }
        PreparationKind::Freezing => {
            let depth = sc.freezing_depth_over_cutoff.map(|d| d * lam);
            scenario::prepare_by_freezing(&system, &target(), depth, grid)?
        }
        PreparationKind::Flip => scenario::prepare_by_flipping(&system, &past(), &target(), drive_time()?, grid)?,
        PreparationKind::Swap => {
            let h_minus = past();
            let ground = Operator::projector(&StateVector::new(
                h_minus.eigh().vectors.column(0).iter().copied().collect(),
            )?);
            let anc = Operator::projector(&sc.ancilla.unwrap_or(StateName::Excited).vector());
            scenario::prepare_by_swapping(&system, &h_minus, &ground, &anc, drive_time()?, grid)?
        }
    };
    s.name = name.to_string();
    Ok(s)
}

/// Everything computed for one job.
#[derive(Clone, Debug)]
pub struct JobResult {
    pub job: Job,
    pub trajectory: Trajectory,
    pub metrics: Option<JoltMetrics>,
}

/// Run one job, including the `2Λ` comparison when requested.
pub fn run_job(job: &Job) -> Result<JobResult> {
    let options = IntegrateOptions {
        step_halving: job.step_halving,
        ..Default::default()
    };
    let s = &job.scenario;
    let trajectory = integrate_with(s, options)?;
    let lam = s.cutoff();
    let mut metrics = match trajectory.gamma_inf {
        Some(_) => Some(trajectory.jolt_metrics(lam).map_err(|e| e.in_scenario(&job.name))?),
        None => None,
    };
    if let (Some(m), true) = (metrics.as_mut(), job.metrics.cutoff_sensitivity) {
        let mut doubled = s.with_cutoff(2.0 * lam)?;
        if let Some(dt) = doubled.grid.dt {
            doubled.grid.dt = Some(dt.min(1.0 / (40.0 * lam)));
        }
        let t2 = integrate_with(&doubled, options)?;
        let m2 = t2.jolt_metrics(2.0 * lam).map_err(|e| e.in_scenario(&job.name))?;
        *m = m.with_comparison(&m2);
    }
    Ok(JobResult {
        job: job.clone(),
        trajectory,
        metrics,
    })
}

/// Options coming from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub output: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub dump_alpha: bool,
    pub dump_coefficients: bool,
    /// Reserved: no stochastic paths exist.
    pub seed: Option<u64>,
}

/// Files produced by a run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub results: Vec<JobResult>,
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "job",
    "scenario",
    "preparation",
    "parameters",
    "cutoff_over_omega",
    "gamma_inf",
    "peak",
    "peak_time",
    "settle_time",
    "cutoff_sensitivity",
    "step_halving_error",
    "min_eigenvalue",
    "stored_points",
];

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn summary_row(r: &JobResult) -> Vec<String> {
    let params = r
        .job
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={}", value_label(v)))
        .collect::<Vec<_>>()
        .join(";");
    let m = r.metrics.as_ref();
    vec![
        r.job.name.clone(),
        r.job.scenario_name.clone(),
        r.job.scenario.preparation.name().to_string(),
        params,
        format_number(r.job.scenario.cutoff()),
        opt(r.trajectory.gamma_inf),
        opt(m.map(|m| m.peak)),
        opt(m.map(|m| m.peak_time)),
        opt(m.map(|m| m.settle_time)),
        opt(m.and_then(|m| m.cutoff_sensitivity)),
        opt(r.trajectory.error_estimate),
        format_number(r.trajectory.min_eigenvalue),
        r.trajectory.len().to_string(),
    ]
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_table(&mut buf, header, rows)?;
    Ok(buf)
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

type Rows = Vec<Vec<String>>;

fn alpha_tables(r: &JobResult) -> Result<(Rows, Rows)> {
    let c = CorrelationFunction::new(r.job.scenario.bath);
    let alpha = r
        .trajectory
        .times
        .iter()
        .map(|&t| {
            let a = c.alpha(t)?;
            Ok(vec![format_number(t), format_number(a.re), format_number(a.im)])
        })
        .collect::<Result<_>>()?;
    let lam = r.job.scenario.cutoff();
    let tilde = quad::linspace(-5.0 * lam, 5.0 * lam, 2000)
        .into_iter()
        .map(|w| vec![format_number(w), format_number(c.alpha_tilde(w)), format_number(0.0)])
        .collect();
    Ok((alpha, tilde))
}

fn coefficient_table(r: &JobResult) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let s = &r.job.scenario;
    let track = s.coefficient_track(r.trajectory.dt, s.grid.t_max)?;
    let n = s.dim();
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("re_a{i}{j}"));
            header.push(format!("im_a{i}{j}"));
        }
    }
    let rows = r
        .trajectory
        .times
        .iter()
        .map(|&t| {
            let a = track.at(t)?;
            let mut row = vec![format_number(t)];
            for i in 0..n {
                for j in 0..n {
                    row.push(format_number(a.get(i, j).re));
                    row.push(format_number(a.get(i, j).im));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Load, expand, run every job in parallel and, only if all succeed, write
/// trajectory CSVs, the summary CSV and the manifest.
pub fn run(config_path: &Path, options: &RunOptions) -> Result<RunReport> {
    let mut overrides = options
        .overrides
        .iter()
        .map(|o| parse_override(o).map_err(|e| config_error(config_path, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dt) = options.dt {
        overrides.push(("grid.dt_times_omega".into(), toml::Value::Float(dt)));
    }
    if let Some(t) = options.t_max {
        overrides.push(("grid.t_max_times_omega".into(), toml::Value::Float(t)));
    }
    let mut cfg = RunConfig::load(config_path, &overrides)?;
    if let Some(dir) = &options.output {
        cfg.output.dir = Some(dir.clone());
    }
    if options.seed.is_some() {
        info!("--seed is reserved; no stochastic paths use it");
    }
    let jobs = expand_jobs(&cfg).map_err(|e| config_error(config_path, e.to_string()))?;
    info!("{} job(s) from {}", jobs.len(), config_path.display());
    let results = jobs.par_iter().map(run_job).collect::<Result<Vec<_>>>()?;

    // assemble every artifact before touching the file system
    let stem = cfg.output_stem();
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let traj_header = strings(&TRAJECTORY_HEADER);
    for r in &results {
        files.insert(
            format!("{stem}_{}.csv", r.job.name),
            csv_string(&traj_header, &trajectory_rows(&r.trajectory))?,
        );
        if options.dump_alpha {
            let (alpha, tilde) = alpha_tables(r)?;
            files.insert(
                format!("{stem}_{}_alpha.csv", r.job.name),
                csv_string(&strings(&["t", "re", "im"]), &alpha)?,
            );
            files.insert(
                format!("{stem}_{}_alpha_tilde.csv", r.job.name),
                csv_string(&strings(&["omega", "re", "im"]), &tilde)?,
            );
        }
        if options.dump_coefficients {
            let (header, rows) = coefficient_table(r)?;
            files.insert(format!("{stem}_{}_coefficients.csv", r.job.name), csv_string(&header, &rows)?);
        }
    }
    let summary: Vec<Vec<String>> = results.iter().map(summary_row).collect();
    files.insert(format!("{stem}_summary.csv"), csv_string(&strings(&SUMMARY_HEADER), &summary)?);
    files.insert(format!("{stem}_manifest.toml"), manifest(&cfg, &results)?.into_bytes());

    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    Ok(RunReport {
        output_dir: dir,
        files: written,
        results,
    })
}

/// Config echo plus tool version and the grid each job used. The manifest
/// is itself a valid config that reproduces the run.
pub fn manifest(cfg: &RunConfig, results: &[JobResult]) -> Result<String> {
    let mut table = cfg.to_table()?;
    let mut m = toml::Table::new();
    m.insert("tool".into(), toml::Value::String(env!("CARGO_PKG_NAME").into()));
    m.insert("tool_version".into(), toml::Value::String(TOOL_VERSION.into()));
    let jobs = results
        .iter()
        .map(|r| {
            let mut j = toml::Table::new();
            j.insert("name".into(), toml::Value::String(r.job.name.clone()));
            j.insert("dt".into(), toml::Value::Float(r.trajectory.dt));
            j.insert("t_max".into(), toml::Value::Float(r.job.scenario.grid.t_max));
            j.insert("decimate".into(), toml::Value::Integer(r.job.scenario.grid.decimate as i64));
            j.insert("stored_points".into(), toml::Value::Integer(r.trajectory.len() as i64));
            toml::Value::Table(j)
        })
        .collect();
    m.insert("jobs".into(), toml::Value::Array(jobs));
    table.insert("manifest".into(), toml::Value::Table(m));
    toml::to_string_pretty(&table).map_err(|e| Error::Validation(format!("cannot write manifest: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[system]
coupling = "sigma-x"

[bath]
coupling_strength = 0.05
cutoff_over_omega = 100.0

[grid]
t_max_times_omega = 0.6

[[scenario]]
name = "sw"
preparation = "switched"
switch_time_times_cutoff = 4.0

[[scenario]]
name = "plain"
preparation = "factorized"

[[sweep]]
path = "scenario.sw.switch_time_times_cutoff"
values = [1.0, 2.0]
"#;

    #[test]
    fn expands_sweeps_per_scenario() {
        let cfg = RunConfig::parse(BASIC, Path::new("basic"), &[]).unwrap();
        let jobs = expand_jobs(&cfg).unwrap();
        let names: Vec<_> = jobs.iter().map(|j| j.name.as_str()).collect();
        assert_eq!(names, ["sw_switch_time_times_cutoff-1", "sw_switch_time_times_cutoff-2", "plain"]);
    }

    #[test]
    fn unknown_keys_and_misplaced_keys_rejected() {
        let bad = BASIC.replace("coupling_strength", "coupling_strenght");
        let e = RunConfig::parse(&bad, Path::new("x"), &[]).unwrap_err().to_string();
        assert!(e.contains("line"), "{e}");
        let misplaced = BASIC.replace("preparation = \"factorized\"", "preparation = \"factorized\"\ntarget = \"ground\"");
        assert!(RunConfig::parse(&misplaced, Path::new("x"), &[]).is_err());
        let negative = BASIC.replace("cutoff_over_omega = 100.0", "cutoff_over_omega = -1.0");
        assert!(RunConfig::parse(&negative, Path::new("x"), &[]).is_err());
    }

    #[test]
    fn overrides_address_tables_and_named_scenarios() {
        let ov = [
            parse_override("bath.cutoff_over_omega=50").unwrap(),
            parse_override("scenario.plain.initial=ground").unwrap(),
        ];
        assert!(RunConfig::parse(BASIC, Path::new("x"), &[parse_override("scenario.nope.initial=ground").unwrap()]).is_err());
        let cfg = RunConfig::parse(BASIC, Path::new("x"), &ov).unwrap();
        assert_eq!(cfg.bath.cutoff_over_omega, 50.0);
        assert_eq!(cfg.scenarios[1].initial, Some(StateName::Ground));
    }

    #[test]
    fn manifest_parses_back_to_the_same_config() {
        let cfg = RunConfig::parse(BASIC, Path::new("x"), &[]).unwrap();
        let text = manifest(&cfg, &[]).unwrap();
        let mut back = RunConfig::parse(&text, Path::new("m"), &[]).unwrap();
        assert!(back.manifest.take().is_some());
        assert_eq!(back, cfg);
    }
}
