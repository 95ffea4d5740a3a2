//! Fixed-step integration of `dρ/dt = 𝓛(t){ρ}` and jolt diagnostics.

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::liouvillian::{apply_l0, apply_l2, decay_rate_from, Liouvillian};
use crate::operator::{Operator, C64};
use crate::scenario::Scenario;

/// Jolt window `[0, JOLT_WINDOW/Λ]`, always stored at full resolution.
pub const JOLT_WINDOW: f64 = 50.0;
/// Accepted step-halving difference of the final state.
pub const STEP_TOLERANCE: f64 = 1e-6;
/// Negative eigenvalues below this are reported.
pub const POSITIVITY_WARNING: f64 = -1e-6;

/// Observables of the (reduced) state at one stored time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    /// `ρ₀₀`, the excited population in the two-level convention.
    pub p_e: f64,
    pub rho01: C64,
    pub purity: f64,
    /// `Γ(t)`; `None` unless the system is two-level.
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub scenario: String,
    pub dt: f64,
    pub times: Vec<f64>,
    /// Full states (including any ancilla).
    pub states: Vec<Operator>,
    pub observables: Vec<Observables>,
    pub gamma_inf: Option<f64>,
    /// Smallest eigenvalue of the reported state over the stored times.
    pub min_eigenvalue: f64,
    /// Step-halving difference at `t_max`, when computed.
    pub error_estimate: Option<f64>,
}

/// Largest deviations from the density-matrix invariants over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Operator {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `Γ(t)` series; empty for systems without a decay rate.
    pub fn gamma(&self) -> Vec<f64> {
        self.observables.iter().filter_map(|o| o.gamma).collect()
    }

    pub fn invariants(&self) -> InvariantReport {
        let mut r = InvariantReport {
            trace_residual: 0.0,
            hermiticity_residual: 0.0,
        };
        for s in &self.states {
            r.trace_residual = r.trace_residual.max((s.trace() - 1.0).norm());
            r.hermiticity_residual = r.hermiticity_residual.max(s.hermiticity_residual());
        }
        r
    }

    pub fn jolt_metrics(&self, cutoff: f64) -> Result<JoltMetrics> {
        let gamma_inf = self
            .gamma_inf
            .ok_or_else(|| Error::Unsupported("jolt metrics need a two-level decay rate".into()))?;
        jolt_metrics(&self.times, &self.gamma(), gamma_inf, cutoff)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Also integrate with `dt/2` and compare the final states.
    pub step_halving: bool,
    pub tolerance: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            step_halving: true,
            tolerance: STEP_TOLERANCE,
        }
    }
}

/// Integrate with the default options (step-halving check included).
pub fn integrate(s: &Scenario) -> Result<Trajectory> {
    integrate_with(s, IntegrateOptions::default())
}

pub fn integrate_with(s: &Scenario, options: IntegrateOptions) -> Result<Trajectory> {
    let dt = s.dt();
    let wrap = |e: Error| e.in_scenario(&s.name);
    if !options.step_halving {
        return run(s, dt).map_err(wrap);
    }
    let (coarse, fine) = rayon::join(|| run(s, dt), || run(s, 0.5 * dt));
    let (mut coarse, fine) = (coarse.map_err(wrap)?, fine.map_err(wrap)?);
    let diff = coarse.final_state().max_distance(fine.final_state());
    debug!("{}: step-halving difference {diff:.3e} at dt = {dt}", s.name);
    if diff > options.tolerance {
        return Err(Error::Numerical(format!(
            "step-halving difference {diff:.3e} exceeds {:.1e} at dt = {dt}; use a smaller dt",
            options.tolerance
        ))
        .in_scenario(&s.name));
    }
    coarse.error_estimate = Some(diff);
    Ok(coarse)
}

/// Step endpoints of width `dt`, split at schedule boundaries inside a step.
fn step_nodes(dt: f64, t_max: f64, boundaries: &[f64]) -> Vec<f64> {
    let n = (t_max / dt).round().max(1.0) as usize;
    let n = if (n as f64 * dt) < t_max * (1.0 - 1e-12) { n + 1 } else { n };
    let mut nodes = Vec::with_capacity(n + 1 + boundaries.len());
    nodes.push(0.0);
    for k in 1..=n {
        let prev = (k - 1) as f64 * dt;
        let next = (k as f64 * dt).min(t_max);
        for &b in boundaries {
            if b > prev + 1e-9 * dt && b < next - 1e-9 * dt {
                nodes.push(b);
            }
        }
        nodes.push(next);
    }
    nodes
}

fn run(s: &Scenario, dt: f64) -> Result<Trajectory> {
    let liouvillian = s.liouvillian(dt)?;
    let schedule = liouvillian.schedule();
    let boundaries: Vec<f64> = schedule
        .segments()
        .iter()
        .map(|seg| seg.end)
        .filter(|e| e.is_finite() && *e < s.grid.t_max)
        .collect();
    let nodes = step_nodes(dt, s.grid.t_max, &boundaries);
    let window = JOLT_WINDOW / s.cutoff();
    let two_level = s.observed_state(&s.rho_init)?.dim() == 2 && s.dim() == 2;
    let gamma_inf = if two_level { s.asymptotic_rate()? } else { None };

    let coefficients = |t: f64| -> Result<Vec<(Operator, Operator)>> {
        liouvillian
            .channels()
            .iter()
            .map(|c| Ok((c.coupling.clone(), c.coefficient.at(t)?)))
            .collect()
    };
    let generator = |h: &Operator, ch: &[(Operator, Operator)], rho: &Operator| -> Result<Operator> {
        Ok(apply_l0(h, rho)? + apply_l2(ch, rho)?)
    };

    let mut traj = Trajectory {
        scenario: s.name.clone(),
        dt,
        times: Vec::new(),
        states: Vec::new(),
        observables: Vec::new(),
        gamma_inf,
        min_eigenvalue: f64::INFINITY,
        error_estimate: None,
    };
    let mut warned = false;
    let mut record = |traj: &mut Trajectory, t: f64, rho: &Operator, ch: &[(Operator, Operator)]| -> Result<()> {
        let obs_state = s.observed_state(rho)?;
        let gamma = if two_level {
            Some(decay_rate_from(schedule.hamiltonian_at(t, false)?, ch)?)
        } else {
            None
        };
        let min_ev = obs_state.min_eigenvalue();
        if min_ev < POSITIVITY_WARNING && !warned {
            warn!("{}: state loses positivity at t = {t} (min eigenvalue {min_ev:.3e})", s.name);
            warned = true;
        }
        traj.min_eigenvalue = traj.min_eigenvalue.min(min_ev);
        traj.times.push(t);
        traj.states.push(rho.clone());
        traj.observables.push(Observables {
            p_e: obs_state.get(0, 0).re,
            rho01: if obs_state.dim() > 1 { obs_state.get(0, 1) } else { C64::new(0.0, 0.0) },
            purity: obs_state.purity(),
            gamma,
        });
        Ok(())
    };

    let mut rho = s.rho_init.clone();
    let mut ch_a = coefficients(0.0)?;
    record(&mut traj, 0.0, &rho, &ch_a)?;
    let last = nodes.len() - 1;
    let mut since_store = 0usize;
    for k in 0..last {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let h = b - a;
        let mid = a + 0.5 * h;
        let h_a = schedule.hamiltonian_at(a, false)?;
        let h_mid = schedule.hamiltonian_at(mid, false)?;
        let h_b = schedule.hamiltonian_at(b, true)?;
        let ch_mid = coefficients(mid)?;
        let ch_b = coefficients(b)?;

        let k1 = generator(h_a, &ch_a, &rho)?;
        let k2 = generator(h_mid, &ch_mid, &(&rho + &k1.scale_real(0.5 * h)))?;
        let k3 = generator(h_mid, &ch_mid, &(&rho + &k2.scale_real(0.5 * h)))?;
        let k4 = generator(h_b, &ch_b, &(&rho + &k3.scale_real(h)))?;
        let incr = (k1 + k2.scale_real(2.0) + k3.scale_real(2.0) + k4).scale_real(h / 6.0);
        rho += &incr;
        ch_a = ch_b;

        since_store += 1;
        if b <= window * (1.0 + 1e-12) || since_store >= s.grid.decimate || k + 1 == last {
            record(&mut traj, b, &rho, &ch_a)?;
            since_store = 0;
        }
    }
    Ok(traj)
}

/// Matrix exponential of the constant generator applied to `ρ(0)`; the
/// reference solution when `𝓛` does not depend on time.
pub fn evolve_constant(liouvillian: &Liouvillian, t0: f64, rho: &Operator, t: f64) -> Result<Operator> {
    let m = liouvillian.as_matrix(t0)?;
    let v = (m * C64::new(t, 0.0)).exp() * crate::liouvillian::vectorize(rho);
    crate::liouvillian::unvectorize(&v)
}

/// Shape of the decay-rate transient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JoltMetrics {
    pub peak: f64,
    pub peak_time: f64,
    /// First time at or after the peak with `|Γ − Γ(∞)| ≤ 5% Γ(∞)`;
    /// infinite if the series never settles.
    pub settle_time: f64,
    /// `|peak(2Λ) − peak(Λ)| / peak(Λ)`, when a comparison run exists.
    pub cutoff_sensitivity: Option<f64>,
}

impl JoltMetrics {
    pub fn with_comparison(mut self, doubled_cutoff: &JoltMetrics) -> Self {
        self.cutoff_sensitivity = Some(((doubled_cutoff.peak - self.peak) / self.peak).abs());
        self
    }
}

/// Peak, peak time and settle time of a `Γ(t)` series covering the jolt
/// window `[0, 50/Λ]` at resolution `1/(20Λ)` or finer.
pub fn jolt_metrics(times: &[f64], gamma: &[f64], gamma_inf: f64, cutoff: f64) -> Result<JoltMetrics> {
    if times.len() != gamma.len() || times.is_empty() {
        return Err(Error::Validation(format!(
            "jolt metrics need matching non-empty series, got {} times and {} values",
            times.len(),
            gamma.len()
        )));
    }
    let window = JOLT_WINDOW / cutoff;
    let resolution = 1.0 / (20.0 * cutoff);
    if times[0] > 0.0 || *times.last().unwrap() < window * (1.0 - 1e-12) {
        return Err(Error::Validation(format!(
            "series must cover the jolt window [0, {window}], covers [{}, {}]",
            times[0],
            times.last().unwrap()
        )));
    }
    for w in times.windows(2) {
        if w[0] < window && w[1] - w[0] > resolution * (1.0 + 1e-9) {
            return Err(Error::Validation(format!(
                "series too coarse in the jolt window: gap {} at t = {} exceeds 1/(20Λ) = {resolution}",
                w[1] - w[0],
                w[0]
            )));
        }
    }
    let (peak_idx, peak) = gamma
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    let band = 0.05 * gamma_inf.abs();
    let settle_time = (peak_idx..gamma.len())
        .find(|&i| (gamma[i] - gamma_inf).abs() <= band)
        .map(|i| times[i])
        .unwrap_or(f64::INFINITY);
    Ok(JoltMetrics {
        peak,
        peak_time: times[peak_idx],
        settle_time,
        cutoff_sensitivity: None,
    })
}
