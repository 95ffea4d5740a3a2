//! Declarative simulation scenarios and the preparation recipes.
//!
//! A [`Scenario`] fixes the post-preparation Hamiltonian `H₀`, the coupling
//! `L`, the bath, the zeroth-order initial state and the integration grid,
//! together with how the system–bath correlations at `t = 0` are modelled:
//!
//! | preparation        | coefficients | schedule                          |
//! |--------------------|--------------|-----------------------------------|
//! | `Factorized`       | finite       | `H₀` throughout                   |
//! | `Switched`         | switched     | `H₀` throughout                   |
//! | `Equilibrium`      | prepared     | `H₋` before 0, `H₀` after         |
//! | `Nonequilibrium`   | prepared     | `H₋`, then `H_P` on `[0, τ_P)`, then `H₀` |

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;

use crate::bath::BathSpec;
use crate::coefficients::{diamond_asymptotic, CoefficientTrack, DiamondCoefficient, SwitchOn, Variant};
use crate::error::{Error, Result};
use crate::liouvillian::{decay_rate_from, Channel, Liouvillian};
use crate::operator::{Operator, StateVector, C64};
use crate::propagator::HamiltonianSchedule;

/// `≪` is read as a factor-10 separation.
pub const SEPARATION: f64 = 0.1;

/// Default freezing depth relative to the cutoff.
pub const FREEZING_DEPTH: f64 = 0.01;

/// Finite-time preparation Hamiltonian applied on `[0, τ_P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Drive {
    pub hamiltonian: Operator,
    pub duration: f64,
}

#[derive(Clone, Debug)]
pub enum Preparation {
    /// System and bath uncorrelated at `t = 0`.
    Factorized,
    /// Coupling ramped on by `θ_s`.
    Switched(Arc<dyn SwitchOn>),
    /// Equilibrated under `H₋` in the infinite past.
    Equilibrium { h_minus: Operator },
    /// Equilibrated under `H₋`, then driven by `H_P` for `τ_P`; `None` means `τ_P = 0`.
    Nonequilibrium { h_minus: Operator, drive: Option<Drive> },
}

impl Preparation {
    pub fn name(&self) -> &'static str {
        match self {
            Preparation::Factorized => "factorized",
            Preparation::Switched(_) => "switched",
            Preparation::Equilibrium { .. } => "equilibrium",
            Preparation::Nonequilibrium { .. } => "nonequilibrium",
        }
    }
}

/// Integration grid; `dt = None` picks `min(1/(20Λ), 1/(20Ω))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub t_max: f64,
    pub dt: Option<f64>,
    /// Store every `decimate`-th step after the jolt window.
    pub decimate: usize,
}

impl Grid {
    pub fn new(t_max: f64) -> Self {
        Grid {
            t_max,
            dt: None,
            decimate: 1,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_decimate(mut self, k: usize) -> Self {
        self.decimate = k;
        self
    }
}

/// The physical system shared by all preparations.
#[derive(Clone, Debug)]
pub struct System {
    /// Post-preparation Hamiltonian `H₀`.
    pub h0: Operator,
    pub coupling: Operator,
    pub bath: BathSpec,
}

impl System {
    pub fn new(h0: Operator, coupling: Operator, bath: BathSpec) -> Result<Self> {
        h0.ensure_hermitian("system Hamiltonian")?;
        coupling.ensure_hermitian("coupling operator")?;
        h0.ensure_same_dim(&coupling, "system")?;
        Ok(System { h0, coupling, bath })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub preparation: Preparation,
    pub h0: Operator,
    pub coupling: Operator,
    pub bath: BathSpec,
    /// Zeroth-order state at `t = 0`.
    pub rho_init: Operator,
    pub grid: Grid,
    /// Dimension of an ancilla factor to trace out when reporting observables.
    pub ancilla_dim: Option<usize>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        preparation: Preparation,
        system: &System,
        rho_init: Operator,
        grid: Grid,
    ) -> Result<Self> {
        let s = Scenario {
            name: name.into(),
            preparation,
            h0: system.h0.clone(),
            coupling: system.coupling.clone(),
            bath: system.bath,
            rho_init,
            grid,
            ancilla_dim: None,
        };
        s.check()?;
        Ok(s)
    }

    /// Factorized initial state `ρ_init ⊗ ρ_E`.
    pub fn factorized(name: impl Into<String>, system: &System, rho_init: Operator, grid: Grid) -> Result<Self> {
        Self::new(name, Preparation::Factorized, system, rho_init, grid)
    }

    /// Factorized state with the coupling ramped on by `switch`.
    pub fn switched(
        name: impl Into<String>,
        system: &System,
        switch: Arc<dyn SwitchOn>,
        rho_init: Operator,
        grid: Grid,
    ) -> Result<Self> {
        Self::new(name, Preparation::Switched(switch), system, rho_init, grid)
    }

    fn check(&self) -> Result<()> {
        let n = self.h0.dim();
        self.h0.ensure_hermitian("system Hamiltonian")?;
        self.coupling.ensure_hermitian("coupling operator")?;
        self.h0.ensure_same_dim(&self.coupling, "scenario")?;
        self.rho_init.ensure_same_dim(&self.h0, "initial state")?;
        self.rho_init.ensure_density_matrix("initial state")?;
        match &self.preparation {
            Preparation::Factorized => {}
            Preparation::Switched(s) => {
                if !(s.timescale() > 0.0) {
                    return Err(Error::Validation("switch-on time must be > 0".into()));
                }
            }
            Preparation::Equilibrium { h_minus } => {
                h_minus.ensure_hermitian("past Hamiltonian")?;
                h_minus.ensure_same_dim(&self.h0, "past Hamiltonian")?;
            }
            Preparation::Nonequilibrium { h_minus, drive } => {
                h_minus.ensure_hermitian("past Hamiltonian")?;
                h_minus.ensure_same_dim(&self.h0, "past Hamiltonian")?;
                if let Some(d) = drive {
                    d.hamiltonian.ensure_hermitian("preparation Hamiltonian")?;
                    d.hamiltonian.ensure_same_dim(&self.h0, "preparation Hamiltonian")?;
                    if !(d.duration > 0.0) || !d.duration.is_finite() {
                        return Err(Error::Validation(format!("preparation time must be > 0, got {}", d.duration)));
                    }
                }
            }
        }
        if !(self.grid.t_max > 0.0) || !self.grid.t_max.is_finite() {
            return Err(Error::Validation(format!("t_max must be > 0, got {}", self.grid.t_max)));
        }
        if let Some(dt) = self.grid.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Validation(format!("dt must be > 0, got {dt}")));
            }
        }
        if self.grid.decimate == 0 {
            return Err(Error::Validation("decimate must be >= 1".into()));
        }
        if let Some(a) = self.ancilla_dim {
            if a == 0 || !n.is_multiple_of(a) {
                return Err(Error::Dimension(format!("ancilla dimension {a} does not divide {n}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn cutoff(&self) -> f64 {
        self.bath.cutoff()
    }

    /// Largest Bohr frequency over every Hamiltonian the scenario uses.
    pub fn frequency_scale(&self) -> f64 {
        let width = |h: &Operator| {
            let e = h.eigh().values;
            e[e.len() - 1] - e[0]
        };
        let mut w = width(&self.h0);
        match &self.preparation {
            Preparation::Equilibrium { h_minus } => w = w.max(width(h_minus)),
            Preparation::Nonequilibrium { h_minus, drive } => {
                w = w.max(width(h_minus));
                if let Some(d) = drive {
                    w = w.max(width(&d.hamiltonian));
                }
            }
            _ => {}
        }
        w
    }

    /// `min(1/(20Λ), 1/(20Ω))` unless the grid fixes `dt`.
    pub fn dt(&self) -> f64 {
        self.grid.dt.unwrap_or_else(|| {
            let rate = self.cutoff().max(self.frequency_scale());
            1.0 / (20.0 * rate)
        })
    }

    pub fn schedule(&self) -> Result<HamiltonianSchedule> {
        match &self.preparation {
            Preparation::Factorized | Preparation::Switched(_) => HamiltonianSchedule::constant(&self.h0),
            Preparation::Equilibrium { h_minus } => HamiltonianSchedule::quench(h_minus, &self.h0),
            Preparation::Nonequilibrium { h_minus, drive } => match drive {
                None => HamiltonianSchedule::quench(h_minus, &self.h0),
                Some(d) => HamiltonianSchedule::new(
                    h_minus,
                    &[
                        (0.0, d.duration, d.hamiltonian.clone()),
                        (d.duration, f64::INFINITY, self.h0.clone()),
                    ],
                ),
            },
        }
    }

    pub fn variant(&self) -> Variant {
        match &self.preparation {
            Preparation::Factorized => Variant::Finite,
            Preparation::Switched(s) => Variant::Switched(s.clone()),
            Preparation::Equilibrium { .. } | Preparation::Nonequilibrium { .. } => Variant::Prepared,
        }
    }

    pub fn coefficient(&self) -> Result<DiamondCoefficient> {
        DiamondCoefficient::new(
            self.variant(),
            self.coupling.clone(),
            self.schedule()?,
            crate::bath::CorrelationFunction::new(self.bath),
        )
    }

    /// Coefficient tabulated on `[0, horizon]` with panels that divide `dt/2`,
    /// so Runge–Kutta stage times fall on table nodes.
    pub fn coefficient_track(&self, dt: f64, horizon: f64) -> Result<CoefficientTrack> {
        let coeff = self.coefficient()?;
        let half = 0.5 * dt;
        let k = (half / coeff.step()).ceil().max(1.0);
        coeff.with_step(half / k).track(horizon)
    }

    pub fn liouvillian(&self, dt: f64) -> Result<Liouvillian> {
        let track = self.coefficient_track(dt, self.grid.t_max)?;
        Liouvillian::new(
            self.schedule()?,
            vec![Channel {
                coupling: self.coupling.clone(),
                coefficient: track,
            }],
        )
    }

    /// `Γ(∞)` of the asymptotic generator for `H₀`; `None` unless two-level.
    pub fn asymptotic_rate(&self) -> Result<Option<f64>> {
        if self.dim() != 2 {
            return Ok(None);
        }
        let a = diamond_asymptotic(
            &self.coupling,
            &self.h0,
            &crate::bath::CorrelationFunction::new(self.bath),
        )?;
        Ok(Some(decay_rate_from(&self.h0, &[(self.coupling.clone(), a)])?))
    }

    /// Same scenario with bath coupling strength `η`.
    pub fn with_coupling_strength(&self, eta: f64) -> Self {
        let mut s = self.clone();
        s.bath = s.bath.with_coupling(eta);
        s
    }

    /// Same scenario with cutoff `Λ`; a freezing depth tied to the cutoff
    /// is not rescaled.
    pub fn with_cutoff(&self, cutoff: f64) -> Result<Self> {
        let mut s = self.clone();
        s.bath.density = crate::bath::SpectralDensity::ohmic(s.bath.density.coupling, cutoff)?;
        Ok(s)
    }

    /// Reduced state reported for observables.
    pub fn observed_state(&self, rho: &Operator) -> Result<Operator> {
        match self.ancilla_dim {
            Some(a) => rho.partial_trace_second(a),
            None => Ok(rho.clone()),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, dim {}, Λ = {}, β = {})",
            self.name,
            self.preparation.name(),
            self.dim(),
            self.cutoff(),
            self.bath.beta()
        )
    }
}

/// Outcome of [`validate`]: warnings only, never blocking.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PreparationReport {
    /// `p_max/p_min` of the equilibrated state under `H₋` (finite β only).
    pub adiabatic_ratio: Option<f64>,
    /// `Ω/Λ > 0.1`
    pub system_frequency_flag: bool,
    /// `1/(τ_P Λ) > 0.1`
    pub drive_flag: bool,
    /// `1/(τ_s Λ) > 0.1`
    pub switch_flag: bool,
    /// `p_max/p_min > e^{βΛ}/100`
    pub adiabatic_flag: bool,
    pub warnings: Vec<String>,
}

impl PreparationReport {
    pub fn all_clear(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Jolt-freedom conditions for a scenario.
pub fn validate(s: &Scenario) -> PreparationReport {
    let lam = s.cutoff();
    let mut r = PreparationReport::default();
    let omega = s.frequency_scale();
    if omega / lam > SEPARATION {
        r.system_frequency_flag = true;
        r.warnings.push(format!(
            "system frequency {omega} is not small against the cutoff {lam} (Ω/Λ = {:.3})",
            omega / lam
        ));
    }
    match &s.preparation {
        Preparation::Switched(sw) => {
            let x = 1.0 / (sw.timescale() * lam);
            if x > SEPARATION {
                r.switch_flag = true;
                r.warnings.push(format!("switch-on time {} is not long against 1/Λ (1/(τ_sΛ) = {x:.3})", sw.timescale()));
            }
        }
        Preparation::Nonequilibrium { drive: Some(d), .. } => {
            let x = 1.0 / (d.duration * lam);
            if x > SEPARATION {
                r.drive_flag = true;
                r.warnings.push(format!("preparation time {} is not long against 1/Λ (1/(τ_PΛ) = {x:.3})", d.duration));
            }
        }
        _ => {}
    }
    let h_minus = match &s.preparation {
        Preparation::Equilibrium { h_minus } | Preparation::Nonequilibrium { h_minus, .. } => Some(h_minus),
        _ => None,
    };
    if let (Some(h), false) = (h_minus, s.bath.is_zero_temperature()) {
        let beta = s.bath.beta();
        let e = h.eigh().values;
        let log_ratio = beta * (e[e.len() - 1] - e[0]);
        r.adiabatic_ratio = Some(log_ratio.exp());
        if log_ratio > beta * lam - 100f64.ln() {
            r.adiabatic_flag = true;
            r.warnings.push(format!(
                "populations ratio e^{log_ratio:.3} exceeds the adiabatic bound e^{{βΛ}}/100 = e^{:.3}",
                beta * lam - 100f64.ln()
            ));
        }
    }
    r
}

fn log_warnings(name: &str, report: &PreparationReport) {
    for w in &report.warnings {
        warn!("{name}: {w}");
    }
}

/// Matrix of `ρ` in the eigenbasis of `L`, with the eigenvalues of `L`.
fn in_eigenbasis(l: &Operator, rho: &Operator) -> (Vec<f64>, DMatrix<C64>) {
    let e = l.eigh();
    let m = e.vectors.adjoint() * rho.matrix() * &e.vectors;
    (e.values, m)
}

/// `H₋ = 0`: the bath decoheres the system in the eigenbasis of `L`, so any
/// incoherent mixture of `L`-eigenstates is a fixed point.
pub fn prepare_by_decoherence(system: &System, rho_target: &Operator, grid: Grid) -> Result<Scenario> {
    rho_target.ensure_density_matrix("target state")?;
    rho_target.ensure_same_dim(&system.coupling, "target state")?;
    let (values, m) = in_eigenbasis(&system.coupling, rho_target);
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            if (values[a] - values[b]).abs() > 1e-10 && m[(a, b)].norm() > 1e-10 {
                return Err(Error::Validation(format!(
                    "target state has coherence {:.3e} between coupling eigenstates {a} and {b}; \
                     decoherence can only prepare incoherent mixtures",
                    m[(a, b)].norm()
                )));
            }
        }
    }
    let h_minus = Operator::zeros(system.dim());
    let s = Scenario::new("decoherence", Preparation::Equilibrium { h_minus }, system, rho_target.clone(), grid)?;
    log_warnings(&s.name, &validate(&s));
    Ok(s)
}

/// `H₋ = −(1/β) log ρ_target`, whose Gibbs state is the target.
pub fn prepare_by_equilibration(
    system: &System,
    rho_target: &Operator,
    grid: Grid,
) -> Result<(Scenario, PreparationReport)> {
    if system.bath.is_zero_temperature() {
        return Err(Error::Validation(
            "equilibration needs a finite temperature; use freezing at zero temperature".into(),
        ));
    }
    rho_target.ensure_density_matrix("target state")?;
    let p_min = rho_target.min_eigenvalue();
    if p_min <= 1e-14 {
        return Err(Error::Validation(format!(
            "target state is singular (smallest population {p_min:.3e}); −T log ρ does not exist, \
             prepare pure targets by freezing instead"
        )));
    }
    let beta = system.bath.beta();
    let h_minus = rho_target.hermitian_function(|p| -p.ln() / beta);
    let s = Scenario::new("equilibration", Preparation::Equilibrium { h_minus }, system, rho_target.clone(), grid)?;
    let report = validate(&s);
    log_warnings(&s.name, &report);
    Ok((s, report))
}

/// `H₋ = −Ω_prep |ψ₀⟩⟨ψ₀|`: at zero temperature the bath relaxes the system
/// into the ground state `|ψ₀⟩` of `H₋`. `depth` defaults to `Λ/100`.
pub fn prepare_by_freezing(system: &System, target: &StateVector, depth: Option<f64>, grid: Grid) -> Result<Scenario> {
    if !system.bath.is_zero_temperature() {
        return Err(Error::Validation(
            "preparation by freezing requires a zero-temperature environment".into(),
        ));
    }
    target.ensure_normalized("target state")?;
    if target.dim() != system.dim() {
        return Err(Error::Dimension(format!(
            "target state has dimension {}, system {}",
            target.dim(),
            system.dim()
        )));
    }
    let depth = depth.unwrap_or(FREEZING_DEPTH * system.bath.cutoff());
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::Validation(format!("freezing depth must be > 0, got {depth}")));
    }
    let p = Operator::projector(target);
    let h_minus = &p * -depth;
    let s = Scenario::new("freezing", Preparation::Equilibrium { h_minus }, system, p, grid)?;
    log_warnings(&s.name, &validate(&s));
    Ok(s)
}

/// `H_P = (π/2τ_P)(|ψ₀⟩⟨0| + |0⟩⟨ψ₀|)`, rotating `|0⟩` into `−i|ψ₀⟩`
/// in time `τ_P` when `⟨0|ψ₀⟩ = 0`.
pub fn flipping_hamiltonian(ground: &StateVector, target: &StateVector, tau_p: f64) -> Result<Operator> {
    ground.ensure_normalized("ground state")?;
    target.ensure_normalized("target state")?;
    if !(tau_p > 0.0) || !tau_p.is_finite() {
        return Err(Error::Validation(format!("preparation time must be > 0, got {tau_p}")));
    }
    let overlap = ground.inner(target);
    if overlap.im.abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "⟨0|ψ₀⟩ = {overlap} must be real; rephase the target state"
        )));
    }
    let k = Operator::outer(target, ground)?;
    Ok((&k + &k.dagger()).scale_real(FRAC_PI_2 / tau_p))
}

/// `H_P = (π/2τ_P) SWAP` on system ⊗ ancilla, so that `e^{−iH_Pτ_P} = −i SWAP`.
pub fn swap_hamiltonian(dim: usize, tau_p: f64) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::Dimension("swap needs a non-empty Hilbert space".into()));
    }
    if !(tau_p > 0.0) || !tau_p.is_finite() {
        return Err(Error::Validation(format!("preparation time must be > 0, got {tau_p}")));
    }
    let n = dim * dim;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..dim {
        for j in 0..dim {
            // |i⟩⊗|j⟩ has index i·dim + j
            m[(j * dim + i, i * dim + j)] = C64::new(FRAC_PI_2 / tau_p, 0.0);
        }
    }
    Operator::from_matrix(m)
}

/// Equilibrate in the ground state `|0⟩` of `H₋`, then flip it into `ψ₀`
/// with [`flipping_hamiltonian`] over `[0, τ_P)`.
pub fn prepare_by_flipping(
    system: &System,
    h_minus: &Operator,
    target: &StateVector,
    tau_p: f64,
    grid: Grid,
) -> Result<Scenario> {
    let e = h_minus.eigh();
    let ground = StateVector::new(e.vectors.column(0).iter().copied().collect())?;
    // fix the phase so that ⟨0|ψ₀⟩ is real
    let overlap = ground.inner(target);
    let ground = if overlap.norm() > 1e-14 {
        let phase = overlap / overlap.norm();
        StateVector::new(ground.vector().iter().map(|z| z * phase).collect())?
    } else {
        ground
    };
    let hamiltonian = flipping_hamiltonian(&ground, target, tau_p)?;
    let s = Scenario::new(
        "flip",
        Preparation::Nonequilibrium {
            h_minus: h_minus.clone(),
            drive: Some(Drive { hamiltonian, duration: tau_p }),
        },
        system,
        Operator::projector(&ground),
        grid,
    )?;
    log_warnings(&s.name, &validate(&s));
    Ok(s)
}

/// Equilibrate the system under `H₋` (zeroth-order state `ρ_sys`), hold an
/// uncoupled ancilla in `ρ_anc`, then swap the two over `[0, τ_P)`.
///
/// The composite is the master-equation system with coupling `L ⊗ 1` and
/// `H₀ ⊗ 1` afterwards; observables trace out the ancilla.
pub fn prepare_by_swapping(
    system: &System,
    h_minus: &Operator,
    rho_sys: &Operator,
    rho_anc: &Operator,
    tau_p: f64,
    grid: Grid,
) -> Result<Scenario> {
    let n = system.dim();
    rho_anc.ensure_density_matrix("ancilla state")?;
    rho_anc.ensure_same_dim(&system.h0, "ancilla state")?;
    let id = Operator::identity(n);
    let composite = System::new(system.h0.kron(&id), system.coupling.kron(&id), system.bath)?;
    let mut s = Scenario::new(
        "swap",
        Preparation::Nonequilibrium {
            h_minus: h_minus.kron(&id),
            drive: Some(Drive {
                hamiltonian: swap_hamiltonian(n, tau_p)?,
                duration: tau_p,
            }),
        },
        &composite,
        rho_sys.kron(rho_anc),
        grid,
    )?;
    s.ancilla_dim = Some(n);
    s.check()?;
    log_warnings(&s.name, &validate(&s));
    Ok(s)
}
