//! Second-order master-equation coefficients `(A◇L)(t)`.
//!
//! For a constant Hamiltonian with eigenbasis `U` and Bohr frequencies
//! `ω_ab = E_a − E_b`,
//!
//! ```text
//! (A◇L)(t) = ∫₀^t ds α(s) e^{−iHs} L e^{+iHs} = U [ L′_ab F(ω_ab, t) ] U†,
//! F(ω, t)   = ∫₀^t ds α(s) e^{−iωs},
//! ```
//!
//! so all variants are assembled from the scalar tables in [`crate::kernel`].
//!
//! * `Finite`: uncorrelated coefficients for a (piecewise constant) `H_+`.
//! * `Switched`: coupling ramped by `θ_s`, i.e.
//!   `θ_s(t) ∫₀^t dτ θ_s(t−τ) α(τ) G₀(τ)L`.
//! * `Asymptotic`: `t → ∞` limit for `H_-`, entries `L′_ab α̂(ω_ab)`.
//! * `Prepared`: system and bath uncorrelated in the infinite past under
//!   `H_-`, giving `(A◇L)_+(t) − M(t){(A◇L)_-(t) − (A◇L)_-(∞)}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bath::CorrelationFunction;
use crate::error::{Error, Result};
use crate::kernel::{KernelKey, KernelRequests, KernelTable};
use crate::operator::{Operator, C64};
use crate::propagator::{HamiltonianSchedule, UnitaryPropagator};
use crate::quad::{self, Tolerance};

/// Smooth ramp `θ_s: [0, ∞) → [0, 1)` of the system–bath coupling.
pub trait SwitchOn: Send + Sync + fmt::Debug {
    fn theta(&self, t: f64) -> f64;

    /// Characteristic time `τ_s`.
    fn timescale(&self) -> f64;

    /// `Some(1/τ_s)` when `θ_s(t) = 1 − e^{−t/τ_s}`; such ramps are tabulated
    /// in O(1) per time point, all others are integrated directly.
    fn exponential_rate(&self) -> Option<f64> {
        None
    }
}

/// `θ_s(t) = 1 − e^{−t/τ_s}`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialSwitch {
    tau: f64,
}

impl ExponentialSwitch {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Validation(format!("switch-on time must be > 0, got {tau}")));
        }
        Ok(ExponentialSwitch { tau })
    }
}

impl SwitchOn for ExponentialSwitch {
    fn theta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            -(-t / self.tau).exp_m1()
        }
    }

    fn timescale(&self) -> f64 {
        self.tau
    }

    fn exponential_rate(&self) -> Option<f64> {
        Some(1.0 / self.tau)
    }
}

#[derive(Clone, Debug)]
pub enum Variant {
    Finite,
    Switched(Arc<dyn SwitchOn>),
    Asymptotic,
    Prepared,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Finite => "finite",
            Variant::Switched(_) => "switched",
            Variant::Asymptotic => "asymptotic",
            Variant::Prepared => "prepared",
        }
    }
}

/// Definition of one coefficient function `t ↦ (A◇L)(t)`.
#[derive(Clone, Debug)]
pub struct DiamondCoefficient {
    pub variant: Variant,
    pub coupling: Operator,
    pub schedule: HamiltonianSchedule,
    pub correlation: CorrelationFunction,
    step: Option<f64>,
}

impl DiamondCoefficient {
    pub fn new(
        variant: Variant,
        coupling: Operator,
        schedule: HamiltonianSchedule,
        correlation: CorrelationFunction,
    ) -> Result<Self> {
        coupling.ensure_hermitian("coupling operator")?;
        if coupling.dim() != schedule.dim() {
            return Err(Error::Dimension(format!(
                "coupling is {}-dimensional, schedule is {}-dimensional",
                coupling.dim(),
                schedule.dim()
            )));
        }
        if matches!(variant, Variant::Switched(_)) && schedule.segments().len() != 1 {
            return Err(Error::Unsupported(
                "switched coefficients need a single constant future Hamiltonian".into(),
            ));
        }
        Ok(DiamondCoefficient {
            variant,
            coupling,
            schedule,
            correlation,
            step: None,
        })
    }

    /// Override the quadrature panel width.
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    /// `½ min(1/(20Λ), 1/(20 ω_max), τ_s/20)` unless overridden.
    pub fn step(&self) -> f64 {
        self.step.unwrap_or_else(|| 0.5 / self.fastest_rate())
    }

    fn fastest_rate(&self) -> f64 {
        let mut rate = 20.0 * self.correlation.bath.cutoff();
        rate = rate.max(20.0 * self.schedule.past().spectral_width());
        for seg in self.schedule.segments() {
            rate = rate.max(20.0 * seg.propagator.spectral_width());
        }
        if let Variant::Switched(s) = &self.variant {
            rate = rate.max(20.0 / s.timescale());
        }
        rate
    }

    /// Tabulate everything needed to evaluate the coefficient on `[0, horizon]`.
    pub fn track(&self, horizon: f64) -> Result<CoefficientTrack> {
        let mut requests = KernelRequests::default();
        let step = self.step();
        let kind = match &self.variant {
            Variant::Asymptotic => TrackKind::Constant(diamond_asymptotic(
                &self.coupling,
                self.schedule.past().hamiltonian(),
                &self.correlation,
            )?),
            Variant::Finite => TrackKind::Finite(ScheduleIntegral::new(&self.schedule, &self.coupling, &mut requests)),
            Variant::Switched(switch) => {
                let part = EigenIntegral::new(
                    self.schedule.segments()[0].propagator.clone(),
                    &self.coupling,
                    &mut requests,
                    switch.exponential_rate(),
                );
                TrackKind::Switched {
                    part,
                    switch: switch.clone(),
                }
            }
            Variant::Prepared => TrackKind::Prepared {
                plus: ScheduleIntegral::new(&self.schedule, &self.coupling, &mut requests),
                minus: EigenIntegral::new(self.schedule.past().clone(), &self.coupling, &mut requests, None),
                eraser: diamond_asymptotic(&self.coupling, self.schedule.past().hamiltonian(), &self.correlation)?,
                schedule: self.schedule.clone(),
            },
        };
        let table = KernelTable::build(self.correlation, requests, step, horizon)?;
        Ok(CoefficientTrack {
            kind,
            table: Arc::new(table),
            correlation: self.correlation,
            dim: self.coupling.dim(),
        })
    }

    /// One-off evaluation at `t`.
    pub fn at(&self, t: f64) -> Result<Operator> {
        if t < 0.0 {
            return Err(Error::Domain(format!("coefficients need t >= 0, got {t}")));
        }
        self.track(t)?.at(t)
    }
}

/// A coefficient with its running integrals tabulated; cheap to query.
#[derive(Clone, Debug)]
pub struct CoefficientTrack {
    kind: TrackKind,
    table: Arc<KernelTable>,
    correlation: CorrelationFunction,
    dim: usize,
}

#[derive(Clone, Debug)]
enum TrackKind {
    Constant(Operator),
    Finite(ScheduleIntegral),
    Switched {
        part: EigenIntegral,
        switch: Arc<dyn SwitchOn>,
    },
    Prepared {
        plus: ScheduleIntegral,
        minus: EigenIntegral,
        eraser: Operator,
        schedule: HamiltonianSchedule,
    },
}

impl CoefficientTrack {
    /// `(A◇L)(t)`
    pub fn at(&self, t: f64) -> Result<Operator> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("coefficients need t >= 0, got {t}")));
        }
        match &self.kind {
            TrackKind::Constant(op) => Ok(op.clone()),
            TrackKind::Finite(plus) => plus.at(&self.table, t),
            TrackKind::Switched { part, switch } => match switch.exponential_rate() {
                Some(_) => part.switched(&self.table, t, switch.theta(t)),
                None => part.switched_direct(&self.correlation, switch.as_ref(), t, self.table.step()),
            },
            TrackKind::Prepared {
                plus,
                minus,
                eraser,
                schedule,
            } => {
                let bracket = minus.window(&self.table, t, 0.0)? - eraser.clone();
                Ok(plus.at(&self.table, t)? - schedule.mixing(t, &bracket)?)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    /// Largest accumulated quadrature error over the tabulated kernels.
    pub fn error_estimate(&self) -> f64 {
        (0..self.table.keys().len())
            .map(|i| self.table.error_estimate(i))
            .fold(0.0, f64::max)
    }

    /// `(A◇L)_-(∞)` for prepared coefficients.
    pub fn eraser(&self) -> Option<&Operator> {
        match &self.kind {
            TrackKind::Prepared { eraser, .. } => Some(eraser),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    a: usize,
    b: usize,
    coupling: C64,
    omega: f64,
    plain: usize,
    decayed: Option<usize>,
}

/// Coupling matrix elements in the eigenbasis of one constant Hamiltonian.
#[derive(Clone, Debug)]
struct EigenIntegral {
    propagator: Arc<UnitaryPropagator>,
    entries: Vec<Entry>,
}

impl EigenIntegral {
    fn new(
        propagator: Arc<UnitaryPropagator>,
        coupling: &Operator,
        requests: &mut KernelRequests,
        decay: Option<f64>,
    ) -> Self {
        let le = propagator.to_eigenbasis(coupling);
        let scale = le.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let e = propagator.energies();
        let mut entries = Vec::new();
        for a in 0..le.nrows() {
            for b in 0..le.ncols() {
                if le[(a, b)].norm() <= 1e-14 * scale {
                    continue;
                }
                let omega = e[a] - e[b];
                entries.push(Entry {
                    a,
                    b,
                    coupling: le[(a, b)],
                    omega,
                    plain: requests.request(KernelKey::plain(omega)),
                    decayed: decay.map(|g| requests.request(KernelKey { omega, decay: g })),
                });
            }
        }
        EigenIntegral { propagator, entries }
    }

    fn assemble(&self, mut entry_value: impl FnMut(&Entry) -> Result<C64>) -> Result<Operator> {
        let n = self.propagator.dim();
        let mut m = DMatrix::zeros(n, n);
        for entry in &self.entries {
            m[(entry.a, entry.b)] = entry.coupling * entry_value(entry)?;
        }
        Ok(self.propagator.from_eigenbasis(m))
    }

    /// `∫_{lower}^{upper} ds α(s) G(s − lower){L}`, i.e. entries
    /// `L′_ab e^{iω lower} [F(ω, upper) − F(ω, lower)]`.
    fn window(&self, table: &KernelTable, upper: f64, lower: f64) -> Result<Operator> {
        self.assemble(|e| {
            let hi = table.value(e.plain, upper)?;
            if lower == 0.0 {
                return Ok(hi);
            }
            let lo = table.value(e.plain, lower)?;
            Ok(C64::from_polar(1.0, e.omega * lower) * (hi - lo))
        })
    }

    /// Exponential ramp: `θ(t) [F(ω, t) − F_{ω,1/τ}(t)]`.
    fn switched(&self, table: &KernelTable, t: f64, theta: f64) -> Result<Operator> {
        self.assemble(|e| {
            let decayed = e.decayed.expect("exponential switch requests decayed kernels");
            Ok((table.value(e.plain, t)? - table.value(decayed, t)?) * theta)
        })
    }

    /// Any ramp: `θ(t) ∫₀^t dτ θ(t−τ) α(τ) e^{−iωτ}` by direct quadrature.
    fn switched_direct(&self, corr: &CorrelationFunction, switch: &dyn SwitchOn, t: f64, step: f64) -> Result<Operator> {
        let theta = switch.theta(t);
        if t == 0.0 || theta == 0.0 {
            return Ok(Operator::zeros(self.propagator.dim()));
        }
        let pieces = ((t / step).ceil() as usize).max(1);
        let points = quad::linspace(0.0, t, pieces);
        let scale = corr.bath.density.coupling * corr.bath.cutoff();
        self.assemble(|e| {
            let mut failure = None;
            let est = quad::integrate(
                |tau| match corr.alpha(tau) {
                    Ok(a) => a * C64::from_polar(switch.theta(t - tau), -e.omega * tau),
                    Err(err) => {
                        failure.get_or_insert(err);
                        C64::new(0.0, 0.0)
                    }
                },
                &points,
                Tolerance::relative(1e-11).with_absolute(1e-15 * scale),
            )?;
            match failure {
                Some(err) => Err(err),
                None => Ok(est.value * theta),
            }
        })
    }
}

/// Uncorrelated coefficient for a piecewise-constant `H_+`.
#[derive(Clone, Debug)]
struct ScheduleIntegral {
    schedule: HamiltonianSchedule,
    parts: Vec<EigenIntegral>,
}

impl ScheduleIntegral {
    fn new(schedule: &HamiltonianSchedule, coupling: &Operator, requests: &mut KernelRequests) -> Self {
        let parts = schedule
            .segments()
            .iter()
            .map(|seg| EigenIntegral::new(seg.propagator.clone(), coupling, requests, None))
            .collect();
        ScheduleIntegral {
            schedule: schedule.clone(),
            parts,
        }
    }

    /// `∫₀^t dτ α(t−τ) G_+(t, τ){L}`, split by segment: the part of segment
    /// `j` that ends at `e_j = min(t, end_j)` contributes
    /// `G_+(t, e_j) { ∫_{t−e_j}^{t−start_j} ds α(s) G_j(s − (t−e_j)){L} }`.
    fn at(&self, table: &KernelTable, t: f64) -> Result<Operator> {
        let k = self.schedule.segment_index(t, false)?;
        let segments = self.schedule.segments();
        let mut total = self.parts[k].window(table, t - segments[k].start, 0.0)?;
        for (j, seg) in segments.iter().enumerate().take(k) {
            let lag = t - seg.end;
            let piece = self.parts[j].window(table, t - seg.start, lag)?;
            total += &self.schedule.propagate(t, seg.end, &piece)?;
        }
        Ok(total)
    }
}

/// `(A◇L)(t) = ∫₀^t ds α(s) e^{−iHs} L e^{+iHs}` for constant `H`.
pub fn diamond_finite(coupling: &Operator, h: &Operator, correlation: &CorrelationFunction, t: f64) -> Result<Operator> {
    let schedule = HamiltonianSchedule::constant(h)?;
    DiamondCoefficient::new(Variant::Finite, coupling.clone(), schedule, *correlation)?.at(t)
}

/// `θ_s(t) ∫₀^t dτ θ_s(t−τ) α(τ) e^{−iHτ} L e^{+iHτ}`
pub fn diamond_switched(
    coupling: &Operator,
    h: &Operator,
    correlation: &CorrelationFunction,
    switch: Arc<dyn SwitchOn>,
    t: f64,
) -> Result<Operator> {
    let schedule = HamiltonianSchedule::constant(h)?;
    DiamondCoefficient::new(Variant::Switched(switch), coupling.clone(), schedule, *correlation)?.at(t)
}

/// `(A◇L)(∞)` for constant `H`: entries `L′_ab α̂(ω_ab)` in the eigenbasis of `H`.
pub fn diamond_asymptotic(coupling: &Operator, h: &Operator, correlation: &CorrelationFunction) -> Result<Operator> {
    coupling.ensure_same_dim(h, "asymptotic coefficient")?;
    let prop = UnitaryPropagator::new(h)?;
    let le = prop.to_eigenbasis(coupling);
    let e = prop.energies();
    let scale = le.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut cache: Vec<(f64, C64)> = Vec::new();
    let n = prop.dim();
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if le[(a, b)].norm() <= 1e-14 * scale {
                continue;
            }
            let omega = e[a] - e[b];
            let hat = match cache
                .iter()
                .find(|(w, _)| (w - omega).abs() <= 1e-12 * omega.abs().max(1.0))
            {
                Some((_, v)) => *v,
                None => {
                    let v = correlation.alpha_half_fourier(omega)?;
                    cache.push((omega, v));
                    v
                }
            };
            out[(a, b)] = le[(a, b)] * hat;
        }
    }
    Ok(prop.from_eigenbasis(out))
}

/// `(A◇L)_+(t) − M(t){(A◇L)_-(t) − (A◇L)_-(∞)}`
pub fn diamond_prepared(
    coupling: &Operator,
    schedule: &HamiltonianSchedule,
    correlation: &CorrelationFunction,
    t: f64,
) -> Result<Operator> {
    DiamondCoefficient::new(Variant::Prepared, coupling.clone(), schedule.clone(), *correlation)?.at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathSpec, SpectralDensity};
    use crate::operator::pauli::*;

    fn zero_t(eta: f64, lam: f64) -> CorrelationFunction {
        CorrelationFunction::new(BathSpec::zero_temperature(SpectralDensity::ohmic(eta, lam).unwrap()))
    }

    #[test]
    fn finite_at_zero_is_zero() {
        let c = zero_t(0.05, 100.0);
        let a = diamond_finite(&sigma_x(), &(&sigma_z() * 0.5), &c, 0.0).unwrap();
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn finite_with_zero_hamiltonian_is_scalar_times_coupling() {
        // ∫₀^t ηΛ²/(1+iΛs)² ds = ηΛ²t/(1+iΛt)
        let (eta, lam, t) = (0.05, 100.0, 0.037);
        let c = zero_t(eta, lam);
        let a = diamond_finite(&sigma_x(), &Operator::zeros(2), &c, t).unwrap();
        let scalar = C64::new(eta * lam * lam * t, 0.0) / C64::new(1.0, lam * t);
        assert!(a.max_distance(&(&sigma_x() * scalar)) < 1e-12 * scalar.norm());
    }

    #[test]
    fn switched_vanishes_at_origin_and_reduces_without_ramp() {
        let c = zero_t(0.05, 100.0);
        let h = &sigma_z() * 0.5;
        let sw: Arc<dyn SwitchOn> = Arc::new(ExponentialSwitch::new(0.01).unwrap());
        let a0 = diamond_switched(&sigma_x(), &h, &c, sw, 0.0).unwrap();
        assert_eq!(a0.max_abs(), 0.0);

        // τ_s → 0: θ ≡ 1 after a vanishing transient
        let t = 0.5;
        let fast: Arc<dyn SwitchOn> = Arc::new(ExponentialSwitch::new(1e-9).unwrap());
        let coeff = DiamondCoefficient::new(
            Variant::Switched(fast),
            sigma_x(),
            HamiltonianSchedule::constant(&h).unwrap(),
            c,
        )
        .unwrap()
        .with_step(1.0 / 4000.0);
        let sw = coeff.at(t).unwrap();
        let plain = diamond_finite(&sigma_x(), &h, &c, t).unwrap();
        assert!(sw.max_distance(&plain) < 1e-7 * plain.max_abs());
    }

    #[derive(Debug)]
    struct LinearRamp(f64);
    impl SwitchOn for LinearRamp {
        fn theta(&self, t: f64) -> f64 {
            (t / self.0).clamp(0.0, 1.0)
        }
        fn timescale(&self) -> f64 {
            self.0
        }
    }

    #[test]
    fn generic_ramp_agrees_with_tabulated_exponential() {
        // the direct-quadrature path, exercised with an exponential shape
        #[derive(Debug)]
        struct Untabulated(ExponentialSwitch);
        impl SwitchOn for Untabulated {
            fn theta(&self, t: f64) -> f64 {
                self.0.theta(t)
            }
            fn timescale(&self) -> f64 {
                self.0.timescale()
            }
        }
        let c = zero_t(0.05, 50.0);
        let h = &sigma_z() * 0.5;
        let exp = ExponentialSwitch::new(0.05).unwrap();
        let t = 0.13;
        let a = diamond_switched(&sigma_x(), &h, &c, Arc::new(exp), t).unwrap();
        let b = diamond_switched(&sigma_x(), &h, &c, Arc::new(Untabulated(exp)), t).unwrap();
        assert!(a.max_distance(&b) < 1e-9 * a.max_abs());
        let lin = diamond_switched(&sigma_x(), &h, &c, Arc::new(LinearRamp(0.05)), t).unwrap();
        assert!(lin.max_abs() > 0.0);
    }

    #[test]
    fn asymptotic_with_commuting_coupling() {
        let c = zero_t(0.05, 100.0);
        let a = diamond_asymptotic(&sigma_x(), &Operator::zeros(2), &c).unwrap();
        let hat0 = c.alpha_half_fourier(0.0).unwrap();
        assert!(a.max_distance(&(&sigma_x() * hat0)) < 1e-14);
    }

    #[test]
    fn prepared_at_zero_is_eraser() {
        let c = zero_t(0.05, 100.0);
        let hm = &sigma_z() * -0.5;
        let hp = &sigma_z() * 0.5;
        let s = HamiltonianSchedule::quench(&hm, &hp).unwrap();
        let p = diamond_prepared(&sigma_x(), &s, &c, 0.0).unwrap();
        let eraser = diamond_asymptotic(&sigma_x(), &hm, &c).unwrap();
        assert!(p.max_distance(&eraser) < 1e-15 * eraser.max_abs().max(1.0));
    }

    #[test]
    fn negative_time_rejected() {
        let c = zero_t(0.05, 100.0);
        assert!(matches!(
            diamond_finite(&sigma_x(), &sigma_z(), &c, -1.0),
            Err(Error::Domain(_))
        ));
    }
}
