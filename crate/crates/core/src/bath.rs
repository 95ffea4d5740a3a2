//! Thermal environments: spectral densities, the correlation function `α(t)`,
//! its Fourier transforms and KMS diagnostics.
//!
//! Conventions:
//!
//! ```text
//! α(t)  = ∫₀^∞ dω J(ω) [coth(βω/2) cos ωt − i sin ωt]
//! α̃(ω) = ∫ dt α(t) e^{−iωt}              (real, ≥ 0)
//! α̂(ω) = ∫₀^∞ dτ α(τ) e^{−iωτ}           (one-sided)
//! ```
//!
//! With these conventions detailed balance reads `α̃(ω) = α̃(−ω) e^{−βω}`, so
//! at zero temperature `α̃` vanishes for positive frequencies, and the golden
//! rule emission rate of a level spacing `Ω` is `α̃(−Ω) = 2π J(Ω)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::C64;
use crate::quad::{self, Tolerance};
use crate::special::trigamma;

/// Spectral density families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralFamily {
    /// `J(ω) = η ω e^{−ω/Λ}`
    OhmicExpCutoff,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDensity {
    pub family: SpectralFamily,
    /// Dimensionless coupling strength `η`.
    pub coupling: f64,
    /// Cutoff frequency `Λ`.
    pub cutoff: f64,
}

impl SpectralDensity {
    pub fn ohmic(coupling: f64, cutoff: f64) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::Validation(format!("coupling strength must be >= 0, got {coupling}")));
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::Validation(format!("cutoff must be > 0, got {cutoff}")));
        }
        Ok(SpectralDensity {
            family: SpectralFamily::OhmicExpCutoff,
            coupling,
            cutoff,
        })
    }

    /// `J(ω)` for `ω ≥ 0`.
    pub fn value(&self, omega: f64) -> f64 {
        match self.family {
            SpectralFamily::OhmicExpCutoff => {
                if omega <= 0.0 {
                    0.0
                } else {
                    self.coupling * omega * (-omega / self.cutoff).exp()
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Zero,
    /// Inverse temperature `β > 0`.
    Finite { beta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    pub density: SpectralDensity,
    pub temperature: Temperature,
}

impl BathSpec {
    pub fn zero_temperature(density: SpectralDensity) -> Self {
        BathSpec {
            density,
            temperature: Temperature::Zero,
        }
    }

    /// `beta = +∞` is accepted and means zero temperature.
    pub fn thermal(density: SpectralDensity, beta: f64) -> Result<Self> {
        if beta == f64::INFINITY {
            return Ok(Self::zero_temperature(density));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Validation(format!("inverse temperature must be > 0, got {beta}")));
        }
        Ok(BathSpec {
            density,
            temperature: Temperature::Finite { beta },
        })
    }

    /// `β`, `+∞` at zero temperature.
    pub fn beta(&self) -> f64 {
        match self.temperature {
            Temperature::Zero => f64::INFINITY,
            Temperature::Finite { beta } => beta,
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.density.cutoff
    }

    pub fn is_zero_temperature(&self) -> bool {
        matches!(self.temperature, Temperature::Zero)
    }

    /// Same bath with a different coupling strength.
    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.density.coupling = coupling;
        self
    }
}

/// How `α(t)` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// Rational form at zero temperature, trigamma series at finite temperature.
    #[default]
    ClosedForm,
    /// Adaptive quadrature of the spectral integral.
    Quadrature,
}

/// How the one-sided transform `α̂(ω)` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfFourierMethod {
    /// `½α̃(ω) + (i/2π) PV∫ α̃(ω′)/(ω′−ω) dω′`
    Spectral,
    /// `∫₀^∞ α(τ) e^{−iωτ−ετ} dτ` extrapolated to `ε → 0`.
    DampedQuadrature,
}

/// Upper frequency limit of the spectral quadrature, in units of `Λ`.
const OMEGA_MAX_OVER_CUTOFF: f64 = 40.0;
/// Above this `Λ|t|`, the spectral integral is split at half periods.
const OSCILLATORY_THRESHOLD: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationFunction {
    pub bath: BathSpec,
    pub evaluation: Evaluation,
}

impl CorrelationFunction {
    pub fn new(bath: BathSpec) -> Self {
        CorrelationFunction {
            bath,
            evaluation: Evaluation::ClosedForm,
        }
    }

    pub fn with_evaluation(mut self, evaluation: Evaluation) -> Self {
        self.evaluation = evaluation;
        self
    }

    fn eta(&self) -> f64 {
        self.bath.density.coupling
    }

    fn cutoff(&self) -> f64 {
        self.bath.density.cutoff
    }

    /// `α(t)` with the configured strategy.
    pub fn alpha(&self, t: f64) -> Result<C64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("α(t) needs finite t, got {t}")));
        }
        match self.evaluation {
            Evaluation::ClosedForm => Ok(self.alpha_closed_form(t)),
            Evaluation::Quadrature => self.alpha_quadrature(t),
        }
    }

    /// Closed form for the ohmic family:
    ///
    /// ```text
    /// α(t) = η/(1/Λ + it)² + (η/β²)[ψ′(1 + (1/Λ − it)/β) + ψ′(1 + (1/Λ + it)/β)]
    /// ```
    ///
    /// the second term being absent at zero temperature.
    pub fn alpha_closed_form(&self, t: f64) -> C64 {
        let eta = self.eta();
        let lam = self.cutoff();
        let vacuum = {
            let d = C64::new(1.0, lam * t);
            eta * lam * lam / (d * d)
        };
        match self.bath.temperature {
            Temperature::Zero => vacuum,
            Temperature::Finite { beta } => {
                let a = 1.0 / (lam * beta);
                let s = t / beta;
                let thermal = trigamma(C64::new(1.0 + a, -s)) + trigamma(C64::new(1.0 + a, s));
                vacuum + thermal * (eta / (beta * beta))
            }
        }
    }

    /// `J(ω) coth(βω/2)`, with the removable singularity at 0 expanded.
    fn thermal_weight(&self, omega: f64) -> f64 {
        let j = self.bath.density.value(omega);
        match self.bath.temperature {
            Temperature::Zero => j,
            Temperature::Finite { beta } => {
                let x = 0.5 * beta * omega;
                if x < 1e-3 {
                    // ω coth(βω/2) = (2/β) x coth x,  x coth x = 1 + x²/3 − x⁴/45
                    let xcothx = 1.0 + x * x / 3.0 - x.powi(4) / 45.0;
                    self.eta() * (-omega / self.cutoff()).exp() * (2.0 / beta) * xcothx
                } else {
                    j / x.tanh()
                }
            }
        }
    }

    /// `α(t)` by adaptive Gauss–Kronrod quadrature on `[0, 40Λ]`.
    pub fn alpha_quadrature(&self, t: f64) -> Result<C64> {
        let lam = self.cutoff();
        let wmax = OMEGA_MAX_OVER_CUTOFF * lam;
        let mut points = vec![0.0];
        if lam * t.abs() > OSCILLATORY_THRESHOLD {
            let step = PI / t.abs();
            let mut w = step;
            while w < wmax {
                points.push(w);
                w += step;
            }
        } else {
            points.extend([lam, 5.0 * lam, 15.0 * lam]);
        }
        if let Temperature::Finite { beta } = self.bath.temperature {
            for w in [1.0 / beta, 5.0 / beta] {
                if w < wmax {
                    points.push(w);
                }
            }
        }
        points.push(wmax);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let scale = self.eta() * lam * lam;
        let est = quad::integrate(
            |w| {
                let (s, c) = (w * t).sin_cos();
                C64::new(self.thermal_weight(w) * c, -self.bath.density.value(w) * s)
            },
            &points,
            Tolerance::relative(1e-11).with_absolute(1e-14 * scale),
        )
        .map_err(|e| Error::Numerical(format!("α({t}) quadrature: {e}")))?;
        Ok(est.value)
    }

    /// `α̃(ω)` in closed form: `2π J(|ω|) n̄(|ω|)` for `ω > 0` and
    /// `2π J(|ω|) [n̄(|ω|) + 1]` for `ω < 0`.
    pub fn alpha_tilde(&self, omega: f64) -> f64 {
        let eta = self.eta();
        let lam = self.cutoff();
        match self.bath.temperature {
            Temperature::Zero => {
                if omega < 0.0 {
                    2.0 * PI * self.bath.density.value(-omega)
                } else {
                    0.0
                }
            }
            Temperature::Finite { beta } => {
                // 2π η ω e^{−|ω|/Λ} / (e^{βω} − 1)
                let x = beta * omega;
                let bose = if x.abs() < 1e-300 { 1.0 } else { x / x.exp_m1() };
                2.0 * PI * eta * (-omega.abs() / lam).exp() * bose / beta
            }
        }
    }

    /// `α̂(ω)` by the spectral route.
    pub fn alpha_half_fourier(&self, omega: f64) -> Result<C64> {
        self.alpha_half_fourier_with(omega, HalfFourierMethod::Spectral)
    }

    pub fn alpha_half_fourier_with(&self, omega: f64, method: HalfFourierMethod) -> Result<C64> {
        match method {
            HalfFourierMethod::Spectral => self.half_fourier_spectral(omega),
            HalfFourierMethod::DampedQuadrature => self.half_fourier_damped(omega),
        }
    }

    fn half_fourier_spectral(&self, omega: f64) -> Result<C64> {
        let lam = self.cutoff();
        let w = omega.abs();
        // PV∫ α̃(ω′)/(ω′−ω) dω′ = ∫₀^∞ [α̃(ω+u) − α̃(ω−u)]/u du; kink of α̃ at 0 sits at u = |ω|
        let mut points = vec![0.0];
        if w > 0.0 {
            points.push(w);
        }
        for k in [0.1, 1.0, 3.0, 10.0, 30.0, 60.0] {
            points.push(w + k * lam);
        }
        if let Temperature::Finite { beta } = self.bath.temperature {
            for k in [1.0, 5.0] {
                let p = k / beta;
                if p < w + 60.0 * lam {
                    points.push(p);
                    if p + w < w + 60.0 * lam {
                        points.push(p + w);
                    }
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let est = quad::integrate(
            |u| {
                if u == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                C64::new((self.alpha_tilde(omega + u) - self.alpha_tilde(omega - u)) / u, 0.0)
            },
            &points,
            Tolerance::relative(1e-12).with_absolute(1e-15 * self.eta() * lam),
        )
        .map_err(|e| Error::Numerical(format!("principal value for α̂({omega}): {e}")))?;
        Ok(C64::new(0.5 * self.alpha_tilde(omega), est.value.re / (2.0 * PI)))
    }

    /// `∫₀^∞ α(τ) e^{−iωτ−ετ} dτ` for a fixed damping `ε > 0`.
    pub fn damped_half_fourier(&self, omega: f64, eps: f64) -> Result<C64> {
        if !(eps > 0.0) {
            return Err(Error::Validation(format!("damping must be > 0, got {eps}")));
        }
        let lam = self.cutoff();
        let end = 36.0 / eps;
        let mut edges = vec![0.0];
        let mut x = 1.0 / lam;
        while x < end {
            edges.push(x);
            x *= 2.0;
        }
        edges.push(end);
        let mut points = vec![0.0];
        let half_period = if omega != 0.0 { PI / omega.abs() } else { f64::INFINITY };
        for pair in edges.windows(2) {
            let n = ((pair[1] - pair[0]) / half_period).ceil().max(1.0) as usize;
            for k in 1..=n {
                points.push(pair[0] + (pair[1] - pair[0]) * k as f64 / n as f64);
            }
        }
        let mut failure = None;
        let est = quad::integrate(
            |tau| match self.alpha(tau) {
                Ok(a) => a * C64::from_polar((-eps * tau).exp(), -omega * tau),
                Err(e) => {
                    failure.get_or_insert(e);
                    C64::new(0.0, 0.0)
                }
            },
            &points,
            Tolerance::relative(1e-12).with_absolute(1e-16 * self.eta() * lam),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est.value)
    }

    fn half_fourier_damped(&self, omega: f64) -> Result<C64> {
        let eps = if omega != 0.0 {
            1e-2 * omega.abs()
        } else {
            1e-6 * self.cutoff()
        };
        let a1 = self.damped_half_fourier(omega, eps)?;
        let a2 = self.damped_half_fourier(omega, eps / 2.0)?;
        let a3 = self.damped_half_fourier(omega, eps / 4.0)?;
        // removes the O(ε) and O(ε²) terms
        Ok((a1 - a2 * 6.0 + a3 * 8.0) / 3.0)
    }

    /// Detailed-balance check `α̃(ω) = α̃(−ω) e^{−βω}` over a frequency grid.
    pub fn kms_check(&self, grid: &[f64]) -> KmsReport {
        let mut report = KmsReport {
            max_relative_violation: 0.0,
            worst_frequency: None,
            zero_temperature: self.bath.is_zero_temperature(),
        };
        for &omega in grid {
            let violation = match self.bath.temperature {
                Temperature::Finite { beta } => {
                    let lhs = self.alpha_tilde(omega);
                    let rhs = self.alpha_tilde(-omega) * (-beta * omega).exp();
                    let scale = lhs.abs().max(rhs.abs());
                    if scale == 0.0 {
                        0.0
                    } else {
                        (lhs - rhs).abs() / scale
                    }
                }
                // only the suppressed side is testable: α̃(ω > 0) must vanish
                Temperature::Zero => {
                    if omega > 0.0 {
                        let up = self.alpha_tilde(omega).abs();
                        let down = self.alpha_tilde(-omega).abs();
                        if up == 0.0 {
                            0.0
                        } else {
                            up / down.max(f64::MIN_POSITIVE)
                        }
                    } else {
                        0.0
                    }
                }
            };
            if report.worst_frequency.is_none() || violation > report.max_relative_violation {
                report.max_relative_violation = violation;
                report.worst_frequency = Some(omega);
            }
        }
        report
    }
}

/// Outcome of [`CorrelationFunction::kms_check`].
#[derive(Clone, Copy, Debug)]
pub struct KmsReport {
    pub max_relative_violation: f64,
    pub worst_frequency: Option<f64>,
    pub zero_temperature: bool,
}

impl KmsReport {
    pub const TOLERANCE: f64 = 1e-6;

    pub fn passes(&self) -> bool {
        self.max_relative_violation <= Self::TOLERANCE
    }
}
