//! Shared fixtures and independent numerical oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use tclprep::bath::{BathSpec, CorrelationFunction, SpectralDensity};
use tclprep::operator::{pauli, Operator};
use tclprep::scenario::System;

pub const ETA: f64 = 0.05;

pub fn zero_t_bath(lam: f64) -> BathSpec {
    BathSpec::zero_temperature(SpectralDensity::ohmic(ETA, lam).unwrap())
}

pub fn zero_t(lam: f64) -> CorrelationFunction {
    CorrelationFunction::new(zero_t_bath(lam))
}

pub fn thermal(lam: f64, beta: f64) -> CorrelationFunction {
    CorrelationFunction::new(BathSpec::thermal(SpectralDensity::ohmic(ETA, lam).unwrap(), beta).unwrap())
}

/// `H₀ = (Ω/2)σz`, `L = σx`, zero-temperature ohmic bath.
pub fn tls(lam: f64) -> System {
    System::new(&pauli::sigma_z() * 0.5, pauli::sigma_x(), zero_t_bath(lam)).unwrap()
}

pub fn excited() -> Operator {
    Operator::projector(&pauli::excited())
}

/// `ηΛ²/(1+iΛt)²`
pub fn alpha_zero_t(eta: f64, lam: f64, t: f64) -> C64 {
    let d = C64::new(1.0, lam * t);
    C64::new(eta * lam * lam, 0.0) / (d * d)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, n: usize) -> C64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + k as f64 * h) * w;
    }
    s * (h / 3.0)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(x)` for small `x > 0` by its power series.
pub fn e1(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= x / k as f64;
        let contrib = if k % 2 == 1 { term / k as f64 } else { -term / k as f64 };
        sum += contrib;
        if term < 1e-18 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// `Ei(x)` for small `x > 0` by its power series.
pub fn ei(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= x / k as f64;
        sum += term / k as f64;
        if term < 1e-18 {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// Zero-temperature ohmic one-sided transform `∫₀^∞ α(τ)e^{−iωτ}dτ`.
pub fn half_fourier_zero_t(eta: f64, lam: f64, w: f64) -> C64 {
    if w == 0.0 {
        return C64::new(0.0, -eta * lam);
    }
    let x = w.abs() / lam;
    if w > 0.0 {
        C64::new(0.0, -eta * (lam - w * x.exp() * e1(x)))
    } else {
        let a = w.abs();
        C64::new(
            std::f64::consts::PI * eta * a * (-x).exp(),
            -eta * (lam - a * (-x).exp() * ei(x)),
        )
    }
}

/// Dense `e^{−iHt}` by scaling and squaring of a Taylor series.
pub fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let norm = m.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0) as u32;
    let scaled = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let n = m.nrows();
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn unitary(h: &Operator, t: f64) -> DMatrix<C64> {
    expm(&(h.matrix() * C64::new(0.0, -t)))
}

/// `U X U†` with the Taylor-series unitary.
pub fn conjugate_oracle(h: &Operator, t: f64, x: &Operator) -> Operator {
    let u = unitary(h, t);
    Operator::from_matrix(&u * x.matrix() * u.adjoint()).unwrap()
}

/// Hermitian operator from `2n²` numbers in `[-1, 1]`.
pub fn hermitian_from(entries: &[f64], n: usize) -> Operator {
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1]));
    Operator::from_matrix((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

/// Density matrix `A A† / Tr(A A†)` from `2n²` numbers.
pub fn density_from(entries: &[f64], n: usize) -> Operator {
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1]));
    let p = &m * m.adjoint();
    let tr = p.trace();
    Operator::from_matrix(p / tr).unwrap()
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
