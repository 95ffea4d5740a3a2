//! Running integrals of the bath correlation function.
//!
//! Every coefficient variant reduces to scalar integrals
//!
//! ```text
//! F_{ω,γ}(x) = ∫₀^x dτ e^{−γ(x−τ)} α(τ) e^{−iωτ}
//! ```
//!
//! with `ω` a Bohr frequency and `γ ≥ 0` an optional exponential memory
//! (`γ = 1/τ_s` for exponential switch-on). They are tabulated on a uniform
//! panel grid in one sequential pass (Gauss–Kronrod 7/15 per panel, `α`
//! evaluated once per node and shared by all kernels); afterwards the table is
//! read-only and can be queried at any `x ≥ 0`.

use rayon::prelude::*;

use crate::bath::CorrelationFunction;
use crate::error::{Error, Result};
use crate::operator::C64;
use crate::quad::{self, gk15_combine, gk15_nodes, Tolerance};

/// Panels processed per batch of `α` evaluations.
const BATCH: usize = 4096;
/// Largest accepted ratio of accumulated quadrature error to table magnitude.
pub const KERNEL_REL_TOL: f64 = 1e-7;

/// Upper bound on tabulated panel values across all kernels.
const MAX_TABLE_ENTRIES: f64 = 5e7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelKey {
    pub omega: f64,
    pub decay: f64,
}

impl KernelKey {
    pub fn plain(omega: f64) -> Self {
        KernelKey { omega, decay: 0.0 }
    }

    fn matches(&self, other: &KernelKey) -> bool {
        (self.omega - other.omega).abs() <= 1e-12 * self.omega.abs().max(1.0)
            && (self.decay - other.decay).abs() <= 1e-12 * self.decay.abs().max(1.0)
    }
}

/// Collects kernel requests, merging numerically equal frequencies.
#[derive(Clone, Debug, Default)]
pub struct KernelRequests {
    keys: Vec<KernelKey>,
}

impl KernelRequests {
    pub fn request(&mut self, key: KernelKey) -> usize {
        if let Some(i) = self.keys.iter().position(|k| k.matches(&key)) {
            return i;
        }
        self.keys.push(key);
        self.keys.len() - 1
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct KernelTable {
    correlation: CorrelationFunction,
    step: f64,
    keys: Vec<KernelKey>,
    values: Vec<Vec<C64>>,
    errors: Vec<f64>,
}

impl KernelTable {
    /// Tabulate every requested kernel on `[0, horizon]` with panel width `step`.
    pub fn build(
        correlation: CorrelationFunction,
        requests: KernelRequests,
        step: f64,
        horizon: f64,
    ) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Validation(format!("kernel step must be > 0, got {step}")));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Validation(format!("kernel horizon must be finite and >= 0, got {horizon}")));
        }
        let keys = requests.keys;
        let panels_f = (horizon / step).ceil() + 1.0;
        if panels_f * keys.len().max(1) as f64 > MAX_TABLE_ENTRIES {
            return Err(Error::Validation(format!(
                "kernel table of {panels_f:.3e} panels x {} kernels is too large; \
                 the step {step:.3e} is too fine for horizon {horizon}",
                keys.len()
            )));
        }
        let panels = panels_f as usize;
        let mut values: Vec<Vec<C64>> = keys
            .iter()
            .map(|_| {
                let mut v = Vec::with_capacity(panels + 1);
                v.push(C64::new(0.0, 0.0));
                v
            })
            .collect();
        let mut errors = vec![0.0; keys.len()];
        if keys.is_empty() {
            return Ok(KernelTable { correlation, step, keys, values, errors });
        }

        let mut start = 0;
        while start < panels {
            let stop = (start + BATCH).min(panels);
            let alphas: Vec<[C64; 15]> = (start..stop)
                .into_par_iter()
                .map(|p| {
                    let a = p as f64 * step;
                    let nodes = gk15_nodes(a, a + step);
                    let mut out = [C64::new(0.0, 0.0); 15];
                    for (o, &x) in out.iter_mut().zip(nodes.iter()) {
                        *o = correlation.alpha(x)?;
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            values
                .par_iter_mut()
                .zip(errors.par_iter_mut())
                .zip(keys.par_iter())
                .for_each(|((vals, err), key)| {
                    let carry = (-key.decay * step).exp();
                    for (offset, alpha) in alphas.iter().enumerate() {
                        let a = (start + offset) as f64 * step;
                        let b = a + step;
                        let nodes = gk15_nodes(a, b);
                        let mut f = [C64::new(0.0, 0.0); 15];
                        for i in 0..15 {
                            let x = nodes[i];
                            f[i] = alpha[i] * C64::from_polar((-key.decay * (b - x)).exp(), -key.omega * x);
                        }
                        let (k, g) = gk15_combine(&f, 0.5 * step);
                        *err = *err * carry + (k - g).norm();
                        let last = *vals.last().expect("seeded with zero");
                        vals.push(last * carry + k);
                    }
                });
            start = stop;
        }
        let table = KernelTable { correlation, step, keys, values, errors };
        for i in 0..table.keys.len() {
            let scale = table.magnitude(i);
            if scale > 0.0 && table.errors[i] > KERNEL_REL_TOL * scale {
                return Err(Error::Numerical(format!(
                    "kernel ω = {} did not converge: error estimate {:.3e} exceeds {:.1e} of |F| = {:.3e}; reduce the step",
                    table.keys[i].omega, table.errors[i], KERNEL_REL_TOL, scale
                )));
            }
        }
        Ok(table)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.values
            .first()
            .map(|v| (v.len() - 1) as f64 * self.step)
            .unwrap_or(0.0)
    }

    pub fn keys(&self) -> &[KernelKey] {
        &self.keys
    }

    pub fn index_of(&self, key: KernelKey) -> Option<usize> {
        self.keys.iter().position(|k| k.matches(&key))
    }

    /// Accumulated Gauss–Kronrod error estimate of kernel `i` at the horizon.
    pub fn error_estimate(&self, i: usize) -> f64 {
        self.errors[i]
    }

    /// `max_x |F_i(x)|` over the tabulated nodes.
    pub fn magnitude(&self, i: usize) -> f64 {
        self.values[i].iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `F_i(x)` for any `x ≥ 0`; off-grid or beyond-horizon points integrate
    /// the remainder from the nearest tabulated node below.
    pub fn value(&self, i: usize, x: f64) -> Result<C64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("kernel evaluated at x = {x}")));
        }
        let vals = &self.values[i];
        let last = vals.len() - 1;
        let p = x / self.step;
        let nearest = p.round();
        if (p - nearest).abs() <= 1e-9 * p.max(1.0) && (nearest as usize) <= last {
            return Ok(vals[nearest as usize]);
        }
        let base_idx = (p.floor() as usize).min(last);
        let a = base_idx as f64 * self.step;
        let key = self.keys[i];
        let integrand = |tau: f64| -> Result<C64> {
            Ok(self.correlation.alpha(tau)? * C64::from_polar((-key.decay * (x - tau)).exp(), -key.omega * tau))
        };
        let remainder = if x - a <= self.step * (1.0 + 1e-12) {
            let nodes = gk15_nodes(a, x);
            let mut f = [C64::new(0.0, 0.0); 15];
            for (v, &n) in f.iter_mut().zip(nodes.iter()) {
                *v = integrand(n)?;
            }
            gk15_combine(&f, 0.5 * (x - a)).0
        } else {
            let n = ((x - a) / self.step).ceil() as usize;
            let mut failure = None;
            let est = quad::integrate(
                |tau| {
                    integrand(tau).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        C64::new(0.0, 0.0)
                    })
                },
                &quad::linspace(a, x, n),
                Tolerance::relative(1e-12).with_absolute(1e-16 * self.magnitude(i).max(1e-300)),
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            est.value
        };
        Ok(vals[base_idx] * (-key.decay * (x - a)).exp() + remainder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{BathSpec, SpectralDensity};

    fn zero_t(lam: f64) -> CorrelationFunction {
        CorrelationFunction::new(BathSpec::zero_temperature(SpectralDensity::ohmic(1.0, lam).unwrap()))
    }

    /// ∫₀^x Λ²/(1+iΛs)² ds = Λ² x / (1 + iΛx)
    fn plain_oracle(lam: f64, x: f64) -> C64 {
        C64::new(lam * lam * x, 0.0) / C64::new(1.0, lam * x)
    }

    #[test]
    fn plain_kernel_matches_antiderivative() {
        let lam = 50.0;
        let mut req = KernelRequests::default();
        let k = req.request(KernelKey::plain(0.0));
        let table = KernelTable::build(zero_t(lam), req, 1.0 / (40.0 * lam), 2.0).unwrap();
        for x in [0.0, 0.001, 0.02, 0.0237, 0.5, 1.999, 2.0, 2.7] {
            let got = table.value(k, x).unwrap();
            let want = plain_oracle(lam, x);
            assert!((got - want).norm() <= 1e-11 * lam, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn requests_are_merged() {
        let mut req = KernelRequests::default();
        let a = req.request(KernelKey::plain(1.0));
        let b = req.request(KernelKey::plain(1.0 + 1e-15));
        let c = req.request(KernelKey { omega: 1.0, decay: 2.0 });
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(req.len(), 2);
    }

    #[test]
    fn decayed_kernel_matches_direct_quadrature() {
        let lam = 20.0;
        let key = KernelKey { omega: 1.3, decay: 4.0 };
        let mut req = KernelRequests::default();
        let k = req.request(key);
        let c = zero_t(lam);
        let table = KernelTable::build(c, req, 1.0 / (40.0 * lam), 1.0).unwrap();
        for x in [0.05, 0.31, 1.0] {
            let direct = quad::integrate(
                |tau| c.alpha(tau).unwrap() * C64::from_polar((-key.decay * (x - tau)).exp(), -key.omega * tau),
                &quad::linspace(0.0, x, 64),
                Tolerance::relative(1e-13),
            )
            .unwrap()
            .value;
            let got = table.value(k, x).unwrap();
            assert!((got - direct).norm() <= 1e-10 * lam, "x={x}");
        }
    }
}
