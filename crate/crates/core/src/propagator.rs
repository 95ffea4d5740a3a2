//! Free-system propagators `X -> e^{-iHΔt} X e^{+iHΔt}` and piecewise-constant
//! Hamiltonian schedules.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{Operator, C64};

/// Conjugation by `e^{-iHΔt}`, backed by one cached eigendecomposition of `H`.
#[derive(Clone, Debug)]
pub struct UnitaryPropagator {
    hamiltonian: Operator,
    energies: Vec<f64>,
    basis: DMatrix<C64>,
}

impl UnitaryPropagator {
    pub fn new(hamiltonian: &Operator) -> Result<Self> {
        hamiltonian.ensure_hermitian("Hamiltonian")?;
        let eig = hamiltonian.eigh();
        Ok(UnitaryPropagator {
            hamiltonian: hamiltonian.clone(),
            energies: eig.values,
            basis: eig.vectors,
        })
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvalues of `H`, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are the eigenvectors of `H`.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    /// Largest Bohr frequency `max |E_a - E_b|`.
    pub fn spectral_width(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// `U^dagger X U`
    pub fn to_eigenbasis(&self, x: &Operator) -> DMatrix<C64> {
        self.basis.adjoint() * x.matrix() * &self.basis
    }

    /// `U X U^dagger`
    pub fn from_eigenbasis(&self, x: DMatrix<C64>) -> Operator {
        Operator::wrap(&self.basis * x * self.basis.adjoint())
    }

    /// `e^{-iHΔt} X e^{+iHΔt}`; negative `dt` propagates backwards.
    pub fn propagate(&self, dt: f64, x: &Operator) -> Result<Operator> {
        x.ensure_same_dim(&self.hamiltonian, "propagated operator")?;
        if dt == 0.0 {
            return Ok(x.clone());
        }
        let mut xe = self.to_eigenbasis(x);
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let w = self.energies[a] - self.energies[b];
                xe[(a, b)] *= C64::from_polar(1.0, -w * dt);
            }
        }
        Ok(self.from_eigenbasis(xe))
    }

    /// `e^{-iHΔt}` as a matrix.
    pub fn unitary(&self, dt: f64) -> DMatrix<C64> {
        let n = self.dim();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::from_polar(1.0, -self.energies[i] * dt)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        &self.basis * d * self.basis.adjoint()
    }
}

/// `e^{-iHΔt} X e^{+iHΔt}` for a one-off Hamiltonian.
pub fn conjugate_propagate(h: &Operator, dt: f64, x: &Operator) -> Result<Operator> {
    UnitaryPropagator::new(h)?.propagate(dt, x)
}

/// One constant-Hamiltonian piece of the future branch.
#[derive(Clone, Debug)]
pub struct Segment {
    pub start: f64,
    /// `f64::INFINITY` for an open-ended final segment.
    pub end: f64,
    pub propagator: Arc<UnitaryPropagator>,
}

impl Segment {
    pub fn hamiltonian(&self) -> &Operator {
        self.propagator.hamiltonian()
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// `H_S(t)`: `H_-` for all `t < 0`, then contiguous constant segments from 0.
#[derive(Clone, Debug)]
pub struct HamiltonianSchedule {
    past: Arc<UnitaryPropagator>,
    segments: Vec<Segment>,
}

impl HamiltonianSchedule {
    /// `future` lists `(start, end, H)`; the first start must be 0 and the
    /// pieces must be contiguous.
    pub fn new(past: &Operator, future: &[(f64, f64, Operator)]) -> Result<Self> {
        let past = Arc::new(UnitaryPropagator::new(past)?);
        if future.is_empty() {
            return Err(Error::Validation("schedule needs at least one future segment".into()));
        }
        let mut segments = Vec::with_capacity(future.len());
        let mut cursor = 0.0;
        for (k, (start, end, h)) in future.iter().enumerate() {
            if *start != cursor {
                return Err(Error::Validation(format!(
                    "segment {k} starts at {start}, expected {cursor}"
                )));
            }
            if !(end > start) {
                return Err(Error::Validation(format!(
                    "segment {k} has empty range [{start}, {end})"
                )));
            }
            h.ensure_same_dim(past.hamiltonian(), "schedule Hamiltonians")?;
            let propagator = if h == past.hamiltonian() {
                past.clone()
            } else {
                Arc::new(UnitaryPropagator::new(h)?)
            };
            segments.push(Segment {
                start: *start,
                end: *end,
                propagator,
            });
            cursor = *end;
        }
        Ok(HamiltonianSchedule { past, segments })
    }

    /// `H_+ = H_-` for all times.
    pub fn constant(h: &Operator) -> Result<Self> {
        Self::new(h, &[(0.0, f64::INFINITY, h.clone())])
    }

    /// Past Hamiltonian `H_-` and a single future Hamiltonian `H_+`.
    pub fn quench(past: &Operator, future: &Operator) -> Result<Self> {
        Self::new(past, &[(0.0, f64::INFINITY, future.clone())])
    }

    pub fn dim(&self) -> usize {
        self.past.dim()
    }

    pub fn past(&self) -> &Arc<UnitaryPropagator> {
        &self.past
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// End of the covered future domain.
    pub fn horizon(&self) -> f64 {
        self.segments.last().map(|s| s.end).unwrap_or(0.0)
    }

    /// Index of the segment holding `t >= 0`; a time on a boundary belongs to
    /// the later segment unless `left` is set.
    pub fn segment_index(&self, t: f64, left: bool) -> Result<usize> {
        if t < 0.0 || t > self.horizon() {
            return Err(Error::Domain(format!(
                "time {t} outside the future branch [0, {}]",
                self.horizon()
            )));
        }
        let idx = self
            .segments
            .iter()
            .position(|s| s.contains(t))
            .unwrap_or(self.segments.len() - 1);
        if left && idx > 0 && t == self.segments[idx].start {
            return Ok(idx - 1);
        }
        Ok(idx)
    }

    /// `H_S(t)`
    pub fn hamiltonian_at(&self, t: f64, left: bool) -> Result<&Operator> {
        if t < 0.0 {
            return Ok(self.past.hamiltonian());
        }
        Ok(self.segments[self.segment_index(t, left)?].hamiltonian())
    }

    /// `G_S(t, tau) X` for `tau <= t`, composing every piece of `[tau, t]`.
    pub fn propagate(&self, t: f64, tau: f64, x: &Operator) -> Result<Operator> {
        if t < tau {
            return Err(Error::Domain(format!(
                "propagation requires tau <= t, got tau = {tau}, t = {t}"
            )));
        }
        if t > self.horizon() {
            return Err(Error::Domain(format!(
                "time {t} beyond schedule horizon {}",
                self.horizon()
            )));
        }
        let mut out = x.clone();
        let mut now = tau;
        if now < 0.0 {
            let stop = t.min(0.0);
            out = self.past.propagate(stop - now, &out)?;
            now = stop;
        }
        for seg in &self.segments {
            if now >= t {
                break;
            }
            if seg.end <= now {
                continue;
            }
            let stop = seg.end.min(t);
            out = seg.propagator.propagate(stop - now, &out)?;
            now = stop;
        }
        Ok(out)
    }

    /// `M(t) X = G_+(t, 0) G_-(0, t) X`: undo `t` of past evolution, then
    /// apply `t` of future evolution.
    pub fn mixing(&self, t: f64, x: &Operator) -> Result<Operator> {
        if t < 0.0 {
            return Err(Error::Domain(format!("mixing operator needs t >= 0, got {t}")));
        }
        let back = self.past.propagate(-t, x)?;
        self.propagate(t, 0.0, &back)
    }
}

/// `G_S(t, tau) X`
pub fn schedule_propagate(
    schedule: &HamiltonianSchedule,
    t: f64,
    tau: f64,
    x: &Operator,
) -> Result<Operator> {
    schedule.propagate(t, tau, x)
}

/// `M(t) X`
pub fn mixing_operator(schedule: &HamiltonianSchedule, t: f64, x: &Operator) -> Result<Operator> {
    schedule.mixing(t, x)
}
