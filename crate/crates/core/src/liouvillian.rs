//! The generator `𝓛(t) = 𝓛₀(t) + 𝓛₂(t)` of the second-order master equation
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Σ_n [L_n, ρ (A◇L)_n(t)† − (A◇L)_n(t) ρ]
//! ```
//!
//! as an action on operators and as a dense matrix on column-stacked
//! density matrices (`vec(AXB) = (Bᵀ ⊗ A) vec(X)`).

use nalgebra::DMatrix;

use crate::coefficients::CoefficientTrack;
use crate::error::{Error, Result};
use crate::operator::{Operator, C64, I};
use crate::propagator::HamiltonianSchedule;

/// `−i[H, ρ]`
pub fn apply_l0(h: &Operator, rho: &Operator) -> Result<Operator> {
    h.ensure_same_dim(rho, "unitary generator")?;
    let hr = h * rho;
    let rh = rho * h;
    Ok((hr - rh).scale(-I))
}

/// `Σ_n [L_n, ρ A_n† − A_n ρ]` for `(L_n, A_n)` pairs.
pub fn apply_l2(channels: &[(Operator, Operator)], rho: &Operator) -> Result<Operator> {
    let mut out = Operator::zeros(rho.dim());
    for (l, a) in channels {
        l.ensure_same_dim(rho, "dissipator")?;
        a.ensure_same_dim(rho, "dissipator")?;
        let x = rho * &a.dagger() - a * rho;
        out += &(l * &x - &x * l);
    }
    Ok(out)
}

/// Dense `dim² × dim²` matrix of `ρ ↦ −i[H, ρ] + Σ [L, ρA† − Aρ]`.
pub fn generator_matrix(h: &Operator, channels: &[(Operator, Operator)]) -> DMatrix<C64> {
    let n = h.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let hm = h.matrix();
    let mut m = id.kronecker(hm) * (-I) + hm.transpose().kronecker(&id) * I;
    for (l, a) in channels {
        let (l, a) = (l.matrix(), a.matrix());
        let a_dag = a.adjoint();
        m += a.conjugate().kronecker(l);
        m -= id.kronecker(&(l * a));
        m -= (a_dag * l).transpose().kronecker(&id);
        m += l.transpose().kronecker(a);
    }
    m
}

/// Column-stacking `vec(X)`.
pub fn vectorize(x: &Operator) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(x.matrix().as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &nalgebra::DVector<C64>) -> Result<Operator> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::Dimension(format!("vector of length {} is not a square operator", v.len())));
    }
    Operator::from_matrix(DMatrix::from_column_slice(n, n, v.as_slice()))
}

/// `−Tr(P_e 𝓛{P_e})` with `P_e = |0⟩⟨0|`, the excited level of a two-level system.
pub fn decay_rate_from(h: &Operator, channels: &[(Operator, Operator)]) -> Result<f64> {
    if h.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "decay rate is defined for two-level systems only, got dimension {}",
            h.dim()
        )));
    }
    let pe = Operator::diagonal(&[1.0, 0.0]);
    let out = apply_l0(h, &pe)? + apply_l2(channels, &pe)?;
    Ok(-out.get(0, 0).re)
}

/// Eigenvalues of a dense complex matrix (complex Schur form).
pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// `‖vec(1)† M‖_∞`: vanishes for trace-preserving generators.
pub fn trace_residual(m: &DMatrix<C64>) -> f64 {
    let n = (m.nrows() as f64).sqrt().round() as usize;
    let id = vectorize(&Operator::identity(n));
    (id.adjoint() * m).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// One dissipative channel: coupling `L_n` and its coefficient `(A◇L)_n(t)`.
#[derive(Clone, Debug)]
pub struct Channel {
    pub coupling: Operator,
    pub coefficient: CoefficientTrack,
}

/// Time-dependent generator assembled from a schedule and tabulated coefficients.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    schedule: HamiltonianSchedule,
    channels: Vec<Channel>,
}

impl Liouvillian {
    pub fn new(schedule: HamiltonianSchedule, channels: Vec<Channel>) -> Result<Self> {
        for c in &channels {
            if c.coupling.dim() != schedule.dim() || c.coefficient.dim() != schedule.dim() {
                return Err(Error::Dimension(format!(
                    "channel of dimension {} on a {}-dimensional system",
                    c.coupling.dim(),
                    schedule.dim()
                )));
            }
        }
        Ok(Liouvillian { schedule, channels })
    }

    pub fn dim(&self) -> usize {
        self.schedule.dim()
    }

    pub fn schedule(&self) -> &HamiltonianSchedule {
        &self.schedule
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Frozen generator data at `t`: the Hamiltonian (from the segment ending
    /// at `t` when `left`) and every `(L_n, (A◇L)_n(t))`.
    pub fn snapshot(&self, t: f64, left: bool) -> Result<Snapshot> {
        let h = self.schedule.hamiltonian_at(t, left)?.clone();
        let channels = self
            .channels
            .iter()
            .map(|c| Ok((c.coupling.clone(), c.coefficient.at(t)?)))
            .collect::<Result<_>>()?;
        Ok(Snapshot { h, channels })
    }

    /// `𝓛(t){ρ}`
    pub fn apply(&self, t: f64, rho: &Operator) -> Result<Operator> {
        self.snapshot(t, false)?.apply(rho)
    }

    pub fn as_matrix(&self, t: f64) -> Result<DMatrix<C64>> {
        Ok(self.snapshot(t, false)?.matrix())
    }

    /// `Γ(t) = −Tr(P_e 𝓛(t){P_e})`
    pub fn decay_rate(&self, t: f64) -> Result<f64> {
        self.snapshot(t, false)?.decay_rate()
    }
}

/// The generator at one instant.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub h: Operator,
    pub channels: Vec<(Operator, Operator)>,
}

impl Snapshot {
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        Ok(apply_l0(&self.h, rho)? + apply_l2(&self.channels, rho)?)
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        generator_matrix(&self.h, &self.channels)
    }

    pub fn decay_rate(&self) -> Result<f64> {
        decay_rate_from(&self.h, &self.channels)
    }
}
