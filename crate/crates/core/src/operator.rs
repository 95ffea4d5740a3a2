//! Dense complex operators on a finite Hilbert space.
//!
//! Everything in the crate (Hamiltonians, couplings, density matrices,
//! master-equation coefficients) is an [`Operator`]. Units follow ħ = 1.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for Hermiticity of Hamiltonians and couplings.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on |trace - 1| for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A `dim x dim` complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{}", self.m)
    }
}

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "operators must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Operator { m })
    }

    /// Build from row-major complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged operator rows".into()));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Build from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Operator {
            m: DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(entries[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    /// `|a><b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::Dimension(format!(
                "outer product of {}- and {}-dimensional vectors",
                a.dim(),
                b.dim()
            )));
        }
        Ok(Operator {
            m: a.v.clone() * b.v.adjoint(),
        })
    }

    /// `|psi><psi|`
    pub fn projector(psi: &StateVector) -> Self {
        Operator {
            m: psi.v.clone() * psi.v.adjoint(),
        }
    }

    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square());
        Operator { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Operator {
            m: self.m.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Operator { m: &self.m * z }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// max |A - A^dagger|
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Reject operators that are not Hermitian to [`HERMITIAN_TOL`].
    pub fn ensure_hermitian(&self, what: &str) -> Result<()> {
        let r = self.hermiticity_residual();
        if r > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "{what} is not Hermitian (residual {r:.3e})"
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_same_dim(&self, other: &Operator, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "{what}: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Check the density-matrix invariants: Hermitian, unit trace, positive.
    pub fn ensure_density_matrix(&self, what: &str) -> Result<()> {
        self.ensure_hermitian(what)?;
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::Validation(format!(
                "{what} has trace {tr}, expected 1"
            )));
        }
        let min = self.eigh().values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::Validation(format!(
                "{what} has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Eigendecomposition of the Hermitian part, eigenvalues ascending.
    pub fn eigh(&self) -> Eigh {
        let herm = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Eigh { values, vectors }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().values.first().copied().unwrap_or(0.0)
    }

    /// Apply a real function to a Hermitian operator through its spectrum.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Operator {
        let eig = self.eigh();
        let d = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(f(eig.values[i]), 0.0)
            } else {
                ZERO
            }
        });
        Operator::wrap(&eig.vectors * d * eig.vectors.adjoint())
    }

    /// Kronecker product `self ⊗ other`; row index is `i * other.dim() + k`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Trace out the second tensor factor of dimension `traced_dim`.
    pub fn partial_trace_second(&self, traced_dim: usize) -> Result<Operator> {
        if traced_dim == 0 || !self.dim().is_multiple_of(traced_dim) {
            return Err(Error::Dimension(format!(
                "cannot trace a {}-dimensional factor out of dimension {}",
                traced_dim,
                self.dim()
            )));
        }
        let keep = self.dim() / traced_dim;
        let m = DMatrix::from_fn(keep, keep, |i, j| {
            (0..traced_dim)
                .map(|k| self.m[(i * traced_dim + k, j * traced_dim + k)])
                .sum()
        });
        Ok(Operator { m })
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    pub fn expectation(&self, observable: &Operator) -> C64 {
        (observable.matrix() * &self.m).trace()
    }

    /// max-norm distance
    pub fn max_distance(&self, other: &Operator) -> f64 {
        (&self.m - &other.m).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Trace distance ½‖A − B‖₁ for Hermitian arguments.
    pub fn trace_distance(&self, other: &Operator) -> f64 {
        let diff = Operator::wrap(&self.m - &other.m);
        0.5 * diff.eigh().values.iter().map(|x| x.abs()).sum::<f64>()
    }
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors in columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// `[A, B] = AB - BA`
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.ensure_same_dim(b, "commutator")?;
    Ok(Operator::wrap(&a.m * &b.m - &b.m * &a.m))
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

pub fn trace(a: &Operator) -> C64 {
    a.trace()
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.m + &rhs.m)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator::wrap(self.m + rhs.m)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.m - &rhs.m)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator::wrap(self.m - rhs.m)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::wrap(&self.m * &rhs.m)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator::wrap(self.m * rhs.m)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator::wrap(&self.m * rhs)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator::wrap(self.m * rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator::wrap(&self.m * C64::new(rhs, 0.0))
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator::wrap(self.m * C64::new(rhs, 0.0))
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::wrap(-self.m)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::wrap(-&self.m)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.m += &rhs.m;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        self.m -= &rhs.m;
    }
}

/// A normalized-or-not ket.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    v: DVector<C64>,
}

impl StateVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        Ok(StateVector {
            v: DVector::from_vec(entries),
        })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = ONE;
        StateVector { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.v
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.v.dotc(&other.v)
    }

    pub fn ensure_normalized(&self, what: &str) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "{what} is not normalized (norm {n})"
            )));
        }
        Ok(())
    }
}

/// Two-level operators in the basis `{|e>, |g>}` (index 0 is excited).
pub mod pauli {
    use super::*;

    pub fn sigma_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn sigma_y() -> Operator {
        Operator::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap()
    }

    pub fn sigma_z() -> Operator {
        Operator::diagonal(&[1.0, -1.0])
    }

    /// `|e>` with `sigma_z |e> = +|e>`
    pub fn excited() -> StateVector {
        StateVector::basis(2, 0)
    }

    pub fn ground() -> StateVector {
        StateVector::basis(2, 1)
    }

    /// `(|e> + |g>)/sqrt 2`
    pub fn plus() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[s, s]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;

    #[test]
    fn commutator_of_equal_operators_vanishes() {
        let z = sigma_z();
        assert!(commutator(&z, &z).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn pauli_commutator_by_hand() {
        // [σx, σy] = 2iσz
        let c = commutator(&sigma_x(), &sigma_y()).unwrap();
        let expected = sigma_z().scale(C64::new(0.0, 2.0));
        assert!(c.max_distance(&expected) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(
            commutator(&sigma_x(), &Operator::identity(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn density_matrix_trace() {
        let rho = Operator::projector(&plus());
        rho.ensure_density_matrix("rho").unwrap();
        assert!((trace(&rho) - ONE).norm() < 1e-15);
        let bad = Operator::diagonal(&[1.2, -0.2]);
        assert!(bad.ensure_density_matrix("bad").is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = Operator::diagonal(&[0.3, 0.7]);
        let b = Operator::projector(&plus());
        let ab = a.kron(&b);
        assert!(ab.partial_trace_second(2).unwrap().max_distance(&a) < 1e-15);
    }

    #[test]
    fn eigh_is_sorted_and_reconstructs() {
        let h = &sigma_x() * 0.3 + &sigma_z() * 1.1;
        let e = h.eigh();
        assert!(e.values[0] <= e.values[1]);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            2,
            e.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let back = Operator::wrap(&e.vectors * d * e.vectors.adjoint());
        assert!(back.max_distance(&h) < 1e-14);
    }
}
