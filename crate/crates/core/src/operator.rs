//! Dense operators on finite Hilbert spaces and validated density matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex square matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be at least 1");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds an operator from `dim²` row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("operator dimension must be >= 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(d, 0.0);
        }
        m
    }

    /// `|i⟩⟨j|` on a `dim`-dimensional space.
    pub fn projector(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self.data[j * d + i].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            let row = &mut out.data[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * d..(k + 1) * d];
                for (o, &b) in row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `tr(self · rho)`.
    pub fn expect(&self, rho: &Self) -> Result<C64> {
        self.check_dim(rho)?;
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[i * d + k] * rho.data[k * d + i];
            }
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(linalg::hermitian_eigenvalues(self.dim, &self.data))
    }

    /// Schatten 1-norm of a Hermitian operator.
    pub fn trace_norm_hermitian(&self) -> f64 {
        linalg::hermitian_eigenvalues(self.dim, &self.data).iter().map(|e| e.abs()).sum()
    }

    /// Reduces `A ⊗ B` ordered operators to the first factor.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != self.dim {
            return Err(Error::DimensionMismatch { expected: dim_a * dim_b, found: self.dim });
        }
        Ok(Self::from_fn(dim_a, |i, j| {
            (0..dim_b).map(|k| self.get(i * dim_b + k, j * dim_b + k)).sum()
        }))
    }

    /// Reduces `A ⊗ B` ordered operators to the second factor.
    pub fn partial_trace_first(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != self.dim {
            return Err(Error::DimensionMismatch { expected: dim_a * dim_b, found: self.dim });
        }
        Ok(Self::from_fn(dim_b, |k, l| {
            (0..dim_a).map(|i| self.get(i * dim_b + k, i * dim_b + l)).sum()
        }))
    }

    /// Upper-left `n × n` block.
    pub fn leading_block(&self, n: usize) -> Self {
        assert!(n <= self.dim);
        Self::from_fn(n, |i, j| self.get(i, j))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs).expect("dimension mismatch in operator product")
    }
}

/// Tensor product with `kron(A,B)[(i·dB+k),(j·dB+l)] = A[i,j]·B[k,l]`.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut out = OperatorMatrix::zeros(d);
    for i in 0..da {
        for j in 0..da {
            let aij = a.data[i * da + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * d + j * db + l] = aij * b.data[k * db + l];
                }
            }
        }
    }
    out
}

/// Highest retained Fock state of a truncated bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self { n_max: 15 }
    }
}

/// Mode annihilation operator with `a[n−1, n] = √n`.
pub fn annihilation(trunc: FockTruncation) -> OperatorMatrix {
    let d = trunc.dim();
    let mut a = OperatorMatrix::zeros(d);
    for n in 1..d {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    a
}

/// Tolerances a density matrix is validated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-9, positivity: 1e-8 }
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: OperatorMatrix,
}

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        Self::with_tolerances(op, StateTolerances::default())
    }

    pub fn with_tolerances(op: OperatorMatrix, tol: StateTolerances) -> Result<Self> {
        Self::validate(&op, tol, 0.0)?;
        Ok(Self { op })
    }

    pub(crate) fn validate(op: &OperatorMatrix, tol: StateTolerances, t: f64) -> Result<()> {
        if op.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let deviation = op.hermiticity_deviation();
        if deviation > tol.hermiticity {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = op.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::TraceViolation { trace: tr.re });
        }
        let min = linalg::hermitian_eigenvalues(op.dim, &op.data)[0];
        if min < -tol.positivity {
            return Err(Error::PositivityViolation { min_eigenvalue: min, t });
        }
        Ok(())
    }

    pub(crate) fn new_unchecked(op: OperatorMatrix) -> Self {
        Self { op }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("state vector is not normalized".into()));
        }
        let d = psi.len();
        Self::new(OperatorMatrix::from_fn(d, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self { op: OperatorMatrix::projector(dim, k, k) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: OperatorMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Two-level state with Bloch vector `(x, y, z)` in the `{|0⟩, |1⟩}` basis,
    /// where `σ_z = |1⟩⟨1| − |0⟩⟨0|`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        if x * x + y * y + z * z > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter("Bloch vector longer than 1".into()));
        }
        // ρ = (I + xσx + yσy + zσz)/2 with σ+ = |1⟩⟨0|
        let rho01 = C64::new(x, y) * 0.5;
        let op = OperatorMatrix::from_row_major(
            2,
            vec![C64::new((1.0 - z) / 2.0, 0.0), rho01, rho01.conj(), C64::new((1.0 + z) / 2.0, 0.0)],
        )?;
        Self::new(op)
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn into_op(self) -> OperatorMatrix {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim
    }

    /// Real part of `tr(A ρ)`.
    pub fn expect(&self, a: &OperatorMatrix) -> Result<f64> {
        Ok(a.expect(&self.op)?.re)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { op: kron(&self.op, &other.op) }
    }
}

/// `½‖ρ − σ‖₁` for Hermitian operators of equal dimension.
pub fn trace_distance(rho: &OperatorMatrix, sigma: &OperatorMatrix) -> Result<f64> {
    if rho.dim != sigma.dim {
        return Err(Error::DimensionMismatch { expected: rho.dim, found: sigma.dim });
    }
    let diff = rho - sigma;
    Ok(0.5 * diff.trace_norm_hermitian())
}

/// Two-level operators in the `{|0⟩, |1⟩}` basis (index 0 is the lower state).
pub mod two_level {
    use super::*;

    /// `σ⁺ = |1⟩⟨0|`.
    pub fn sigma_plus() -> OperatorMatrix {
        OperatorMatrix::projector(2, 1, 0)
    }

    /// `σ⁻ = |0⟩⟨1|`.
    pub fn sigma_minus() -> OperatorMatrix {
        OperatorMatrix::projector(2, 0, 1)
    }

    pub fn sigma_x() -> OperatorMatrix {
        &sigma_plus() + &sigma_minus()
    }

    /// `σ_y = −i(σ⁺ − σ⁻)`.
    pub fn sigma_y() -> OperatorMatrix {
        (&sigma_plus() - &sigma_minus()).scale(C64::new(0.0, -1.0))
    }

    /// `σ_z = σ⁺σ⁻ − σ⁻σ⁺ = |1⟩⟨1| − |0⟩⟨0|`.
    pub fn sigma_z() -> OperatorMatrix {
        OperatorMatrix::from_real_diagonal(&[-1.0, 1.0])
    }

    /// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a 2×2 operator.
    pub fn bloch_vector(rho: &OperatorMatrix) -> [f64; 3] {
        debug_assert_eq!(rho.dim(), 2);
        let r01 = rho.get(0, 1);
        [2.0 * r01.re, 2.0 * r01.im, (rho.get(1, 1) - rho.get(0, 0)).re]
    }
}

#[cfg(test)]
mod tests {
    use super::two_level::*;
    use super::*;

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&OperatorMatrix::identity(2), &OperatorMatrix::identity(3)), OperatorMatrix::identity(6));
        let z = OperatorMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(
            kron(&z, &OperatorMatrix::identity(2)),
            OperatorMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0])
        );
    }

    #[test]
    fn kron_number_operator_spectrum() {
        let a = kron(&annihilation(FockTruncation::new(2).unwrap()), &OperatorMatrix::identity(2));
        let n = &a.dagger() * &a;
        let ev = n.hermitian_eigenvalues(1e-14).unwrap();
        for (e, want) in ev.iter().zip([0.0, 0.0, 1.0, 1.0, 2.0, 2.0]) {
            assert!((e - want).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn annihilation_entries() {
        let a1 = annihilation(FockTruncation::new(1).unwrap());
        assert_eq!(a1, OperatorMatrix::projector(2, 0, 1));
        let a2 = annihilation(FockTruncation::new(2).unwrap());
        assert_eq!(a2.get(0, 1), ONE);
        assert!((a2.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        let nonzero = a2.as_slice().iter().filter(|z| **z != ZERO).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn canonical_commutator_up_to_truncation_edge() {
        let a = annihilation(FockTruncation::new(10).unwrap());
        let c = a.commutator(&a.dagger()).unwrap();
        for i in 0..11 {
            for j in 0..11 {
                let want = if i == j && i < 10 { 1.0 } else if i == j { -10.0 } else { 0.0 };
                assert!((c.get(i, j) - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_algebra_in_model_basis() {
        let sz = (&(&sigma_plus() * &sigma_minus()) - &(&sigma_minus() * &sigma_plus())).clone();
        assert_eq!(sz, sigma_z());
        let comm = sigma_x().commutator(&sigma_y()).unwrap();
        let want = sigma_z().scale(C64::new(0.0, 2.0));
        assert!((&comm - &want).max_abs() < 1e-15);
    }

    #[test]
    fn bloch_round_trip() {
        let rho = DensityMatrix::from_bloch(0.3, -0.4, 0.5).unwrap();
        let v = bloch_vector(rho.op());
        assert!((v[0] - 0.3).abs() < 1e-15 && (v[1] + 0.4).abs() < 1e-15 && (v[2] - 0.5).abs() < 1e-15);
        assert!((rho.expect(&sigma_y()).unwrap() + 0.4).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_rejects_invalid() {
        let bad_trace = OperatorMatrix::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::TraceViolation { .. })));
        let neg = OperatorMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::PositivityViolation { .. })));
        let mut nh = OperatorMatrix::from_real_diagonal(&[0.5, 0.5]);
        nh.set(0, 1, C64::new(0.1, 0.0));
        assert!(matches!(DensityMatrix::new(nh), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partial_traces() {
        let a = DensityMatrix::from_bloch(0.2, 0.1, -0.3).unwrap();
        let b = DensityMatrix::maximally_mixed(3);
        let ab = a.kron(&b);
        let ra = ab.op().partial_trace_second(2, 3).unwrap();
        let rb = ab.op().partial_trace_first(2, 3).unwrap();
        assert!((&ra - a.op()).max_abs() < 1e-15);
        assert!((&rb - b.op()).max_abs() < 1e-15);
    }

    #[test]
    fn trace_distance_orthogonal_states() {
        let d = trace_distance(DensityMatrix::basis(2, 0).op(), DensityMatrix::basis(2, 1).op()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}
