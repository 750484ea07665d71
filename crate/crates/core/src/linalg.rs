//! Dense complex matrices, pure states and density matrices.
//!
//! Everything here is sized for the two- and four-level systems the rest of
//! the crate works with: storage is inline up to 4x4 so that the inner
//! integration loops never touch the allocator. Larger matrices (the 16x16
//! superoperators used by the exact propagator) fall back to the heap.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on the norm of a [`PureState`] accepted at construction.
pub const NORM_TOL: f64 = 1e-9;
/// Maximum entry asymmetry accepted for a [`DensityMatrix`].
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for a [`DensityMatrix`].
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated in a [`DensityMatrix`].
pub const DENSITY_POSITIVITY_TOL: f64 = -1e-6;
/// Relative asymmetry accepted by [`hermitian_eigen`].
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-9;

type Storage = SmallVec<[C64; 16]>;
type VecStorage = SmallVec<[C64; 4]>;

/// Square complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Storage,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: SmallVec::from_elem(ZERO, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Build from row-major entries.
    ///
    /// Panics if the number of entries is not a perfect square of `dim`.
    pub fn from_row_major(dim: usize, entries: impl IntoIterator<Item = C64>) -> Self {
        let data: Storage = entries.into_iter().collect();
        assert_eq!(data.len(), dim * dim, "expected {} entries for a {dim}x{dim} matrix", dim * dim);
        Self { dim, data }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        Self::from_row_major(dim, entries.iter().map(|&x| C64::new(x, 0.0)))
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    /// `self += alpha * other`
    #[inline]
    pub fn axpy(&mut self, alpha: C64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += alpha * b;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(A + A†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> SmallVec<[C64; 4]> {
        assert_eq!(self.dim, v.len(), "apply dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// `Tr(A B)` summed in an order that is symmetric under `A <-> B`, so
    /// that `trace_product(a, b) == trace_product(b, a)` bit for bit.
    pub fn trace_product(&self, rhs: &Self) -> C64 {
        assert_eq!(self.dim, rhs.dim, "trace_product dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            acc += self.data[i * n + i] * rhs.data[i * n + i];
            for j in (i + 1)..n {
                let forward = self.data[i * n + j] * rhs.data[j * n + i];
                let backward = self.data[j * n + i] * rhs.data[i * n + j];
                acc += forward + backward;
            }
        }
        acc
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        Self::from_row_major(n, (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(ONE, rhs);
    }
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, [ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
}

/// Tensor (Kronecker) product; the first factor is the slow index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out.set(i * nb + k, j * nb + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The `k`-th eigenvector as a state.
    pub fn vector(&self, k: usize) -> PureState {
        let n = self.vectors.dim();
        PureState { amps: (0..n).map(|i| self.vectors.get(i, k)).collect() }
    }

    /// `max_k ||H v_k - E_k v_k||_inf`
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for (k, &e) in self.values.iter().enumerate() {
            let v = self.vector(k);
            let hv = h.apply(v.amplitudes());
            for (x, y) in hv.iter().zip(v.amplitudes()) {
                worst = worst.max((x - y * e).norm());
            }
        }
        worst
    }

    /// `V diag(E) V†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &e) in self.values.iter().enumerate() {
            for i in 0..n {
                let vik = self.vectors.get(i, k) * e;
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + vik * self.vectors.get(j, k).conj());
                }
            }
        }
        out
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// matrix. Each eigenvector's largest-magnitude component (the first one on
/// ties) is made real and positive.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<EigenSystem> {
    let asymmetry = h.hermiticity_error();
    if asymmetry > EIGEN_HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NonHermitianInput { asymmetry });
    }
    let n = h.dim();
    let eig = nalgebra::SymmetricEigen::new(h.hermitian_part().to_nalgebra());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let column: Vec<C64> = (0..n).map(|i| eig.eigenvectors[(i, k)]).collect();
        let peak = column.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = column
            .iter()
            .position(|z| z.norm() >= peak * (1.0 - 1e-10))
            .expect("eigenvector has a largest component");
        let phase = column[pivot].conj() / column[pivot].norm();
        for (i, z) in column.iter().enumerate() {
            vectors.set(i, col, z * phase);
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Spectral norm of a Hermitian matrix (largest eigenvalue modulus).
pub fn hermitian_spectral_norm(h: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.values.iter().map(|e| e.abs()).fold(0.0, f64::max))
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_nalgebra(&m.to_nalgebra().exp())
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: VecStorage,
}

impl PureState {
    /// Accepts amplitudes whose Euclidean norm is 1 within [`NORM_TOL`].
    pub fn new(amps: impl IntoIterator<Item = C64>) -> Result<Self> {
        let state = Self { amps: amps.into_iter().collect() };
        let drift = (state.norm() - 1.0).abs();
        if state.amps.is_empty() || drift > NORM_TOL {
            return Err(Error::InvalidState(format!("norm off by {drift:e}")));
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: impl IntoIterator<Item = C64>) -> Result<Self> {
        let mut state = Self { amps: amps.into_iter().collect() };
        let norm = state.norm();
        if state.amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        state.amps.iter_mut().for_each(|z| *z /= norm);
        Ok(state)
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps: VecStorage = SmallVec::from_elem(ZERO, dim);
        amps[k] = ONE;
        Self { amps }
    }

    /// Unchecked construction for integrator internals, where drift is
    /// monitored rather than rejected.
    pub(crate) fn from_raw(amps: VecStorage) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `<self|op|self>`
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let v = op.apply(&self.amps);
        self.amps.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { amps: self.amps.iter().map(|&z| z * factor).collect() }
    }

    /// `|self><self|`
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_row_major(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| self.amps[i] * self.amps[j].conj())),
        )
    }

    /// Largest amplitude difference.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Hermitian, unit-trace, (softly) positive matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let asym = m.hermiticity_error();
        if asym > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density matrix asymmetry {asym:e}")));
        }
        let trace_err = (m.trace() - ONE).norm();
        if trace_err > DENSITY_TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix trace off by {trace_err:e}")));
        }
        let rho = Self { m };
        let min_eig = rho.min_eigenvalue();
        if min_eig < DENSITY_POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("density matrix eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { m: psi.projector() }
    }

    /// `I / dim`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub(crate) fn from_raw(m: ComplexMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.m.hermitian_part())
            .map(|e| e.values[0])
            .unwrap_or(f64::NAN)
    }

    /// `<phi|rho|phi>`
    pub fn population(&self, phi: &PureState) -> f64 {
        phi.expectation(&self.m).re
    }
}

/// `Tr(rho goal)`
pub fn fidelity(rho: &DensityMatrix, goal: &DensityMatrix) -> Result<f64> {
    if rho.dim() != goal.dim() {
        return Err(Error::DimensionMismatch { expected: goal.dim(), found: rho.dim() });
    }
    Ok(rho.m.trace_product(&goal.m).re)
}

/// `Tr(rho^2)`
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.m.trace_product(&rho.m).re
}
