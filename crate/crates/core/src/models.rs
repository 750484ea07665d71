//! Hamiltonian families `lambda -> H(lambda)` and the high-temperature
//! master-equation generator that couples them to a bosonic bath.
//!
//! Both families are affine in the control parameter, so a [`Model`] stores
//! `H(lambda) = H_const + lambda * H_slope` and never rebuilds operators from
//! scratch inside the integrators.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{kron, sigma_x, sigma_y, sigma_z, ComplexMatrix, DensityMatrix, I, ONE};

/// Two-level Landau-Zener parameters: `H = alpha lambda sz + (delta/2) sx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzParams {
    pub alpha: f64,
    pub delta: f64,
}

impl LzParams {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("gap delta must be positive, got {delta}")));
        }
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("slope alpha must be nonzero, got {alpha}")));
        }
        Ok(Self { alpha, delta })
    }
}

/// Two coupled spins:
/// `H = dA sx(A) + lambda dA sz(B) + dB sx(B) + coupling sz(A) sz(B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSpinParams {
    pub delta_a: f64,
    pub delta_b: f64,
    pub coupling: f64,
}

impl TwoSpinParams {
    pub fn new(delta_a: f64, delta_b: f64, coupling: f64) -> Result<Self> {
        if !(delta_a > 0.0 && delta_a.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta_a must be positive, got {delta_a}")));
        }
        if !delta_b.is_finite() || !coupling.is_finite() {
            return Err(Error::InvalidParameter("delta_b and coupling must be finite".into()));
        }
        Ok(Self { delta_a, delta_b, coupling })
    }

    /// `delta_b = 0.05 delta_a`, `coupling = 0.5 delta_a`.
    pub fn scaled(delta_a: f64) -> Result<Self> {
        Self::new(delta_a, 0.05 * delta_a, 0.5 * delta_a)
    }
}

impl Default for TwoSpinParams {
    fn default() -> Self {
        Self { delta_a: 50.0, delta_b: 2.5, coupling: 25.0 }
    }
}

/// How the two-level dissipator carries over to the spin pair. Both choices
/// couple the bath through `sz(A)`; they differ only in the gap entering the
/// dissipative coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BathSubstitution {
    /// The gap is replaced by `delta_a`.
    #[default]
    Literal,
    /// The gap is replaced by twice the `sx(A)` coefficient, i.e. `2 delta_a`,
    /// mirroring the `(delta/2) sx` pattern of the two-level model.
    SigmaXCoefficient,
}

/// Pauli triple through which the bath acts on the system.
#[derive(Clone, Debug, PartialEq)]
pub struct BathChannel {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl BathChannel {
    pub fn qubit() -> Self {
        Self { x: sigma_x(), y: sigma_y(), z: sigma_z() }
    }

    /// Pauli operators of the first spin of a pair, `s ⊗ I`.
    pub fn first_of_pair() -> Self {
        let id = ComplexMatrix::identity(2);
        Self { x: kron(&sigma_x(), &id), y: kron(&sigma_y(), &id), z: kron(&sigma_z(), &id) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathParams {
    /// Dimensionless system-bath coupling.
    pub gamma0: f64,
    /// Bath temperature in energy units.
    pub temperature: f64,
    pub channel: BathChannel,
    /// Gap appearing in the dissipative coefficients.
    pub renorm_gap: f64,
}

impl BathParams {
    pub fn new(gamma0: f64, temperature: f64, channel: BathChannel, renorm_gap: f64) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma0 must be >= 0, got {gamma0}")));
        }
        if !temperature.is_finite() || temperature < 0.0 || (gamma0 > 0.0 && temperature <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive when gamma0 > 0, got {temperature}"
            )));
        }
        if !renorm_gap.is_finite() {
            return Err(Error::InvalidParameter("renormalization gap must be finite".into()));
        }
        Ok(Self { gamma0, temperature, channel, renorm_gap })
    }

    pub fn coupling_operator(&self) -> &ComplexMatrix {
        &self.channel.z
    }

    /// Coefficient of the anti-Hermitian part, `gamma0 * gap / 4`.
    pub fn damping(&self) -> f64 {
        self.gamma0 * self.renorm_gap / 4.0
    }

    /// Coefficient of the double commutator, `gamma0 * T / 2`.
    pub fn dephasing(&self) -> f64 {
        self.gamma0 * self.temperature / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    LandauZener(LzParams),
    TwoSpin(TwoSpinParams),
}

#[derive(Clone, Debug)]
pub struct Model {
    kind: ModelKind,
    h_const: ComplexMatrix,
    h_slope: ComplexMatrix,
    bath: Option<BathParams>,
}

pub fn lz_hamiltonian(p: &LzParams, lambda: f64) -> ComplexMatrix {
    &sigma_z().scale_real(p.alpha * lambda) + &sigma_x().scale_real(p.delta / 2.0)
}

pub fn two_spin_hamiltonian(p: &TwoSpinParams, lambda: f64) -> ComplexMatrix {
    let (h_const, h_slope) = two_spin_parts(p);
    let mut h = h_const;
    h.axpy(C64::new(lambda, 0.0), &h_slope);
    h
}

fn two_spin_parts(p: &TwoSpinParams) -> (ComplexMatrix, ComplexMatrix) {
    let id = ComplexMatrix::identity(2);
    let mut h_const = kron(&sigma_x(), &id).scale_real(p.delta_a);
    h_const.axpy(C64::new(p.delta_b, 0.0), &kron(&id, &sigma_x()));
    h_const.axpy(C64::new(p.coupling, 0.0), &kron(&sigma_z(), &sigma_z()));
    let h_slope = kron(&id, &sigma_z()).scale_real(p.delta_a);
    (h_const, h_slope)
}

impl Model {
    pub fn landau_zener(p: LzParams) -> Self {
        Self {
            kind: ModelKind::LandauZener(p),
            h_const: sigma_x().scale_real(p.delta / 2.0),
            h_slope: sigma_z().scale_real(p.alpha),
            bath: None,
        }
    }

    pub fn two_spin(p: TwoSpinParams) -> Self {
        let (h_const, h_slope) = two_spin_parts(&p);
        Self { kind: ModelKind::TwoSpin(p), h_const, h_slope, bath: None }
    }

    /// Attach a bath using the literal gap substitution.
    pub fn with_bath(self, gamma0: f64, temperature: f64) -> Result<Self> {
        self.with_bath_substitution(gamma0, temperature, BathSubstitution::Literal)
    }

    pub fn with_bath_substitution(
        mut self,
        gamma0: f64,
        temperature: f64,
        substitution: BathSubstitution,
    ) -> Result<Self> {
        let (channel, gap) = match self.kind {
            ModelKind::LandauZener(p) => (BathChannel::qubit(), p.delta),
            ModelKind::TwoSpin(p) => {
                let gap = match substitution {
                    BathSubstitution::Literal => p.delta_a,
                    BathSubstitution::SigmaXCoefficient => 2.0 * p.delta_a,
                };
                (BathChannel::first_of_pair(), gap)
            }
        };
        self.bath = Some(BathParams::new(gamma0, temperature, channel, gap)?);
        Ok(self)
    }

    /// Same model and bath with a different coupling constant.
    pub fn with_gamma0(&self, gamma0: f64) -> Result<Self> {
        let bath = self.bath.as_ref().ok_or(Error::MissingBath)?;
        let mut out = self.clone();
        out.bath = Some(BathParams::new(gamma0, bath.temperature, bath.channel.clone(), bath.renorm_gap)?);
        Ok(out)
    }

    pub fn without_bath(&self) -> Self {
        Self { bath: None, ..self.clone() }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.h_const.dim()
    }

    pub fn bath(&self) -> Option<&BathParams> {
        self.bath.as_ref()
    }

    pub fn hamiltonian(&self, lambda: f64) -> ComplexMatrix {
        let mut h = self.h_const.clone();
        h.axpy(C64::new(lambda, 0.0), &self.h_slope);
        h
    }

    /// `dH/dlambda`, constant for both families.
    pub fn dh_dlambda(&self) -> &ComplexMatrix {
        &self.h_slope
    }

    pub(crate) fn hamiltonian_parts(&self) -> (&ComplexMatrix, &ComplexMatrix) {
        (&self.h_const, &self.h_slope)
    }

    /// `H'(lambda) = H(lambda) - i (gamma0 gap / 4) X`.
    pub fn effective_hamiltonian(&self, lambda: f64) -> Result<ComplexMatrix> {
        let bath = self.bath.as_ref().ok_or(Error::MissingBath)?;
        let mut h = self.hamiltonian(lambda);
        h.axpy(-I * bath.damping(), &bath.channel.x);
        Ok(h)
    }

    /// Right-hand side of the master equation at fixed `lambda`:
    ///
    /// ```text
    /// -i (H' rho - rho H'^dag) - (g0 T / 2) [Z, [Z, rho]] + i (g0 gap / 4) (Y rho Z - Z rho Y)
    /// ```
    pub fn master_rhs(&self, lambda: f64, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        let bath = self.bath.as_ref().ok_or(Error::MissingBath)?;
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let rho = rho.matrix();
        let h_eff = self.effective_hamiltonian(lambda)?;
        let (y, z) = (&bath.channel.y, &bath.channel.z);

        let coherent = (&h_eff.matmul(rho) - &rho.matmul(&h_eff.adjoint())).scale(-I);
        let inner = z.commutator(rho);
        let double = z.commutator(&inner).scale_real(-bath.dephasing());
        let cross = (&y.matmul(rho).matmul(z) - &z.matmul(rho).matmul(y)).scale(I * bath.damping());

        Ok(&(&coherent + &double) + &cross)
    }

    /// Liouvillian at fixed `lambda` acting on column-stacked density
    /// matrices (`vec(A X B) = (B^T ⊗ A) vec(X)`). Without a bath this is the
    /// closed-system `-i (I ⊗ H - H^T ⊗ I)`.
    pub fn superoperator(&self, lambda: f64) -> ComplexMatrix {
        let n = self.dim();
        let id = ComplexMatrix::identity(n);
        let Some(bath) = self.bath.as_ref() else {
            let h = self.hamiltonian(lambda);
            return (&kron(&id, &h) - &kron(&h.transpose(), &id)).scale(-I);
        };
        let h_eff = self
            .effective_hamiltonian(lambda)
            .expect("bath is attached");
        let (y, z) = (&bath.channel.y, &bath.channel.z);
        let z2 = z.matmul(z);

        let mut l = (&kron(&id, &h_eff) - &kron(&h_eff.conj(), &id)).scale(-I);

        let mut double = kron(&id, &z2);
        double.axpy(C64::new(-2.0, 0.0), &kron(&z.transpose(), z));
        double.axpy(ONE, &kron(&z2.transpose(), &id));
        l.axpy(C64::new(-bath.dephasing(), 0.0), &double);

        let cross = &kron(&z.transpose(), y) - &kron(&y.transpose(), z);
        l.axpy(I * bath.damping(), &cross);
        l
    }
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.dim();
    (0..n).flat_map(|j| (0..n).map(move |i| m.get(i, j))).collect()
}

pub fn devectorize(v: &[C64]) -> ComplexMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, v.len(), "vector length is not a perfect square");
    let mut m = ComplexMatrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            m.set(i, j, v[j * n + i]);
        }
    }
    m
}

/// Hot-loop form of the master equation: the `lambda`-independent pieces are
/// assembled once and `rhs` evaluates `drho/dt` for any `lambda`.
#[derive(Clone, Debug)]
pub(crate) struct OpenGenerator {
    h_const: ComplexMatrix,
    h_slope: ComplexMatrix,
    damping_op: ComplexMatrix,
    dephasing: f64,
    damping: f64,
    y: ComplexMatrix,
    z: ComplexMatrix,
    z2: Option<ComplexMatrix>,
}

impl OpenGenerator {
    pub(crate) fn new(model: &Model) -> Result<Self> {
        let bath = model.bath().ok_or(Error::MissingBath)?;
        let (h_const, h_slope) = model.hamiltonian_parts();
        let z = bath.channel.z.clone();
        let z2 = z.matmul(&z);
        let z2 = (z2.max_abs_diff(&ComplexMatrix::identity(z.dim())) != 0.0).then_some(z2);
        Ok(Self {
            h_const: h_const.clone(),
            h_slope: h_slope.clone(),
            damping_op: bath.channel.x.scale_real(bath.damping()),
            dephasing: bath.dephasing(),
            damping: bath.damping(),
            y: bath.channel.y.clone(),
            z,
            z2,
        })
    }

    pub(crate) fn rhs(&self, lambda: f64, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut h = self.h_const.clone();
        h.axpy(C64::new(lambda, 0.0), &self.h_slope);

        // -i[H, rho] - (A rho + rho A)
        let mut out = (&h.matmul(rho) - &rho.matmul(&h)).scale(-I);
        out.axpy(-ONE, &self.damping_op.matmul(rho));
        out.axpy(-ONE, &rho.matmul(&self.damping_op));

        if self.dephasing != 0.0 || self.damping != 0.0 {
            let zr = self.z.matmul(rho);
            // [Z,[Z,rho]] = Z^2 rho - 2 Z rho Z + rho Z^2
            let mut double = zr.matmul(&self.z).scale_real(-2.0);
            match &self.z2 {
                Some(z2) => {
                    double.axpy(ONE, &z2.matmul(rho));
                    double.axpy(ONE, &rho.matmul(z2));
                }
                None => double.axpy(C64::new(2.0, 0.0), rho),
            }
            out.axpy(C64::new(-self.dephasing, 0.0), &double);

            let cross = &self.y.matmul(rho).matmul(&self.z) - &zr.matmul(&self.y);
            out.axpy(I * self.damping, &cross);
        }
        out
    }
}

/// Final upper-level population after a linear sweep at velocity `v`:
/// `1 - exp(-pi delta^2 / (4 v |alpha|))`.
pub fn lz_probability(p: &LzParams, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::NonpositiveVelocity(v));
    }
    Ok(-(-critical_velocity(p) / v).exp_m1())
}

/// `pi delta^2 / (4 |alpha|)`
pub fn critical_velocity(p: &LzParams) -> f64 {
    PI * p.delta * p.delta / (4.0 * p.alpha.abs())
}
