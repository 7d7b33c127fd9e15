//! Spin-1 operators, rotating-frame transformations and Hamiltonians.
//!
//! Matrices are written in the basis `{|1,1>, |1,0>, |1,-1>}` (index 0, 1, 2)
//! and are dimensionless (F / hbar). Hamiltonians are stored as H / hbar, so
//! their entries are angular frequencies.
//!
//! Quadratic Zeeman terms carry a scalar shift `eps * (F^2 - c * 1)`. The
//! constant `c` defaults to [`DEFAULT_SCALAR_SHIFT`]; it only contributes a
//! global phase.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

/// Complex 3x3 matrix in the Zeeman basis.
pub type CMatrix3 = Matrix3<Complex64>;
/// Complex state vector in the Zeeman basis.
pub type CVector3 = Vector3<Complex64>;

/// Constant multiplying the identity in `eps * (F^2 - c * 1)`.
pub const DEFAULT_SCALAR_SHIFT: f64 = 1.0;

const HERMITIAN_TOL: f64 = 1e-12;

/// Magnetic quantum numbers in basis order.
pub const LEVELS: [i32; 3] = [1, 0, -1];

/// Basis index of the magnetic quantum number `m`, if it belongs to F = 1.
pub fn level_index(m: i32) -> Option<usize> {
    match m {
        1 => Some(0),
        0 => Some(1),
        -1 => Some(2),
        _ => None,
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_entry_norm(m: &CMatrix3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A 3x3 Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix3(CMatrix3);

impl HermitianMatrix3 {
    /// Accepts `m` if it is Hermitian within 1e-12, then stores its exactly
    /// Hermitian part.
    pub fn new(m: CMatrix3) -> Option<Self> {
        let skew = max_entry_norm(&(m - m.adjoint()));
        (skew <= HERMITIAN_TOL).then(|| Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix3) -> Self {
        Self((m + m.adjoint()) * c(0.5))
    }

    pub fn zeros() -> Self {
        Self(CMatrix3::zeros())
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix3 {
        self.0
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0 * c(k))
    }

    /// Eigenvalues in ascending order with the matching orthonormal
    /// eigenvectors as columns.
    pub fn eigh(&self) -> (Vector3<f64>, CMatrix3) {
        let eig = self.0.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = Vector3::from_fn(|i, _| eig.eigenvalues[order[i]]);
        let vectors = CMatrix3::from_fn(|r, col| eig.eigenvectors[(r, order[col])]);
        (values, vectors)
    }

    /// `exp(-i H t)` by eigendecomposition.
    pub fn propagator(&self, t: f64) -> Unitary3 {
        let eig = self.0.symmetric_eigen();
        let v = eig.eigenvectors;
        let phases = CMatrix3::from_diagonal(&Vector3::from_fn(|i, _| {
            Complex64::from_polar(1.0, -eig.eigenvalues[i] * t)
        }));
        Unitary3(v * phases * v.adjoint())
    }
}

impl Add for HermitianMatrix3 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Mul<HermitianMatrix3> for f64 {
    type Output = HermitianMatrix3;

    fn mul(self, rhs: HermitianMatrix3) -> HermitianMatrix3 {
        rhs.scale(self)
    }
}

/// A 3x3 unitary matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary3(CMatrix3);

impl Unitary3 {
    pub fn identity() -> Self {
        Self(CMatrix3::identity())
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, psi: &CVector3) -> CVector3 {
        self.0 * psi
    }

    /// `U^dagger H U`.
    pub fn conjugate(&self, h: &HermitianMatrix3) -> HermitianMatrix3 {
        HermitianMatrix3::symmetrized(self.0.adjoint() * h.0 * self.0)
    }

    /// Largest entry of `|U U^dagger - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        max_entry_norm(&(self.0 * self.0.adjoint() - CMatrix3::identity()))
    }
}

impl Mul for Unitary3 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// Dimensionless spin-1 angular momentum matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperators {
    pub fx: HermitianMatrix3,
    pub fy: HermitianMatrix3,
    pub fz: HermitianMatrix3,
}

impl SpinOperators {
    /// `F_x^2 - c * 1`.
    pub fn fx2_shifted(&self, shift: f64) -> HermitianMatrix3 {
        let fx = self.fx.0;
        HermitianMatrix3::symmetrized(fx * fx - CMatrix3::identity() * c(shift))
    }

    /// `F_z^2 - c * 1`.
    pub fn fz2_shifted(&self, shift: f64) -> HermitianMatrix3 {
        let fz = self.fz.0;
        HermitianMatrix3::symmetrized(fz * fz - CMatrix3::identity() * c(shift))
    }
}

pub fn spin1_operators() -> SpinOperators {
    let s = c(FRAC_1_SQRT_2);
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    let fx = CMatrix3::new(z, s, z, s, z, s, z, s, z);
    #[rustfmt::skip]
    let fy = CMatrix3::new(
        z, -i, z,
        i, z, -i,
        z, i, z,
    );
    let fz = CMatrix3::from_diagonal(&Vector3::new(c(1.0), z, c(-1.0)));
    SpinOperators {
        fx: HermitianMatrix3(fx),
        fy: HermitianMatrix3(fy),
        fz: HermitianMatrix3(fz),
    }
}

/// `U1 = exp(-i omega_d t F_z)`, the frame rotating at the drive frequency.
pub fn rotating_frame_u1(omega_d: f64, t: f64) -> Unitary3 {
    let diag = Vector3::from_fn(|k, _| Complex64::from_polar(1.0, -omega_d * t * LEVELS[k] as f64));
    Unitary3(CMatrix3::from_diagonal(&diag))
}

/// `U2 = exp(-i (pi/2) F_y)`, exchanging the z and x axes.
///
/// Conjugation gives `U2^dagger F_z U2 = -F_x`, `U2^dagger F_x U2 = F_z` and
/// `U2^dagger F_z^2 U2 = F_x^2`, so `delta * F_z + Omega_d * F_x` becomes
/// `Omega_d * F_z - delta * F_x`.
pub fn axis_swap_u2() -> Unitary3 {
    // Wigner d-matrix d^1(pi/2), which is real.
    let h = 0.5;
    let r = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = Matrix3::new(
        h, -r, h,
        r, 0.0, -r,
        h, r, h,
    );
    Unitary3(m.map(c))
}

/// `(omega0 + delta) F_z + eps (F_z^2 - 1)`.
pub fn free_hamiltonian(omega0: f64, delta_omega: f64, epsilon: f64) -> HermitianMatrix3 {
    free_hamiltonian_shifted(omega0, delta_omega, epsilon, DEFAULT_SCALAR_SHIFT)
}

pub fn free_hamiltonian_shifted(omega0: f64, delta_omega: f64, epsilon: f64, shift: f64) -> HermitianMatrix3 {
    let ops = spin1_operators();
    (omega0 + delta_omega) * ops.fz + epsilon * ops.fz2_shifted(shift)
}

/// Doubly rotated CDD Hamiltonian `Omega_d F_z + eps (F_x^2 - 1) + delta F_x`.
pub fn cdd_rotated_hamiltonian(omega_drive: f64, delta_omega: f64, epsilon: f64) -> HermitianMatrix3 {
    cdd_rotated_hamiltonian_shifted(omega_drive, delta_omega, epsilon, DEFAULT_SCALAR_SHIFT)
}

pub fn cdd_rotated_hamiltonian_shifted(
    omega_drive: f64,
    delta_omega: f64,
    epsilon: f64,
    shift: f64,
) -> HermitianMatrix3 {
    let ops = spin1_operators();
    omega_drive * ops.fz + epsilon * ops.fx2_shifted(shift) + delta_omega * ops.fx
}

/// Lab-frame Hamiltonian with a linearly polarized drive along x, before
/// any rotating-wave approximation:
/// `(omega0 + delta) F_z + eps (F_z^2 - 1) + 2 Omega_d cos(omega_d t) F_x`.
pub fn cdd_lab_hamiltonian(
    omega0: f64,
    omega_drive_rabi: f64,
    omega_drive_freq: f64,
    delta_omega: f64,
    epsilon: f64,
    t: f64,
) -> HermitianMatrix3 {
    let ops = spin1_operators();
    free_hamiltonian(omega0, delta_omega, epsilon) + (2.0 * omega_drive_rabi * (omega_drive_freq * t).cos()) * ops.fx
}

/// Maps a lab-frame state at time `t` into the doubly rotated (dressed) frame,
/// `U2^dagger U1(t)^dagger psi`.
pub fn lab_to_dressed_frame(psi: &CVector3, omega_drive_freq: f64, t: f64) -> CVector3 {
    let u = rotating_frame_u1(omega_drive_freq, t) * axis_swap_u2();
    u.adjoint().apply(psi)
}

/// Inverse of [`lab_to_dressed_frame`].
pub fn dressed_to_lab_frame(psi: &CVector3, omega_drive_freq: f64, t: f64) -> CVector3 {
    let u = rotating_frame_u1(omega_drive_freq, t) * axis_swap_u2();
    u.apply(psi)
}
