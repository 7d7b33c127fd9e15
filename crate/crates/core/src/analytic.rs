//! Closed-form decoherence predictions.
//!
//! Free evolution: coherences `rho_{m,m'}` decay as
//! `exp(-(m - m')^2 <zeta^2(t)> / 2)` with populations untouched. Under
//! continuous dynamical decoupling the noise couples dressed states, and the
//! first-order transfer probability between two of them is
//! `|(F_x)_{b,a}|^2 <|chi(t)|^2>` at the dressed transition frequency.
//!
//! Phase convention: per noise path `rho_{m,m'}(t) = rho_{m,m'}(0)
//! exp(-i (m - m') zeta(t) - i (m^2 - m'^2) eps t)`, which is what the
//! evolution operator `exp(-i [zeta F_z + eps t (F_z^2 - c)])` gives. The
//! scalar `c` cancels between bra and ket.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::noise::{filtered_phase_variance, phase_variance, spectrum, OuNoiseModel};
use crate::spinops::{axis_swap_u2, level_index, max_entry_norm, spin1_operators, CMatrix3, CVector3, LEVELS};

/// First-order results are flagged once `var / Omega_e^2` exceeds this.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

/// Density matrix of the F = 1 multiplet in the basis `{|1,1>, |1,0>, |1,-1>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMatrix3);

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(m: CMatrix3) -> Result<Self> {
        let skew = max_entry_norm(&(m - m.adjoint()));
        ensure(skew <= 1e-12, "rho", format!("not Hermitian (defect {skew:e})"))?;
        let trace = m.trace();
        ensure(
            (trace - Complex64::new(1.0, 0.0)).norm() <= 1e-12,
            "rho",
            format!("trace is {trace}, expected 1"),
        )?;
        let min_eig = m.symmetric_eigen().eigenvalues.min();
        ensure(min_eig >= -1e-10, "rho", format!("negative eigenvalue {min_eig:e}"))?;
        Ok(Self(m))
    }

    /// `|psi><psi|` for a normalized copy of `psi`.
    pub fn pure(psi: &CVector3) -> Result<Self> {
        let norm = psi.norm();
        ensure(norm > 0.0 && norm.is_finite(), "psi", "state vector must be nonzero")?;
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(Self(psi * psi.adjoint()))
    }

    /// `(|m> + |m'>) / sqrt(2)`, or `|m>` when `m = m'`.
    pub fn superposition(m: i32, mp: i32) -> Result<Self> {
        let (i, j) = (index(m)?, index(mp)?);
        let mut psi = CVector3::zeros();
        psi[i] += Complex64::new(1.0, 0.0);
        psi[j] += Complex64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    /// `rho_{m,m'}`.
    pub fn element(&self, m: i32, mp: i32) -> Result<Complex64> {
        Ok(self.0[(index(m)?, index(mp)?)])
    }
}

fn index(m: i32) -> Result<usize> {
    level_index(m).ok_or(Error::InvalidQuantumNumber(m))
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// Noise-averaged coherence `rho_{m,m'}(t)` under free evolution.
pub fn coherence_free(
    rho0: &DensityMatrix,
    m: i32,
    mp: i32,
    t: f64,
    model: &OuNoiseModel,
    epsilon: f64,
) -> Result<Complex64> {
    let initial = rho0.element(m, mp)?;
    check_time(t)?;
    if m == mp {
        return Ok(initial);
    }
    let dm = (m - mp) as f64;
    let decay = (-0.5 * dm * dm * phase_variance(model, t)?).exp();
    let phase = -((m * m - mp * mp) as f64) * epsilon * t;
    Ok(initial * Complex64::from_polar(decay, phase))
}

/// Gaussian decay factor of the static-noise limit, `exp(-(dm)^2 var t^2 / 2)`.
pub fn coherence_slow_limit(m: i32, mp: i32, t: f64, variance: f64) -> Result<f64> {
    let dm = delta_m(m, mp)?;
    check_time(t)?;
    Ok((-0.5 * dm * dm * variance * t * t).exp())
}

/// 1/e time of [`coherence_slow_limit`]; infinite for populations.
pub fn slow_dephasing_time(m: i32, mp: i32, variance: f64) -> Result<f64> {
    let dm = delta_m(m, mp)?;
    Ok((dm * dm * variance / 2.0).sqrt().recip())
}

/// Exponential decay factor of the white-noise limit,
/// `exp(-(dm)^2 pi S(0) t)`.
pub fn coherence_fast_limit(m: i32, mp: i32, t: f64, spectrum_at_zero: f64) -> Result<f64> {
    let dm = delta_m(m, mp)?;
    check_time(t)?;
    ensure(spectrum_at_zero >= 0.0, "spectrum_at_zero", "must be >= 0")?;
    Ok((-dm * dm * PI * spectrum_at_zero * t).exp())
}

/// 1/e time of [`coherence_fast_limit`]; infinite for populations.
pub fn fast_dephasing_time(m: i32, mp: i32, spectrum_at_zero: f64) -> Result<f64> {
    let dm = delta_m(m, mp)?;
    Ok((dm * dm * PI * spectrum_at_zero).recip())
}

fn delta_m(m: i32, mp: i32) -> Result<f64> {
    index(m)?;
    index(mp)?;
    Ok((m - mp) as f64)
}

/// First-order transfer probability with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    /// Raw first-order estimate; may exceed 1 outside the perturbative regime.
    pub probability: f64,
    /// `var / Omega_e^2 <= 0.1`.
    pub perturbative: bool,
}

fn perturbative(model: &OuNoiseModel, omega_e: f64) -> bool {
    model.variance() <= PERTURBATIVE_LIMIT * omega_e * omega_e
}

/// `|(F_x)_{a,b}|^2` between Zeeman (or linear-dressed) levels.
pub fn fx_element_sq(m: i32, mp: i32) -> Result<f64> {
    let fx = spin1_operators().fx;
    Ok(fx.matrix()[(index(m)?, index(mp)?)].norm_sqr())
}

/// Noise-induced transfer `|m~> -> |m~'>` between the linear dressed states
/// of `Omega_d F_z + delta F_x`, at `Omega_e = (m~' - m~) Omega_d`.
pub fn cdd_transfer(omega_drive: f64, mtilde: i32, mtilde_p: i32, model: &OuNoiseModel, t: f64) -> Result<Transfer> {
    if mtilde == mtilde_p {
        return Err(Error::SameState);
    }
    let element = fx_element_sq(mtilde_p, mtilde)?;
    let omega_e = (mtilde_p - mtilde) as f64 * omega_drive;
    let chi = filtered_phase_variance(model, omega_e, t)?;
    Ok(Transfer {
        probability: element * chi,
        perturbative: perturbative(model, omega_e),
    })
}

/// Transfer for static noise, `|F_x|^2 (2 var / Omega_e^2) (1 - cos Omega_e t)`;
/// the `alpha -> 0` limit of [`cdd_transfer`].
pub fn cdd_transfer_static_limit(omega_e: f64, variance: f64, matrix_element_sq: f64, t: f64) -> Result<f64> {
    ensure(
        omega_e != 0.0,
        "omega_e",
        "static limit requires a nonzero transition frequency",
    )?;
    check_time(t)?;
    Ok(matrix_element_sq * 2.0 * variance / (omega_e * omega_e) * (1.0 - (omega_e * t).cos()))
}

/// Long-time growth rate of the transfer, `|F_x|^2 2 pi S(Omega_e)`.
pub fn cdd_transfer_rate_longtime(omega_e: f64, model: &OuNoiseModel, matrix_element_sq: f64) -> f64 {
    matrix_element_sq * 2.0 * PI * spectrum(model, omega_e)
}

/// Dressed states of the quadratic-Zeeman CDD problem.
///
/// `X` has zero energy and continues `m~ = 0`; `Y` and `Z` continue
/// `m~ = +1` and `m~ = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dressed {
    X,
    Y,
    Z,
}

impl Dressed {
    pub const ALL: [Dressed; 3] = [Dressed::X, Dressed::Y, Dressed::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Linear-limit label `m~` of this state.
    pub fn mtilde(self) -> i32 {
        match self {
            Dressed::X => 0,
            Dressed::Y => 1,
            Dressed::Z => -1,
        }
    }

    pub fn from_mtilde(m: i32) -> Result<Self> {
        match m {
            0 => Ok(Dressed::X),
            1 => Ok(Dressed::Y),
            -1 => Ok(Dressed::Z),
            other => Err(Error::InvalidQuantumNumber(other)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dressed::X => "x",
            Dressed::Y => "y",
            Dressed::Z => "z",
        }
    }
}

impl std::str::FromStr for Dressed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Dressed::X),
            "y" | "Y" => Ok(Dressed::Y),
            "z" | "Z" => Ok(Dressed::Z),
            other => other
                .parse::<i32>()
                .map_err(|_| Error::InvalidParameter {
                    name: "dressed state",
                    reason: format!("expected x, y, z or -1, 0, 1; got {other:?}"),
                })
                .and_then(Dressed::from_mtilde),
        }
    }
}

/// Zero-order eigensystem of the driven multiplet with quadratic Zeeman
/// shift.
///
/// The coefficients `c_{xi,m}` are those of the closed forms: eigenvectors of
/// `Omega_d F_x + eps (F_z^2 - 1)` in the Zeeman basis, i.e. the frame rotating
/// at the drive frequency before the axis swap. [`DressedBasis::state`] maps
/// them into the doubly rotated frame, where they diagonalize
/// `Omega_d F_z + eps (F_x^2 - 1)` and the noise enters as `delta F_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedBasis {
    pub omega_drive: f64,
    pub epsilon: f64,
    /// `(omega_x, omega_y, omega_z)`.
    pub frequencies: [f64; 3],
    /// Row `xi` holds `(c_{xi,1}, c_{xi,0}, c_{xi,-1})`.
    pub coeffs: [[f64; 3]; 3],
}

/// Closed-form dressed eigensystem, sign fixed by `c_{xi,1} > 0`.
pub fn dressed_basis(omega_drive: f64, epsilon: f64) -> Result<DressedBasis> {
    ensure(
        omega_drive > 0.0 && omega_drive.is_finite(),
        "omega_drive",
        format!("must be > 0, got {omega_drive}"),
    )?;
    ensure(epsilon.is_finite(), "epsilon", "must be finite")?;
    let od = omega_drive;
    let root = (epsilon * epsilon + 4.0 * od * od).sqrt();
    let frequencies = [0.0, 0.5 * (root - epsilon), -0.5 * (epsilon + root)];
    let coeffs = frequencies.map(|w| {
        let od2 = od * od;
        let norm = 2.0 + 4.0 * w * w / (od2 * od2) * (w + epsilon).powi(2) - 4.0 * w / od2 * (0.5 * w + epsilon);
        let c1 = norm.powf(-0.5);
        let c0 = 2f64.sqrt() * w / od * c1;
        let cm1 = -(1.0 - 2.0 * w / od2 * (w + epsilon)) * c1;
        [c1, c0, cm1]
    });
    Ok(DressedBasis {
        omega_drive,
        epsilon,
        frequencies,
        coeffs,
    })
}

/// `Omega_d F_x + eps (F_z^2 - 1)` as a real symmetric matrix.
fn singly_rotated_generator(omega_drive: f64, epsilon: f64) -> Matrix3<f64> {
    let s = omega_drive * FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0, s, 0.0,
        s, -epsilon, s,
        0.0, s, 0.0,
    );
    m
}

/// Dressed eigensystem from direct numerical diagonalization, labelled by
/// matching eigenvalues to the closed forms (X: middle, Y: largest,
/// Z: smallest) with the same sign convention.
pub fn numeric_dressed_basis(omega_drive: f64, epsilon: f64) -> Result<DressedBasis> {
    ensure(
        omega_drive > 0.0,
        "omega_drive",
        format!("must be > 0, got {omega_drive}"),
    )?;
    let eig = SymmetricEigen::new(singly_rotated_generator(omega_drive, epsilon));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // ascending: z, x, y
    let pick = [order[1], order[2], order[0]];
    let frequencies = pick.map(|k| eig.eigenvalues[k]);
    let coeffs = pick.map(|k| {
        let v = eig.eigenvectors.column(k);
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        [sign * v[0], sign * v[1], sign * v[2]]
    });
    Ok(DressedBasis {
        omega_drive,
        epsilon,
        frequencies,
        coeffs,
    })
}

impl DressedBasis {
    pub fn frequency(&self, xi: Dressed) -> f64 {
        self.frequencies[xi.index()]
    }

    pub fn coefficients(&self, xi: Dressed) -> [f64; 3] {
        self.coeffs[xi.index()]
    }

    /// Eigenvector in the Zeeman basis of the singly rotated frame.
    pub fn singly_rotated_state(&self, xi: Dressed) -> CVector3 {
        let c = self.coefficients(xi);
        CVector3::from_fn(|i, _| Complex64::new(c[i], 0.0))
    }

    /// Eigenvector of `Omega_d F_z + eps (F_x^2 - 1)` (doubly rotated frame).
    pub fn state(&self, xi: Dressed) -> CVector3 {
        axis_swap_u2().adjoint().apply(&self.singly_rotated_state(xi))
    }

    /// Transition frequency `omega_{xi'} - omega_xi`.
    pub fn transition_frequency(&self, from: Dressed, to: Dressed) -> f64 {
        self.frequency(to) - self.frequency(from)
    }

    /// `(F_x)_{xi', xi}` in the doubly rotated frame.
    pub fn fx_element(&self, to: Dressed, from: Dressed) -> Complex64 {
        let fx = spin1_operators().fx;
        (self.state(to).adjoint() * fx.matrix() * self.state(from))[(0, 0)]
    }

    /// `|| H0 |xi> - omega_xi |xi> ||` for each state, with H0 taken in the
    /// doubly rotated frame.
    pub fn residuals(&self) -> [f64; 3] {
        let ops = spin1_operators();
        let h0 = ops.fz.matrix() * Complex64::new(self.omega_drive, 0.0)
            + ops.fx2_shifted(0.0).matrix() * Complex64::new(self.epsilon, 0.0)
            - CMatrix3::identity() * Complex64::new(self.epsilon, 0.0);
        Dressed::ALL.map(|xi| {
            let v = self.state(xi);
            (h0 * v - v * Complex64::new(self.frequency(xi), 0.0)).norm()
        })
    }

    /// Largest deviation of `C C^T` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let c = Matrix3::from_fn(|r, k| self.coeffs[r][k]);
        (c * c.transpose() - Matrix3::identity()).abs().max()
    }

    /// Largest entry-wise difference from `other` in coefficients and
    /// frequencies.
    pub fn max_difference(&self, other: &DressedBasis) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            d = d.max((self.frequencies[r] - other.frequencies[r]).abs());
            for k in 0..3 {
                d = d.max((self.coeffs[r][k] - other.coeffs[r][k]).abs());
            }
        }
        d
    }
}

/// First-order transfer `xi -> xi'` between quadratic-Zeeman dressed states.
pub fn cdd_transfer_quadratic(
    basis: &DressedBasis,
    xi: Dressed,
    xi_p: Dressed,
    model: &OuNoiseModel,
    t: f64,
) -> Result<Transfer> {
    if xi == xi_p {
        return Err(Error::SameState);
    }
    let element = basis.fx_element(xi_p, xi).norm_sqr();
    let omega_e = basis.transition_frequency(xi, xi_p);
    let chi = filtered_phase_variance(model, omega_e, t)?;
    Ok(Transfer {
        probability: element * chi,
        perturbative: perturbative(model, omega_e),
    })
}

/// A sampled curve on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Phase of a complex observable (rad), when it has one.
    pub phase: Option<Vec<f64>>,
}

/// `points` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    ensure(
        t_max > 0.0 && t_max.is_finite(),
        "t_max",
        format!("must be > 0, got {t_max}"),
    )?;
    ensure(points >= 2, "points", "need at least two grid points")?;
    let step = t_max / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { t_max } else { step * k as f64 })
        .collect())
}

/// `|rho_{m,m'}(t)|` and its phase on a uniform grid.
pub fn coherence_curve(
    rho0: &DensityMatrix,
    m: i32,
    mp: i32,
    model: &OuNoiseModel,
    epsilon: f64,
    t_max: f64,
    points: usize,
) -> Result<DecayCurve> {
    let times = uniform_grid(t_max, points)?;
    let values: Vec<Complex64> = times
        .iter()
        .map(|&t| coherence_free(rho0, m, mp, t, model, epsilon))
        .collect::<Result<_>>()?;
    Ok(DecayCurve {
        values: values.iter().map(|z| z.norm()).collect(),
        phase: Some(values.iter().map(|z| z.arg()).collect()),
        times,
    })
}

/// Levels participating in an F = 1 coherence, for iteration.
pub fn level_pairs() -> impl Iterator<Item = (i32, i32)> {
    LEVELS
        .into_iter()
        .flat_map(|m| LEVELS.into_iter().map(move |mp| (m, mp)))
}
