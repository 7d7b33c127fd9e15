//! Laboratory field parameters and their conversion to angular frequencies.
//!
//! Every frequency produced here is in rad/s. Physical constants are part of
//! the configuration so the conversions stay isotope-agnostic.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Static field, field noise and the constants needed to turn them into
/// Zeeman frequencies for an F = 1 manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Mean field along z (T).
    b0: f64,
    /// RMS of the field fluctuation (T).
    delta_b_rms: f64,
    g_f: f64,
    g_s: f64,
    g_i: f64,
    /// Bohr magneton (J/T).
    mu_b: f64,
    /// Nuclear magneton (J/T).
    mu_n: f64,
    /// Reduced Planck constant (J s).
    hbar: f64,
    /// Hyperfine splitting between the F = 2 and F = 1 manifolds (J).
    delta_w_hf: f64,
}

/// Constants for the 87Rb F = 1 ground manifold (CODATA 2018 magnetons,
/// ground-state g-factors and hyperfine splitting from the standard D-line
/// data tables).
///
/// `G_F` is the angular projection factor of the electron spin onto F,
/// [F(F+1) + J(J+1) - I(I+1)] / [2F(F+1)] = -1/4, because the conversion
/// formula carries g_S separately. Together they give the familiar
/// Lande factor g_F g_S ~ -1/2, i.e. about -0.70 MHz/G.
pub mod rb87 {
    pub const G_F: f64 = -0.25;
    pub const G_S: f64 = 2.002_319_304_362_56;
    pub const G_I: f64 = -0.000_995_141_4;
    pub const MU_B: f64 = 9.274_010_078_3e-24;
    pub const MU_N: f64 = 5.050_783_746_1e-27;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Ground hyperfine splitting, h * 6.834 682 610 904 29 GHz.
    pub const DELTA_W_HF: f64 = PLANCK * 6.834_682_610_904_29e9;
}

impl FieldConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b0: f64,
        delta_b_rms: f64,
        g_f: f64,
        g_s: f64,
        g_i: f64,
        mu_b: f64,
        mu_n: f64,
        hbar: f64,
        delta_w_hf: f64,
    ) -> Result<Self> {
        let all = [b0, delta_b_rms, g_f, g_s, g_i, mu_b, mu_n, hbar, delta_w_hf];
        ensure(
            all.iter().all(|v| v.is_finite()),
            "FieldConfig",
            "all fields must be finite",
        )?;
        ensure(b0 >= 0.0, "b0", format!("must be >= 0, got {b0}"))?;
        ensure(
            delta_b_rms >= 0.0,
            "delta_b_rms",
            format!("must be >= 0, got {delta_b_rms}"),
        )?;
        ensure(hbar > 0.0, "hbar", format!("must be > 0, got {hbar}"))?;
        ensure(delta_w_hf > 0.0, "delta_w_hf", format!("must be > 0, got {delta_w_hf}"))?;
        Ok(Self {
            b0,
            delta_b_rms,
            g_f,
            g_s,
            g_i,
            mu_b,
            mu_n,
            hbar,
            delta_w_hf,
        })
    }

    /// 87Rb F = 1 with the given mean field and field-noise RMS (both in tesla).
    pub fn rb87(b0: f64, delta_b_rms: f64) -> Result<Self> {
        use rb87::*;
        Self::new(b0, delta_b_rms, G_F, G_S, G_I, MU_B, MU_N, HBAR, DELTA_W_HF)
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn delta_b_rms(&self) -> f64 {
        self.delta_b_rms
    }

    /// Frequency shift per tesla, g_F (g_S |mu_B| - g_I mu_N) / hbar.
    fn gyromagnetic(&self) -> f64 {
        self.g_f * (self.g_s * self.mu_b.abs() - self.g_i * self.mu_n) / self.hbar
    }
}

/// Mean Larmor frequency omega_0 (rad/s).
pub fn omega0_from_field(cfg: &FieldConfig) -> f64 {
    cfg.gyromagnetic() * cfg.b0
}

/// RMS of the frequency noise (rad/s). Its square is the variance of an
/// [`OuNoiseModel`](crate::noise::OuNoiseModel).
pub fn noise_scale_from_field(cfg: &FieldConfig) -> f64 {
    cfg.gyromagnetic() * cfg.delta_b_rms
}

/// Quadratic Zeeman parameter epsilon (rad/s) from the second-order
/// Breit-Rabi shift, (g_S mu_B - g_I mu_N)^2 B0^2 / (4 dW_hf hbar).
///
/// The field noise does not enter: epsilon is evaluated at the mean field.
pub fn epsilon_from_field(cfg: &FieldConfig) -> f64 {
    let moment = cfg.g_s * cfg.mu_b - cfg.g_i * cfg.mu_n;
    moment * moment * cfg.b0 * cfg.b0 / (4.0 * cfg.delta_w_hf * cfg.hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const GAUSS: f64 = 1e-4;

    #[test]
    fn zero_field_gives_zero_frequencies() {
        let cfg = FieldConfig::rb87(0.0, 0.0).unwrap();
        assert_eq!(omega0_from_field(&cfg), 0.0);
        assert_eq!(noise_scale_from_field(&cfg), 0.0);
        assert_eq!(epsilon_from_field(&cfg), 0.0);
    }

    #[test]
    fn rb87_one_gauss_larmor() {
        // mu_B / h = 1.399 625 MHz/G, times g_S = 2.002 319 gives 2.802 495 MHz/G;
        // the nuclear term adds |g_I| mu_N / h ~ 0.76 Hz/G.
        let cfg = FieldConfig::rb87(GAUSS, 1e-3 * GAUSS).unwrap();
        let f = omega0_from_field(&cfg) / (2.0 * PI);
        assert!((f + 0.700_624e6).abs() < 1.0, "f = {f}");
        let noise = noise_scale_from_field(&cfg) / (2.0 * PI);
        assert!((noise + 700.624).abs() < 1e-3, "noise = {noise}");
    }

    #[test]
    fn lande_factor_in_place_of_projection_doubles_the_frequency() {
        use rb87::*;
        let cfg = FieldConfig::new(GAUSS, 0.0, -0.5, G_S, G_I, MU_B, MU_N, HBAR, DELTA_W_HF).unwrap();
        let f = omega0_from_field(&cfg) / (2.0 * PI);
        assert!((f + 1.401_248e6).abs() < 1.0, "f = {f}");
    }

    #[test]
    fn rb87_one_gauss_quadratic_shift() {
        let cfg = FieldConfig::rb87(GAUSS, 0.0).unwrap();
        let eps = epsilon_from_field(&cfg) / (2.0 * PI);
        // (g_S mu_B B / h)^2 / (4 dW / h) = 2.802 496^2 MHz^2 / 27.338 73 GHz = 287.284 Hz.
        assert!((eps - 287.284).abs() < 0.01, "eps = {eps}");
    }

    #[test]
    fn scaling_relations() {
        let a = FieldConfig::rb87(GAUSS, 3e-3 * GAUSS).unwrap();
        let b = FieldConfig::rb87(2.0 * GAUSS, 3e-3 * GAUSS).unwrap();
        let c = FieldConfig::rb87(4.0 * GAUSS, 3e-3 * GAUSS).unwrap();
        assert_eq!(omega0_from_field(&b), 2.0 * omega0_from_field(&a));
        assert_eq!(epsilon_from_field(&a) / epsilon_from_field(&b), 0.25);
        assert_eq!(epsilon_from_field(&c), 16.0 * epsilon_from_field(&a));
        let ratio = noise_scale_from_field(&a) / omega0_from_field(&a);
        assert!((ratio - 3e-3).abs() < 1e-18);
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(FieldConfig::rb87(-1.0, 0.0).is_err());
        assert!(FieldConfig::rb87(1.0, -1.0).is_err());
        assert!(FieldConfig::rb87(f64::NAN, 0.0).is_err());
        use rb87::*;
        assert!(FieldConfig::new(1.0, 0.0, G_F, G_S, G_I, MU_B, MU_N, 0.0, DELTA_W_HF).is_err());
        assert!(FieldConfig::new(1.0, 0.0, G_F, G_S, G_I, MU_B, MU_N, HBAR, 0.0).is_err());
    }
}
