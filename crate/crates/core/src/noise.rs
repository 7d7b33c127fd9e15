//! Ornstein-Uhlenbeck frequency noise.
//!
//! The fluctuation `delta_omega(t)` is a zero-mean stationary Gaussian process
//! with autocorrelation `var * exp(-alpha |tau|)` and Lorentzian spectrum
//! `S(omega) = alpha var / (pi (alpha^2 + omega^2))`, normalized so that
//! `G(tau) = int S(omega) exp(i omega tau) d omega`.
//!
//! Two integrated statistics drive every prediction in the crate:
//!
//! * the accumulated phase `zeta(t) = int_0^t delta_omega`, whose variance
//!   sets the dephasing of Zeeman coherences ([`phase_variance`]);
//! * the demodulated integral `chi(t) = int_0^t delta_omega e^{i Omega_e t'}`,
//!   whose mean square sets first-order transfer between dressed states
//!   ([`filtered_phase_variance`]).
//!
//! The samplers are exact: they draw from the process's transition law, so
//! no step-size bias enters the Monte Carlo oracle.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Stationary OU statistics of the frequency fluctuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuNoiseModel {
    /// Stationary variance var[delta_omega], (rad/s)^2.
    variance: f64,
    /// Inverse correlation time (1/s).
    alpha: f64,
}

impl OuNoiseModel {
    pub fn new(variance: f64, alpha: f64) -> Result<Self> {
        ensure(
            variance.is_finite() && variance >= 0.0,
            "variance",
            format!("must be finite and >= 0, got {variance}"),
        )?;
        ensure(
            alpha.is_finite() && alpha > 0.0,
            "alpha",
            format!("must be finite and > 0, got {alpha}"),
        )?;
        Ok(Self { variance, alpha })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn correlation_time(&self) -> f64 {
        1.0 / self.alpha
    }
}

/// Lorentzian spectral density `S(omega)`.
pub fn spectrum(model: &OuNoiseModel, omega: f64) -> f64 {
    let a = model.alpha;
    a * model.variance / (PI * (a * a + omega * omega))
}

/// Autocorrelation `G(tau) = var e^{-alpha |tau|}`.
pub fn autocorrelation(model: &OuNoiseModel, tau: f64) -> f64 {
    model.variance * (-model.alpha * tau.abs()).exp()
}

/// `x + e^{-x} - 1`, accurate for small `x`.
fn ramp_minus_decay(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{n>=2} (-x)^n / n!
        let mut term = x * x / 2.0;
        let mut sum = term;
        for n in 3..20 {
            term *= -x / n as f64;
            sum += term;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// `<zeta^2(t)> = (2 var / alpha^2) (alpha t + e^{-alpha t} - 1)`.
pub fn phase_variance(model: &OuNoiseModel, t: f64) -> Result<f64> {
    check_time(t)?;
    let a = model.alpha;
    Ok(2.0 * model.variance / (a * a) * ramp_minus_decay(a * t))
}

/// `<|chi(t)|^2>` for `chi(t) = int_0^t delta_omega(t') e^{i Omega_e t'} dt'`.
///
/// Reduces to [`phase_variance`] at `omega_e = 0`, and grows at the long-time
/// rate `2 pi S(omega_e)`.
pub fn filtered_phase_variance(model: &OuNoiseModel, omega_e: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if omega_e == 0.0 {
        return phase_variance(model, t);
    }
    let a = model.alpha;
    let w = omega_e;
    let d = a * a + w * w;
    let decay = (-a * t).exp();
    let (sin, cos) = (w * t).sin_cos();
    let bracket = a * t + (w * w - a * a) / d * (1.0 - decay * cos) - 2.0 * a * w * decay * sin / d;
    Ok(2.0 * model.variance / d * bracket)
}

/// Estimate of the sinc^2-filter integral with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPhaseVariance {
    pub value: f64,
    /// Bound on the absolute error (panel error estimates plus the tail
    /// remainder).
    pub error: f64,
}

/// `<zeta^2(t)> = 2 int_0^inf [sin(omega t/2) / (omega/2)]^2 S(omega) d omega`
/// by adaptive quadrature, for any spectral density `spectral_fn`.
///
/// The kernel is integrated panel by panel (one kernel period per initial
/// panel) on `[0, W]` with `W = 50/t` doubled until the tail is negligible.
/// Beyond `W` the rapidly oscillating `sin^2` is replaced by its mean 1/2 and
/// the remainder bounded by `8 S(W) / (W^2 t)`, which holds whenever
/// `S(omega)/omega^2` decreases past `W`.
///
/// `quadrature_tol` is a relative tolerance on the result.
pub fn phase_variance_from_spectrum<S: Fn(f64) -> f64>(
    spectral_fn: S,
    t: f64,
    quadrature_tol: f64,
) -> Result<SpectralPhaseVariance> {
    check_time(t)?;
    ensure(quadrature_tol > 0.0, "quadrature_tol", "must be > 0")?;
    if t == 0.0 {
        return Ok(SpectralPhaseVariance { value: 0.0, error: 0.0 });
    }
    let kernel = |w: f64| {
        let x = 0.5 * w * t;
        let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        2.0 * t * t * sinc * sinc * spectral_fn(w)
    };
    let period = 2.0 * PI / t;
    let panel_opts = |len: f64, abs_tol: f64| QuadOptions {
        abs_tol,
        rel_tol: 0.1 * quadrature_tol,
        initial_panels: ((len / period).ceil() as usize).clamp(1, 1 << 22),
        max_intervals: 1 << 23,
    };

    let mut upper = 50.0 / t;
    let first = integrate(kernel, 0.0, upper, &panel_opts(upper, 0.0))?;
    let mut value = first.value;
    let mut error = first.error;

    // tail with sin^2 -> 1/2: int_W^inf 4 S / w^2 = (4/W) int_0^1 S(W/u) du
    let tail = |w_max: f64| -> Result<(f64, f64)> {
        let avg = integrate(
            |u: f64| if u == 0.0 { 0.0 } else { spectral_fn(w_max / u) },
            0.0,
            1.0,
            &QuadOptions {
                rel_tol: 1e-8,
                ..Default::default()
            },
        )?;
        let mean = 4.0 / w_max * avg.value;
        let remainder = 8.0 * spectral_fn(w_max) / (w_max * w_max * t);
        Ok((mean, remainder + 4.0 / w_max * avg.error))
    };

    let mut doublings = 0;
    loop {
        let (tail_mean, tail_err) = tail(upper)?;
        let budget = 0.5 * quadrature_tol * (value + tail_mean).abs();
        if tail_err <= budget {
            value += tail_mean;
            error += tail_err;
            break;
        }
        doublings += 1;
        if doublings > 40 {
            return Err(Error::QuadratureNotConverged {
                estimate: value + tail_mean,
                error: error + tail_err,
            });
        }
        let panel = integrate(kernel, upper, 2.0 * upper, &panel_opts(upper, 0.1 * budget))?;
        value += panel.value;
        error += panel.error;
        upper *= 2.0;
    }

    if error > quadrature_tol * value.abs() {
        return Err(Error::QuadratureNotConverged { estimate: value, error });
    }
    Ok(SpectralPhaseVariance { value, error })
}

/// Sampled OU path `delta_omega(k dt)`, k = 0..=n_steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OuTrajectory {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Exact stationary OU sampler: `x_0 ~ N(0, var)`,
/// `x_{k+1} = x_k e^{-alpha dt} + sqrt(var (1 - e^{-2 alpha dt})) xi_k`.
pub fn sample_trajectory<R: Rng + ?Sized>(
    model: &OuNoiseModel,
    dt: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<OuTrajectory> {
    ensure(dt > 0.0 && dt.is_finite(), "dt", format!("must be > 0, got {dt}"))?;
    ensure(n_steps >= 1, "n_steps", "must be >= 1")?;
    let sd = model.variance.sqrt();
    let decay = (-model.alpha * dt).exp();
    let kick = (model.variance * -(-2.0 * model.alpha * dt).exp_m1()).sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = sd * rng.sample::<f64, _>(StandardNormal);
    values.push(x);
    for _ in 0..n_steps {
        x = x * decay + kick * rng.sample::<f64, _>(StandardNormal);
        values.push(x);
    }
    Ok(OuTrajectory { dt, values })
}

/// One exact step of the joint (frequency, accumulated phase) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseIncrement {
    /// `delta_omega` at the end of the step.
    pub delta_omega: f64,
    /// `int delta_omega dt'` over the step.
    pub delta_zeta: f64,
}

/// A path of the OU frequency and its integral on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    pub dt: f64,
    /// `delta_omega(0)`.
    pub initial: f64,
    pub steps: Vec<PhaseIncrement>,
}

impl PhasePath {
    /// Accumulated phase `zeta(k dt)` for k = 0..=n.
    pub fn cumulative_phase(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut z = 0.0;
        out.push(z);
        for s in &self.steps {
            z += s.delta_zeta;
            out.push(z);
        }
        out
    }

    /// Mean frequency over each step, `delta_zeta / dt`.
    pub fn step_means(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(move |s| s.delta_zeta / self.dt)
    }

    /// Merges `factor` consecutive steps into one. The result is an exact
    /// sample of the same process on the coarser grid.
    pub fn coarsen(&self, factor: usize) -> PhasePath {
        assert!(
            factor >= 1 && self.steps.len().is_multiple_of(factor),
            "factor must divide the step count"
        );
        let steps = self
            .steps
            .chunks(factor)
            .map(|c| PhaseIncrement {
                delta_omega: c[c.len() - 1].delta_omega,
                delta_zeta: c.iter().map(|s| s.delta_zeta).sum(),
            })
            .collect();
        PhasePath {
            dt: self.dt * factor as f64,
            initial: self.initial,
            steps,
        }
    }
}

/// `2x - 3 + 4 e^{-x} - e^{-2x}`, accurate for small `x`.
fn integral_variance_shape(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{n>=3} (-1)^n (4 - 2^n) x^n / n!
        let mut sum = 0.0;
        let mut xn_over_fact = x * x / 2.0;
        let mut pow2 = 4.0;
        for n in 3..40 {
            xn_over_fact *= x / n as f64;
            pow2 *= 2.0;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (4.0 - pow2) * xn_over_fact;
        }
        sum
    } else {
        let e1 = (-x).exp_m1();
        2.0 * (x + e1) - e1 * e1
    }
}

/// Per-step conditional moments of `(x_{k+1}, I_k)` given `x_k`:
/// `x_{k+1} = a x_k + l11 z1`, `I_k = m x_k + l21 z1 + l22 z2`.
#[derive(Debug, Clone, Copy)]
struct JointStep {
    decay: f64,
    mean_factor: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl JointStep {
    fn new(model: &OuNoiseModel, dt: f64) -> Self {
        let v = model.variance;
        let a = model.alpha;
        let x = a * dt;
        let one_minus_decay = -(-x).exp_m1();
        let decay = 1.0 - one_minus_decay;
        let var_x = v * -(-2.0 * x).exp_m1();
        let cov = v * one_minus_decay * one_minus_decay / a;
        // Var(I | x_k) - Cov^2 / Var(x_{k+1} | x_k)
        //   = (v / a^2) [g(x) - (1 - e^{-x})^3 / (1 + e^{-x})]
        let schur = v / (a * a) * (integral_variance_shape(x) - one_minus_decay.powi(3) / (1.0 + decay));
        let l11 = var_x.sqrt();
        let l21 = if l11 > 0.0 { cov / l11 } else { 0.0 };
        Self {
            decay,
            mean_factor: one_minus_decay / a,
            l11,
            l21,
            l22: schur.max(0.0).sqrt(),
        }
    }
}

/// Exact joint sampling of the OU frequency and its integral over each step,
/// conditioned on the frequency at the start of the step.
///
/// With `a = e^{-alpha dt}` and `v = var`, the conditional law of
/// `(x_{k+1}, I_k)` given `x_k` is Gaussian with means `a x_k` and
/// `(1 - a) x_k / alpha` and covariance
///
/// ```text
/// Var x_{k+1}  = v (1 - a^2)
/// Cov          = v (1 - a)^2 / alpha
/// Var I_k      = (v / alpha^2) (2 alpha dt - 3 + 4a - a^2)
/// ```
pub fn integrated_phase_increments<R: Rng + ?Sized>(
    model: &OuNoiseModel,
    dt: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<PhasePath> {
    ensure(dt > 0.0 && dt.is_finite(), "dt", format!("must be > 0, got {dt}"))?;
    let step = JointStep::new(model, dt);
    let mut x = model.variance.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let initial = x;
    let mut steps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let delta_zeta = step.mean_factor * x + step.l21 * z1 + step.l22 * z2;
        x = step.decay * x + step.l11 * z1;
        steps.push(PhaseIncrement {
            delta_omega: x,
            delta_zeta,
        });
    }
    Ok(PhasePath { dt, initial, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ou(v: f64, a: f64) -> OuNoiseModel {
        OuNoiseModel::new(v, a).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(OuNoiseModel::new(-1.0, 1.0).is_err());
        assert!(OuNoiseModel::new(1.0, 0.0).is_err());
        assert!(OuNoiseModel::new(1.0, f64::NAN).is_err());
        assert!(OuNoiseModel::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn spectrum_values() {
        let inv_2pi = 1.0 / (2.0 * PI);
        assert!((spectrum(&ou(1.0, 2.0), 0.0) - inv_2pi).abs() < 1e-15);
        assert!((spectrum(&ou(1.0, 1.0), 1.0) - inv_2pi).abs() < 1e-15);
        let m = ou(2.3, 0.7);
        for w in [0.1, 1.7, 33.0] {
            assert_eq!(spectrum(&m, w), spectrum(&m, -w));
        }
    }

    #[test]
    fn autocorrelation_values() {
        let m = ou(1.0, 1.0);
        assert_eq!(autocorrelation(&m, 0.0), 1.0);
        assert!((autocorrelation(&m, 1.0) - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(autocorrelation(&m, 0.4), autocorrelation(&m, -0.4));
    }

    #[test]
    fn phase_variance_values() {
        let m = ou(1.0, 1.0);
        assert_eq!(phase_variance(&m, 0.0).unwrap(), 0.0);
        assert!((phase_variance(&m, 1.0).unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-15);
        let t = 1e3;
        assert!((phase_variance(&m, t).unwrap() - (2.0 * t - 2.0)).abs() < 1e-9);
        assert!(matches!(phase_variance(&m, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        let m = ou(1.0, 1.0);
        let h = 1e-12;
        let below = phase_variance(&m, 0.1 - h).unwrap();
        let above = phase_variance(&m, 0.1 + h).unwrap();
        let slope = 2.0 * (1.0 - (-0.1f64).exp());
        assert!((above - below - 2.0 * h * slope).abs() < 1e-16);
        for x in [0.4999f64, 0.5001] {
            let direct = 2.0 * x - 3.0 + 4.0 * (-x).exp() - (-2.0 * x).exp();
            assert!((integral_variance_shape(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn filtered_variance_reduces_to_phase_variance() {
        let m = ou(1.7, 0.3);
        for t in [0.0, 0.01, 1.0, 12.0] {
            assert_eq!(
                filtered_phase_variance(&m, 0.0, t).unwrap(),
                phase_variance(&m, t).unwrap()
            );
            let near = filtered_phase_variance(&m, 1e-7, t).unwrap();
            assert!((near - phase_variance(&m, t).unwrap()).abs() < 1e-9 * (1.0 + near));
        }
        assert_eq!(filtered_phase_variance(&m, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn filtered_variance_is_even_in_frequency() {
        let m = ou(1.0, 0.4);
        for t in [0.3, 5.0] {
            let p = filtered_phase_variance(&m, 1.3, t).unwrap();
            let n = filtered_phase_variance(&m, -1.3, t).unwrap();
            assert!((p - n).abs() < 1e-15 * p.max(1.0));
        }
    }

    #[test]
    fn filtered_variance_long_time_slope() {
        for (a, w) in [(0.1, 1.0), (0.1, 2.0), (10.0, 1.0), (1.0, 3.0)] {
            let m = ou(1.0, a);
            let t = 12.0 / a;
            let h = 1e-3 / a;
            let slope = (filtered_phase_variance(&m, w, t + h).unwrap()
                - filtered_phase_variance(&m, w, t - h).unwrap())
                / (2.0 * h);
            let rate = 2.0 * PI * spectrum(&m, w);
            assert!(
                (slope / rate - 1.0).abs() < 0.01,
                "alpha {a} omega {w}: {slope} vs {rate}"
            );
        }
    }

    #[test]
    fn spectral_quadrature_matches_closed_form() {
        let m = ou(1.0, 1.0);
        let s = |w: f64| spectrum(&m, w);
        assert_eq!(phase_variance_from_spectrum(s, 0.0, 1e-8).unwrap().value, 0.0);
        for t in [0.1, 1.0, 10.0] {
            let q = phase_variance_from_spectrum(s, t, 1e-9).unwrap();
            let exact = phase_variance(&m, t).unwrap();
            assert!((q.value / exact - 1.0).abs() < 1e-7, "t={t}: {} vs {exact}", q.value);
            assert!(q.error <= 1e-9 * q.value);
        }
    }

    #[test]
    fn zero_variance_samples_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ou(0.0, 1.0);
        let traj = sample_trajectory(&m, 0.1, 50, &mut rng).unwrap();
        assert!(traj.values.iter().all(|&v| v == 0.0));
        let path = integrated_phase_increments(&m, 0.1, 50, &mut rng).unwrap();
        assert_eq!(path.initial, 0.0);
        assert!(path.steps.iter().all(|s| s.delta_omega == 0.0 && s.delta_zeta == 0.0));
    }

    #[test]
    fn samplers_are_reproducible() {
        let m = ou(1.0, 0.5);
        let a = sample_trajectory(&m, 0.1, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_trajectory(&m, 0.1, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let a = integrated_phase_increments(&m, 0.1, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = integrated_phase_increments(&m, 0.1, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampler_rejects_bad_steps() {
        let m = ou(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_trajectory(&m, 0.0, 10, &mut rng).is_err());
        assert!(sample_trajectory(&m, 0.1, 0, &mut rng).is_err());
        assert!(integrated_phase_increments(&m, -0.1, 10, &mut rng).is_err());
    }

    #[test]
    fn coarsen_preserves_total_phase() {
        let m = ou(1.0, 1.0);
        let path = integrated_phase_increments(&m, 0.05, 40, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let coarse = path.coarsen(4);
        assert_eq!(coarse.steps.len(), 10);
        assert!((coarse.dt - 0.2).abs() < 1e-15);
        let fine = path.cumulative_phase();
        let c = coarse.cumulative_phase();
        for (k, z) in c.iter().enumerate() {
            assert!((z - fine[4 * k]).abs() < 1e-12);
        }
        assert_eq!(coarse.steps[9].delta_omega, path.steps[39].delta_omega);
    }
}
