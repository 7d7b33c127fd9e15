//! Trajectory Monte Carlo: propagate single noise realizations exactly and
//! average over them.
//!
//! Every trajectory draws from its own ChaCha8 stream, selected by the
//! trajectory index under a shared master seed. Trajectories run in parallel
//! in fixed-size batches and are folded into the running mean in index order,
//! so a result depends only on the seed and the configuration, never on the
//! number of worker threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::analytic::{dressed_basis, DensityMatrix, Dressed};
use crate::error::{ensure, Error, Result};
use crate::noise::{integrated_phase_increments, OuNoiseModel, PhasePath};
use crate::spinops::{
    axis_swap_u2, cdd_lab_hamiltonian, cdd_rotated_hamiltonian, lab_to_dressed_frame, CVector3, LEVELS,
};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2718_2818;

/// Steps per fastest time scale required by the propagators.
pub const STEPS_PER_SCALE: f64 = 50.0;

const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Free,
    CddRotated,
    CddLab,
}

/// Integration grid and ensemble size for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    dt: f64,
    t_max: f64,
    n_trajectories: usize,
    master_seed: u64,
    frame: Frame,
    output_stride: usize,
}

impl TrajectoryConfig {
    /// The run covers `[0, t_max]` in `ceil(t_max / dt)` equal steps, so the
    /// step actually taken never exceeds `dt`.
    pub fn new(dt: f64, t_max: f64, n_trajectories: usize, master_seed: u64, frame: Frame) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", format!("must be > 0, got {dt}"))?;
        ensure(
            t_max >= dt && t_max.is_finite(),
            "t_max",
            format!("must be >= dt = {dt}, got {t_max}"),
        )?;
        ensure(n_trajectories >= 1, "n_trajectories", "must be >= 1")?;
        Ok(Self {
            dt,
            t_max,
            n_trajectories,
            master_seed,
            frame,
            output_stride: 1,
        })
    }

    /// Record observables every `stride` steps (and at the last step).
    pub fn with_output_stride(mut self, stride: usize) -> Result<Self> {
        ensure(stride >= 1, "output_stride", "must be >= 1")?;
        self.output_stride = stride;
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_trajectories(&self) -> usize {
        self.n_trajectories
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn output_stride(&self) -> usize {
        self.output_stride
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_max / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Step length actually used, `t_max / n_steps`.
    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps() as f64
    }

    /// Step indices at which observables are recorded.
    pub fn output_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut out: Vec<usize> = (0..=n).step_by(self.output_stride).collect();
        if *out.last().expect("nonempty") != n {
            out.push(n);
        }
        out
    }

    pub fn output_times(&self) -> Vec<f64> {
        let h = self.step();
        let n = self.n_steps();
        self.output_steps()
            .into_iter()
            .map(|k| if k == n { self.t_max } else { k as f64 * h })
            .collect()
    }

    fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }

    fn check_step(&self, bound: f64) -> Result<()> {
        if self.dt > bound * (1.0 + 1e-12) {
            Err(Error::StepTooCoarse { dt: self.dt, bound })
        } else {
            Ok(())
        }
    }
}

/// The random stream of trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Ensemble mean and standard error of a set of observables on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `mean[k][j]`: observable `j` at `times[k]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error of the mean, `None` with fewer than two trajectories.
    pub stderr: Option<Vec<Vec<f64>>>,
    pub n_trajectories: usize,
    /// Largest `| ||psi|| - 1 |` (or trace defect) seen in any trajectory.
    pub max_norm_defect: f64,
}

impl EnsembleResult {
    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Mean of one observable over time.
    pub fn series(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.column(label)?;
        Some(self.mean.iter().map(|row| row[j]).collect())
    }

    /// Standard error of one observable over time.
    pub fn stderr_series(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.column(label)?;
        Some(self.stderr.as_ref()?.iter().map(|row| row[j]).collect())
    }

    /// Mean coherence `rho_{m,m'}` with a conservative standard error of its
    /// modulus, `sqrt(se_re^2 + se_im^2)`, from a [`simulate_free`] result.
    pub fn coherence(&self, m: i32, mp: i32) -> Option<Vec<(Complex64, f64)>> {
        let re = self.column(&coherence_label("re", m, mp))?;
        let im = self.column(&coherence_label("im", m, mp))?;
        Some(
            (0..self.times.len())
                .map(|k| {
                    let z = Complex64::new(self.mean[k][re], self.mean[k][im]);
                    let se = self.stderr.as_ref().map_or(f64::NAN, |s| s[k][re].hypot(s[k][im]));
                    (z, se)
                })
                .collect(),
        )
    }
}

fn coherence_label(part: &str, m: i32, mp: i32) -> String {
    format!("{part}_rho[{m},{mp}]")
}

/// Population label of a dressed state.
pub fn population_label(xi: Dressed) -> String {
    format!("p_{}", xi.label())
}

/// Sequential Welford accumulator over trajectories.
#[derive(Debug, Clone)]
struct Accumulator {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mu, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(sample) {
            let d = x - *mu;
            *mu += d / n;
            *m2 += d * (x - *mu);
        }
    }
}

/// Reduces per-trajectory observables, each flattened as `[time][label]`,
/// in slice order.
pub fn ensemble_reduce(times: Vec<f64>, labels: Vec<String>, trajectories: &[Vec<f64>]) -> Result<EnsembleResult> {
    let mut acc = Accumulator::new(times.len() * labels.len());
    for (i, t) in trajectories.iter().enumerate() {
        ensure(
            t.len() == acc.mean.len(),
            "trajectories",
            format!("trajectory {i} has {} values, expected {}", t.len(), acc.mean.len()),
        )?;
        acc.push(t);
    }
    ensure(acc.count >= 1, "trajectories", "need at least one trajectory")?;
    Ok(finish(times, labels, acc, 0.0))
}

fn finish(times: Vec<f64>, labels: Vec<String>, acc: Accumulator, max_norm_defect: f64) -> EnsembleResult {
    let width = labels.len();
    let n = acc.count;
    let mean = acc.mean.chunks(width).map(<[f64]>::to_vec).collect();
    let stderr = (n >= 2).then(|| {
        let scale = 1.0 / ((n - 1) as f64 * n as f64);
        acc.m2
            .chunks(width)
            .map(|row| row.iter().map(|&m2| (m2.max(0.0) * scale).sqrt()).collect())
            .collect()
    });
    EnsembleResult {
        times,
        labels,
        mean,
        stderr,
        n_trajectories: n,
        max_norm_defect,
    }
}

/// Observables of one trajectory, flattened `[time][label]`.
struct Sample {
    values: Vec<f64>,
    norm_defect: f64,
}

/// Runs `n` trajectories in parallel batches and folds them in index order.
fn run_ensemble<F>(times: Vec<f64>, labels: Vec<String>, n: usize, trajectory: F) -> Result<EnsembleResult>
where
    F: Fn(u64) -> Result<Sample> + Sync,
{
    let mut acc = Accumulator::new(times.len() * labels.len());
    let mut max_defect: f64 = 0.0;
    for start in (0..n).step_by(BATCH) {
        let end = (start + BATCH).min(n);
        let batch: Vec<Result<Sample>> = (start..end).into_par_iter().map(|i| trajectory(i as u64)).collect();
        for s in batch {
            let s = s?;
            max_defect = max_defect.max(s.norm_defect);
            acc.push(&s.values);
        }
    }
    Ok(finish(times, labels, acc, max_defect))
}

/// Free evolution of every `rho_{m,m'}`.
///
/// Per path, `rho_{m,m'}(t) = rho_{m,m'}(0) exp(-i (m - m') zeta(t) - i (m^2 - m'^2) eps t)`
/// with `zeta` from the exact joint sampler, so there is no time-step bias.
/// Observables are labelled `re_rho[m,m']` and `im_rho[m,m']`.
pub fn simulate_free(
    rho0: &DensityMatrix,
    model: &OuNoiseModel,
    epsilon: f64,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    cfg.expect_frame(Frame::Free)?;
    ensure(epsilon.is_finite(), "epsilon", "must be finite")?;
    let times = cfg.output_times();
    let steps = cfg.output_steps();
    let pairs: Vec<(i32, i32)> = LEVELS
        .iter()
        .flat_map(|&m| LEVELS.iter().map(move |&mp| (m, mp)))
        .collect();
    let labels = pairs
        .iter()
        .flat_map(|&(m, mp)| [coherence_label("re", m, mp), coherence_label("im", m, mp)])
        .collect();
    let initial: Vec<Complex64> = pairs
        .iter()
        .map(|&(m, mp)| rho0.element(m, mp))
        .collect::<Result<_>>()?;

    run_ensemble(times.clone(), labels, cfg.n_trajectories, |i| {
        let mut rng = trajectory_rng(cfg.master_seed, i);
        let path = integrated_phase_increments(model, cfg.step(), cfg.n_steps(), &mut rng)?;
        let zeta = path.cumulative_phase();
        let mut values = Vec::with_capacity(times.len() * pairs.len() * 2);
        for (&k, &t) in steps.iter().zip(&times) {
            for (&(m, mp), &r0) in pairs.iter().zip(&initial) {
                let phase = -((m - mp) as f64) * zeta[k] - ((m * m - mp * mp) as f64) * epsilon * t;
                let z = r0 * Complex64::from_polar(1.0, phase);
                values.push(z.re);
                values.push(z.im);
            }
        }
        Ok(Sample {
            values,
            norm_defect: 0.0,
        })
    })
}

/// States populations are projected on: the dressed basis for `Omega_d > 0`,
/// its linear limit `|m~>` otherwise.
pub fn projection_states(omega_drive: f64, epsilon: f64) -> Result<[CVector3; 3]> {
    let basis = if omega_drive > 0.0 {
        dressed_basis(omega_drive, epsilon)?
    } else {
        dressed_basis(1.0, 0.0)?
    };
    Ok(Dressed::ALL.map(|xi| basis.state(xi)))
}

fn populations(states: &[CVector3; 3], psi: &CVector3) -> [f64; 3] {
    states.each_ref().map(|s| s.dotc(psi).norm_sqr())
}

fn normalized(psi0: &CVector3) -> Result<CVector3> {
    let n = psi0.norm();
    ensure(n > 0.0 && n.is_finite(), "psi0", "state vector must be nonzero")?;
    Ok(psi0 / Complex64::new(n, 0.0))
}

/// Largest step allowed in the doubly rotated frame,
/// `min(1/alpha, 2 pi / Omega_d) / 50`.
pub fn rotated_step_bound(model: &OuNoiseModel, omega_drive: f64) -> f64 {
    let drive = if omega_drive > 0.0 {
        TAU / omega_drive
    } else {
        f64::INFINITY
    };
    model.correlation_time().min(drive) / STEPS_PER_SCALE
}

/// Largest step allowed in the lab frame, `2 pi / omega_d / 50`.
pub fn lab_step_bound(omega_drive_freq: f64) -> f64 {
    TAU / omega_drive_freq.abs() / STEPS_PER_SCALE
}

/// Dressed-state populations along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `populations[k]` are `(p_x, p_y, p_z)` at the k-th recorded step.
    pub populations: Vec<[f64; 3]>,
    pub norm_defect: f64,
}

/// Propagates `psi0` through one noise path in the doubly rotated frame,
/// holding the step-mean frequency `delta_zeta / dt` constant over each step.
/// Populations are recorded at steps `0, stride, 2 stride, ...` and at the end.
pub fn propagate_rotated(
    psi0: &CVector3,
    path: &PhasePath,
    omega_drive: f64,
    epsilon: f64,
    output_stride: usize,
) -> Result<TrajectoryRecord> {
    ensure(output_stride >= 1, "output_stride", "must be >= 1")?;
    let states = projection_states(omega_drive, epsilon)?;
    let mut psi = normalized(psi0)?;
    let n = path.steps.len();
    let mut out = vec![populations(&states, &psi)];
    for (k, step) in path.steps.iter().enumerate() {
        let h = cdd_rotated_hamiltonian(omega_drive, step.delta_zeta / path.dt, epsilon);
        psi = h.propagator(path.dt).apply(&psi);
        if (k + 1) % output_stride == 0 || k + 1 == n {
            out.push(populations(&states, &psi));
        }
    }
    Ok(TrajectoryRecord {
        populations: out,
        norm_defect: (psi.norm() - 1.0).abs(),
    })
}

fn population_labels() -> Vec<String> {
    Dressed::ALL.iter().map(|&xi| population_label(xi)).collect()
}

fn flatten(record: TrajectoryRecord) -> Sample {
    Sample {
        values: record.populations.into_iter().flatten().collect(),
        norm_defect: record.norm_defect,
    }
}

/// Dressed-state populations under CDD in the doubly rotated frame,
/// `H = Omega_d F_z + eps (F_x^2 - 1) + delta F_x`. `psi0` is given in that
/// frame. Observables are labelled `p_x`, `p_y`, `p_z`.
pub fn simulate_cdd_rotated(
    psi0: &CVector3,
    model: &OuNoiseModel,
    omega_drive: f64,
    epsilon: f64,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    cfg.expect_frame(Frame::CddRotated)?;
    ensure(
        omega_drive >= 0.0 && omega_drive.is_finite(),
        "omega_drive",
        "must be >= 0",
    )?;
    ensure(epsilon.is_finite(), "epsilon", "must be finite")?;
    cfg.check_step(rotated_step_bound(model, omega_drive))?;
    normalized(psi0)?;
    run_ensemble(cfg.output_times(), population_labels(), cfg.n_trajectories, |i| {
        let mut rng = trajectory_rng(cfg.master_seed, i);
        let path = integrated_phase_increments(model, cfg.step(), cfg.n_steps(), &mut rng)?;
        propagate_rotated(psi0, &path, omega_drive, epsilon, cfg.output_stride).map(flatten)
    })
}

/// Propagates `psi0` (doubly rotated frame) through one noise path with the
/// full lab-frame Hamiltonian, cosine sampled at each step midpoint, and
/// records dressed populations after mapping back to the doubly rotated frame.
pub fn propagate_lab(
    psi0: &CVector3,
    path: &PhasePath,
    omega0: f64,
    omega_drive_rabi: f64,
    omega_drive_freq: f64,
    epsilon: f64,
    output_stride: usize,
) -> Result<TrajectoryRecord> {
    ensure(output_stride >= 1, "output_stride", "must be >= 1")?;
    let states = projection_states(omega_drive_rabi, epsilon)?;
    let psi0 = normalized(psi0)?;
    let mut psi = axis_swap_u2().apply(&psi0);
    let n = path.steps.len();
    let dt = path.dt;
    let mut out = vec![populations(&states, &psi0)];
    for (k, step) in path.steps.iter().enumerate() {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = cdd_lab_hamiltonian(
            omega0,
            omega_drive_rabi,
            omega_drive_freq,
            step.delta_zeta / dt,
            epsilon,
            t_mid,
        );
        psi = h.propagator(dt).apply(&psi);
        if (k + 1) % output_stride == 0 || k + 1 == n {
            let t = (k + 1) as f64 * dt;
            out.push(populations(&states, &lab_to_dressed_frame(&psi, omega_drive_freq, t)));
        }
    }
    Ok(TrajectoryRecord {
        populations: out,
        norm_defect: (psi.norm() - 1.0).abs(),
    })
}

/// Lab-frame counterpart of [`simulate_cdd_rotated`] without the
/// rotating-wave approximation. The drive must be resonant, `omega_d = omega0`.
pub fn simulate_cdd_lab(
    psi0: &CVector3,
    model: &OuNoiseModel,
    omega0: f64,
    omega_drive_rabi: f64,
    omega_drive_freq: f64,
    epsilon: f64,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleResult> {
    cfg.expect_frame(Frame::CddLab)?;
    ensure(
        omega_drive_freq > 0.0 && omega_drive_freq.is_finite(),
        "omega_drive_freq",
        "must be > 0",
    )?;
    ensure(
        (omega_drive_freq - omega0).abs() <= 1e-12 * omega0.abs(),
        "omega_drive_freq",
        format!("drive must be resonant with omega0 = {omega0}, got {omega_drive_freq}"),
    )?;
    ensure(omega_drive_rabi >= 0.0, "omega_drive_rabi", "must be >= 0")?;
    ensure(epsilon.is_finite(), "epsilon", "must be finite")?;
    cfg.check_step(lab_step_bound(omega_drive_freq))?;
    normalized(psi0)?;
    run_ensemble(cfg.output_times(), population_labels(), cfg.n_trajectories, |i| {
        let mut rng = trajectory_rng(cfg.master_seed, i);
        let path = integrated_phase_increments(model, cfg.step(), cfg.n_steps(), &mut rng)?;
        propagate_lab(
            psi0,
            &path,
            omega0,
            omega_drive_rabi,
            omega_drive_freq,
            epsilon,
            cfg.output_stride,
        )
        .map(flatten)
    })
}
