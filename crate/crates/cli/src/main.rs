//! `spin1-cdd`: decay curves, CDD transfer curves, the dressed spectrum and
//! the validation suite from the command line.
//!
//! Exit status: 0 on success, 1 when `validate` finds a failing check, 2 for
//! invalid arguments or I/O failures.

mod output;

use std::error::Error as StdError;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use spin1_cdd::analytic::{
    cdd_transfer, cdd_transfer_quadratic, coherence_free, dressed_basis, numeric_dressed_basis, uniform_grid,
    DensityMatrix, Dressed, Transfer,
};
use spin1_cdd::montecarlo::{
    lab_step_bound, population_label, rotated_step_bound, simulate_cdd_lab, simulate_cdd_rotated, simulate_free,
    EnsembleResult, Frame, TrajectoryConfig, DEFAULT_SEED,
};
use spin1_cdd::noise::OuNoiseModel;
use spin1_cdd::validate::{run_validation, ValidationOptions};

use output::{write_table, Table};

/// Environment variable that overrides the default master seed.
const SEED_ENV: &str = "SPIN1_CDD_SEED";

type CliResult<T> = Result<T, Box<dyn StdError>>;

#[derive(Parser)]
#[command(
    name = "spin1-cdd",
    version,
    about = "Decoherence of a spin-1 multiplet under OU frequency noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-evolution coherence |rho_{m,m'}(t)| (CSV + manifest)
    Decay(DecayArgs),
    /// Noise-induced transfer between dressed states under CDD (CSV + manifest)
    Cdd(CddArgs),
    /// Dressed eigensystem with quadratic Zeeman shift (JSON)
    Dressed(DressedArgs),
    /// Run the acceptance suite and write a JSON report
    Validate(ValidateArgs),
}

#[derive(Args, Serialize)]
struct McArgs {
    /// Add Monte Carlo columns
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    trajectories: Option<usize>,
    /// Largest integration step (default: the propagator's bound, or the
    /// output spacing for free evolution)
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct DecayArgs {
    /// Noise variance (rad/s)^2
    #[arg(long, default_value_t = 1.0)]
    var: f64,
    /// Inverse correlation time (1/s)
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Quadratic Zeeman parameter (rad/s)
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    m: i32,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    mp: i32,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 51)]
    points: usize,
    /// Divide by |rho_{m,m'}(0)|; the initial state is (|m> + |m'>)/sqrt(2)
    #[arg(long)]
    normalized: bool,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value = "decay.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum McFrame {
    /// Doubly rotated frame (rotating-wave approximation)
    Rotated,
    /// Full lab-frame Hamiltonian with a resonant drive
    Lab,
}

#[derive(Args, Serialize)]
struct CddArgs {
    /// Drive Rabi frequency (rad/s)
    #[arg(long, conflicts_with = "omega_e")]
    omega_d: Option<f64>,
    /// Transition frequency; sets omega_d = omega_e / |m~' - m~| (needs epsilon = 0)
    #[arg(long)]
    omega_e: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0025)]
    var: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Initial dressed state: x, y, z or m~ = 0, 1, -1
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    from: String,
    /// Final dressed state
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    to: String,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Report P / A with A = |(F_x)|^2 var
    #[arg(long)]
    scaled: bool,
    #[arg(long, value_enum, default_value_t = McFrame::Rotated)]
    frame: McFrame,
    /// Bare Larmor frequency for --frame lab (the drive is resonant)
    #[arg(long)]
    omega0: Option<f64>,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value = "cdd.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct DressedArgs {
    #[arg(long, default_value_t = 1.0)]
    omega_d: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ValidateArgs {
    /// Reduced trajectory counts
    #[arg(long)]
    quick: bool,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "validate.json")]
    out: PathBuf,
    /// Scale every spectral density (negative control)
    #[arg(long, hide = true, default_value_t = 1.0)]
    corrupt_spectrum: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decay(a) => decay(a),
        Command::Cdd(a) => cdd(a),
        Command::Dressed(a) => dressed(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Integration step dividing the output spacing `h` evenly, no larger than
/// `dt_max`; returns `(dt, stride)`.
fn aligned_step(h: f64, dt_max: f64) -> (f64, usize) {
    let stride = (h / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (h / stride as f64, stride)
}

fn mc_config(grid: &[f64], dt_max: f64, n: usize, seed: u64, frame: Frame) -> CliResult<TrajectoryConfig> {
    let t_max = *grid.last().ok_or("empty grid")?;
    let (dt, stride) = aligned_step(grid[1] - grid[0], dt_max);
    let cfg = TrajectoryConfig::new(dt, t_max, n, seed, frame)?.with_output_stride(stride)?;
    if cfg.output_times().len() != grid.len() {
        return Err("Monte Carlo grid does not align with the output grid".into());
    }
    Ok(cfg)
}

fn decay(a: &DecayArgs) -> CliResult<ExitCode> {
    let model = OuNoiseModel::new(a.var, a.alpha)?;
    let rho = DensityMatrix::superposition(a.m, a.mp)?;
    let grid = uniform_grid(a.t_max, a.points)?;
    let scale = if a.normalized {
        rho.element(a.m, a.mp)?.norm()
    } else {
        1.0
    };

    let mc: Option<EnsembleResult> = if a.mc.mc {
        let spacing = grid[1] - grid[0];
        let cfg = mc_config(
            &grid,
            a.mc.dt.unwrap_or(spacing),
            a.mc.trajectories.unwrap_or(10_000),
            a.mc.seed,
            Frame::Free,
        )?;
        Some(simulate_free(&rho, &model, a.epsilon, &cfg)?)
    } else {
        None
    };

    let mut header = vec!["t", "abs_coherence", "phase"];
    if mc.is_some() {
        header.extend(["mc_abs", "mc_stderr"]);
    }
    let mut table = Table::new(&header);
    let mc_coherence = mc
        .as_ref()
        .map(|r| r.coherence(a.m, a.mp).expect("free run records coherences"));
    for (k, &t) in grid.iter().enumerate() {
        let c = coherence_free(&rho, a.m, a.mp, t, &model, a.epsilon)?;
        let mut row = vec![t, c.norm() / scale, c.arg()];
        if let Some(series) = &mc_coherence {
            let (z, se) = series[k];
            row.extend([z.norm() / scale, se / scale]);
        }
        table.push(row);
    }
    let seed = a.mc.mc.then_some(a.mc.seed);
    let manifest = write_table(&table, &a.out, "decay", a, seed)?;
    eprintln!("wrote {} and {}", a.out.display(), manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_state(s: &str) -> CliResult<Dressed> {
    Ok(s.parse::<Dressed>()?)
}

fn cdd(a: &CddArgs) -> CliResult<ExitCode> {
    let from = parse_state(&a.from)?;
    let to = parse_state(&a.to)?;
    if from == to {
        return Err(spin1_cdd::Error::SameState.into());
    }
    let omega_d = match (a.omega_d, a.omega_e) {
        (Some(w), None) => w,
        (None, Some(we)) => {
            if a.epsilon != 0.0 {
                return Err("--omega-e needs --epsilon 0; give --omega-d instead".into());
            }
            we / (to.mtilde() - from.mtilde()).abs() as f64
        }
        (None, None) => 1.0,
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let model = OuNoiseModel::new(a.var, a.alpha)?;
    let basis = dressed_basis(omega_d, a.epsilon)?;
    let element = basis.fx_element(to, from).norm_sqr();
    let scale = if a.scaled {
        let amplitude = element * a.var;
        if amplitude <= 0.0 {
            return Err("--scaled needs a nonzero matrix element and variance".into());
        }
        amplitude
    } else {
        1.0
    };
    let grid = uniform_grid(a.t_max, a.points)?;
    let transfer = |t: f64| -> spin1_cdd::Result<Transfer> {
        if a.epsilon == 0.0 {
            cdd_transfer(omega_d, from.mtilde(), to.mtilde(), &model, t)
        } else {
            cdd_transfer_quadratic(&basis, from, to, &model, t)
        }
    };

    let mc = if a.mc.mc {
        let psi0 = basis.state(from);
        let n = a.mc.trajectories.unwrap_or(2_000);
        Some(match a.frame {
            McFrame::Rotated => {
                let bound = rotated_step_bound(&model, omega_d);
                let cfg = mc_config(&grid, a.mc.dt.unwrap_or(bound), n, a.mc.seed, Frame::CddRotated)?;
                simulate_cdd_rotated(&psi0, &model, omega_d, a.epsilon, &cfg)?
            }
            McFrame::Lab => {
                let omega0 = a.omega0.ok_or("--frame lab needs --omega0")?;
                let cfg = mc_config(
                    &grid,
                    a.mc.dt.unwrap_or(lab_step_bound(omega0)),
                    n,
                    a.mc.seed,
                    Frame::CddLab,
                )?;
                simulate_cdd_lab(&psi0, &model, omega0, omega_d, omega0, a.epsilon, &cfg)?
            }
        })
    } else {
        None
    };

    let mut header = vec!["t", "p_analytic", "validity_flag"];
    if mc.is_some() {
        header.extend(["mc_p", "mc_stderr"]);
    }
    let mut table = Table::new(&header);
    let label = population_label(to);
    let mc_series = mc.as_ref().map(|r| {
        let mean = r.series(&label).expect("population column");
        let se = r.stderr_series(&label).unwrap_or_else(|| vec![f64::NAN; mean.len()]);
        (mean, se)
    });
    let mut warned = false;
    for (k, &t) in grid.iter().enumerate() {
        let p = transfer(t)?;
        if !p.perturbative && !warned {
            eprintln!("warning: var / Omega_e^2 > 0.1; first-order results are outside their validity range");
            warned = true;
        }
        let mut row = vec![t, p.probability / scale, if p.perturbative { 1.0 } else { 0.0 }];
        if let Some((mean, se)) = &mc_series {
            row.extend([mean[k] / scale, se[k] / scale]);
        }
        table.push(row);
    }
    let seed = a.mc.mc.then_some(a.mc.seed);
    let manifest = write_table(&table, &a.out, "cdd", a, seed)?;
    eprintln!("wrote {} and {}", a.out.display(), manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn dressed(a: &DressedArgs) -> CliResult<ExitCode> {
    let b = dressed_basis(a.omega_d, a.epsilon)?;
    let numeric = numeric_dressed_basis(a.omega_d, a.epsilon)?;
    let labels = Dressed::ALL.map(|xi| xi.label());
    let by_state = |f: &dyn Fn(Dressed) -> serde_json::Value| {
        Dressed::ALL
            .iter()
            .map(|&xi| (xi.label().to_string(), f(xi)))
            .collect::<serde_json::Map<_, _>>()
    };
    let residuals = b.residuals();
    let report = json!({
        "omega_d": a.omega_d,
        "epsilon": a.epsilon,
        "basis": ["|1,1>", "|1,0>", "|1,-1>"],
        "frequencies": by_state(&|xi| json!(b.frequency(xi))),
        "coefficients": by_state(&|xi| json!(b.coefficients(xi))),
        "residuals": by_state(&|xi| json!(residuals[xi.index()])),
        "orthonormality_defect": b.orthonormality_defect(),
        "numeric_max_difference": b.max_difference(&numeric),
        "fx_abs": by_state(&|to| json!(Dressed::ALL.map(|from| b.fx_element(to, from).norm()))),
        "fx_abs_columns": labels,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn validate(a: &ValidateArgs) -> CliResult<ExitCode> {
    let opts = ValidationOptions {
        seed: a.seed,
        quick: a.quick,
        spectrum_scale: a.corrupt_spectrum,
    };
    let report = run_validation(&opts)?;
    write_file(&a.out, &report.to_json())?;
    for c in &report.checks {
        eprintln!(
            "[{}] criterion {:>2} {}: {:.3e} {} {:.1e}",
            if c.passed { "pass" } else { "FAIL" },
            c.criterion,
            c.name,
            c.measured,
            c.relation,
            c.limit
        );
    }
    if report.passed {
        eprintln!("all checks passed; report in {}", a.out.display());
        Ok(ExitCode::SUCCESS)
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        eprintln!("validation failed: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}
