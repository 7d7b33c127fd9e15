use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spin1_cdd::noise::{
    autocorrelation, integrated_phase_increments, phase_variance, sample_trajectory, spectrum, OuNoiseModel,
};
use spin1_cdd::quadrature::{integrate, QuadOptions};
use std::f64::consts::PI;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn stationary_variance_and_lag_one_correlation() {
    let model = OuNoiseModel::new(2.0, 0.5).unwrap();
    let dt = 0.3;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut squares = Vec::new();
    let mut products = Vec::new();
    for _ in 0..4000 {
        let path = sample_trajectory(&model, dt, 5, &mut rng).unwrap();
        let v = &path.values;
        squares.push(v[3] * v[3]);
        products.push(v[3] * v[4]);
    }
    let (var, se) = mean_and_se(&squares);
    assert!((var - 2.0).abs() < 3.0 * se, "{var} +- {se}");
    let (cov, se) = mean_and_se(&products);
    let expected = autocorrelation(&model, dt);
    assert!((cov - expected).abs() < 3.0 * se, "{cov} vs {expected} +- {se}");
}

#[test]
fn integrated_phase_variance_matches_closed_form() {
    let model = OuNoiseModel::new(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // phase at t = 1 from 20 steps of the joint sampler
    let squares: Vec<f64> = (0..20_000)
        .map(|_| {
            let path = integrated_phase_increments(&model, 0.05, 20, &mut rng).unwrap();
            path.cumulative_phase()[20].powi(2)
        })
        .collect();
    let (var, se) = mean_and_se(&squares);
    let exact = phase_variance(&model, 1.0).unwrap();
    assert!((exact - 0.735_758_9).abs() < 1e-7);
    assert!((var - exact).abs() < 3.0 * se, "{var} vs {exact} +- {se}");
}

#[test]
fn single_coarse_step_has_exact_variance() {
    // the joint sampler is exact at any step size
    let model = OuNoiseModel::new(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let squares: Vec<f64> = (0..20_000)
        .map(|_| {
            integrated_phase_increments(&model, 2.0, 1, &mut rng).unwrap().steps[0]
                .delta_zeta
                .powi(2)
        })
        .collect();
    let (var, se) = mean_and_se(&squares);
    let exact = phase_variance(&model, 2.0).unwrap();
    assert!((var - exact).abs() < 3.0 * se, "{var} vs {exact} +- {se}");
}

#[test]
fn coarsened_path_keeps_the_phase() {
    let model = OuNoiseModel::new(0.7, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let path = integrated_phase_increments(&model, 0.1, 12, &mut rng).unwrap();
    let coarse = path.coarsen(3);
    assert_eq!(coarse.steps.len(), 4);
    assert!((coarse.dt - 0.3).abs() < 1e-15);
    let fine = path.cumulative_phase();
    for (k, z) in coarse.cumulative_phase().into_iter().enumerate() {
        assert!((z - fine[3 * k]).abs() < 1e-14);
    }
    assert_eq!(coarse.steps[3].delta_omega, path.steps[11].delta_omega);
}

#[test]
fn wiener_khinchin() {
    // S(w) = (1/pi) int_0^inf G(tau) cos(w tau) dtau
    for (v, a) in [(1.0, 1.0), (2.5, 0.1), (0.3, 10.0)] {
        let model = OuNoiseModel::new(v, a).unwrap();
        for w in [0.0, 0.5, 3.0] {
            let opts = QuadOptions {
                initial_panels: 64,
                rel_tol: 1e-12,
                ..Default::default()
            };
            let r = integrate(
                |tau| autocorrelation(&model, tau) * (w * tau).cos(),
                0.0,
                60.0 / a,
                &opts,
            )
            .unwrap();
            let s = r.value / PI;
            let exact = spectrum(&model, w);
            assert!((s - exact).abs() <= 1e-6 * exact, "v={v} a={a} w={w}: {s} vs {exact}");
        }
    }
}
