use num_complex::Complex64;
use proptest::prelude::*;
use spin1_cdd::analytic::{
    cdd_transfer, cdd_transfer_quadratic, coherence_fast_limit, coherence_free, coherence_slow_limit, dressed_basis,
    numeric_dressed_basis, DensityMatrix, Dressed,
};
use spin1_cdd::noise::{filtered_phase_variance, phase_variance, spectrum, OuNoiseModel};
use spin1_cdd::spinops::{max_entry_norm, CMatrix3, HermitianMatrix3};
use std::f64::consts::PI;

fn pair() -> impl Strategy<Value = (i32, i32)> {
    (
        prop::sample::select(vec![1, 0, -1]),
        prop::sample::select(vec![1, 0, -1]),
    )
        .prop_filter("m != m'", |(a, b)| a != b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // The OU phase variance lies below both the static (v t^2) and white-noise
    // (2 v t / alpha) limits, so the coherence lies above both predictions; it
    // stays below the shifted white-noise decay exp(-(dm)^2 (v/alpha)(t - 1/alpha)).
    #[test]
    fn coherence_between_limits(v in 0.01f64..10.0, a in 0.01f64..10.0, t in 0.0f64..50.0, (m, mp) in pair()) {
        let model = OuNoiseModel::new(v, a).unwrap();
        let rho = DensityMatrix::superposition(m, mp).unwrap();
        let ratio = coherence_free(&rho, m, mp, t, &model, 0.0).unwrap().norm() / rho.element(m, mp).unwrap().norm();
        let slow = coherence_slow_limit(m, mp, t, v).unwrap();
        let fast = coherence_fast_limit(m, mp, t, spectrum(&model, 0.0)).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-15);
        prop_assert!(ratio >= slow.max(fast) * (1.0 - 1e-12));
        let dm = (m - mp) as f64;
        let upper = (-0.5 * dm * dm * (2.0 * v / a) * (t - 1.0 / a)).exp();
        prop_assert!(ratio <= upper * (1.0 + 1e-12));
    }

    #[test]
    fn large_time_slope(v in 0.1f64..5.0, a in 0.1f64..10.0) {
        let model = OuNoiseModel::new(v, a).unwrap();
        let (t1, t2) = (20.0 / a, 40.0 / a);
        let slope = (phase_variance(&model, t2).unwrap() - phase_variance(&model, t1).unwrap()) / (t2 - t1);
        let white = 2.0 * PI * spectrum(&model, 0.0);
        prop_assert!((slope - white).abs() <= 0.01 * white);
    }

    #[test]
    fn short_time_gaussian(v in 0.1f64..5.0, a in 0.1f64..10.0, frac in 0.001f64..0.01) {
        let model = OuNoiseModel::new(v, a).unwrap();
        let t = frac / a;
        let ratio = (-0.5 * phase_variance(&model, t).unwrap()).exp();
        let gaussian = coherence_slow_limit(0, 1, t, v).unwrap();
        prop_assert!((ratio - gaussian).abs() <= 1e-3 * gaussian);
    }

    #[test]
    fn filtered_variance_is_nonnegative_and_even(v in 0.0f64..5.0, a in 0.001f64..20.0, w in 0.0f64..20.0, t in 0.0f64..100.0) {
        let model = OuNoiseModel::new(v, a).unwrap();
        let p = filtered_phase_variance(&model, w, t).unwrap();
        prop_assert!(p >= -1e-12 * v * t * t);
        prop_assert_eq!(p, filtered_phase_variance(&model, -w, t).unwrap());
    }

    #[test]
    fn dressed_basis_invariants(omega in 0.05f64..20.0, ratio in 0.0f64..2.0) {
        let eps = ratio * omega;
        let b = dressed_basis(omega, eps).unwrap();
        prop_assert!(b.residuals().iter().all(|&r| r < 1e-10 * omega.max(1.0)));
        prop_assert!(b.orthonormality_defect() < 1e-10);
        prop_assert!(b.max_difference(&numeric_dressed_basis(omega, eps).unwrap()) < 1e-10 * omega.max(1.0));
        let gap = b.transition_frequency(Dressed::X, Dressed::Y) - b.transition_frequency(Dressed::Z, Dressed::X);
        prop_assert!((gap + eps).abs() < 1e-12 * omega.max(1.0));
        prop_assert!(b.coeffs.iter().all(|row| row[0] > 0.0));
    }

    #[test]
    fn quadratic_transfer_at_zero_epsilon(omega in 0.1f64..5.0, a in 0.01f64..5.0, t in 0.0f64..30.0) {
        let model = OuNoiseModel::new(0.01, a).unwrap();
        let b = dressed_basis(omega, 0.0).unwrap();
        for (xi, xj) in [(Dressed::X, Dressed::Y), (Dressed::X, Dressed::Z), (Dressed::Y, Dressed::X)] {
            let q = cdd_transfer_quadratic(&b, xi, xj, &model, t).unwrap().probability;
            let l = cdd_transfer(omega, xi.mtilde(), xj.mtilde(), &model, t).unwrap().probability;
            prop_assert!((q - l).abs() <= 1e-12 * l.max(1e-12));
        }
    }

    #[test]
    fn propagator_is_unitary(entries in prop::collection::vec(-5.0f64..5.0, 9), t in -10.0f64..10.0) {
        let m = CMatrix3::from_fn(|i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            let re = entries[3 * lo + hi];
            let im = if i == j { 0.0 } else { entries[3 * hi + lo] };
            Complex64::new(re, if i < j { im } else { -im })
        });
        let h = HermitianMatrix3::new(m).unwrap();
        let u = h.propagator(t);
        prop_assert!(u.unitarity_defect() < 1e-12);
        let back = h.propagator(-t) * u;
        prop_assert!(max_entry_norm(&(back.matrix() - CMatrix3::identity())) < 1e-12);
    }
}

#[test]
fn monotone_suppression_figure_one_family() {
    let model = OuNoiseModel::new(1.0, 0.1).unwrap();
    for base in [0.2, 0.5, 1.0, 2.0] {
        for k in 1..=1000 {
            let t = k as f64 * 0.01;
            let p1 = cdd_transfer(base, 0, 1, &model, t).unwrap().probability;
            let p2 = cdd_transfer(2.0 * base, 0, 1, &model, t).unwrap().probability;
            assert!(p2 < p1, "Omega_e {base} -> {}, t = {t}: {p1} vs {p2}", 2.0 * base);
        }
    }
}
