//! Regression baselines for the frozen constants in `calibration`. Each test
//! re-measures a small slice of the original calibration run and checks it
//! still sits under the stored constant.

use num_complex::Complex64;

use twistmoments::arith::{primes_up_to, Discriminant};
use twistmoments::calibration::*;
use twistmoments::lmoments::{bounded_random_coefficients, default_ell, fourier_dominant_term_check, mollified_second_diagonal};
use twistmoments::mollifier::MollifierScheme;
use twistmoments::randmodel::sigma_circle_max;
use twistmoments::special::oscillatory::{bessel_average_check, stationary_phase_check, Phase, SaddleParams};
use twistmoments::special::{stirling_ratio_check, OscillatoryTransforms, WeightFunction};

#[test]
fn stirling_ratio() {
    for k in [6.0, 50.0, 1000.0] {
        for (re, im) in [(0.5, 0.0), (1.0, 3.0), (-1.0, 2.0), (2.0, -5.0), (0.25, 10.0)] {
            let c = stirling_ratio_check(Complex64::new(re, im), k).unwrap();
            assert!(c.within, "k={k} s={re}+{im}i: {c:?}");
        }
    }
}

#[test]
fn bessel_average() {
    let tr = OscillatoryTransforms::default();
    for t in [1.0, 20.0, 80.0] {
        let c = bessel_average_check(&tr, 40, 1, 2, t).unwrap();
        let ratio = c.residual / (c.budget / BESSEL_AVERAGE_C);
        assert!(ratio <= BESSEL_AVERAGE_C, "t={t}: ratio {ratio:e}");
    }
}

#[test]
fn stationary_phase() {
    let h = WeightFunction::bump(0.2, 3.0).unwrap();
    let hf = move |t: f64| h.eval(t);
    let f = |t: f64| 2.0 * t.sqrt() - t;
    let df = |t: f64| 1.0 / t.sqrt() - 1.0;
    let d2f = |t: f64| -0.5 * t.powf(-1.5);
    let phase = Phase { f: &f, df: &df, d2f: &d2f };
    for v in [1.0, 10.0, 100.0] {
        let p = SaddleParams {
            x: 1.0,
            y: 1.0,
            v,
            v1: 2.8,
            q: 1.0,
        };
        let c = stationary_phase_check(&hf, &phase, (0.2, 3.0), 1.0, &p).unwrap();
        assert!(c.within, "v={v}: {c:?}");
    }
}

#[test]
fn sigma_on_circles() {
    let d = Discriminant::new(5).unwrap();
    let s = Complex64::new(1.0 / 50f64.ln(), 0.0);
    for y in [23.0f64, 50.0] {
        let primes: Vec<u64> = primes_up_to(y.powf(std::f64::consts::E) as u64)
            .into_iter()
            .filter(|&p| p as f64 >= y)
            .collect();
        let m = sigma_circle_max(&primes, &d, s, s);
        assert!(m <= MOLLIFIED_LOCAL_C, "y={y}: {m:e}");
    }
}

#[test]
fn diagonal_lower_bound() {
    let phi = WeightFunction::default();
    for log_k in [12.5, 30.0, 100.0] {
        let scheme = MollifierScheme::with_defaults(log_k).unwrap();
        let r = mollified_second_diagonal(&scheme, 1e3, &phi, &phi).unwrap();
        assert!(r.product * log_k.sqrt() >= DIAGONAL_LOWER_C, "log K = {log_k}: {r:?}");
        assert!(r.within);
    }
}

#[test]
fn fourier_dominant() {
    for k in [1e4, 3e4] {
        let ell = default_ell(k);
        let ones = vec![1.0; 20 * ell as usize + 1];
        let random = bounded_random_coefficients(3, 20 * ell as usize);
        for (name, c) in [("constant", &ones), ("random", &random)] {
            for alpha in [0.0, -0.5] {
                let r = fourier_dominant_term_check(c, k, alpha, ell).unwrap();
                assert!(r.residual * k.sqrt() <= FOURIER_DOMINANT_C, "{name} k={k}: {r:?}");
            }
        }
    }
}
