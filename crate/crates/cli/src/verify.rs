use num_complex::Complex64;

use twistmoments::arith::{
    enumerate_odd_fundamental, factor, gcd, jacobi, kronecker, primes_up_to, Discriminant, Sign,
};
use twistmoments::charsum::{
    admissible_twists, gauss_closed_form, gauss_g, kloosterman, poisson_character_check, quad_poly_char_sum,
    quad_poly_char_sum_brute, tau_gauss, twisted_kloosterman_sum, Method,
};
use twistmoments::hecke::{c_coeff, chebyshev_h, chebyshev_h_quadrature, ramanujan_tau_direct, EigenvalueTable};
use twistmoments::mollifier::{euler_slope, power_expansion_check, MollifierScheme};
use twistmoments::randmodel::{
    exact_expectation, local_factor_exact, local_factor_series, monte_carlo_prime_moments, twisted_local_expectation,
    twisted_local_series,
};
use twistmoments::special::oscillatory::{bessel_average_check, stationary_phase_check, Phase, SaddleParams};
use twistmoments::special::{
    bessel_bound_check, stirling_ratio_check, AFEWeight, OscillatoryTransforms, WeightFunction,
};

use crate::manifest::CheckRecord;
use crate::{CliError, Run, Suite};

/// Chebyshev coefficient fixtures `(alpha, c, h_alpha(c))` for `alpha <= 3`.
/// `h_0(0) = 1` because `(2 cos t)^0 = U_0`.
pub const CHEBYSHEV_TABLE: [(u32, u32, u128); 10] = [
    (0, 0, 1),
    (1, 0, 0),
    (1, 1, 1),
    (2, 0, 1),
    (2, 1, 0),
    (2, 2, 1),
    (3, 0, 0),
    (3, 1, 2),
    (3, 2, 0),
    (3, 3, 1),
];

pub fn run(suite: Suite, run: &mut Run) -> Result<(), CliError> {
    match suite {
        Suite::Arith => arith(run),
        Suite::Charsum => charsum(run),
        Suite::Hecke => hecke(run),
        Suite::Special => special(run),
        Suite::Random => random(run),
        Suite::Mollifier => mollifier(run),
    }
}

fn arith(run: &mut Run) -> Result<(), CliError> {
    let n_max = run.settings.get("arith-n-max", None, 20_000u64)?;
    let mut bad = 0;
    for n in 1..=n_max {
        let f = factor(n)?;
        let divisors = f.divisors();
        let mu_sum: i64 = divisors.iter().map(|&d| factor(d).unwrap().mu()).sum();
        let phi_sum: u64 = divisors.iter().map(|&d| factor(d).unwrap().phi()).sum();
        let lio = if f.big_omega() % 2 == 0 { 1 } else { -1 };
        if f.value() != n || mu_sum != (n == 1) as i64 || phi_sum != n || f.liouville() != lio {
            bad += 1;
        }
    }
    run.check(CheckRecord::flag(
        "divisor sums of mu and phi",
        bad == 0,
        format!("{bad} failures for n <= {n_max}"),
    ));

    let mut bad = 0;
    for d in (-199i64..200).filter(|d| d % 4 == 1 || d % 4 == -3) {
        for m in 1..60i64 {
            for n in 1..60i64 {
                if kronecker(d, m * n) != kronecker(d, m) * kronecker(d, n) {
                    bad += 1;
                }
            }
        }
    }
    run.check(CheckRecord::flag("Kronecker symbol multiplicative", bad == 0, format!("{bad} failures")));

    let mut bad = 0;
    for a in -50i64..50 {
        for n in (1..200i64).step_by(2) {
            for m in (1..30i64).step_by(2) {
                if jacobi(a, n * m) != jacobi(a, n) * jacobi(a, m) {
                    bad += 1;
                }
            }
        }
    }
    run.check(CheckRecord::flag("Jacobi symbol multiplicative", bad == 0, format!("{bad} failures")));

    let hi = run.settings.get("arith-d-max", None, 5000u64)?;
    let mut bad = 0;
    for sign in [Sign::Positive, Sign::Negative] {
        let got: Vec<i64> = enumerate_odd_fundamental(1, hi, sign).iter().map(|d| d.value()).collect();
        let want: Vec<i64> = (1..=hi as i64)
            .map(|m| if matches!(sign, Sign::Positive) { m } else { -m })
            .filter(|&d| d.rem_euclid(4) == 1 && factor(d.unsigned_abs()).unwrap().is_squarefree())
            .collect();
        if got != want {
            bad += 1;
        }
        for d in got.iter().take(50) {
            let disc = Discriminant::new(*d)?;
            let q = d.abs();
            if (1..200).any(|m| disc.chi(m) != disc.chi(m + q)) {
                bad += 1;
            }
        }
    }
    run.check(CheckRecord::flag(
        "odd fundamental discriminants",
        bad == 0,
        format!("enumeration and chi periodicity up to {hi}"),
    ));
    Ok(())
}

fn charsum(run: &mut Run) -> Result<(), CliError> {
    let tol = run.settings.get("charsum-tol", None, 1e-8)?;
    let c_max = run.settings.get("charsum-c-max", None, 30u64)?;
    let u_max = run.settings.get("charsum-u-max", None, 9i64)?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in [1i64, 3, 5, 7, 11, 13, 15].iter().flat_map(|&d| [d, -d]) {
        for c in 1..=c_max {
            for u in 1..=u_max {
                for (v, eta) in admissible_twists(d, c, u) {
                    let b = twisted_kloosterman_sum(d, c, u, v, eta, Method::BruteForce)?;
                    let f = twisted_kloosterman_sum(d, c, u, v, eta, Method::ClosedForm)?;
                    worst = worst.max((b.value - f.value).norm());
                    count += 1;
                }
            }
        }
    }
    run.check(CheckRecord::bounded(
        "twisted Kloosterman closed form",
        worst,
        tol,
        format!("{count} tuples, |d| <= 15, c <= {c_max}, u <= {u_max}"),
    ));

    let gauss_tol = run.settings.get("gauss-tol", None, 1e-9)?;
    let mut worst = 0.0f64;
    for p in [3u64, 5, 7] {
        for beta in 0..=5u32 {
            for j in 0..=50i64 {
                worst = worst.max((gauss_g(j, p.pow(beta)) - gauss_closed_form(j, p, beta)).norm());
            }
        }
    }
    run.check(CheckRecord::bounded("Gauss-type sum closed form", worst, gauss_tol, "p in {3,5,7}, beta <= 5, j <= 50"));
    let t = tau_gauss(1, 3);
    run.check(CheckRecord::bounded(
        "tau_1(3) = i sqrt 3",
        (t - Complex64::new(0.0, 3f64.sqrt())).norm(),
        gauss_tol,
        format!("tau_1(3) = {t:.6}, normalised G_1(3) = {:.6}", gauss_g(1, 3)),
    ));

    let mut bad = 0;
    for p in [3u64, 5, 7, 11] {
        let pi = p as i64;
        for a in 1..pi {
            for b in 0..pi {
                for c in 0..pi {
                    if quad_poly_char_sum(a, b, c, p)? != quad_poly_char_sum_brute(a, b, c, p) {
                        bad += 1;
                    }
                }
            }
        }
    }
    run.check(CheckRecord::flag("quadratic polynomial character sums", bad == 0, format!("{bad} mismatches")));

    let mut worst = 0.0f64;
    for c in 1..=100u64 {
        let dc = factor(c)?.num_divisors() as f64;
        for m in 1..=10i64 {
            for n in 1..=10i64 {
                let g = gcd(gcd(m as u64, n as u64), c) as f64;
                worst = worst.max(kloosterman(m, n, c).abs() / (dc * (c as f64 * g).sqrt()));
            }
        }
    }
    run.check(CheckRecord::bounded("Weil bound", worst, 1.0, "max |S| / (d(c) sqrt(c gcd))"));

    let poisson_tol = run.settings.get("poisson-tol", None, 1e-8)?;
    let mut worst = 0.0f64;
    for (n, q, eta, x0) in [(1u64, 4u64, 1i64, 50.0), (3, 4, 1, 50.0), (15, 4, 3, 100.0)] {
        worst = worst.max(poisson_character_check(n, q, eta, x0)?.residual);
    }
    run.check(CheckRecord::bounded("Poisson summation with character", worst, poisson_tol, "Gaussian test function"));
    Ok(())
}

fn hecke(run: &mut Run) -> Result<(), CliError> {
    for (a, c, want) in CHEBYSHEV_TABLE {
        let got = chebyshev_h(a, c);
        let via_c = c_coeff(&factor(3u64.pow(a))?, 3u64.pow(c))?;
        run.check(CheckRecord::flag(
            format!("table h_{a}({c}) = {want}"),
            got == want && via_c == want,
            format!("recursion {got}, c_(3^{a})(3^{c}) = {via_c}"),
        ));
    }
    let quad_tol = run.settings.get("quadrature-tol", None, 1e-6)?;
    let mut worst = 0.0f64;
    for a in 0..=12 {
        for c in 0..=a {
            worst = worst.max((chebyshev_h_quadrature(a, c) - chebyshev_h(a, c) as f64).abs());
        }
    }
    run.check(CheckRecord::bounded("h_alpha(c) recursion vs quadrature", worst, quad_tol, "alpha <= 12"));

    let tau = ramanujan_tau_direct(12);
    run.check(CheckRecord::flag(
        "tau(1..12)",
        tau[1..] == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944],
        "first twelve Ramanujan tau values",
    ));
    let n = run.settings.get("hecke-table-size", None, 20_000usize)?;
    let table = EigenvalueTable::ramanujan_uncached(n)?;
    let hecke_tol = run.settings.get("hecke-tol", None, 1e-9)?;
    run.check(CheckRecord::bounded(
        "Hecke relations for Delta",
        table.hecke_residual(5000, 11),
        hecke_tol,
        format!("5000 random pairs with mn <= {n}"),
    ));
    let deligne = primes_up_to(n as u64)
        .iter()
        .map(|&p| table.get(p as usize).unwrap().abs())
        .fold(0.0, f64::max);
    run.check(CheckRecord::bounded("Deligne bound |lambda(p)| <= 2", deligne, 2.0, format!("p <= {n}")));
    Ok(())
}

fn special(run: &mut Run) -> Result<(), CliError> {
    let contour_tol = run.settings.get("contour-tol", None, 1e-6)?;
    let mut worst = 0.0f64;
    for k in [6u32, 20, 100] {
        for xi in [1e-3, 1.0, 10.0] {
            let base = AFEWeight::new(k).eval(xi)?;
            for sigma in [0.75, 2.0] {
                worst = worst.max((AFEWeight::new(k).with_sigma(sigma).eval(xi)? - base).abs());
            }
        }
    }
    run.check(CheckRecord::bounded("V_k contour invariance", worst, contour_tol, "k in {6,20,100}"));
    let v = AFEWeight::new(6).eval(1e-6)?;
    let small_tol = run.settings.get("small-argument-tol", None, 0.01)?;
    run.check(CheckRecord::bounded("V_6(1e-6) near 1", (v - 1.0).abs(), small_tol, format!("V_6(1e-6) = {v}")));

    let mut worst = 0.0f64;
    for k in [6.0, 50.0, 1000.0] {
        for s in [Complex64::new(0.5, 0.0), Complex64::new(1.0, 3.0), Complex64::new(-1.0, 2.0)] {
            let c = stirling_ratio_check(s, k)?;
            worst = worst.max(c.log_deviation / c.bound);
        }
    }
    run.check(CheckRecord::bounded("Stirling ratio bound", worst, 1.0, "log deviation / bound"));

    let orders: Vec<f64> = (0..40).map(|i| (i * 5) as f64).collect();
    let args: Vec<f64> = (0..25).map(|i| 1.0 + 40.0 * i as f64).collect();
    let b = bessel_bound_check(&orders, &args, 1.0)?;
    run.check(CheckRecord::bounded("J-Bessel bound", b.max_ratio, 1.0, format!("worst at {:?}", b.worst)));

    let tr = OscillatoryTransforms::default();
    for t in [1.0, 5.0, 10.0] {
        let lo = bessel_average_check(&tr, 40, 1, 1, t)?;
        let hi = bessel_average_check(&tr, 80, 1, 1, t)?;
        run.check(CheckRecord::bounded(format!("Bessel average t = {t}, K = 40"), lo.residual, lo.budget, ""));
        run.check(CheckRecord::bounded(format!("Bessel average t = {t}, K = 80"), hi.residual, hi.budget, ""));
        run.check(CheckRecord::flag(
            format!("Bessel average decreasing in K, t = {t}"),
            hi.residual < lo.residual,
            format!("{:.2e} -> {:.2e}", lo.residual, hi.residual),
        ));
    }

    let h = WeightFunction::bump(0.2, 3.0)?;
    let hf = move |t: f64| h.eval(t);
    let f = |t: f64| 2.0 * t.sqrt() - t;
    let df = |t: f64| 1.0 / t.sqrt() - 1.0;
    let d2f = |t: f64| -0.5 * t.powf(-1.5);
    let phase = Phase { f: &f, df: &df, d2f: &d2f };
    let p = SaddleParams {
        x: 1.0,
        y: 1.0,
        v: 1.0,
        v1: 2.8,
        q: 1.0,
    };
    let c = stationary_phase_check(&hf, &phase, (0.2, 3.0), 1.0, &p)?;
    run.check(CheckRecord::flag(
        "stationary phase, phase 2 sqrt t - t",
        c.within,
        format!("residual {:.3e}, error form {:.3e}", c.residual, c.error_form),
    ));
    Ok(())
}

fn random(run: &mut Run) -> Result<(), CliError> {
    let m_max = run.settings.get("orthogonality-max", None, 60u64)?;
    let mut bad = 0;
    for m in 1..=m_max {
        for n in 1..=m_max {
            let e = exact_expectation(&[m, n])?;
            let want = if m == n { 1 } else { 0 };
            if e != num_rational::BigRational::from_integer(want.into()) {
                bad += 1;
            }
        }
    }
    run.check(CheckRecord::flag("E(X(m)X(n)) = [m = n]", bad == 0, format!("m, n <= {m_max}, exact rationals")));

    let seed = run.settings.get("seed", None, 1u64)?;
    run.seed = Some(seed);
    let samples = run.settings.get("samples", None, 1_000_000usize)?;
    let z_tol = run.settings.get("z-tol", None, 5.0)?;
    for p in [2u64, 3] {
        for e in monte_carlo_prime_moments(seed, p, samples, 8)? {
            if e.power % 2 == 0 {
                run.check(CheckRecord::bounded(
                    format!("E X({p})^{} = Catalan", e.power),
                    e.z_score,
                    z_tol,
                    format!("mean {:.5} +- {:.1e}, expected {}", e.mean, e.std_error, e.expected),
                ));
            }
        }
    }

    let tol = run.settings.get("local-tol", None, 1e-10)?;
    let twisted_tol = run.settings.get("twisted-tol", None, 1e-8)?;
    let d = Discriminant::new(-11)?;
    let grid = [Complex64::new(0.6, 0.0), Complex64::new(1.0, 1.5), Complex64::new(2.0, -0.7)];
    let (mut plain, mut twisted) = (0.0f64, 0.0f64);
    for p in [3u64, 5, 7] {
        for &s1 in &grid {
            for &s2 in &grid {
                let stated = local_factor_exact(p, s1, s2, &d)?.stated;
                plain = plain.max((stated - local_factor_series(p, s1, s2, &d, 60)?).norm());
                for u in [1, p, p * p] {
                    let cf = twisted_local_expectation(u, s1, s2, &d, 7)?;
                    twisted = twisted.max((cf - twisted_local_series(u, s1, s2, &d, 7, 60)?).norm());
                }
            }
        }
    }
    run.check(CheckRecord::bounded("local factor expectation", plain, tol, "p in {3,5,7}, d = -11"));
    run.check(CheckRecord::bounded("twisted local expectation", twisted, twisted_tol, "u in {1, p, p^2}"));
    Ok(())
}

fn mollifier(run: &mut Run) -> Result<(), CliError> {
    let scheme = MollifierScheme::synthetic(50.0, vec![(vec![3, 5], 2), (vec![7, 11, 13], 2)])?;
    for ell in 1..=2 {
        let r = power_expansion_check(&scheme, ell)?;
        run.check(CheckRecord::flag(
            format!("power expansion l = {ell}"),
            r.mismatches == 0,
            format!("{} coefficients, max discrepancy {}", r.terms, r.max_discrepancy),
        ));
    }
    let z_lo = run.settings.get("z-lo", None, 1e5)?;
    let z_hi = run.settings.get("z-hi", None, 1e7)?;
    let slope_tol = run.settings.get("slope-tol", None, 0.1)?;
    for which in [2, 4] {
        let s = euler_slope(which, 10.0, z_lo, z_hi, 11)?;
        run.check(CheckRecord::bounded(
            format!("Euler product slope, moment {which}"),
            s.relative_error,
            slope_tol,
            format!("slope {:.4}, expected {}", s.slope, s.expected),
        ));
    }
    let empty = MollifierScheme::with_defaults(3f64.exp())?;
    run.check(CheckRecord::flag(
        "default scheme at log K = e^3",
        empty.empty_intervals() == empty.intervals.len(),
        format!("{} of {} intervals empty", empty.empty_intervals(), empty.intervals.len()),
    ));
    Ok(())
}
