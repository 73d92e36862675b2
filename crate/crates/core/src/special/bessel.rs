//! Bessel functions of the first kind for real order and argument.

use super::gamma::ln_gamma_real;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_ORDER: f64 = 1000.0;
pub const MAX_ARG: f64 = 1e4;

fn check_range(nu: f64, x: f64) -> Result<()> {
    if !(nu >= 0.0) || nu > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "Bessel order",
            value: nu,
            limit: MAX_ORDER,
        });
    }
    if !(x >= 0.0) || x > MAX_ARG {
        return Err(Error::OutOfRange {
            what: "Bessel argument",
            value: x,
            limit: MAX_ARG,
        });
    }
    Ok(())
}

/// Whether the power series is used: it has no cancellation problem once
/// `x^2/4 <= nu + 1`, and stays accurate to ~1e-11 for `x <= 12`.
fn series_regime(nu: f64, x: f64) -> bool {
    x <= 12.0 || x * x <= 4.0 * (nu + 1.0)
}

/// `J_nu(x)` by its power series.
pub fn bessel_j_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    loop {
        term *= -q / (m * (m + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && m > q.sqrt() {
            break;
        }
        m += 1.0;
    }
    let lead = nu * (0.5 * x).ln() - ln_gamma_real(nu + 1.0);
    sum * lead.exp()
}

/// `J_{nu0 + j}(x)` for `j = 0..count`, where `0 <= nu0 < 1`, by Miller's
/// backward recurrence normalised with
/// `(x/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k)/k! J_{nu0+2k}(x)`.
pub fn bessel_j_sequence(nu0: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&nu0) {
        return Err(Error::InvalidArgument(format!("base order {nu0} must lie in [0, 1)")));
    }
    check_range(nu0 + count as f64, x)?;
    if x == 0.0 {
        let mut v = vec![0.0; count + 1];
        if nu0 == 0.0 {
            v[0] = 1.0;
        }
        return Ok(v);
    }
    let top = (count as f64).max(x);
    let mut n = (top + 30.0 + 8.0 * top.cbrt()).ceil() as usize;
    n += n % 2;
    // Normalisation coefficients c_k for even offsets 2k.
    let mut coeff = Vec::with_capacity(n / 2 + 1);
    coeff.push(ln_gamma_real(nu0 + 1.0).exp());
    let mut g = coeff[0];
    for k in 1..=n / 2 {
        if k > 1 {
            g *= (nu0 + (k - 1) as f64) / k as f64;
        }
        coeff.push((nu0 + 2.0 * k as f64) * g);
    }
    let mut out = vec![0.0; count + 1];
    let (mut f_next, mut f) = (0.0f64, 1e-300f64);
    let mut norm = 0.0f64;
    for j in (0..=n).rev() {
        if j % 2 == 0 {
            norm += coeff[j / 2] * f;
        }
        if j <= count {
            out[j] = f;
        }
        if j == 0 {
            break;
        }
        let f_prev = 2.0 * (nu0 + j as f64) / x * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = (nu0 * (0.5 * x).ln()).exp() / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// `J_nu(x)` for `0 <= nu <= 1000`, `0 <= x <= 1e4`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_range(nu, x)?;
    if series_regime(nu, x) {
        return Ok(bessel_j_series(nu, x));
    }
    let base = nu.floor();
    let seq = bessel_j_sequence(nu - base, x, base as usize)?;
    Ok(seq[base as usize])
}

/// `J_n(x)` for all integer orders `0..=n_max`.
pub fn bessel_j_integer_orders(n_max: usize, x: f64) -> Result<Vec<f64>> {
    bessel_j_sequence(0.0, x, n_max)
}

/// `(x/sqrt(nu+1)) (e x/(2 nu + 1))^nu`.
pub fn bessel_bound(nu: f64, x: f64) -> f64 {
    x / (nu + 1.0).sqrt() * (std::f64::consts::E * x / (2.0 * nu + 1.0)).powf(nu)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesselBoundCheck {
    pub points: usize,
    /// Largest `|J_nu(x)| / bound(nu, x)` over the grid.
    pub max_ratio: f64,
    pub worst: (f64, f64),
    pub constant: f64,
    pub within: bool,
}

/// Scans `|J_nu(x)| <= C bound(nu, x)` over `nu` in `orders` and `x` in `args`.
pub fn bessel_bound_check(orders: &[f64], args: &[f64], constant: f64) -> Result<BesselBoundCheck> {
    let mut max_ratio = 0.0;
    let mut worst = (0.0, 0.0);
    for &nu in orders {
        for &x in args {
            let r = bessel_j(nu, x)?.abs() / bessel_bound(nu, x);
            if r > max_ratio {
                max_ratio = r;
                worst = (nu, x);
            }
        }
    }
    Ok(BesselBoundCheck {
        points: orders.len() * args.len(),
        max_ratio,
        worst,
        constant,
        within: max_ratio <= constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain 60-term series with explicit factorials, independent of the
    /// ratio recursion above.
    fn series_oracle(n: u32, x: f64) -> f64 {
        let mut sum = 0.0;
        for m in 0..60u32 {
            let mut t = (0.5 * x).powi((2 * m + n) as i32);
            for j in 1..=m {
                t /= j as f64;
            }
            for j in 1..=(m + n) {
                t /= j as f64;
            }
            sum += if m % 2 == 0 { t } else { -t };
        }
        sum
    }

    #[test]
    fn small_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3.0, 0.0).unwrap(), 0.0);
        let x = 4.0 * std::f64::consts::PI;
        let j = bessel_j(11.0, x).unwrap();
        assert!((j - series_oracle(11, x)).abs() < 1e-11);
        assert!((j - 0.291_337_967_938_966_08).abs() < 1e-11);
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_55),
            (0.0, 50.0, 0.055_812_327_669_251_815),
            (2.5, 7.0, -0.283_436_651_201_699_2),
            (100.0, 90.0, 0.002_602_130_581_996_328_9),
            (360.0, 300.0, 3.714_568_515_577_974e-13),
            (0.3, 1000.0, 0.024_226_398_849_887_749),
            (200.0, 10000.0, -0.000_363_400_523_426_873_5),
            (1.0, 12.5, -0.165_483_804_614_759_72),
            (50.0, 50.0, 0.121_409_021_897_615_06),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1e-3), "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn overlap_band_agreement() {
        for nu in [0.0, 0.5, 1.0, 3.0, 7.25, 20.0] {
            for i in 0..=40 {
                let x = 8.0 + 0.1 * i as f64;
                let base = f64::floor(nu);
                let miller = bessel_j_sequence(nu - base, x, base as usize).unwrap()[base as usize];
                let series = bessel_j_series(nu, x);
                assert!((miller - series).abs() < 1e-10, "nu={nu} x={x}: {miller} vs {series}");
            }
        }
    }

    #[test]
    fn integer_orders_match_pointwise() {
        let v = bessel_j_integer_orders(60, 25.0).unwrap();
        for n in [0usize, 5, 24, 25, 40, 60] {
            assert!((v[n] - bessel_j(n as f64, 25.0).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn bound_on_grid() {
        let orders: Vec<f64> = (0..40).map(|i| (i * 5) as f64).collect();
        let args: Vec<f64> = (0..25).map(|i| 1.0 + 40.0 * i as f64).collect();
        let c = bessel_bound_check(&orders, &args, 1.0).unwrap();
        assert_eq!(c.points, 1000);
        assert!(c.within, "{c:?}");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(bessel_j(-1.0, 1.0).is_err());
        assert!(bessel_j(1.0, 2e4).is_err());
        assert!(bessel_j(2000.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn three_term_recurrence(nu in 1.0f64..150.0, x in 0.5f64..500.0) {
            let a = bessel_j(nu - 1.0, x).unwrap();
            let b = bessel_j(nu, x).unwrap();
            let c = bessel_j(nu + 1.0, x).unwrap();
            prop_assert!((a + c - 2.0 * nu / x * b).abs() < 1e-8);
        }
    }
}
