//! Character sums: Kloosterman sums, quadratic Gauss sums, twisted
//! Kloosterman sums and a Poisson summation check for `(d/n)`.
//!
//! Real characters modulo an odd squarefree `d` are the Jacobi symbols
//! `(x/|d|)`; see [`chi_mod`].

use crate::arith::{factor, gcd, jacobi, lcm, mod_inverse};
use crate::error::{Error, Result};
use crate::numeric::{e, e_ratio, ComplexKahan, KahanSum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharSumResult {
    pub value: Complex64,
    pub method: Method,
    /// Size of the part that should vanish (imaginary part of a real sum,
    /// or the discrepancy from an alternative evaluation).
    pub residual: f64,
}

/// Kloosterman sum `S(m, n; c)` as a complex number, with the imaginary part
/// kept so callers can inspect it.
pub fn kloosterman_complex(m: i64, n: i64, c: u64) -> Complex64 {
    assert!(c >= 1);
    let ci = c as i128;
    let mut acc = ComplexKahan::new();
    for a in 0..c as i64 {
        if gcd(a as u64, c) != 1 {
            continue;
        }
        let abar = mod_inverse(a, c as i64).unwrap_or(0);
        let r = (m as i128 * a as i128 + n as i128 * abar as i128).rem_euclid(ci);
        acc.add(e(r as f64 / c as f64));
    }
    acc.value()
}

/// Kloosterman sum `S(m, n; c)`, which is real.
pub fn kloosterman(m: i64, n: i64, c: u64) -> f64 {
    let z = kloosterman_complex(m, n, c);
    debug_assert!(
        z.im.abs() < 1e-12 * (c as f64).max(1.0),
        "S({m},{n};{c}) has imaginary part {}",
        z.im
    );
    z.re
}

/// Table of `S(t, n; c)` for `t = 0..c`.
pub fn kloosterman_row(n: i64, c: u64) -> Vec<f64> {
    (0..c as i64).map(|t| kloosterman(t, n, c)).collect()
}

/// Quadratic Gauss sum `tau_j(n) = sum_{b mod n} (b/n) e(jb/n)` for odd `n > 0`.
pub fn tau_gauss(j: i64, n: u64) -> Complex64 {
    assert!(n % 2 == 1, "tau_gauss needs odd n");
    let ni = n as i64;
    (0..ni)
        .filter_map(|b| {
            let s = jacobi(b, ni);
            (s != 0).then(|| e_ratio((j % ni) * b, ni) * s as f64)
        })
        .collect::<ComplexKahan>()
        .value()
}

/// Normalising factor `(1-i)/2 + (-1/n)(1+i)/2` relating `tau` and `G`.
pub fn gauss_normaliser(n: u64) -> Complex64 {
    let s = jacobi(-1, n as i64) as f64;
    Complex64::new(0.5, -0.5) + Complex64::new(0.5, 0.5) * s
}

/// `G_j(n)`, the normalised Gauss sum, which is multiplicative in `n`.
pub fn gauss_g(j: i64, n: u64) -> Complex64 {
    gauss_normaliser(n) * tau_gauss(j, n)
}

/// Closed form of `G_j(p^beta)` for an odd prime `p`.
pub fn gauss_closed_form(j: i64, p: u64, beta: u32) -> f64 {
    assert!(p % 2 == 1 && p > 1);
    let alpha = if j == 0 {
        u32::MAX
    } else {
        let mut a = 0;
        let mut t = j.unsigned_abs();
        while t % p == 0 {
            t /= p;
            a += 1;
        }
        a
    };
    let pf = p as f64;
    if beta <= alpha {
        if beta % 2 == 1 {
            0.0
        } else {
            let pb = pf.powi(beta as i32);
            if beta == 0 {
                1.0
            } else {
                pb - pb / pf
            }
        }
    } else if beta == alpha + 1 {
        let pa = pf.powi(alpha as i32);
        if beta % 2 == 0 {
            -pa
        } else {
            let unit = j / (p as i64).pow(alpha);
            jacobi(unit, p as i64) as f64 * pa * pf.sqrt()
        }
    } else {
        0.0
    }
}

/// Sum of `(ax^2 + bx + c / p)` over `x mod p`, by the closed formula.
pub fn quad_poly_char_sum(a: i64, b: i64, c: i64, p: u64) -> Result<i64> {
    let pi = p as i64;
    if a.rem_euclid(pi) == 0 {
        return Err(Error::InvalidArgument(format!("p = {p} divides the leading coefficient")));
    }
    let la = jacobi(a, pi) as i64;
    if (b * b - 4 * a * c).rem_euclid(pi) != 0 {
        Ok(-la)
    } else {
        Ok((pi - 1) * la)
    }
}

/// Direct evaluation of the same sum.
pub fn quad_poly_char_sum_brute(a: i64, b: i64, c: i64, p: u64) -> i64 {
    let pi = p as i64;
    (0..pi).map(|x| jacobi(a * x * x + b * x + c, pi) as i64).sum()
}

/// Real character modulo the odd squarefree `d`: the Jacobi symbol `(x/|d|)`.
pub fn chi_mod(d: i64, x: i64) -> i32 {
    jacobi(x, d.abs())
}

fn check_modulus(d: i64) -> Result<u64> {
    let da = d.unsigned_abs();
    if d % 2 == 0 {
        return Err(Error::EvenArgument(d));
    }
    if !factor(da)?.is_squarefree() {
        return Err(Error::NotSquarefree(d));
    }
    Ok(da)
}

/// Twisted Kloosterman sum
/// `sum_{x, w mod [c,d]} chi_d(x) chi_d(w) S(xw, u; c) e((xv + w eta)/[c,d])`.
///
/// `ClosedForm` evaluates the product formula, valid when
/// `v eta = u [c,d]^2 / c^2`; `BruteForce` evaluates the double sum.
pub fn twisted_kloosterman_sum(
    d: i64,
    c: u64,
    u: i64,
    v: i64,
    eta: i64,
    method: Method,
) -> Result<CharSumResult> {
    let da = check_modulus(d)?;
    if c == 0 {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    let l = lcm(c, da);
    match method {
        Method::ClosedForm => {
            let ratio = (l / c) as i64;
            if v * eta != u * ratio * ratio {
                return Err(Error::InvalidArgument(format!(
                    "closed form needs v*eta = u*[c,d]^2/c^2 (got {v}*{eta} vs {})",
                    u * ratio * ratio
                )));
            }
            let value = if c % da != 0 {
                0.0
            } else {
                let fd = factor(da)?;
                let fc = factor(c)?;
                let cod = c / da;
                let mut prod = 1.0;
                for &(p, _) in fd.factors() {
                    if cod % p == 0 {
                        prod *= 1.0 - p as f64;
                    }
                }
                let sign = if fd.omega() % 2 == 0 { 1.0 } else { -1.0 };
                c as f64 * fc.phi() as f64 / fd.phi() as f64 * chi_mod(d, u) as f64 * sign * prod
            };
            Ok(CharSumResult {
                value: Complex64::new(value, 0.0),
                method,
                residual: 0.0,
            })
        }
        Method::BruteForce => {
            let li = l as i64;
            let s_row = kloosterman_row(u, c);
            let chi: Vec<f64> = (0..li).map(|x| chi_mod(d, x) as f64).collect();
            let phase: Vec<Complex64> = (0..li).map(|k| e_ratio(k, li)).collect();
            let ci = c as i64;
            let partial: Vec<Complex64> = (0..li)
                .into_par_iter()
                .map(|x| {
                    if chi[x as usize] == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let mut inner = ComplexKahan::new();
                    for w in 0..li {
                        let cw = chi[w as usize];
                        if cw == 0.0 {
                            continue;
                        }
                        let s = s_row[((x * w) % ci) as usize];
                        inner.add(phase[(w * eta).rem_euclid(li) as usize] * (cw * s));
                    }
                    inner.value() * phase[(x * v).rem_euclid(li) as usize] * chi[x as usize]
                })
                .collect();
            let value = partial.into_iter().collect::<ComplexKahan>().value();
            Ok(CharSumResult {
                value,
                method,
                residual: value.im.abs(),
            })
        }
    }
}

/// All `(v, eta)` with `v, eta >= 1` satisfying the closed-form hypothesis.
pub fn admissible_twists(d: i64, c: u64, u: i64) -> Vec<(i64, i64)> {
    let l = lcm(c, d.unsigned_abs());
    let r = (l / c) as i64;
    let target = u * r * r;
    (1..=target)
        .filter(|v| target % v == 0)
        .map(|v| (v, target / v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Poisson summation for the character `(d/n)` over `d = eta mod q`, with the
/// Gaussian test function `exp(-(x/x0)^2)`.
pub fn poisson_character_check(n: u64, q: u64, eta: i64, x0: f64) -> Result<PoissonCheck> {
    if n % 2 == 0 {
        return Err(Error::EvenArgument(n as i64));
    }
    if gcd(n, q) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({n}, {q}) != 1")));
    }
    let ni = n as i64;
    let qi = q as i64;
    let dmax = (12.0 * x0).ceil() as i64;
    let start = -dmax + (eta - -dmax).rem_euclid(qi);
    let mut lhs = KahanSum::new();
    let mut d = start;
    while d <= dmax {
        let s = jacobi(d, ni);
        if s != 0 {
            lhs.add(s as f64 * (-(d as f64 / x0).powi(2)).exp());
        }
        d += qi;
    }
    let nbar = if q == 1 { 0 } else { mod_inverse(ni, qi).unwrap() };
    let taus: Vec<Complex64> = (0..ni).map(|l| tau_gauss(l, n)).collect();
    let nq = (n * q) as f64;
    let lmax = (12.0 * nq / x0).ceil() as i64 + 1;
    let fhat = |y: f64| x0 * PI.sqrt() * (-(PI * x0 * y).powi(2)).exp();
    let mut rhs = ComplexKahan::new();
    for l in -lmax..=lmax {
        let w = fhat(l as f64 / nq);
        let ph = e_ratio(((l as i128 * eta as i128 * nbar as i128).rem_euclid(qi as i128)) as i64, qi);
        rhs.add(ph * taus[l.rem_euclid(ni) as usize] * w);
    }
    let rhs = rhs.value() * (jacobi(qi, ni) as f64 / nq);
    let residual = (Complex64::new(lhs.value(), 0.0) - rhs).norm();
    Ok(PoissonCheck {
        lhs: lhs.value(),
        rhs,
        residual,
    })
}
