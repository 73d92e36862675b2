//! The Sato-Tate random model `X(m)`: sampling, exact expectations by Hecke
//! reduction, the random Dirichlet series, random mollifiers and the local
//! Euler-factor expectations.

use crate::arith::{factor, primes_up_to, spf_table, factor_with, Discriminant};
use crate::error::{Error, Result};
use crate::hecke::{c_coeff, chebyshev_h, chebyshev_u};
use crate::mollifier::{mollifier_factors, nu_r_exponents, MollifierCoefficients, MollifierScheme};
use crate::numeric::KahanSum;
use crate::special::VTable;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const MAX_SAMPLED_PRIME: u64 = 1_000_000;
pub const SYMBOLIC_TERM_CAP: usize = 1_000_000;
const MC_CHUNK: usize = 4096;

/// `(2 t - sin 2t) / (2 pi)`, the Sato-Tate distribution function.
pub fn sato_tate_cdf(theta: f64) -> f64 {
    (2.0 * theta - (2.0 * theta).sin()) / (2.0 * PI)
}

/// Inverse of [`sato_tate_cdf`] by Newton's method kept inside a bisection
/// bracket.
pub fn sato_tate_quantile(u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, PI);
    let mut t = PI * u;
    for _ in 0..100 {
        let f = sato_tate_cdf(t) - u;
        if f.abs() < 1e-15 {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dens = 2.0 / PI * t.sin().powi(2);
        let newton = t - f / dens;
        let next = if dens > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() < 1e-14 {
            t = next;
            break;
        }
        t = next;
    }
    t
}

fn key(seed: u64, realization: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&realization.to_le_bytes());
    k[16..24].copy_from_slice(b"satotate");
    k
}

fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `theta_p` for the prime with index `prime_index` (2 has index 0) in the
/// given realization. Each prime has its own stream, so the value does not
/// depend on which other primes are drawn.
pub fn theta_for(seed: u64, realization: u64, prime_index: u64) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(key(seed, realization));
    rng.set_stream(prime_index);
    sato_tate_quantile(open_unit(rng.next_u64()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatoTateRealization {
    pub seed: u64,
    pub realization: u64,
    pub primes: Vec<u64>,
    pub thetas: Vec<f64>,
}

pub fn sample_realization(seed: u64, p_max: u64) -> Result<SatoTateRealization> {
    sample_realization_indexed(seed, 0, p_max)
}

pub fn sample_realization_indexed(seed: u64, realization: u64, p_max: u64) -> Result<SatoTateRealization> {
    if p_max > MAX_SAMPLED_PRIME {
        return Err(Error::OutOfRange {
            what: "p_max",
            value: p_max as f64,
            limit: MAX_SAMPLED_PRIME as f64,
        });
    }
    let primes = primes_up_to(p_max);
    let mut rng = ChaCha8Rng::from_seed(key(seed, realization));
    let thetas = (0..primes.len())
        .map(|i| {
            rng.set_stream(i as u64);
            rng.set_word_pos(0);
            sato_tate_quantile(open_unit(rng.next_u64()))
        })
        .collect();
    Ok(SatoTateRealization {
        seed,
        realization,
        primes,
        thetas,
    })
}

impl SatoTateRealization {
    pub fn p_max(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    pub fn theta(&self, p: u64) -> Result<f64> {
        self.primes
            .binary_search(&p)
            .map(|i| self.thetas[i])
            .map_err(|_| Error::OutOfRange {
                what: "prime outside realization",
                value: p as f64,
                limit: self.p_max() as f64,
            })
    }

    /// `X(p^j) = U_j(cos theta_p)`.
    pub fn x_prime_power(&self, p: u64, j: u32) -> Result<f64> {
        Ok(chebyshev_u(j, self.theta(p)?.cos()))
    }

    pub fn x_eval(&self, m: u64) -> Result<f64> {
        let f = factor(m)?;
        let mut x = 1.0;
        for &(p, a) in f.factors() {
            x *= self.x_prime_power(p, a)?;
        }
        Ok(x)
    }

    /// `X(m)` for `m = 0..=max` (entry 0 unused).
    pub fn x_table(&self, max: usize) -> Result<Vec<f64>> {
        if primes_up_to(max as u64).last().is_some_and(|&q| q > self.p_max()) {
            return Err(Error::OutOfRange {
                what: "X table bound",
                value: max as f64,
                limit: self.p_max() as f64,
            });
        }
        let spf = spf_table(max);
        let cosines: Vec<f64> = self.thetas.iter().map(|t| t.cos()).collect();
        let mut out = vec![0.0; max + 1];
        if max >= 1 {
            out[1] = 1.0;
        }
        for m in 2..=max {
            let mut x = 1.0;
            for (p, a) in factor_with(&spf, m) {
                let i = self.primes.binary_search(&p).expect("prime covered");
                x *= chebyshev_u(a, cosines[i]);
            }
            out[m] = x;
        }
        Ok(out)
    }
}

/// Catalan number `C_m`.
pub fn catalan(m: u32) -> u64 {
    let mut c = 1u64;
    for i in 0..m as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub power: u32,
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
    /// `|mean - expected| / std_error`
    pub z_score: f64,
}

/// Fixed-chunk parallel sum of `f(i)` for `i < n`; the result does not
/// depend on the number of worker threads.
fn chunked_sums<const W: usize>(n: usize, f: impl Fn(usize) -> [f64; W] + Sync) -> [f64; W] {
    let chunks: Vec<[f64; W]> = (0..n.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc: [KahanSum; W] = std::array::from_fn(|_| KahanSum::new());
            for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(n) {
                let v = f(i);
                for (a, x) in acc.iter_mut().zip(v) {
                    a.add(x);
                }
            }
            std::array::from_fn(|k| acc[k].value())
        })
        .collect();
    let mut tot: [KahanSum; W] = std::array::from_fn(|_| KahanSum::new());
    for c in chunks {
        for (t, x) in tot.iter_mut().zip(c) {
            t.add(x);
        }
    }
    std::array::from_fn(|k| tot[k].value())
}

/// Monte Carlo estimates of `E[X(p)^j]`, `j = 1..=max_power`, over
/// realizations `0..samples`.
pub fn monte_carlo_prime_moments(seed: u64, p: u64, samples: usize, max_power: u32) -> Result<Vec<MomentEstimate>> {
    if !crate::hecke::is_prime_u64(p) || p > MAX_SAMPLED_PRIME {
        return Err(Error::InvalidArgument(format!("{p} is not a supported prime")));
    }
    if samples < 2 || max_power == 0 || max_power > 8 {
        return Err(Error::InvalidArgument("need samples >= 2 and 1 <= max_power <= 8".into()));
    }
    let index = (primes_up_to(p).len() - 1) as u64;
    let mp = max_power as usize;
    // Sums of X^j for j = 1..=16 so that second moments are available.
    let sums = chunked_sums::<16>(samples, |i| {
        let x = 2.0 * theta_for(seed, i as u64, index).cos();
        let mut out = [0.0; 16];
        let mut pw = 1.0;
        for o in out.iter_mut().take(2 * mp) {
            pw *= x;
            *o = pw;
        }
        out
    });
    let n = samples as f64;
    Ok((1..=max_power)
        .map(|j| {
            let mean = sums[j as usize - 1] / n;
            let second = sums[2 * j as usize - 1] / n;
            let std_error = ((second - mean * mean).max(0.0) / (n - 1.0)).sqrt();
            let expected = if j % 2 == 0 { catalan(j / 2) as f64 } else { 0.0 };
            MomentEstimate {
                power: j,
                mean,
                std_error,
                expected,
                z_score: (mean - expected).abs() / std_error,
            }
        })
        .collect())
}

/// Monomial `prod p^a` as a sorted list of `(p, a)` with `a > 0`.
pub type Monomial = Vec<(u64, u32)>;

/// Finite linear combination `sum c_m X(m)` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolicHeckeElement {
    terms: BTreeMap<Monomial, BigRational>,
}

impl SymbolicHeckeElement {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), BigRational::one());
        SymbolicHeckeElement { terms }
    }

    pub fn x(m: u64) -> Result<Self> {
        let f = factor(m)?;
        let mut terms = BTreeMap::new();
        terms.insert(f.factors().to_vec(), BigRational::one());
        Ok(SymbolicHeckeElement { terms })
    }

    pub fn prime_power(p: u64, a: u32) -> Self {
        let mono = if a == 0 { Vec::new() } else { vec![(p, a)] };
        let mut terms = BTreeMap::new();
        terms.insert(mono, BigRational::one());
        SymbolicHeckeElement { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        SymbolicHeckeElement {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, v) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigRational::zero) += v;
        }
        terms.retain(|_, v| !v.is_zero());
        SymbolicHeckeElement { terms }
    }

    /// Product reduced with `X(m) X(n) = sum_{d | (m, n)} X(mn/d^2)`.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let c = x * y;
                for mono in hecke_product(a, b) {
                    *terms.entry(mono).or_insert_with(BigRational::zero) += &c;
                    if terms.len() > cap {
                        return Err(Error::TermCap(cap));
                    }
                }
            }
        }
        terms.retain(|_, v| !v.is_zero());
        Ok(SymbolicHeckeElement { terms })
    }

    /// `E(sum c_m X(m)) = c_1`.
    pub fn expectation(&self) -> BigRational {
        self.coefficient(&Vec::new())
    }
}

/// Monomials of `X(a) X(b)` after Hecke reduction, with multiplicity.
fn hecke_product(a: &Monomial, b: &Monomial) -> Vec<Monomial> {
    // Per prime, the exponents a + b - 2i for 0 <= i <= min(a, b).
    let mut choices: Vec<(u64, Vec<u32>)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (p, ea, eb) = match (a.get(i), b.get(j)) {
            (Some(&(p, x)), Some(&(q, y))) if p == q => {
                i += 1;
                j += 1;
                (p, x, y)
            }
            (Some(&(p, x)), Some(&(q, _))) if p < q => {
                i += 1;
                (p, x, 0)
            }
            (Some(&(p, x)), None) => {
                i += 1;
                (p, x, 0)
            }
            (_, Some(&(q, y))) => {
                j += 1;
                (q, 0, y)
            }
            (None, None) => unreachable!(),
        };
        choices.push((p, (0..=ea.min(eb)).map(|k| ea + eb - 2 * k).collect()));
    }
    let mut out: Vec<Monomial> = vec![Vec::new()];
    for (p, opts) in choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for m in &out {
            for &e in &opts {
                let mut m2 = m.clone();
                if e > 0 {
                    m2.push((p, e));
                }
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// `E(prod X(m_i))` by iterated Hecke reduction.
pub fn exact_expectation(factors: &[u64]) -> Result<BigRational> {
    let elems: Result<Vec<_>> = factors.iter().map(|&m| SymbolicHeckeElement::x(m)).collect();
    expectation_of_product(&elems?)
}

pub fn expectation_of_product(elems: &[SymbolicHeckeElement]) -> Result<BigRational> {
    let mut acc = SymbolicHeckeElement::one();
    for e in elems {
        acc = acc.mul(e, SYMBOLIC_TERM_CAP)?;
    }
    Ok(acc.expectation())
}

fn cpow(p: u64, s: Complex64) -> Complex64 {
    (-s * (p as f64).ln()).exp()
}

/// `zeta_p(1 + s1 + s2) 1_{p not | d}` as stated, together with the
/// value the series actually converges to (which is `1` when `p | d`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFactorExact {
    pub stated: Complex64,
    pub value: Complex64,
}

pub fn local_factor_exact(p: u64, s1: Complex64, s2: Complex64, d: &Discriminant) -> Result<LocalFactorExact> {
    if !(s1.re > 0.5 && s2.re > 0.5) {
        return Err(Error::InvalidArgument(format!("exact local factor needs Re s > 1/2, got {s1}, {s2}")));
    }
    if d.abs() % p == 0 {
        return Ok(LocalFactorExact {
            stated: Complex64::new(0.0, 0.0),
            value: Complex64::new(1.0, 0.0),
        });
    }
    let z = (Complex64::new(1.0, 0.0) - cpow(p, s1 + s2 + 1.0)).inv();
    Ok(LocalFactorExact { stated: z, value: z })
}

/// `sum_{j1 + j2 <= max_total} E(X(p^j1) X(p^j2)) chi_d(p)^{j1+j2} p^{-j1(s1+1/2) - j2(s2+1/2)}`.
pub fn local_factor_series(p: u64, s1: Complex64, s2: Complex64, d: &Discriminant, max_total: u32) -> Result<Complex64> {
    let chi = d.chi(p as i64) as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j1 in 0..=max_total {
        for j2 in 0..=max_total - j1 {
            let e = expectation_of_product(&[SymbolicHeckeElement::prime_power(p, j1), SymbolicHeckeElement::prime_power(p, j2)])?;
            if e.is_zero() {
                continue;
            }
            let w = e.to_f64().unwrap() * chi.powi((j1 + j2) as i32);
            sum += cpow(p, (s1 + 0.5) * j1 as f64 + (s2 + 0.5) * j2 as f64) * w;
        }
    }
    Ok(sum)
}

/// Closed form of `E(X(u) prod_{p <= z_cut} L_p(s1 + 1/2, s2 + 1/2))`.
pub fn twisted_local_expectation(u: u64, s1: Complex64, s2: Complex64, d: &Discriminant, z_cut: u64) -> Result<Complex64> {
    let f = factor(u)?;
    if f.factors().iter().any(|&(p, _)| p > z_cut) {
        return Err(Error::InvalidArgument(format!("u = {u} has a prime above {z_cut}")));
    }
    if !((s1 + s2).re > 0.0) {
        return Err(Error::InvalidArgument("need Re(s1 + s2) > 0".into()));
    }
    let chi = d.chi(u as i64);
    if chi == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for p in primes_up_to(z_cut) {
        if d.abs() % p != 0 {
            prod /= Complex64::new(1.0, 0.0) - cpow(p, s1 + s2 + 1.0);
        }
    }
    let divisor_sum: Complex64 = f.divisors().into_iter().map(|v| cpow(v, s1 - s2)).sum();
    Ok(prod * divisor_sum * cpow(u, s2 + 0.5) * chi as f64)
}

/// The same quantity as a product over `p <= z_cut` of local series in
/// `(j1, j2)`, each coefficient an exact expectation.
pub fn twisted_local_series(u: u64, s1: Complex64, s2: Complex64, d: &Discriminant, z_cut: u64, max_total: u32) -> Result<Complex64> {
    let f = factor(u)?;
    let mut prod = Complex64::new(1.0, 0.0);
    for p in primes_up_to(z_cut) {
        let a = f.valuation(p);
        let chi = d.chi(p as i64) as f64;
        let xu = SymbolicHeckeElement::prime_power(p, a);
        let mut sum = Complex64::new(0.0, 0.0);
        for j1 in 0..=max_total {
            for j2 in 0..=max_total - j1 {
                let e = expectation_of_product(&[
                    xu.clone(),
                    SymbolicHeckeElement::prime_power(p, j1),
                    SymbolicHeckeElement::prime_power(p, j2),
                ])?;
                if e.is_zero() {
                    continue;
                }
                let w = e.to_f64().unwrap() * chi.powi((j1 + j2) as i32);
                sum += cpow(p, (s1 + 0.5) * j1 as f64 + (s2 + 0.5) * j2 as f64) * w;
            }
        }
        prod *= sum;
    }
    if f.factors().iter().any(|&(p, _)| p > z_cut) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(prod)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomL {
    pub value: f64,
    /// `sum_m X(m) chi_d(m) V_k(m/|d|) / sqrt m`
    pub half_sum: f64,
    pub m_max: usize,
    /// Estimate of the neglected part of `value`.
    pub tail_estimate: f64,
}

/// `L(X; d, k) = 4 (sum_{m <= M} X(m) chi_d(m) V_k(m/|d|) / sqrt m)^2`.
pub fn random_l_truncated(r: &SatoTateRealization, d: &Discriminant, m_max: usize, v: &VTable) -> Result<RandomL> {
    let k = v.weight().k;

    let need = 10.0 * k * d.abs() as f64;
    if (m_max as f64) < need {
        return Err(Error::Check(format!("truncation {m_max} is below 10 k |d| = {need}")));
    }
    let x = r.x_table(m_max)?;
    let da = d.abs() as f64;
    let mut s = KahanSum::new();
    for m in 1..=m_max {
        let chi = d.chi(m as i64);
        if chi == 0 {
            continue;
        }
        s.add(x[m] * chi as f64 * v.eval(m as f64 / da) / (m as f64).sqrt());
    }
    let a = s.value();
    // |X(m)| <= d(m), which is about log m on average.
    let lo = (m_max as f64).ln();
    let tail = crate::numeric::integrate(|w| (1.0 + w) * v.eval(w.exp() / da).abs() * (0.5 * w).exp(), lo, lo + 20.0, 200);
    Ok(RandomL {
        value: 4.0 * a * a,
        half_sum: a,
        m_max,
        tail_estimate: 4.0 * (2.0 * a.abs() * tail + tail * tail),
    })
}

fn check_coverage(r: &SatoTateRealization, scheme: &MollifierScheme) -> Result<()> {
    let top = scheme.max_prime();
    if top > r.p_max() {
        return Err(Error::OutOfRange {
            what: "mollifier prime beyond realization",
            value: top as f64,
            limit: r.p_max() as f64,
        });
    }
    Ok(())
}

/// `M_ell(X; d)` summed from the coefficient list, with
/// `a(n) = sum_{u | n} c_n(u) X(u)`.
pub fn random_mollifier(r: &SatoTateRealization, scheme: &MollifierScheme, coeffs: &MollifierCoefficients, d: &Discriminant) -> Result<f64> {
    check_coverage(r, scheme)?;
    let mut sum = KahanSum::new();
    for c in &coeffs.entries {
        let chi = d.chi(c.n as i64);
        if chi == 0 {
            continue;
        }
        let f = factor(c.n)?;
        let mut a = 0.0;
        for u in f.divisors() {
            let w = c_coeff(&f, u)?;
            if w != 0 {
                a += w as f64 * r.x_eval(u)?;
            }
        }
        sum.add(c.value * chi as f64 * a);
    }
    Ok(scheme.log_k.powf(coeffs.power as f64 / 2.0) * sum.value())
}

/// `M_ell(X; d)` as `(log K)^{ell/2} prod_j M_j(X)^{2 ell}`.
pub fn random_mollifier_product(r: &SatoTateRealization, scheme: &MollifierScheme, d: &Discriminant, ell: u32) -> Result<f64> {
    check_coverage(r, scheme)?;
    let f = mollifier_factors(scheme, d, |p| 2.0 * r.theta(p).expect("covered").cos());
    Ok(scheme.log_k.powf(ell as f64 / 2.0) * f.iter().map(|m| m.powi(2 * ell as i32)).product::<f64>())
}

fn small_prime_sum(r: &SatoTateRealization, scheme: &MollifierScheme, d: &Discriminant) -> Result<f64> {
    check_coverage(r, scheme)?;
    let i0 = scheme.intervals.first().ok_or_else(|| Error::InvalidArgument("scheme has no intervals".into()))?;
    let mut t = 0.0;
    for &p in &i0.primes {
        t -= 2.0 * d.chi(p as i64) as f64 * 2.0 * r.theta(p)?.cos() / (p as f64).sqrt();
    }
    Ok(t)
}

/// `M~_{2,0}(X; d)`: the `I_0` factor of `M_2` with untruncated `nu_4`,
/// which is `exp(-2 sum_{p in I_0} chi_d(p) X(p) / sqrt p)`.
pub fn tilde_m20(r: &SatoTateRealization, scheme: &MollifierScheme, d: &Discriminant) -> Result<f64> {
    Ok(small_prime_sum(r, scheme, d)?.exp())
}

/// `R(X; d)`: terms of `M~_{2,0}` with `4 l_0 < Omega(n) <= omega_cap`.
pub fn tail_r(r: &SatoTateRealization, scheme: &MollifierScheme, d: &Discriminant, omega_cap: u32) -> Result<f64> {
    let t = small_prime_sum(r, scheme, d)?;
    let lo = 4 * scheme.cap(0);
    let mut term = 1.0;
    let mut sum = 0.0;
    for m in 1..=omega_cap {
        term *= t / m as f64;
        if m > lo {
            sum += term;
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailMoment {
    pub ell0: u32,
    pub omega_cap: u32,
    pub terms: usize,
    /// `E|R|^2` as an exact rational.
    pub exact: String,
    pub value: f64,
    /// `2^{-8 l_0} prod_{p in I_0} E exp(8 X(p) / sqrt p)`
    pub bound: f64,
    pub within: bool,
}

fn exponent_vectors_between(k: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(k, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, hi, &mut Vec::new(), &mut out);
    out.retain(|v| v.iter().sum::<u32>() > lo);
    out
}

/// `E exp(t X(p)) = sum_m C_m t^{2m} / (2m)!`.
pub fn sato_tate_mgf(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // t^{2m}/(2m)!
    for m in 0..200u32 {
        if m > 0 {
            term *= t * t / ((2 * m - 1) as f64 * (2 * m) as f64);
        }
        let c = term * catalan_f64(m);
        sum += c;
        if c < 1e-17 * sum && m > 4 {
            break;
        }
    }
    sum
}

fn catalan_f64(m: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..m {
        c = c * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64;
    }
    c
}

/// Exact `E|R(X; d)|^2` via `E(X(u1) X(u2)) = 1_{u1 = u2}`, and the bound
/// obtained by weighting each term with `2^{Omega(n) - 4 l_0} >= 1`.
pub fn tail_second_moment(scheme: &MollifierScheme, d: &Discriminant, omega_cap: u32) -> Result<TailMoment> {
    let i0 = scheme.intervals.first().ok_or_else(|| Error::InvalidArgument("scheme has no intervals".into()))?;
    if i0.primes.is_empty() {
        return Err(Error::InvalidArgument("I_0 is empty".into()));
    }
    if omega_cap > crate::hecke::MAX_CHEBYSHEV_ALPHA {
        return Err(Error::OutOfRange {
            what: "Omega cap",
            value: omega_cap as f64,
            limit: crate::hecke::MAX_CHEBYSHEV_ALPHA as f64,
        });
    }
    let ell0 = scheme.cap(0);
    let primes: Vec<u64> = i0.primes.iter().copied().filter(|&p| d.abs() % p != 0).collect();
    let chis: Vec<i32> = primes.iter().map(|&p| d.chi(p as i64)).collect();
    let vecs = exponent_vectors_between(primes.len(), 4 * ell0, omega_cap);
    if vecs.len().saturating_mul(vecs.len()) > 4 * SYMBOLIC_TERM_CAP {
        return Err(Error::TermCap(4 * SYMBOLIC_TERM_CAP));
    }
    // Rational part of each coefficient: (-1)^Omega chi(n) nu_4(n) / 2^Omega.
    let coeff: Vec<BigRational> = vecs
        .iter()
        .map(|v| {
            let om: u32 = v.iter().sum();
            let sign = v.iter().zip(&chis).fold(if om % 2 == 0 { 1 } else { -1 }, |s, (&a, &c)| s * c.pow(a));
            nu4_full(v) * BigRational::new(BigInt::from(sign), BigInt::from(2).pow(om))
        })
        .collect();
    let mut total = BigRational::zero();
    for (v1, c1) in vecs.iter().zip(&coeff) {
        for (v2, c2) in vecs.iter().zip(&coeff) {
            // sum_u c_{n1}(u) c_{n2}(u) / sqrt(n1 n2), prime by prime.
            let mut w = BigRational::one();
            for ((&a, &b), &p) in v1.iter().zip(v2).zip(&primes) {
                if (a + b) % 2 == 1 {
                    w = BigRational::zero();
                    break;
                }
                let overlap: u128 = (0..=a.min(b)).map(|c| chebyshev_h(a, c) * chebyshev_h(b, c)).sum();
                w *= BigRational::new(BigInt::from(overlap), BigInt::from(p).pow((a + b) / 2));
            }
            if !w.is_zero() {
                total += c1 * c2 * w;
            }
        }
    }
    let bound = 2f64.powi(-8 * ell0 as i32) * i0.primes.iter().map(|&p| sato_tate_mgf(8.0 / (p as f64).sqrt())).product::<f64>();
    let value = total.to_f64().unwrap_or(f64::NAN);
    Ok(TailMoment {
        ell0,
        omega_cap,
        terms: vecs.len(),
        exact: total.to_string(),
        value,
        bound,
        within: value <= bound,
    })
}

fn nu4_full(v: &[u32]) -> BigRational {
    let om: u32 = v.iter().sum();
    let den = v.iter().fold(BigInt::one(), |acc, &a| acc * (1..=a).fold(BigInt::one(), |f, k| f * k));
    BigRational::new(BigInt::from(4).pow(om), den)
}

/// Coefficient list of `M_{2,j}` on `I_j`: `(n as exponent vector,
/// lambda(n) chi_d(n) nu_4(n; l_j) / (2^Omega sqrt n))`.
fn m2j_terms(scheme: &MollifierScheme, j: usize, d: &Discriminant) -> Result<Vec<(Vec<u32>, f64)>> {
    let iv = &scheme.intervals[j];
    let cap = scheme.cap(j);
    let k = iv.primes.len();
    let count = (1..=k).fold(1.0, |acc, i| acc * (4.0 * cap as f64 + i as f64) / i as f64);
    if count > crate::mollifier::TERM_CAP as f64 {
        return Err(Error::TermCap(crate::mollifier::TERM_CAP));
    }
    let mut out = Vec::new();
    for v in exponent_vectors_between(k, 0, 4 * cap).into_iter().chain(std::iter::once(vec![0; k])) {
        let om: u32 = v.iter().sum();
        let mut sorted: Vec<u32> = v.iter().copied().filter(|&a| a > 0).collect();
        sorted.sort_unstable();
        let nu = nu_r_exponents(&sorted, 4, cap).to_f64().unwrap();
        if nu == 0.0 {
            continue;
        }
        let mut c = nu * if om % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powi(om as i32);
        for (&p, &a) in iv.primes.iter().zip(&v) {
            c *= (d.chi(p as i64) as f64).powi(a as i32) * (p as f64).powf(-(a as f64) / 2.0);
        }
        if c != 0.0 {
            out.push((v, c));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifiedLocalFactor {
    pub j: usize,
    pub value: Complex64,
    /// Largest `|Sigma(z)|` on the circles `|z| = 1.5` and `|z| = 2`.
    pub circle_max: f64,
    pub bound: f64,
    pub within: bool,
}

/// Per-prime value of `E(X(p^c) L_p(s1 + 1/2, s2 + 1/2))`.
fn twisted_prime(p: u64, c: u32, s1: Complex64, s2: Complex64, chi: f64) -> Complex64 {
    if chi == 0.0 {
        return if c == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let zeta = (Complex64::new(1.0, 0.0) - cpow(p, s1 + s2 + 1.0)).inv();
    let div: Complex64 = (0..=c).map(|i| cpow(p, (s1 - s2) * i as f64)).sum();
    zeta * div * cpow(p, (s2 + 0.5) * c as f64) * chi.powi(c as i32)
}

/// `E(M_{2,j}(X; d) prod_{p in I_j} L_p(s1 + 1/2, s2 + 1/2; X, d))`, by
/// expanding `M_{2,j}` and using the twisted closed form for each `u`.
pub fn mollified_localfactor_expectation(scheme: &MollifierScheme, j: usize, s1: Complex64, s2: Complex64, d: &Discriminant) -> Result<MollifiedLocalFactor> {
    if j == 0 || j >= scheme.intervals.len() {
        return Err(Error::InvalidArgument(format!("interval index {j} must lie in 1..={}", scheme.j_max)));
    }
    if !(s1.re > 0.0 && s2.re > 0.0) {
        return Err(Error::InvalidArgument("need Re s1, Re s2 > 0".into()));
    }
    let iv = &scheme.intervals[j];
    let chis: Vec<f64> = iv.primes.iter().map(|&p| d.chi(p as i64) as f64).collect();
    let mut value = Complex64::new(0.0, 0.0);
    for (v, c) in m2j_terms(scheme, j, d)? {
        // sum_{u | n} c_n(u) E(X(u) prod L_p), prime by prime.
        let mut inner = Complex64::new(1.0, 0.0);
        for ((&p, &a), &chi) in iv.primes.iter().zip(&v).zip(&chis) {
            let mut s = Complex64::new(0.0, 0.0);
            for cc in (0..=a).filter(|cc| (a + cc) % 2 == 0) {
                s += twisted_prime(p, cc, s1, s2, chi) * chebyshev_h(a, cc) as f64;
            }
            inner *= s;
        }
        value += inner * c;
    }
    // The chi_d(n) carried by the coefficient and the chi_d(u) of the closed
    // form are both included above, so primes with chi = 0 only contribute n = 1.
    let circle_max = sigma_circle_max(&iv.primes, d, s1, s2);
    let bound = crate::calibration::MOLLIFIED_LOCAL_C;
    Ok(MollifiedLocalFactor {
        j,
        value,
        circle_max,
        bound,
        within: value.norm() <= bound && circle_max <= bound,
    })
}

/// Largest `|Sigma(z)|` over 64 points on each of the circles `|z| = 1.5`
/// and `|z| = 2`, where `Sigma(z)` is the `n`-sum weighted by `z^Omega(n)`
/// with untruncated `nu_4`, taken as an Euler product.
pub fn sigma_circle_max(primes: &[u64], d: &Discriminant, s1: Complex64, s2: Complex64) -> f64 {
    let locals: Vec<(f64, Vec<Complex64>)> = primes
        .iter()
        .filter(|&&p| d.chi(p as i64) != 0)
        .map(|&p| {
            let chi = d.chi(p as i64) as f64;
            let tw: Vec<Complex64> = (0..=crate::hecke::MAX_CHEBYSHEV_ALPHA).map(|c| twisted_prime(p, c, s1, s2, chi)).collect();
            // E(X(p)^a L_p) for each a.
            let inner = (0..=crate::hecke::MAX_CHEBYSHEV_ALPHA)
                .map(|a| (0..=a).filter(|c| (a + c) % 2 == 0).map(|c| tw[c as usize] * chebyshev_h(a, c) as f64).sum())
                .collect();
            (-2.0 * chi / (p as f64).sqrt(), inner)
        })
        .collect();
    let mut best = 0.0f64;
    for r in [1.5, 2.0] {
        for t in 0..64 {
            let z = Complex64::from_polar(r, 2.0 * PI * t as f64 / 64.0);
            let mut prod = Complex64::new(1.0, 0.0);
            for (w, inner) in &locals {
                // Weight (-2 z chi(p) / sqrt p)^a / a! on X(p)^a.
                let mut coef = Complex64::new(1.0, 0.0);
                let mut s = inner[0];
                for (a, e) in inner.iter().enumerate().skip(1) {
                    coef *= z * *w / a as f64;
                    s += coef * e;
                }
                prod *= s;
            }
            best = best.max(prod.norm());
        }
    }
    best
}

/// Single-prime `I_j = {p}` value from the two-variable series, with every
/// coefficient an exact expectation. Independent of the closed form.
pub fn mollified_localfactor_series(scheme: &MollifierScheme, j: usize, s1: Complex64, s2: Complex64, d: &Discriminant, max_total: u32) -> Result<Complex64> {
    let iv = &scheme.intervals[j];
    if iv.primes.len() != 1 {
        return Err(Error::InvalidArgument("series oracle needs a single-prime interval".into()));
    }
    let p = iv.primes[0];
    let chi = d.chi(p as i64) as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (v, c) in m2j_terms(scheme, j, d)? {
        let a = v[0];
        // a(p^a) = X(p)^a
        let mut xa = SymbolicHeckeElement::one();
        for _ in 0..a {
            xa = xa.mul(&SymbolicHeckeElement::prime_power(p, 1), SYMBOLIC_TERM_CAP)?;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for j1 in 0..=max_total {
            for j2 in 0..=max_total - j1 {
                let e = expectation_of_product(&[xa.clone(), SymbolicHeckeElement::prime_power(p, j1), SymbolicHeckeElement::prime_power(p, j2)])?;
                if e.is_zero() {
                    continue;
                }
                s += cpow(p, (s1 + 0.5) * j1 as f64 + (s2 + 0.5) * j2 as f64) * (e.to_f64().unwrap() * chi.powi((j1 + j2) as i32));
            }
        }
        total += s * c;
    }
    Ok(total)
}

/// `E(M_1(X; d))` exactly: `(log K)^{1/2} sum_n coeff(n) chi_d(n) sum_{u | n} c_n(u) E X(u)`.
pub fn mollifier_expectation(scheme: &MollifierScheme, coeffs: &MollifierCoefficients, d: &Discriminant) -> Result<f64> {
    let mut sum = KahanSum::new();
    for c in &coeffs.entries {
        let chi = d.chi(c.n as i64);
        if chi == 0 {
            continue;
        }
        let f = factor(c.n)?;
        let mut e = 0.0;
        for u in f.divisors() {
            let w = c_coeff(&f, u)?;
            if w != 0 {
                e += w as f64 * exact_expectation(&[u])?.to_f64().unwrap();
            }
        }
        sum.add(c.value * chi as f64 * e);
    }
    Ok(scheme.log_k.powf(coeffs.power as f64 / 2.0) * sum.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMean {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Mean of `f(realization)` over realizations `0..samples` sampled up to
/// `p_max`, with a thread-count independent reduction.
pub fn monte_carlo_mean(seed: u64, samples: usize, p_max: u64, f: impl Fn(&SatoTateRealization) -> f64 + Sync) -> Result<MonteCarloMean> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let [s1, s2] = chunked_sums::<2>(samples, |i| {
        let r = sample_realization_indexed(seed, i as u64, p_max).expect("p_max checked");
        let v = f(&r);
        [v, v * v]
    });
    let n = samples as f64;
    let mean = s1 / n;
    Ok(MonteCarloMean {
        samples,
        mean,
        std_error: ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gauss_legendre;
    use proptest::prelude::{prop_assert_eq, proptest};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            let t = sato_tate_quantile(u);
            assert!((sato_tate_cdf(t) - u).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn realization_basics() {
        let r = sample_realization(7, 1000).unwrap();
        assert_eq!(r.x_eval(1).unwrap(), 1.0);
        for &p in &r.primes {
            let x = r.x_eval(p).unwrap();
            assert!(x.abs() <= 2.0);
            if p < 32 {
                let x2 = r.x_eval(p * p).unwrap();
                assert!((x2 - (x * x - 1.0)).abs() < 1e-12);
            }
        }
        assert!(r.x_eval(1009).is_err());
        let again = sample_realization(7, 1000).unwrap();
        assert_eq!(r, again);
        // A prime's angle does not depend on how many primes are drawn.
        let small = sample_realization(7, 100).unwrap();
        assert_eq!(small.theta(97).unwrap(), r.theta(97).unwrap());
        assert_eq!(theta_for(7, 0, 24), r.theta(97).unwrap());
        let table = r.x_table(1000).unwrap();
        for m in [1usize, 12, 45, 343, 997, 1000] {
            assert!((table[m] - r.x_eval(m as u64).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplicative_on_coprime_pairs() {
        let r = sample_realization(11, 10_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        while done < 1000 {
            let m = 1 + rng.next_u64() % 100;
            let n = 1 + rng.next_u64() % 100;
            if crate::arith::gcd(m, n) != 1 {
                continue;
            }
            let lhs = r.x_eval(m * n).unwrap();
            assert!((lhs - r.x_eval(m).unwrap() * r.x_eval(n).unwrap()).abs() < 1e-12);
            done += 1;
        }
    }

    #[test]
    fn moments_are_catalan() {
        let est = monte_carlo_prime_moments(1, 5, 100_000, 8).unwrap();
        for e in &est {
            assert!(e.z_score < 5.0, "{e:?}");
        }
        assert_eq!(est[3].expected, 2.0);
        assert_eq!(est[7].expected, 14.0);
    }

    #[test]
    fn monte_carlo_is_thread_count_invariant() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_prime_moments(9, 7, 20_000, 4).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(exact_expectation(&[3, 3, 3]).unwrap(), q(0));
        assert_eq!(exact_expectation(&[3, 3, 9]).unwrap(), q(1));
        assert_eq!(exact_expectation(&[5, 5, 5, 5]).unwrap(), q(2));
        assert_eq!(exact_expectation(&[6, 10, 15]).unwrap(), q(1));
        assert_eq!(exact_expectation(&[]).unwrap(), q(1));
        let x = SymbolicHeckeElement::x(3).unwrap();
        let sq = x.mul(&x, 10).unwrap();
        assert_eq!(sq.len(), 2);
        assert!(x.mul(&SymbolicHeckeElement::x(9).unwrap(), 1).is_err());
    }

    #[test]
    fn orthogonality_small() {
        for m in 1..=60u64 {
            for n in 1..=60u64 {
                let want = if m == n { 1 } else { 0 };
                assert_eq!(exact_expectation(&[m, n]).unwrap(), q(want));
            }
        }
    }

    proptest! {
        #[test]
        fn reduction_matches_multiset(m in 1u64..300, n in 1u64..300) {
            let prod = SymbolicHeckeElement::x(m).unwrap().mul(&SymbolicHeckeElement::x(n).unwrap(), 1000).unwrap();
            let mut want = SymbolicHeckeElement::default();
            for k in crate::hecke::hecke_multiply(m, n) {
                want = want.add(&SymbolicHeckeElement::x(k).unwrap());
            }
            prop_assert_eq!(prod, want);
        }
    }

    #[test]
    fn local_factor_examples() {
        let d = Discriminant::new(-7).unwrap();
        let e = local_factor_exact(3, c(1.0, 0.0), c(1.0, 0.0), &d).unwrap();
        assert!((e.value - c(27.0 / 26.0, 0.0)).norm() < 1e-15);
        let e = local_factor_exact(7, c(1.0, 0.0), c(1.0, 0.0), &d).unwrap();
        assert_eq!(e.stated, c(0.0, 0.0));
        let s = local_factor_series(7, c(1.0, 0.0), c(1.0, 0.0), &d, 20).unwrap();
        assert_eq!(s, e.value);
        assert!(local_factor_exact(3, c(0.5, 0.0), c(1.0, 0.0), &d).is_err());
        for s1 in [c(0.6, 0.0), c(1.0, 2.0), c(2.0, -1.0)] {
            for s2 in [c(0.7, 0.0), c(1.5, -3.0), c(0.9, 0.5)] {
                for p in [3u64, 5, 11] {
                    let ex = local_factor_exact(p, s1, s2, &d).unwrap().value;
                    let se = local_factor_series(p, s1, s2, &d, 40).unwrap();
                    assert!((ex - se).norm() < 1e-10, "p={p} s1={s1} s2={s2}");
                }
            }
        }
    }

    #[test]
    fn local_series_converges_geometrically() {
        let d = Discriminant::new(5).unwrap();
        let (s1, s2) = (c(0.75, 0.0), c(0.75, 0.0));
        let ex = local_factor_exact(3, s1, s2, &d).unwrap().value;
        let err = |n| (local_factor_series(3, s1, s2, &d, n).unwrap() - ex).norm();
        // Each extra pair of total degree multiplies the error by p^{-(1+s1+s2)}.
        let ratio = err(12) / err(10);
        let want = 3f64.powf(-2.5);
        assert!((ratio / want - 1.0).abs() < 0.05, "ratio {ratio} vs {want}");
    }

    #[test]
    fn twisted_closed_form_matches_series() {
        let d = Discriminant::new(-15).unwrap();
        let (s1, s2) = (c(0.8, 0.3), c(0.6, -0.2));
        let one = twisted_local_expectation(1, s1, s2, &d, 13).unwrap();
        let plain: Complex64 = primes_up_to(13)
            .into_iter()
            .filter(|p| 15 % p != 0)
            .map(|p| (c(1.0, 0.0) - cpow(p, s1 + s2 + 1.0)).inv())
            .product();
        assert!((one - plain).norm() < 1e-14);
        for u in [1u64, 7, 11, 49, 7 * 11] {
            let cf = twisted_local_expectation(u, s1, s2, &d, 13).unwrap();
            let se = twisted_local_series(u, s1, s2, &d, 13, 30).unwrap();
            assert!((cf - se).norm() < 1e-8, "u={u}: {cf} vs {se}");
        }
        assert_eq!(twisted_local_expectation(9, s1, s2, &d, 13).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn random_l_doubling() {
        let r = sample_realization(3, 100_000).unwrap();
        let v = VTable::standard(crate::special::AFEWeight::new(6)).unwrap();
        let d = Discriminant::new(5).unwrap();
        let a = random_l_truncated(&r, &d, 50_000, &v).unwrap();
        let b = random_l_truncated(&r, &d, 100_000, &v).unwrap();
        assert!((a.value - b.value).abs() <= 1e-6, "{a:?} {b:?}");
        assert!(a.tail_estimate < 1e-6);
        assert!(random_l_truncated(&r, &d, 200, &v).is_err());
    }

    fn test_scheme() -> MollifierScheme {
        MollifierScheme::synthetic(40.0, vec![(vec![3, 5], 2), (vec![7], 1), (vec![11, 13], 1)]).unwrap()
    }

    #[test]
    fn mollifier_two_ways() {
        let s = test_scheme();
        let coeffs = crate::mollifier::MollifierCoefficients::generate(&s, 2).unwrap();
        for (seed, d) in [(1u64, 5i64), (2, -3), (3, 17), (4, -19)] {
            let r = sample_realization(seed, 50).unwrap();
            let d = Discriminant::new(d).unwrap();
            let a = random_mollifier(&r, &s, &coeffs, &d).unwrap();
            let b = random_mollifier_product(&r, &s, &d, 2).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
        let empty = MollifierScheme::synthetic(40.0, vec![(vec![], 2), (vec![3], 2)]).unwrap();
        let r = sample_realization(1, 10).unwrap();
        let d = Discriminant::new(5).unwrap();
        let f = mollifier_factors(&empty, &d, |p| 2.0 * r.theta(p).unwrap().cos());
        assert_eq!(f[0], 1.0);
    }

    #[test]
    fn mollifier_mean_matches_sampling() {
        let s = test_scheme();
        let coeffs = crate::mollifier::MollifierCoefficients::generate(&s, 1).unwrap();
        let d = Discriminant::new(-11).unwrap();
        let exact = mollifier_expectation(&s, &coeffs, &d).unwrap();
        let mc = monte_carlo_mean(5, 20_000, 13, |r| random_mollifier_product(r, &s, &d, 1).unwrap()).unwrap();
        assert!(exact.is_finite());
        assert!((mc.mean - exact).abs() < 5.0 * mc.std_error, "{exact} vs {mc:?}");
    }

    #[test]
    fn tail_moment_small_scheme() {
        let s = MollifierScheme::synthetic(40.0, vec![(vec![3, 5], 1)]).unwrap();
        let d = Discriminant::new(-7).unwrap();
        let cap = 12;
        let t = tail_second_moment(&s, &d, cap).unwrap();
        // Two-dimensional Gauss-Legendre quadrature against the Sato-Tate density.
        let (x, w) = gauss_legendre(40);
        let mut quad = 0.0;
        for (xa, wa) in x.iter().zip(&w) {
            let ta = 0.5 * PI * (xa + 1.0);
            for (xb, wb) in x.iter().zip(&w) {
                let tb = 0.5 * PI * (xb + 1.0);
                let tt = -2.0 * (d.chi(3) as f64 * 2.0 * ta.cos() / 3f64.sqrt() + d.chi(5) as f64 * 2.0 * tb.cos() / 5f64.sqrt());
                let mut term = 1.0;
                let mut r = 0.0;
                for m in 1..=cap {
                    term *= tt / m as f64;
                    if m > 4 {
                        r += term;
                    }
                }
                let dens = (2.0 / PI * ta.sin().powi(2)) * (2.0 / PI * tb.sin().powi(2)) * (0.5 * PI).powi(2);
                quad += wa * wb * dens * r * r;
            }
        }
        assert!((t.value - quad).abs() < 1e-12 * quad, "{} vs {quad}", t.value);
        assert!(t.within);
        assert_eq!(tail_second_moment(&s, &d, 4).unwrap().exact, "0");
        let s2 = MollifierScheme::synthetic(40.0, vec![(vec![3, 5], 2)]).unwrap();
        let t2 = tail_second_moment(&s2, &d, cap).unwrap();
        assert!(t.bound / t2.bound >= 256.0);
    }

    #[test]
    fn mollified_local_factor() {
        let d = Discriminant::new(5).unwrap();
        let s = MollifierScheme::synthetic(40.0, vec![(vec![3], 2), (vec![23], 2)]).unwrap();
        let (s1, s2) = (c(0.3, 1.0), c(0.5, -0.5));
        let v = mollified_localfactor_expectation(&s, 1, s1, s2, &d).unwrap();
        let o = mollified_localfactor_series(&s, 1, s1, s2, &d, 30).unwrap();
        assert!((v.value - o).norm() < 1e-8, "{} vs {o}", v.value);
        let e = MollifierScheme::synthetic(40.0, vec![(vec![3], 2), (vec![], 2)]).unwrap();
        assert_eq!(mollified_localfactor_expectation(&e, 1, s1, s2, &d).unwrap().value, c(1.0, 0.0));
    }
}
