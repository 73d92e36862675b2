//! Experiments with genuine level-one forms: Petersson consistency on
//! one-dimensional spaces, central values of quadratic twists, the
//! discriminant sum, the mollified second-moment diagonal, sign-change
//! detection and the dominant-term check for `g(alpha + i y)`.

use crate::arith::{enumerate_odd_fundamental, factor, jacobi, Discriminant, FactoredInt, Sign};
use crate::calibration::{DIAGONAL_LOWER_C, FOURIER_DOMINANT_C};
use crate::charsum::kloosterman;
use crate::error::{Error, Result};
use crate::hecke::EigenvalueTable;
use crate::mollifier::{iota_prime_power, nu_r_exponents, MollifierScheme, TERM_CAP};
use crate::numeric::{integrate, KahanSum};
use crate::special::{bessel_j, AFEWeight, VTable, WeightFunction};
use num_traits::ToPrimitive;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const ONE_DIMENSIONAL_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeterssonConfig {
    pub weight2k: u32,
    pub c_max: u64,
    pub tol: f64,
}

impl Default for PeterssonConfig {
    fn default() -> Self {
        PeterssonConfig {
            weight2k: 12,
            c_max: 64,
            tol: 1e-8,
        }
    }
}

impl PeterssonConfig {
    pub fn validate(&self) -> Result<()> {
        if !ONE_DIMENSIONAL_WEIGHTS.contains(&self.weight2k) {
            return Err(Error::InvalidArgument(format!(
                "weight {} does not have a one-dimensional cusp space",
                self.weight2k
            )));
        }
        if self.c_max == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("need c_max >= 1 and tol > 0".into()));
        }
        Ok(())
    }

    /// `(2 pi sqrt(mn) / c_max)^{2k-1} / (2k-1)!`, the size of the first
    /// omitted Bessel factor.
    pub fn tail_bound(&self, m: u64, n: u64) -> f64 {
        let nu = (self.weight2k - 1) as f64;
        let x = 2.0 * PI * ((m * n) as f64).sqrt() / self.c_max as f64;
        (nu * x.ln() - crate::special::ln_gamma_real(nu + 1.0)).exp()
    }
}

/// `2 pi i^{2k} sum_{c <= c_max} S(m, n; c) J_{2k-1}(4 pi sqrt(mn) / c) / c`.
pub fn kloosterman_bessel_side(cfg: &PeterssonConfig, m: u64, n: u64) -> Result<f64> {
    let nu = (cfg.weight2k - 1) as f64;
    let sign = if (cfg.weight2k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let x = 4.0 * PI * ((m * n) as f64).sqrt();
    let mut s = KahanSum::new();
    for c in 1..=cfg.c_max {
        let k = kloosterman(m as i64, n as i64, c);
        if k != 0.0 {
            s.add(k * bessel_j(nu, x / c as f64)? / c as f64);
        }
    }
    Ok(2.0 * PI * sign * s.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeterssonCell {
    pub m: u64,
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeterssonReport {
    pub config: PeterssonConfig,
    /// Harmonic weight inferred from `(m, n) = (1, 1)`.
    pub omega: f64,
    pub cells: Vec<PeterssonCell>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Checks `omega lambda(m) lambda(n) = 1_{m=n} + (Kloosterman-Bessel side)`
/// for one pair, with `omega` taken from `(1, 1)`.
pub fn petersson_check(cfg: &PeterssonConfig, table: &EigenvalueTable, omega: f64, m: u64, n: u64) -> Result<PeterssonCell> {
    cfg.validate()?;
    let lhs = omega * table.get(m as usize)? * table.get(n as usize)?;
    let rhs = if m == n { 1.0 } else { 0.0 } + kloosterman_bessel_side(cfg, m, n)?;
    Ok(PeterssonCell {
        m,
        n,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        tail_bound: cfg.tail_bound(m, n),
    })
}

pub fn infer_omega(cfg: &PeterssonConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(1.0 + kloosterman_bessel_side(cfg, 1, 1)?)
}

/// All pairs in `[1, size]^2`.
pub fn petersson_grid(cfg: &PeterssonConfig, size: u64) -> Result<PeterssonReport> {
    cfg.validate()?;
    let table = crate::hecke::level_one_eigenvalues(cfg.weight2k, size as usize)?;
    let omega = infer_omega(cfg)?;
    let mut cells = Vec::new();
    for m in 1..=size {
        for n in 1..=size {
            cells.push(petersson_check(cfg, &table, omega, m, n)?);
        }
    }
    let max_residual = cells.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(PeterssonReport {
        config: *cfg,
        omega,
        passed: max_residual <= cfg.tol,
        cells,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralValue {
    pub d: i64,
    pub value: f64,
    pub truncation_error: f64,
    pub terms_used: usize,
}

/// Default size of `V_k(M/|d|)` at the truncation point.
pub const AFE_V_TOL: f64 = 1e-6;

/// Smallest `xi >= 10 k` with `V_k(xi) <= v_tol`. `V_k` carries the factor
/// `e^{s^2}`, so it decays only like `erfc(log xi / 2)`.
pub fn afe_cutoff(v: &VTable, v_tol: f64) -> f64 {
    let k = v.weight().k;
    let mut lo = 10.0 * k;
    if v.eval(lo).abs() <= v_tol {
        return lo;
    }
    let mut hi = 2.0 * lo;
    while v.eval(hi).abs() > v_tol && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if v.eval(mid).abs() > v_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `L(1/2, f x chi_d) = 2 sum_m lambda(m) chi_d(m) V_k(m/|d|) / sqrt m`,
/// summed to `|d| afe_cutoff(v_tol)`.
pub fn afe_central_value(t: &EigenvalueTable, d: &Discriminant, v: &VTable, v_tol: f64) -> Result<CentralValue> {
    let m_max = (afe_cutoff(v, v_tol) * d.abs() as f64).ceil() as usize;
    afe_central_value_to(t, d, v, m_max)
}

pub fn afe_central_value_to(t: &EigenvalueTable, d: &Discriminant, v: &VTable, m_max: usize) -> Result<CentralValue> {
    let k = v.weight().k;
    let even = (k.round() as i64) % 2 == 0;
    if (d.value() > 0) != even {
        return Err(Error::InvalidArgument(format!(
            "(-1)^k d must be positive; the central value vanishes for d = {}",
            d.value()
        )));
    }
    if m_max > t.max_index {
        return Err(Error::OutOfRange {
            what: "AFE truncation beyond eigenvalue table",
            value: m_max as f64,
            limit: t.max_index as f64,
        });
    }
    let da = d.abs() as f64;
    let mut s = KahanSum::new();
    // Partial sums of lambda chi / sqrt m over the second half, for the
    // partial-summation tail estimate.
    let mut plain = 0.0f64;
    let mut plain_max = 0.0f64;
    let mut terms = 0;
    for m in 1..=m_max {
        let chi = d.chi(m as i64);
        if chi == 0 {
            continue;
        }
        let a = t.values[m] * chi as f64 / (m as f64).sqrt();
        s.add(a * v.eval(m as f64 / da));
        plain += a;
        if 2 * m >= m_max {
            plain_max = plain_max.max(plain.abs());
        }
        terms += 1;
    }
    Ok(CentralValue {
        d: d.value(),
        value: 2.0 * s.value(),
        truncation_error: 4.0 * plain_max * v.eval(m_max as f64 / da).abs(),
        terms_used: terms,
    })
}

/// The central value with the weight `Gamma(k, 2 pi xi)/Gamma(k)`, which
/// comes from the same functional equation without the `e^{s^2}` factor.
/// Independent of `V_k`; needs integer `k`.
pub fn incomplete_gamma_central_value(t: &EigenvalueTable, d: &Discriminant, k: u32) -> Result<f64> {
    let da = d.abs() as f64;
    let m_max = (12.0 * (k as f64 + 10.0) * da / (2.0 * PI)).ceil() as usize;
    if m_max > t.max_index {
        return Err(Error::OutOfRange {
            what: "oracle truncation beyond eigenvalue table",
            value: m_max as f64,
            limit: t.max_index as f64,
        });
    }
    // Gamma(k, x)/Gamma(k) = e^{-x} sum_{j<k} x^j/j!
    let weight = |x: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..k {
            term *= x / j as f64;
            sum += term;
        }
        (-x).exp() * sum
    };
    let mut s = KahanSum::new();
    for m in 1..=m_max {
        let chi = d.chi(m as i64);
        if chi != 0 {
            s.add(t.values[m] * chi as f64 * weight(2.0 * PI * m as f64 / da) / (m as f64).sqrt());
        }
    }
    Ok(2.0 * s.value())
}

/// Odd fundamental discriminants of both signs with `|d|` in `[lo, hi]`.
pub fn fundamental_both_signs(lo: u64, hi: u64) -> Vec<Discriminant> {
    let mut v = enumerate_odd_fundamental(lo, hi, Sign::Positive);
    v.extend(enumerate_odd_fundamental(lo, hi, Sign::Negative));
    v.sort_by_key(|d| (d.abs(), d.value()));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub x: f64,
    pub n: u64,
    pub u: u64,
    pub k: f64,
    pub lhs: f64,
    pub phi_mass: f64,
    /// `prod_{p | nu} (1 + 1/p)^{-1}`
    pub local: f64,
    pub is_square: bool,
    /// `lhs / (X int phi prod (1+1/p)^{-1})` when `nu` is a square.
    pub fitted_constant: Option<f64>,
    pub dev_pi2_9: Option<f64>,
    pub dev_4_pi2: Option<f64>,
    /// `|lhs| / X^{3/4}` when `nu` is not a square.
    pub error_ratio: Option<f64>,
    pub count: usize,
}

fn density_inputs(n: u64, u: u64, x: f64, phi: &WeightFunction) -> Result<(FactoredInt, u64, u64)> {
    if n % 2 == 0 || u % 2 == 0 || n == 0 || u == 0 {
        return Err(Error::InvalidArgument("n and u must be odd and positive".into()));
    }
    if !(x >= 1.0 && x <= 1e6) {
        return Err(Error::OutOfRange {
            what: "X",
            value: x,
            limit: 1e6,
        });
    }
    let nu = factor(n * u)?;
    let lo = (phi.a * x).floor().max(1.0) as u64;
    let hi = (phi.b * x).ceil() as u64;
    Ok((nu, lo, hi))
}

/// `sum_d chi_d(nu) phi(|d|/X) V_k(u/|d|)` over odd fundamental `d` of
/// both signs, compared with `C X int phi prod_{p | nu} (1 + 1/p)^{-1}`.
pub fn density_check(n: u64, u: u64, x: f64, v: &VTable, phi: &WeightFunction) -> Result<DensityReport> {
    let (nu, lo, hi) = density_inputs(n, u, x, phi)?;
    let ds = fundamental_both_signs(lo, hi);
    let mut s = KahanSum::new();
    for d in &ds {
        let da = d.abs() as f64;
        let w = phi.eval(da / x);
        if w != 0.0 {
            s.add(d.chi(nu.value() as i64) as f64 * w * v.eval(u as f64 / da));
        }
    }
    Ok(density_report(n, u, x, v.weight().k, s.value(), &nu, phi, ds.len()))
}

/// The same sum by scanning `d = 1 mod 4` with a squarefree test and the
/// Jacobi symbol `(nu / |d|)`.
pub fn density_lhs_brute(n: u64, u: u64, x: f64, v: &VTable, phi: &WeightFunction) -> Result<f64> {
    let (nu, lo, hi) = density_inputs(n, u, x, phi)?;
    let mut s = KahanSum::new();
    for a in lo..=hi {
        if a % 2 == 0 || !factor(a)?.is_squarefree() || a == 1 {
            continue;
        }
        let w = phi.eval(a as f64 / x);
        if w != 0.0 {
            s.add(jacobi(nu.value() as i64, a as i64) as f64 * w * v.eval(u as f64 / a as f64));
        }
    }
    Ok(s.value())
}

#[allow(clippy::too_many_arguments)]
fn density_report(n: u64, u: u64, x: f64, k: f64, lhs: f64, nu: &FactoredInt, phi: &WeightFunction, count: usize) -> DensityReport {
    let phi_mass = integrate(|t| phi.eval(t), phi.a, phi.b, 200);
    let local: f64 = nu.factors().iter().map(|&(p, _)| p as f64 / (p as f64 + 1.0)).product();
    let is_square = nu.is_square();
    let fitted = is_square.then(|| lhs / (x * phi_mass * local));
    DensityReport {
        x,
        n,
        u,
        k,
        lhs,
        phi_mass,
        local,
        is_square,
        fitted_constant: fitted,
        dev_pi2_9: fitted.map(|c| c / (PI * PI / 9.0) - 1.0),
        dev_4_pi2: fitted.map(|c| c / (4.0 / (PI * PI)) - 1.0),
        error_ratio: (!is_square).then(|| lhs.abs() / x.powf(0.75)),
        count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFactor {
    pub j: usize,
    pub primes: usize,
    pub value: f64,
    /// False when the `Omega` truncation was dropped because the interval is
    /// too large to enumerate.
    pub truncated_sum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalReport {
    pub log_k: f64,
    pub x: f64,
    pub factors: Vec<DiagonalFactor>,
    pub product: f64,
    /// `ln(X K (log K)^{1/2} * product)`
    pub ln_main: f64,
    pub phi_mass: f64,
    pub h_mass: f64,
    pub lower_bound: f64,
    pub within: bool,
}

/// Local factor of the untruncated diagonal sum at `p`.
pub fn diagonal_local_factor(p: u64) -> f64 {
    let pf = p as f64;
    let mut s = 0.0;
    let mut fact = 1.0;
    for a in 1..=crate::hecke::MAX_CHEBYSHEV_ALPHA {
        fact *= a as f64;
        // lambda(p^a) nu_2(p^a) / 2^a = (-1)^a / a!
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * iota_prime_power(p, a) / (fact * pf.powf(a as f64 / 2.0));
        s += t;
        if t.abs() < 1e-18 {
            break;
        }
    }
    1.0 + s * pf / (pf + 1.0)
}

fn diagonal_interval(primes: &[u64], cap: u32) -> Result<(f64, bool)> {
    let k = primes.len();
    let count = (1..=k).fold(1.0, |acc, i| acc * (2.0 * cap as f64 + i as f64) / i as f64);
    if count > TERM_CAP as f64 || 2 * cap > crate::hecke::MAX_CHEBYSHEV_ALPHA {
        // Dropping Omega(n) <= 2 l costs O(4^{-l}) relative to the sum.
        if cap >= 16 {
            return Ok((primes.iter().map(|&p| diagonal_local_factor(p)).product(), false));
        }
        return Err(Error::TermCap(TERM_CAP));
    }
    let mut total = KahanSum::new();
    let mut v = vec![0u32; k];
    loop {
        let om: u32 = v.iter().sum();
        let mut sorted: Vec<u32> = v.iter().copied().filter(|&a| a > 0).collect();
        sorted.sort_unstable();
        let nu2 = nu_r_exponents(&sorted, 2, cap).to_f64().unwrap_or(0.0);
        if nu2 != 0.0 {
            let mut t = nu2 * if om % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powi(om as i32);
            for (&p, &a) in primes.iter().zip(&v) {
                if a > 0 {
                    let pf = p as f64;
                    t *= iota_prime_power(p, a) * pf.powf(-(a as f64) / 2.0) * pf / (pf + 1.0);
                }
            }
            total.add(t);
        }
        // Next exponent vector with total <= 2 cap.
        let mut i = 0;
        loop {
            if i == k {
                return Ok((total.value(), true));
            }
            v[i] += 1;
            if v.iter().sum::<u32>() <= 2 * cap {
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}

/// Main term `X K (log K)^{1/2} prod_j sum_{n in I_j} lambda(n) iota(n) nu_2(n; l_j) / (2^Omega sqrt n) prod_{p | n} (1 + 1/p)^{-1}`.
/// The masses of `phi` and `h` are reported but not folded in.
pub fn mollified_second_diagonal(scheme: &MollifierScheme, x: f64, phi: &WeightFunction, h: &WeightFunction) -> Result<DiagonalReport> {
    let mut factors = Vec::new();
    for (j, iv) in scheme.intervals.iter().enumerate() {
        let (value, truncated_sum) = diagonal_interval(&iv.primes, scheme.cap(j))?;
        factors.push(DiagonalFactor {
            j,
            primes: iv.primes.len(),
            value,
            truncated_sum,
        });
    }
    let product: f64 = factors.iter().map(|f| f.value).product();
    let lower_bound = DIAGONAL_LOWER_C / scheme.log_k.sqrt();
    Ok(DiagonalReport {
        log_k: scheme.log_k,
        x,
        ln_main: x.ln() + scheme.log_k + 0.5 * scheme.log_k.ln() + product.ln(),
        phi_mass: integrate(|t| phi.eval(t), phi.a, phi.b, 200),
        h_mass: integrate(|t| h.eval(t), h.a, h.b, 200),
        factors,
        product,
        lower_bound,
        within: product >= lower_bound,
    })
}

/// Untruncated diagonal Euler product over `c0 < p <= z`.
pub fn diagonal_euler_product(c0: f64, z: f64) -> Result<f64> {
    if z > crate::mollifier::MAX_PRIME_BOUND {
        return Err(Error::OutOfRange {
            what: "Euler product cutoff",
            value: z,
            limit: crate::mollifier::MAX_PRIME_BOUND,
        });
    }
    let mut s = KahanSum::new();
    for p in crate::arith::primes_up_to(z as u64) {
        if p as f64 > c0 {
            s.add(diagonal_local_factor(p).ln());
        }
    }
    Ok(s.value().exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub detected: bool,
    pub abs_of_sum: f64,
    pub sum_of_abs: f64,
    /// `sum |v| - |sum v|`
    pub margin: f64,
    pub count: usize,
}

/// Compares `|sum v_d|` with `sum |v_d|` over `x <= key <= x + h`.
pub fn sign_change_detect(values: &[(i64, f64)], x: f64, h: f64) -> SignChange {
    let mut sum = KahanSum::new();
    let mut abs = KahanSum::new();
    let mut count = 0;
    for &(key, v) in values {
        let kf = key as f64;
        if kf >= x && kf <= x + h {
            sum.add(v);
            abs.add(v.abs());
            count += 1;
        }
    }
    let (a, b) = (sum.value().abs(), abs.value());
    // Compensated sums are exact enough that equal-sign inputs give a == b.
    let margin = b - a;
    SignChange {
        detected: count > 0 && margin > 1e-12 * b,
        abs_of_sum: a,
        sum_of_abs: b,
        margin,
        count,
    }
}

/// Keys `(d_plus, d_minus)` with `v(d_minus) < -theta < theta < v(d_plus)`,
/// the first of each in input order.
pub fn threshold_pair(values: &[(i64, f64)], theta: f64) -> Option<(i64, i64)> {
    let plus = values.iter().find(|(_, v)| *v > theta)?.0;
    let minus = values.iter().find(|(_, v)| *v < -theta)?.0;
    Some((plus, minus))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantReport {
    pub windows: usize,
    pub planted: usize,
    pub detected_planted: usize,
    pub false_positives: usize,
}

/// Windows of `h` positive values `1 + X(p)^2` from one Sato-Tate
/// realization; every other window gets one value negated. Reports how
/// many planted windows the detector finds and how many clean ones it flags.
pub fn planted_alternation_trial(seed: u64, windows: usize, h: usize) -> Result<PlantReport> {
    if h == 0 || windows == 0 {
        return Err(Error::InvalidArgument("need windows >= 1 and h >= 1".into()));
    }
    let need = windows * h;
    let mut bound = 100u64;
    while crate::arith::primes_up_to(bound).len() < need {
        bound *= 2;
    }
    let r = crate::randmodel::sample_realization(seed, bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157);
    let mut values: Vec<(i64, f64)> = r.thetas[..need]
        .iter()
        .enumerate()
        .map(|(i, t)| (i as i64, 1.0 + (2.0 * t.cos()).powi(2)))
        .collect();
    let mut report = PlantReport {
        windows,
        planted: 0,
        detected_planted: 0,
        false_positives: 0,
    };
    for w in (0..windows).step_by(2) {
        let at = w * h + (rng.next_u64() % h as u64) as usize;
        values[at].1 = -values[at].1;
    }
    for w in 0..windows {
        let planted = w % 2 == 0 && h >= 2;
        let found = sign_change_detect(&values, (w * h) as f64, (h - 1) as f64).detected;
        if planted {
            report.planted += 1;
            report.detected_planted += found as usize;
        } else if found {
            report.false_positives += 1;
        }
    }
    Ok(report)
}

pub const FOURIER_C1: f64 = 2.0;
pub const FOURIER_C2: f64 = 1.0;

/// `round(sqrt(k / (2 log k)))`: the neighbours of the dominant term then
/// sit at relative size about `k^{-1/2}`.
pub fn default_ell(k: f64) -> u64 {
    (k / (2.0 * k.ln())).sqrt().round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCheck {
    pub k: f64,
    pub alpha: f64,
    pub ell: u64,
    pub y: f64,
    pub scaled_sum: f64,
    pub dominant: f64,
    pub residual: f64,
    pub bound: f64,
    pub within: bool,
}

/// `(e/l)^{k/2-1/4} sum_n c(n) n^{k/2-1/4} e(n(alpha + i y_l))` against
/// `c(l) e(alpha l)`, with `y_l = (k - 1/2)/(4 pi l)`. `c[n]` is `c(n)`;
/// `c[0]` is ignored.
pub fn fourier_dominant_term_check(c: &[f64], k: f64, alpha: f64, ell: u64) -> Result<FourierCheck> {
    if alpha != 0.0 && alpha != -0.5 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be 0 or -1/2")));
    }
    let upper = FOURIER_C2 * (k / k.ln()).sqrt();
    if !(ell as f64 > FOURIER_C1 && (ell as f64) < upper) {
        return Err(Error::OutOfRange {
            what: "ell",
            value: ell as f64,
            limit: upper,
        });
    }
    let n_max = 20 * ell as usize;
    if c.len() <= n_max {
        return Err(Error::InvalidArgument(format!("need coefficients up to n = {n_max}")));
    }
    let kappa = k / 2.0 - 0.25;
    let lf = ell as f64;
    let y = (k - 0.5) / (4.0 * PI * lf);
    let sign = |n: u64| if alpha == 0.0 || n % 2 == 0 { 1.0 } else { -1.0 };
    let mut s = KahanSum::new();
    for n in 1..=n_max as u64 {
        if n == ell || c[n as usize] == 0.0 {
            continue;
        }
        let nf = n as f64;
        // kappa (ln(n/l) + 1) - 2 pi n y = kappa (ln(n/l) + 1 - n/l) + O(n/l)
        let ex = kappa * ((nf / lf).ln() + 1.0) - 2.0 * PI * nf * y;
        s.add(c[n as usize] * sign(n) * ex.exp());
    }
    let dominant = c[ell as usize] * sign(ell);
    let ex_l = kappa - 2.0 * PI * lf * y;
    let scaled_sum = s.value() + dominant * ex_l.exp();
    let residual = (scaled_sum - dominant).abs();
    let bound = FOURIER_DOMINANT_C / k.sqrt();
    Ok(FourierCheck {
        k,
        alpha,
        ell,
        y,
        scaled_sum,
        dominant,
        residual,
        bound,
        within: residual <= bound,
    })
}

/// Coefficients `c(1..=n_max)` uniform in `[-1, 1]`.
pub fn bounded_random_coefficients(seed: u64, n_max: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::once(0.0)
        .chain((0..n_max).map(|_| 2.0 * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) - 1.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierRate {
    pub k_lo: f64,
    pub k_hi: f64,
    pub residual_lo: f64,
    pub residual_hi: f64,
    /// Fitted `a` in `residual ~ k^{-a}`.
    pub exponent: f64,
}

/// Decay exponent of the residual between `k` and `4k` for constant
/// coefficients `c(n) = 1`, with `l = default_ell(k)`.
pub fn fourier_rate(k: f64, alpha: f64) -> Result<FourierRate> {
    let run = |kk: f64| -> Result<f64> {
        let ell = default_ell(kk);
        let c = vec![1.0; 20 * ell as usize + 1];
        Ok(fourier_dominant_term_check(&c, kk, alpha, ell)?.residual)
    };
    let (lo, hi) = (run(k)?, run(4.0 * k)?);
    Ok(FourierRate {
        k_lo: k,
        k_hi: 4.0 * k,
        residual_lo: lo,
        residual_hi: hi,
        exponent: (lo / hi).ln() / 4f64.ln(),
    })
}

/// `V_k` table for the twist of a weight-`2k` form.
pub fn afe_table(k: u32) -> Result<VTable> {
    VTable::standard(AFEWeight::new(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::EigenvalueTable;

    #[test]
    fn petersson_small_grid() {
        let cfg = PeterssonConfig::default();
        let table = EigenvalueTable::ramanujan(10).unwrap();
        let omega = infer_omega(&cfg).unwrap();
        // Gamma(11) / ((4 pi)^11 <Delta, Delta>) with <Delta, Delta> = 1.0353620568e-6.
        let want = (crate::special::ln_gamma_real(11.0) - 11.0 * (4.0 * PI).ln()).exp() / 1.035_362_056_804_32e-6;
        assert!((omega / want - 1.0).abs() < 1e-8, "{omega} vs {want}");
        assert_eq!(petersson_check(&cfg, &table, omega, 1, 1).unwrap().residual, 0.0);
        for (m, n) in [(1, 2), (2, 3), (3, 3), (4, 5)] {
            let c = petersson_check(&cfg, &table, omega, m, n).unwrap();
            assert!(c.residual < 1e-8, "{c:?}");
        }
        assert!(PeterssonConfig { weight2k: 14, ..cfg }.validate().is_err());
    }

    #[test]
    fn petersson_other_weights() {
        for w in [16, 18, 20] {
            let cfg = PeterssonConfig { weight2k: w, ..Default::default() };
            let r = petersson_grid(&cfg, 5).unwrap();
            assert!(r.max_residual < 1e-8, "weight {w}: {}", r.max_residual);
        }
    }

    #[test]
    fn central_values() {
        let t = EigenvalueTable::ramanujan_uncached(100_000).unwrap();
        let v = afe_table(6).unwrap();
        let d = Discriminant::new(5).unwrap();
        let a = afe_central_value(&t, &d, &v, 1e-10).unwrap();
        let m = (afe_cutoff(&v, 1e-10) * 5.0).ceil() as usize;
        let b = afe_central_value_to(&t, &d, &v, 2 * m).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{a:?} {b:?}");
        assert!(a.truncation_error < 1e-8);
        let oracle = incomplete_gamma_central_value(&t, &d, 6).unwrap();
        assert!((a.value - oracle).abs() < 1e-4, "{} vs {oracle}", a.value);
        assert!(afe_central_value(&t, &Discriminant::new(-3).unwrap(), &v, 1e-6).is_err());
        // Contour choices inside V_k must not matter.
        let v2 = VTable::standard(AFEWeight::new(6).with_sigma(2.0)).unwrap();
        let c = afe_central_value(&t, &d, &v2, 1e-10).unwrap();
        assert!((a.value - c.value).abs() < 1e-8);
    }

    #[test]
    fn density_paths_agree() {
        let v = afe_table(6).unwrap();
        let phi = WeightFunction::bump(1.0, 2.0).unwrap();
        for (n, u) in [(1, 1), (3, 1), (3, 3), (5, 7)] {
            let a = density_check(n, u, 3000.0, &v, &phi).unwrap();
            let b = density_lhs_brute(n, u, 3000.0, &v, &phi).unwrap();
            assert!((a.lhs - b).abs() < 1e-9, "n={n} u={u}: {} vs {b}", a.lhs);
        }
        assert!(density_check(2, 1, 100.0, &v, &phi).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let phi = WeightFunction::default();
        let empty = MollifierScheme::synthetic(30.0, vec![(vec![], 2), (vec![], 2)]).unwrap();
        let r = mollified_second_diagonal(&empty, 100.0, &phi, &phi).unwrap();
        assert_eq!(r.product, 1.0);
        assert!((r.ln_main - (100f64.ln() + 30.0 + 0.5 * 30f64.ln())).abs() < 1e-12);
        let one = MollifierScheme::synthetic(30.0, vec![(vec![3], 1)]).unwrap();
        let r = mollified_second_diagonal(&one, 100.0, &phi, &phi).unwrap();
        assert!((r.product - 5.0 / 6.0).abs() < 1e-14, "{}", r.product);
        // With a large cap the truncated sum approaches the Euler factor.
        let big = MollifierScheme::synthetic(30.0, vec![(vec![3, 5], 12)]).unwrap();
        let r = mollified_second_diagonal(&big, 100.0, &phi, &phi).unwrap();
        let euler = diagonal_local_factor(3) * diagonal_local_factor(5);
        assert!((r.product - euler).abs() < 1e-12, "{} vs {euler}", r.product);
    }

    #[test]
    fn diagonal_built_scheme() {
        let log_k = 2e6f64;
        let theta0 = 1.0 / log_k.ln().powi(5);
        let s = MollifierScheme::build(log_k, 10.0, 1.0, 2.0 * theta0).unwrap();
        let phi = WeightFunction::default();
        let r = mollified_second_diagonal(&s, 1e3, &phi, &phi).unwrap();
        assert!(r.within);
        assert!(r.factors.iter().all(|f| f.value > 0.0 && f.value < 1.0));
    }

    #[test]
    fn diagonal_mertens_ratio() {
        for z in [1e3, 3e3] {
            let ratio = diagonal_euler_product(10.0, z * z).unwrap() / diagonal_euler_product(10.0, z).unwrap();
            assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.05, "z={z}: {ratio}");
        }
    }

    #[test]
    fn sign_change_patterns() {
        for len in 0..=10u32 {
            for code in 0..3u32.pow(len) {
                let mut c = code;
                let vals: Vec<(i64, f64)> = (0..len)
                    .map(|i| {
                        let v = (c % 3) as f64 - 1.0;
                        c /= 3;
                        (i as i64, v * (1.0 + 0.1 * i as f64))
                    })
                    .collect();
                let both = vals.iter().any(|v| v.1 > 0.0) && vals.iter().any(|v| v.1 < 0.0);
                assert_eq!(sign_change_detect(&vals, 0.0, 10.0).detected, both);
            }
        }
        let r = sign_change_detect(&[(0, 1.0), (1, -1.0)], 0.0, 1.0);
        assert!(r.detected && r.margin == 2.0);
        assert!(!sign_change_detect(&[], 0.0, 5.0).detected);
        assert_eq!(threshold_pair(&[(3, 0.5), (5, -2.0), (7, 3.0)], 1.0), Some((7, 5)));
        assert_eq!(threshold_pair(&[(3, 0.5), (5, -0.9)], 1.0), None);
    }

    #[test]
    fn planted_alternations() {
        let r = planted_alternation_trial(4, 200, 8).unwrap();
        assert_eq!(r.detected_planted, r.planted);
        assert_eq!(r.false_positives, 0);
    }

    #[test]
    fn fourier_single_term_and_rate() {
        let k = 1e4;
        let ell = 20;
        let mut c = vec![0.0; 20 * ell + 1];
        c[ell] = 1.0;
        let r = fourier_dominant_term_check(&c, k, -0.5, ell as u64).unwrap();
        assert!(r.residual < 1e-12, "{r:?}");
        let rate = fourier_rate(1e4, 0.0).unwrap();
        assert!((rate.exponent - 0.5).abs() < 0.125, "{rate:?}");
        assert!(fourier_dominant_term_check(&c, k, 0.0, 200).is_err());
        assert!(fourier_dominant_term_check(&c, k, 0.25, 20).is_err());
    }
}
