//! The mollifier: interval scheme, the divisor-type weights `nu_r(n; l)`,
//! power-expansion coefficients `h_l(n)`, evaluation against eigenvalue
//! tables, the function `iota` and the associated Euler products.

use crate::arith::{factor, primes_up_to, Discriminant, FactoredInt};
use crate::error::{Error, Result};
use crate::hecke::{chebyshev_h, EigenvalueTable};
use crate::numeric::linear_fit;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Largest prime bound the scheme will enumerate.
pub const MAX_PRIME_BOUND: f64 = 1e7;
/// Largest number of coefficients generated for a power of the mollifier.
pub const TERM_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// `log` of the endpoints; `I_0` is open on the left, the others on the right.
    pub ln_lo: f64,
    pub ln_hi: f64,
    pub primes: Vec<u64>,
    /// `l_j`
    pub ell: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierScheme {
    pub log_k: f64,
    pub c0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub thetas: Vec<f64>,
    pub ells: Vec<u32>,
    /// Index of the last interval.
    pub j_max: usize,
    pub delta0: f64,
    pub intervals: Vec<Interval>,
    /// Each factor keeps `Omega(n) <= trunc_mult * l_j`.
    pub trunc_mult: u32,
    pub synthetic: bool,
}

fn nonempty_primes(lo: f64, hi: f64, lo_open: bool) -> Result<Vec<u64>> {
    if hi > MAX_PRIME_BOUND {
        return Err(Error::OutOfRange {
            what: "interval endpoint",
            value: hi,
            limit: MAX_PRIME_BOUND,
        });
    }
    Ok(primes_up_to(hi.floor() as u64)
        .into_iter()
        .filter(|&p| {
            let p = p as f64;
            (if lo_open { p > lo } else { p >= lo }) && (lo_open || p < hi)
        })
        .collect())
}

impl MollifierScheme {
    /// Scheme for `K = exp(log_k)`.
    pub fn build(log_k: f64, c0: f64, eta1: f64, eta2: f64) -> Result<Self> {
        if !(log_k >= std::f64::consts::E) {
            return Err(Error::InvalidArgument(format!("need K >= e^e, got log K = {log_k}")));
        }
        if !(eta1 > 0.0 && eta2 > 0.0) {
            return Err(Error::InvalidArgument("eta1 and eta2 must be positive".into()));
        }
        let ll5 = log_k.ln().powi(5);
        let theta0 = eta1 / ll5;
        if eta2 < theta0 {
            return Err(Error::InvalidArgument(format!("eta2 = {eta2} lies below theta_0 = {theta0}")));
        }
        let mut thetas = vec![theta0];
        while *thetas.last().unwrap() < eta2 {
            let next = thetas.last().unwrap() * std::f64::consts::E;
            thetas.push(next);
        }
        let ells: Vec<u32> = thetas.iter().map(|t| 2 * t.powf(-0.75).floor() as u32).collect();
        let delta0 = thetas.iter().zip(&ells).map(|(t, &l)| t * l as f64).sum();
        let mut intervals = Vec::with_capacity(thetas.len());
        for (j, (&t, &ell)) in thetas.iter().zip(&ells).enumerate() {
            let (ln_lo, ln_hi) = if j == 0 { (c0.ln(), t * log_k) } else { (thetas[j - 1] * log_k, t * log_k) };
            let primes = if ln_hi <= ln_lo {
                Vec::new()
            } else {
                nonempty_primes(ln_lo.exp(), ln_hi.exp(), j == 0)?
            };
            intervals.push(Interval {
                ln_lo,
                ln_hi,
                primes,
                ell,
            });
        }
        Ok(MollifierScheme {
            log_k,
            c0,
            eta1,
            eta2,
            j_max: thetas.len() - 1,
            thetas,
            ells,
            delta0,
            intervals,
            trunc_mult: 1,
            synthetic: false,
        })
    }

    /// Scheme with the given defaults `c0 = 10, eta1 = 1, eta2 = 0.01`.
    pub fn with_defaults(log_k: f64) -> Result<Self> {
        Self::build(log_k, 10.0, 1.0, 0.01)
    }

    /// Explicit prime sets and truncation parameters, one per interval.
    /// `thetas` are set to `log(max prime)/log K` so that `delta0` still
    /// bounds the support.
    pub fn synthetic(log_k: f64, parts: Vec<(Vec<u64>, u32)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (ps, _) in &parts {
            for &p in ps {
                if p < 3 || !crate::hecke::is_prime_u64(p) {
                    return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
                }
                if !seen.insert(p) {
                    return Err(Error::InvalidArgument(format!("prime {p} appears in two intervals")));
                }
            }
        }
        let intervals: Vec<Interval> = parts
            .into_iter()
            .map(|(mut primes, ell)| {
                primes.sort_unstable();
                let ln_lo = primes.first().map_or(0.0, |&p| (p as f64).ln());
                let ln_hi = primes.last().map_or(0.0, |&p| (p as f64).ln());
                Interval {
                    ln_lo,
                    ln_hi,
                    primes,
                    ell,
                }
            })
            .collect();
        let thetas: Vec<f64> = intervals.iter().map(|i| i.ln_hi / log_k).collect();
        let ells: Vec<u32> = intervals.iter().map(|i| i.ell).collect();
        let delta0 = thetas.iter().zip(&ells).map(|(t, &l)| t * l as f64).sum();
        Ok(MollifierScheme {
            log_k,
            c0: 2.0,
            eta1: f64::NAN,
            eta2: f64::NAN,
            j_max: intervals.len().saturating_sub(1),
            thetas,
            ells,
            delta0,
            intervals,
            trunc_mult: 1,
            synthetic: true,
        })
    }

    pub fn with_trunc_mult(mut self, m: u32) -> Self {
        self.trunc_mult = m;
        self
    }

    /// Cap on `Omega(n_j)` in the `j`-th factor of the mollifier itself.
    pub fn cap(&self, j: usize) -> u32 {
        self.trunc_mult * self.intervals[j].ell
    }

    pub fn empty_intervals(&self) -> usize {
        self.intervals.iter().filter(|i| i.primes.is_empty()).count()
    }

    pub fn all_primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.intervals.iter().flat_map(|i| i.primes.iter().copied()).collect();
        v.sort_unstable();
        v
    }

    pub fn max_prime(&self) -> u64 {
        self.intervals.iter().filter_map(|i| i.primes.last().copied()).max().unwrap_or(1)
    }

    /// Interval index containing `p`.
    pub fn interval_of(&self, p: u64) -> Option<usize> {
        self.intervals.iter().position(|i| i.primes.binary_search(&p).is_ok())
    }

    /// JSON form with sorted keys. `K` is `null` when it overflows a double.
    pub fn to_json(&self) -> serde_json::Value {
        let k = self.log_k.exp();
        let num = |x: f64| if x.is_finite() { serde_json::json!(x) } else { serde_json::Value::Null };
        serde_json::json!({
            "K": num(k),
            "log_K": self.log_k,
            "c0": self.c0,
            "eta1": num(self.eta1),
            "eta2": num(self.eta2),
            "thetas": self.thetas,
            "ells": self.ells,
            "J": self.j_max,
            "delta0": self.delta0,
            "trunc_mult": self.trunc_mult,
            "synthetic": self.synthetic,
            "intervals": self.intervals.iter().map(|i| serde_json::json!({
                "ln_lo": i.ln_lo,
                "ln_hi": i.ln_hi,
                "ell": i.ell,
                "primes": i.primes.len(),
                "first": i.primes.first(),
                "last": i.primes.last(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `nu(n) = prod 1/alpha!`.
pub fn nu(n: &FactoredInt) -> BigRational {
    let den = n.factors().iter().fold(BigInt::one(), |acc, &(_, a)| acc * factorial(a));
    BigRational::new(BigInt::one(), den)
}

/// Untruncated `nu_r(n) = r^Omega(n) / prod alpha!`.
pub fn nu_r_full(n: &FactoredInt, r: u32) -> BigRational {
    nu(n) * BigRational::from_integer(BigInt::from(r).pow(n.big_omega()))
}

/// `nu_r` on an exponent vector: sum over ordered factorisations into `r`
/// parts, each with at most `ell` prime factors, of the product of `nu`.
/// Depends only on the multiset of exponents.
pub fn nu_r_exponents(exps: &[u32], r: u32, ell: u32) -> BigRational {
    let exps: Vec<u32> = exps.iter().copied().filter(|&a| a > 0).collect();
    let total: u32 = exps.iter().sum();
    if total > r.saturating_mul(ell) {
        return BigRational::zero();
    }
    if r == 0 {
        return if total == 0 { BigRational::one() } else { BigRational::zero() };
    }
    // Mixed-radix indexing of divisors.
    let dims: Vec<usize> = exps.iter().map(|&a| a as usize + 1).collect();
    let size: usize = dims.iter().product();
    let decode = |mut idx: usize| -> Vec<u32> {
        dims.iter()
            .map(|&d| {
                let e = (idx % d) as u32;
                idx /= d;
                e
            })
            .collect()
    };
    let vecs: Vec<Vec<u32>> = (0..size).map(decode).collect();
    let base: Vec<BigRational> = vecs
        .iter()
        .map(|v| {
            let om: u32 = v.iter().sum();
            if om > ell {
                BigRational::zero()
            } else {
                let den = v.iter().fold(BigInt::one(), |acc, &a| acc * factorial(a));
                BigRational::new(BigInt::one(), den)
            }
        })
        .collect();
    let encode = |v: &[u32]| -> usize {
        let mut idx = 0;
        for (k, &e) in v.iter().enumerate().rev() {
            idx = idx * dims[k] + e as usize;
        }
        idx
    };
    let mut cur = base.clone();
    for _ in 1..r {
        let mut next = vec![BigRational::zero(); size];
        for (i, vi) in vecs.iter().enumerate() {
            if cur[i].is_zero() {
                continue;
            }
            for (j, vj) in vecs.iter().enumerate() {
                if base[j].is_zero() {
                    continue;
                }
                if vi.iter().zip(vj).zip(&exps).any(|((a, b), m)| a + b > *m) {
                    continue;
                }
                let sum: Vec<u32> = vi.iter().zip(vj).map(|(a, b)| a + b).collect();
                next[encode(&sum)] += &cur[i] * &base[j];
            }
        }
        cur = next;
    }
    cur[size - 1].clone()
}

/// `nu_r(n; ell)`.
pub fn nu_r(n: &FactoredInt, r: u32, ell: u32) -> BigRational {
    let exps: Vec<u32> = n.factors().iter().map(|&(_, a)| a).collect();
    nu_r_exponents(&exps, r, ell)
}

/// `h_ell(n) = prod_j nu_{2 ell}(n_j; cap_j)`, with `n_j` the part of `n`
/// supported on `I_j`; zero unless every prime of `n` lies in some `I_j`.
pub fn h_ell(n: &FactoredInt, scheme: &MollifierScheme, ell: u32) -> BigRational {
    let mut parts: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for &(p, a) in n.factors() {
        match scheme.interval_of(p) {
            Some(j) => parts.entry(j).or_default().push(a),
            None => return BigRational::zero(),
        }
    }
    parts
        .iter()
        .fold(BigRational::one(), |acc, (&j, exps)| acc * nu_r_exponents(exps, 2 * ell, scheme.cap(j)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub n: u64,
    pub omega: u32,
    /// Exact `h_ell(n)`.
    pub h: String,
    /// `h_ell(n) lambda(n) / (2^Omega(n) sqrt n)`
    pub value: f64,
}

/// Coefficients of the `2 ell`-th power of the mollifier with the
/// completely multiplicative parts `a(n) chi_d(n)` stripped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierCoefficients {
    pub power: u32,
    pub entries: Vec<Coefficient>,
}

/// Exponent vectors over `k` primes with total at most `cap`.
fn exponent_vectors(k: usize, cap: u32) -> Vec<Vec<u32>> {
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
    rec(k, cap, &mut Vec::new(), &mut out);
    out
}

fn checked_value(primes: &[u64], exps: &[u32]) -> Option<u64> {
    let mut n = 1u64;
    for (&p, &a) in primes.iter().zip(exps) {
        n = n.checked_mul(p.checked_pow(a)?)?;
    }
    Some(n)
}

fn count_vectors(k: usize, cap: u32) -> f64 {
    // binomial(cap + k, k)
    (1..=k).fold(1.0, |acc, i| acc * (cap as f64 + i as f64) / i as f64)
}

impl MollifierCoefficients {
    pub fn generate(scheme: &MollifierScheme, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("power must be positive".into()));
        }
        let mut per_interval: Vec<Vec<(u64, u32, BigRational)>> = Vec::new();
        let mut total = 1.0;
        for (j, iv) in scheme.intervals.iter().enumerate() {
            let cap = 2 * ell * scheme.cap(j);
            let count = count_vectors(iv.primes.len(), cap);
            total *= count;
            if total > TERM_CAP as f64 {
                return Err(Error::TermCap(TERM_CAP));
            }
            let mut cache: HashMap<Vec<u32>, BigRational> = HashMap::new();
            let mut list = Vec::new();
            for v in exponent_vectors(iv.primes.len(), cap) {
                let n = checked_value(&iv.primes, &v).ok_or(Error::OutOfRange {
                    what: "coefficient index",
                    value: f64::INFINITY,
                    limit: u64::MAX as f64,
                })?;
                let mut key: Vec<u32> = v.iter().copied().filter(|&a| a > 0).collect();
                key.sort_unstable();
                let w = cache
                    .entry(key.clone())
                    .or_insert_with(|| nu_r_exponents(&key, 2 * ell, scheme.cap(j)))
                    .clone();
                if !w.is_zero() {
                    list.push((n, v.iter().sum(), w));
                }
            }
            per_interval.push(list);
        }
        let mut acc: Vec<(u64, u32, BigRational)> = vec![(1, 0, BigRational::one())];
        for list in &per_interval {
            let mut next = Vec::with_capacity(acc.len() * list.len());
            for (n, om, h) in &acc {
                for (m, om2, w) in list {
                    let nm = n.checked_mul(*m).ok_or(Error::OutOfRange {
                        what: "coefficient index",
                        value: f64::INFINITY,
                        limit: u64::MAX as f64,
                    })?;
                    next.push((nm, om + om2, h * w));
                }
            }
            acc = next;
        }
        acc.sort_by_key(|e| e.0);
        let entries = acc
            .into_iter()
            .map(|(n, omega, h)| {
                let sign = if omega % 2 == 0 { 1.0 } else { -1.0 };
                let value = sign * h.to_f64().unwrap_or(f64::NAN) / (2f64.powi(omega as i32) * (n as f64).sqrt());
                Coefficient {
                    n,
                    omega,
                    h: h.to_string(),
                    value,
                }
            })
            .collect();
        Ok(MollifierCoefficients { power: ell, entries })
    }

    /// `(log K)^{ell/2} sum_n value(n) A(n) chi_d(n)` for a completely
    /// multiplicative `A` given on primes.
    pub fn eval_with(&self, log_k: f64, d: &Discriminant, a_at: impl Fn(u64) -> f64) -> Result<f64> {
        let mut sum = crate::numeric::KahanSum::new();
        for c in &self.entries {
            let chi = d.chi(c.n as i64);
            if chi == 0 {
                continue;
            }
            let f = factor(c.n)?;
            let a: f64 = f.factors().iter().map(|&(p, e)| a_at(p).powi(e as i32)).product();
            sum.add(c.value * chi as f64 * a);
        }
        Ok(log_k.powf(self.power as f64 / 2.0) * sum.value())
    }
}

/// `sum_{m <= cap} s^m / m!`
pub fn truncated_exp(s: f64, cap: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..=cap {
        term *= s / m as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && m as f64 > s.abs() {
            break;
        }
    }
    sum
}

/// The factors `M_j` for a completely multiplicative `a` given on primes.
/// Each is the truncated exponential of `-sum_{p in I_j} a(p) chi_d(p) / (2 sqrt p)`.
pub fn mollifier_factors(scheme: &MollifierScheme, d: &Discriminant, a_at: impl Fn(u64) -> f64) -> Vec<f64> {
    scheme
        .intervals
        .iter()
        .enumerate()
        .map(|(j, iv)| {
            let s: f64 = iv
                .primes
                .iter()
                .map(|&p| -a_at(p) * d.chi(p as i64) as f64 / (2.0 * (p as f64).sqrt()))
                .sum();
            truncated_exp(s, scheme.cap(j))
        })
        .collect()
}

/// `M_g(d)` with `a(p) = lambda(p)` from the table.
pub fn mollifier_eval(scheme: &MollifierScheme, t: &EigenvalueTable, d: &Discriminant) -> Result<f64> {
    let top = scheme.max_prime();
    if top as usize > t.max_index {
        return Err(Error::OutOfRange {
            what: "largest mollifier prime",
            value: top as f64,
            limit: t.max_index as f64,
        });
    }
    let f = mollifier_factors(scheme, d, |p| t.values[p as usize]);
    Ok(scheme.log_k.powf(0.25) * f.iter().product::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierBound {
    pub value: f64,
    /// `log(C K^{delta0} (log K)^{1/4})`
    pub ln_bound: f64,
    pub within: bool,
}

pub fn mollifier_bound_check(scheme: &MollifierScheme, t: &EigenvalueTable, d: &Discriminant) -> Result<MollifierBound> {
    let value = mollifier_eval(scheme, t, d)?;
    let ln_bound = crate::calibration::MOLLIFIER_SIZE_C.ln() + scheme.delta0 * scheme.log_k + 0.25 * scheme.log_k.ln();
    Ok(MollifierBound {
        value,
        ln_bound,
        within: value.abs().ln() <= ln_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerExpansionCheck {
    pub power: u32,
    pub terms: usize,
    /// Number of `n` where the two coefficient lists disagree.
    pub mismatches: usize,
    /// Largest `|difference|`, as a decimal string of an exact rational.
    pub max_discrepancy: String,
    pub unit_coefficient: String,
}

/// Compares the `h_ell` formula against the `2 ell`-fold product of the
/// mollifier expanded as a formal polynomial in the primes of the scheme.
pub fn power_expansion_check(scheme: &MollifierScheme, ell: u32) -> Result<PowerExpansionCheck> {
    let primes = scheme.all_primes();
    if primes.len() > 8 {
        return Err(Error::InvalidArgument(format!("{} primes is too many for exact expansion", primes.len())));
    }
    let idx: HashMap<u64, usize> = primes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    // M as a map from exponent vectors to nu(n) (-1)^Omega / 2^Omega.
    let mut m: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    m.insert(vec![0; primes.len()], BigRational::one());
    for (j, iv) in scheme.intervals.iter().enumerate() {
        let mut next = BTreeMap::new();
        for v in exponent_vectors(iv.primes.len(), scheme.cap(j)) {
            let om: u32 = v.iter().sum();
            let den = v.iter().fold(BigInt::one(), |acc, &a| acc * factorial(a)) * BigInt::from(2).pow(om);
            let sign = if om % 2 == 0 { 1 } else { -1 };
            let c = BigRational::new(BigInt::from(sign), den);
            for (key, val) in &m {
                let mut k2 = key.clone();
                for (&p, &a) in iv.primes.iter().zip(&v) {
                    k2[idx[&p]] += a;
                }
                *next.entry(k2).or_insert_with(BigRational::zero) += val * &c;
            }
        }
        m = next;
    }
    let mut power = m.clone();
    for _ in 1..2 * ell {
        let mut next: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (a, x) in &power {
            for (b, y) in &m {
                let k: Vec<u32> = a.iter().zip(b).map(|(s, t)| s + t).collect();
                *next.entry(k).or_insert_with(BigRational::zero) += x * y;
            }
        }
        power = next;
    }
    let formula = MollifierCoefficients::generate(scheme, ell)?;
    let mut from_formula: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    for c in &formula.entries {
        let f = factor(c.n)?;
        let mut key = vec![0u32; primes.len()];
        for &(p, a) in f.factors() {
            key[idx[&p]] = a;
        }
        let h: BigRational = c.h.parse().map_err(|_| Error::Check(format!("unparsable rational {}", c.h)))?;
        let sign = if c.omega % 2 == 0 { 1 } else { -1 };
        from_formula.insert(key, h * rat(sign, 1) / BigRational::from_integer(BigInt::from(2).pow(c.omega)));
    }
    let mut mismatches = 0;
    let mut max = BigRational::zero();
    let keys: std::collections::BTreeSet<&Vec<u32>> = power.keys().chain(from_formula.keys()).collect();
    let zero = BigRational::zero();
    for k in &keys {
        let a = power.get(*k).unwrap_or(&zero);
        let b = from_formula.get(*k).unwrap_or(&zero);
        let diff = (a - b).abs();
        if !diff.is_zero() {
            mismatches += 1;
            if diff > max {
                max = diff;
            }
        }
    }
    let unit = from_formula.get(&vec![0; primes.len()]).cloned().unwrap_or_else(BigRational::zero);
    Ok(PowerExpansionCheck {
        power: ell,
        terms: keys.len(),
        mismatches,
        max_discrepancy: max.to_string(),
        unit_coefficient: unit.to_string(),
    })
}

/// `iota(p^a) = sum_{c == a mod 2} h_a(c) p^{-c/2}`.
pub fn iota_prime_power(p: u64, a: u32) -> f64 {
    (0..=a)
        .filter(|c| (a + c) % 2 == 0)
        .map(|c| chebyshev_h(a, c) as f64 * (p as f64).powf(-(c as f64) / 2.0))
        .sum()
}

/// `iota(n) = sum_{u | n, nu square} c_n(u) / sqrt u`, multiplicative.
pub fn iota(n: &FactoredInt) -> f64 {
    n.factors().iter().map(|&(p, a)| iota_prime_power(p, a)).product()
}

/// Local factor of the second-moment Euler product at `p`.
pub fn second_local_factor(p: u64) -> f64 {
    let pf = p as f64;
    let nu2 = |a: u32| nu_r_full(&FactoredInt::from_factors(vec![(p, a)]), 2).to_f64().unwrap();
    let damp = 1.0 / (1.0 + 1.0 / pf);
    1.0 - iota_prime_power(p, 1) * nu2(1) / (2.0 * pf.sqrt()) * damp + iota_prime_power(p, 2) * nu2(2) / (4.0 * pf) * damp
}

/// Local factor of the fourth-moment Euler product at `p`: the `a <= 2`
/// terms of `sum_a lambda(p^a) nu_4(p^a) / (2^a p^{a/2}) sum_{u | p^a, p^a u square} c(u) d(u) / sqrt u`,
/// damped by `(1 + 1/p)^{-1}` for `a >= 1`.
pub fn fourth_local_factor(p: u64) -> f64 {
    let pf = p as f64;
    let damp = 1.0 / (1.0 + 1.0 / pf);
    let mut f = 1.0;
    for a in 1..=2u32 {
        let nu4 = nu_r_full(&FactoredInt::from_factors(vec![(p, a)]), 4).to_f64().unwrap();
        let inner: f64 = (0..=a)
            .filter(|c| (a + c) % 2 == 0)
            .map(|c| chebyshev_h(a, c) as f64 * (c + 1) as f64 * pf.powf(-(c as f64) / 2.0))
            .sum();
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        f += sign * nu4 / (2f64.powi(a as i32) * pf.powf(a as f64 / 2.0)) * inner * damp;
    }
    f
}

/// `log prod_{c0 < p <= z} factor(p)`, evaluated at each of the ascending
/// cutoffs `zs` with a single sieve.
pub fn log_euler_product(factor_at: impl Fn(u64) -> f64, c0: f64, zs: &[f64]) -> Result<Vec<f64>> {
    let top = zs.iter().copied().fold(0.0, f64::max);
    if top > 1e8 {
        return Err(Error::OutOfRange {
            what: "Euler product cutoff",
            value: top,
            limit: 1e8,
        });
    }
    if zs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("cutoffs must ascend".into()));
    }
    let primes = primes_up_to(top as u64);
    let mut out = Vec::with_capacity(zs.len());
    let mut acc = crate::numeric::KahanSum::new();
    let mut i = 0;
    for &z in zs {
        while i < primes.len() && primes[i] as f64 <= z {
            if primes[i] as f64 > c0 {
                acc.add(factor_at(primes[i]).ln());
            }
            i += 1;
        }
        out.push(acc.value());
    }
    Ok(out)
}

pub fn euler_product_second(z: f64, c0: f64) -> Result<f64> {
    Ok(log_euler_product(second_local_factor, c0, &[z])?[0].exp())
}

pub fn euler_product_fourth(z: f64, c0: f64) -> Result<f64> {
    Ok(log_euler_product(fourth_local_factor, c0, &[z])?[0].exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerSlope {
    pub z_lo: f64,
    pub z_hi: f64,
    pub slope: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Slope of `log P(z)` against `log log z` over `points` log-spaced cutoffs.
pub fn euler_slope(which: u32, c0: f64, z_lo: f64, z_hi: f64, points: usize) -> Result<EulerSlope> {
    let zs: Vec<f64> = (0..points)
        .map(|i| z_lo * (z_hi / z_lo).powf(i as f64 / (points - 1) as f64))
        .collect();
    let (logs, expected) = match which {
        2 => (log_euler_product(second_local_factor, c0, &zs)?, -0.5),
        4 => (log_euler_product(fourth_local_factor, c0, &zs)?, -2.0),
        _ => return Err(Error::InvalidArgument(format!("no Euler product for moment {which}"))),
    };
    let x: Vec<f64> = zs.iter().map(|z| z.ln().ln()).collect();
    let (slope, _) = linear_fit(&x, &logs);
    Ok(EulerSlope {
        z_lo,
        z_hi,
        slope,
        expected,
        relative_error: (slope - expected).abs() / expected.abs(),
    })
}
