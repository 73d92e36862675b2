//! Hecke structure: Chebyshev expansion coefficients, the `c_n(u)` weights,
//! Hecke multiplication and tables of normalised eigenvalues.

use crate::arith::{factor, factor_with, gcd, spf_table, FactoredInt};
use crate::error::{Error, Result};
use crate::numeric::{integrate, KahanSum};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::sync::OnceLock;

pub const MAX_CHEBYSHEV_ALPHA: u32 = 40;

fn chebyshev_table() -> &'static Vec<Vec<u128>> {
    static T: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    T.get_or_init(|| {
        let n = MAX_CHEBYSHEV_ALPHA as usize;
        let mut rows = vec![vec![0u128; n + 2]; n + 1];
        rows[0][0] = 1;
        for a in 0..n {
            for c in 0..=a + 1 {
                let below = if c == 0 { 0 } else { rows[a][c - 1] };
                rows[a + 1][c] = below + rows[a][c + 1];
            }
        }
        rows
    })
}

/// `h_alpha(c)`: coefficient of `U_c` in the expansion of `(2 cos t)^alpha`
/// in Chebyshev polynomials of the second kind.
pub fn chebyshev_h(alpha: u32, c: u32) -> u128 {
    assert!(alpha <= MAX_CHEBYSHEV_ALPHA, "alpha = {alpha} exceeds {MAX_CHEBYSHEV_ALPHA}");
    if c > alpha {
        return 0;
    }
    chebyshev_table()[alpha as usize][c as usize]
}

/// The same coefficient from the orthogonality integral
/// `(2/pi) int_0^pi (2 cos t)^alpha sin((c+1)t) sin t dt`.
pub fn chebyshev_h_quadrature(alpha: u32, c: u32) -> f64 {
    let panels = 4 + (alpha + c) as usize / 4;
    2.0 / PI
        * integrate(
            |t| (2.0 * t.cos()).powi(alpha as i32) * ((c + 1) as f64 * t).sin() * t.sin(),
            0.0,
            PI,
            panels,
        )
}

/// `U_c(cos t) = sin((c+1)t)/sin t` by the three-term recurrence.
pub fn chebyshev_u(c: u32, x: f64) -> f64 {
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    if c == 0 {
        return u0;
    }
    for _ in 1..c {
        (u0, u1) = (u1, 2.0 * x * u1 - u0);
    }
    u1
}

/// `c_n(u) = prod_{p^alpha || n} h_alpha(v_p(u))` for `u | n`.
pub fn c_coeff(n: &FactoredInt, u: u64) -> Result<u128> {
    if u == 0 || n.value() % u != 0 {
        return Err(Error::InvalidArgument(format!("{u} does not divide {}", n.value())));
    }
    let mut out = 1u128;
    let mut rest = u;
    for &(p, a) in n.factors() {
        let mut c = 0;
        while rest % p == 0 {
            rest /= p;
            c += 1;
        }
        out *= chebyshev_h(a, c);
    }
    Ok(out)
}

/// `a(n) = sum_{u | n} c_n(u) lambda(u)`, which equals `prod lambda(p)^alpha`
/// when `lambda` satisfies the Hecke relations.
pub fn a_from_lambda(n: u64, table: &EigenvalueTable) -> Result<f64> {
    let f = factor(n)?;
    let mut acc = KahanSum::new();
    for u in f.divisors() {
        acc.add(c_coeff(&f, u)? as f64 * table.get(u as usize)?);
    }
    Ok(acc.value())
}

/// Multiset `{mn/d^2 : d | gcd(m, n)}` indexing the Hecke product `T_m T_n`.
pub fn hecke_multiply(m: u64, n: u64) -> Vec<u64> {
    let g = gcd(m, n);
    (1..=g)
        .filter(|d| g % d == 0)
        .map(|d| m / d * n / d)
        .collect()
}

/// Normalised Hecke eigenvalues `lambda(1..=max_index)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenvalueTable {
    pub label: String,
    pub max_index: usize,
    /// `values[n]` is `lambda(n)`; `values[0]` is unused.
    pub values: Vec<f64>,
}

const HECKE_PAIRS: usize = 1000;

impl EigenvalueTable {
    /// Wraps a table and checks `lambda(1) = 1` and the Hecke relation on
    /// random pairs.
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("table needs lambda(1)".into()));
        }
        let t = EigenvalueTable {
            label: label.into(),
            max_index: values.len() - 1,
            values,
        };
        if (t.values[1] - 1.0).abs() > 1e-12 {
            return Err(Error::Check(format!("lambda(1) = {}", t.values[1])));
        }
        t.validate_hecke(HECKE_PAIRS, 0x4845_434b)?;
        Ok(t)
    }

    /// Extends prime values multiplicatively through the Hecke recursion.
    /// `at_prime(p)` supplies `lambda(p)`.
    pub fn from_primes(label: impl Into<String>, max_index: usize, mut at_prime: impl FnMut(u64) -> f64) -> Result<Self> {
        let spf = spf_table(max_index);
        let mut values = vec![0.0; max_index + 1];
        if max_index >= 1 {
            values[1] = 1.0;
        }
        for n in 2..=max_index {
            let p = spf[n] as usize;
            let mut pk = p;
            let mut k = 1u32;
            while (n / pk) % p == 0 {
                pk *= p;
                k += 1;
            }
            let rest = n / pk;
            if rest > 1 {
                values[n] = values[pk] * values[rest];
            } else if k == 1 {
                values[n] = at_prime(p as u64);
            } else {
                let lp = values[p];
                let prev2 = if k == 2 { 1.0 } else { values[pk / p / p] };
                values[n] = lp * values[pk / p] - prev2;
            }
        }
        Self::new(label, values)
    }

    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.max_index {
            return Err(Error::OutOfRange {
                what: "eigenvalue index",
                value: n as f64,
                limit: self.max_index as f64,
            });
        }
        Ok(self.values[n])
    }

    /// Largest residual of `lambda(m) lambda(n) = sum lambda(mn/d^2)` over
    /// `pairs` random pairs with `mn <= max_index`.
    pub fn hecke_residual(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max = self.max_index as u64;
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let m = 1 + rng.next_u64() % max;
            let n = 1 + rng.next_u64() % (max / m).max(1);
            if m * n > max {
                continue;
            }
            let lhs = self.values[m as usize] * self.values[n as usize];
            let rhs: f64 = hecke_multiply(m, n).iter().map(|&k| self.values[k as usize]).sum();
            let scale = 1.0 + lhs.abs();
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        worst
    }

    fn validate_hecke(&self, pairs: usize, seed: u64) -> Result<()> {
        let r = self.hecke_residual(pairs, seed);
        if r > 1e-9 {
            return Err(Error::Check(format!("Hecke relation violated for {}: residual {r:e}", self.label)));
        }
        Ok(())
    }

    /// Normalised eigenvalues of the discriminant function `Delta`, using the
    /// on-disk tau cache.
    pub fn ramanujan(max_index: usize) -> Result<Self> {
        Self::ramanujan_from(&ramanujan_tau(max_index)?, max_index)
    }

    /// As [`EigenvalueTable::ramanujan`] but without touching the cache.
    pub fn ramanujan_uncached(max_index: usize) -> Result<Self> {
        Self::ramanujan_from(&ramanujan_tau_direct(max_index), max_index)
    }

    fn ramanujan_from(tau: &[i128], max_index: usize) -> Result<Self> {
        let values = std::iter::once(0.0)
            .chain((1..=max_index).map(|n| tau[n] as f64 / (n as f64).powf(5.5)))
            .collect();
        Self::new("Delta", values)
    }
}

const P1: u64 = (1 << 61) - 1;
const P2: u64 = (1 << 62) - 57;

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Coefficients of `prod (1 - q^n)^24` up to `q^n_max` modulo `p`, by the
/// power recurrence `n g_n = sum_j (25 j - n) f_j g_{n-j}` with the sparse
/// pentagonal series `f`.
fn eta24_mod(n_max: usize, p: u64, pent: &[(usize, i64)]) -> Vec<u64> {
    let mut inv = vec![0u64; n_max + 2];
    if n_max >= 1 {
        inv[1] = 1;
    }
    for i in 2..=n_max {
        let q = p / i as u64;
        let r = (p % i as u64) as usize;
        inv[i] = ((p - q) as u128 * inv[r] as u128 % p as u128) as u64;
    }
    let mut g = vec![0u64; n_max + 1];
    g[0] = 1;
    for n in 1..=n_max {
        let mut acc: i128 = 0;
        for &(j, s) in pent {
            if j > n {
                break;
            }
            let t = (25 * j as i64 - n as i64) * s;
            acc += t as i128 * g[n - j] as i128;
        }
        let r = acc.rem_euclid(p as i128) as u128;
        g[n] = (r * inv[n] as u128 % p as u128) as u64;
    }
    g
}

fn pentagonal_terms(n_max: usize) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut k: i64 = 1;
    loop {
        let a = (k * (3 * k - 1) / 2) as usize;
        let b = (k * (3 * k + 1) / 2) as usize;
        if a > n_max {
            break;
        }
        let s = if k % 2 == 0 { 1 } else { -1 };
        out.push((a, s));
        if b <= n_max {
            out.push((b, s));
        }
        k += 1;
    }
    out.sort_unstable();
    out
}

/// `tau(0..=n_max)` computed directly (index 0 is 0).
pub fn ramanujan_tau_direct(n_max: usize) -> Vec<i128> {
    let pent = pentagonal_terms(n_max);
    let g1 = eta24_mod(n_max, P1, &pent);
    let g2 = eta24_mod(n_max, P2, &pent);
    let m = P1 as u128 * P2 as u128;
    let p1_inv = mod_pow(P1 % P2, P2 - 2, P2) as u128;
    let mut tau = vec![0i128; n_max + 1];
    for n in 1..=n_max {
        let (r1, r2) = (g1[n - 1] as u128, g2[n - 1] as u128);
        let diff = (r2 + P2 as u128 - r1 % P2 as u128) % P2 as u128;
        let k = diff * p1_inv % P2 as u128;
        let x = r1 + P1 as u128 * k;
        tau[n] = if x > m / 2 { -((m - x) as i128) } else { x as i128 };
    }
    tau
}

/// Directory used for the tau cache: `$MM_CACHE_DIR`, else `./cache`.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("MM_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("cache"))
}

const TAU_FILE: &str = "ramanujan_tau.tsv";

fn read_tau_cache(path: &std::path::Path, n_max: usize) -> Option<Vec<i128>> {
    let f = std::fs::File::open(path).ok()?;
    let mut tau = vec![0i128; n_max + 1];
    let mut seen = 0;
    for line in std::io::BufReader::new(f).lines() {
        let line = line.ok()?;
        let (a, b) = line.split_once('\t')?;
        let n: usize = a.parse().ok()?;
        if n == 0 || n > n_max {
            if n > n_max {
                break;
            }
            continue;
        }
        tau[n] = b.trim().parse().ok()?;
        seen = n;
    }
    (seen >= n_max).then_some(tau)
}

/// `tau(0..=n_max)`, read from the on-disk cache when it is long enough and
/// recomputed (and the cache rewritten) otherwise.
pub fn ramanujan_tau(n_max: usize) -> Result<Vec<i128>> {
    let dir = cache_dir();
    let path = dir.join(TAU_FILE);
    if let Some(t) = read_tau_cache(&path, n_max) {
        return Ok(t);
    }
    let tau = ramanujan_tau_direct(n_max);
    if n_max >= 1000 {
        std::fs::create_dir_all(&dir)?;
        let tmp = dir.join(format!("{TAU_FILE}.{}.tmp", std::process::id()));
        {
            let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
            for (n, t) in tau.iter().enumerate().skip(1) {
                writeln!(w, "{n}\t{t}")?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, &path)?;
    }
    Ok(tau)
}

fn sigma_k(n: usize, k: u32, spf: &[u32]) -> i128 {
    factor_with(spf, n).iter().fold(1i128, |acc, &(p, a)| {
        let pk = (p as i128).pow(k);
        let mut s = 0i128;
        let mut t = 1i128;
        for _ in 0..=a {
            s += t;
            t *= pk;
        }
        acc * s
    })
}

fn series_mul(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    let n = a.len().min(b.len());
    let mut out = vec![0i128; n];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..n - i {
            let t = a[i]
                .checked_mul(b[j])
                .and_then(|t| out[i + j].checked_add(t))
                .ok_or_else(|| Error::OutOfRange {
                    what: "q-expansion coefficient",
                    value: (i + j) as f64,
                    limit: n as f64,
                })?;
            out[i + j] = t;
        }
    }
    Ok(out)
}

/// Fourier coefficients `a(1..=n_max)` of the unique normalised cusp form of
/// level one and weight `2k`, for the weights where the space is
/// one-dimensional (12, 16, 18, 20, 22, 26).
pub fn level_one_cusp_form(weight: u32, n_max: usize) -> Result<Vec<i128>> {
    let len = n_max + 1;
    let spf = spf_table(len.max(2));
    let eis = |k: u32, c: i128| -> Vec<i128> {
        let mut v = vec![0i128; len];
        v[0] = 1;
        for (n, x) in v.iter_mut().enumerate().skip(1) {
            *x = c * sigma_k(n, k, &spf);
        }
        v
    };
    let e4 = eis(3, 240);
    let e6 = eis(5, -504);
    let mut delta = vec![0i128; len];
    let tau = ramanujan_tau_direct(n_max.max(1));
    delta[1..len].copy_from_slice(&tau[1..len]);
    let out = match weight {
        12 => delta,
        16 => series_mul(&delta, &e4)?,
        18 => series_mul(&delta, &e6)?,
        20 => series_mul(&delta, &series_mul(&e4, &e4)?)?,
        22 => series_mul(&delta, &series_mul(&e4, &e6)?)?,
        26 => series_mul(&delta, &series_mul(&series_mul(&e4, &e4)?, &e6)?)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "weight {weight} does not have a one-dimensional cusp space"
            )))
        }
    };
    Ok(out)
}

/// Normalised eigenvalues `a(n)/n^{(w-1)/2}` of the form returned by
/// [`level_one_cusp_form`].
pub fn level_one_eigenvalues(weight: u32, n_max: usize) -> Result<EigenvalueTable> {
    let a = level_one_cusp_form(weight, n_max)?;
    let e = (weight as f64 - 1.0) / 2.0;
    let values = std::iter::once(0.0)
        .chain((1..=n_max).map(|n| a[n] as f64 / (n as f64).powf(e)))
        .collect();
    EigenvalueTable::new(format!("weight{weight}"), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use proptest::prelude::*;

    #[test]
    fn small_chebyshev_coefficients() {
        let expect = [
            (0, 0, 1u128),
            (1, 0, 0),
            (1, 1, 1),
            (2, 0, 1),
            (2, 1, 0),
            (2, 2, 1),
            (3, 0, 0),
            (3, 1, 2),
            (3, 2, 0),
            (3, 3, 1),
            (4, 2, 3),
        ];
        for (a, c, v) in expect {
            assert_eq!(chebyshev_h(a, c), v, "h_{a}({c})");
        }
        assert_eq!(chebyshev_h(40, 0), 6564120420);
    }

    #[test]
    fn recursion_matches_quadrature() {
        for a in 0..=12 {
            for c in 0..=a {
                let q = chebyshev_h_quadrature(a, c);
                assert!((q - chebyshev_h(a, c) as f64).abs() < 1e-6, "h_{a}({c}) quad {q}");
            }
        }
    }

    #[test]
    fn chebyshev_expansion_identity() {
        for a in 0..=12u32 {
            for i in 0..50 {
                let t = 0.01 + i as f64 * 0.0625;
                let x = t.cos();
                let lhs: f64 = (0..=a).map(|c| chebyshev_h(a, c) as f64 * chebyshev_u(c, x)).sum();
                let rhs = (2.0 * x).powi(a as i32);
                assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
                let u = ((a + 1) as f64 * t).sin() / t.sin();
                assert!((chebyshev_u(a, x) - u).abs() < 1e-9 * (1.0 + u.abs()));
            }
        }
    }

    #[test]
    fn c_coefficients() {
        let n = factor(12).unwrap();
        assert_eq!(c_coeff(&n, 1).unwrap(), 0);
        assert_eq!(c_coeff(&n, 3).unwrap(), 1);
        assert_eq!(c_coeff(&n, 12).unwrap(), 1);
        assert!(c_coeff(&n, 5).is_err());
        assert_eq!(c_coeff(&factor(1).unwrap(), 1).unwrap(), 1);
    }

    #[test]
    fn hecke_products() {
        let mut v = hecke_multiply(2, 2);
        v.sort();
        assert_eq!(v, vec![1, 4]);
        assert_eq!(hecke_multiply(3, 5), vec![15]);
        let mut w = hecke_multiply(4, 6);
        w.sort();
        assert_eq!(w, vec![6, 24]);
    }

    #[test]
    fn tau_small_values() {
        let t = ramanujan_tau_direct(12);
        assert_eq!(&t[1..=12], &[1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]);
    }

    #[test]
    fn moduli_are_prime() {
        assert!(is_prime_u64(P1));
        assert!(is_prime_u64(P2));
        assert!(!is_prime_u64(P1 - 2));
    }

    #[test]
    fn tau_is_multiplicative_and_satisfies_deligne() {
        let n = 20_000;
        let tau = ramanujan_tau_direct(n);
        for (m, k) in [(2usize, 3usize), (5, 7), (11, 13), (97, 101), (99, 101), (125, 128)] {
            assert_eq!(tau[m * k], tau[m] * tau[k]);
        }
        for p in primes_up_to(10_000) {
            let l = tau[p as usize] as f64 / (p as f64).powf(5.5);
            assert!(l.abs() <= 2.0, "lambda({p}) = {l}");
        }
        assert_eq!(tau[4], tau[2] * tau[2] - (1i128 << 11));
    }

    #[test]
    fn tau_at_large_index() {
        // tau(10^6) = tau(2^6) tau(5^6), each from the prime-power recursion.
        let tau = ramanujan_tau_direct(1_000_000);
        let pp = |p: i128, k: usize| -> i128 {
            let mut v = vec![1i128, tau[p as usize]];
            for j in 2..=k {
                v.push(tau[p as usize] * v[j - 1] - p.pow(11) * v[j - 2]);
            }
            v[k]
        };
        assert_eq!(tau[1_000_000], pp(2, 6) * pp(5, 6));
        let l = tau[999_983] as f64 / 999_983f64.powf(5.5);
        assert!(l.abs() <= 2.0);
    }

    #[test]
    fn ramanujan_table_and_coefficient_identity() {
        let t = EigenvalueTable::ramanujan_uncached(2000).unwrap();
        assert!((t.get(2).unwrap() - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
        for n in [1u64, 2, 4, 6, 8, 12, 30, 64, 360, 720, 1024] {
            let f = factor(n).unwrap();
            let direct: f64 = f
                .factors()
                .iter()
                .map(|&(p, a)| t.get(p as usize).unwrap().powi(a as i32))
                .product();
            assert!((a_from_lambda(n, &t).unwrap() - direct).abs() < 1e-10);
        }
        assert!(t.get(0).is_err() && t.get(2001).is_err());
    }

    #[test]
    fn table_rejects_non_hecke_values() {
        let mut v = vec![0.0, 1.0, 0.5, 0.3, 0.1];
        v.extend(std::iter::repeat(0.7).take(200));
        assert!(EigenvalueTable::new("bad", v).is_err());
        assert!(EigenvalueTable::new("bad", vec![0.0, 2.0]).is_err());
    }

    #[test]
    fn level_one_forms() {
        let f16 = level_one_cusp_form(16, 5).unwrap();
        assert_eq!(&f16[1..=3], &[1, 216, -3348]);
        let f26 = level_one_cusp_form(26, 3).unwrap();
        assert_eq!(&f26[1..=3], &[1, -48, -195804]);
        assert!(level_one_cusp_form(14, 5).is_err());
        for w in [12, 16, 18, 20, 22, 26] {
            level_one_eigenvalues(w, 60).unwrap();
        }
    }

    proptest! {
        #[test]
        fn coefficient_sum_reproduces_completely_multiplicative(n in 1u64..5000) {
            let t = EigenvalueTable::ramanujan_uncached(5000).unwrap();
            let f = factor(n).unwrap();
            let direct: f64 = f.factors().iter().map(|&(p, a)| t.values[p as usize].powi(a as i32)).product();
            prop_assert!((a_from_lambda(n, &t).unwrap() - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        }
    }
}
