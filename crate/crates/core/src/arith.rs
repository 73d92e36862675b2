//! Elementary arithmetic: factorisation, multiplicative functions, the
//! Kronecker symbol and odd fundamental discriminants.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Positive integer together with its prime factorisation, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredInt {
    n: u64,
    factors: Vec<(u64, u32)>,
}

const WHEEL: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];

/// Trial division by 2, 3, 5 and then a mod-30 wheel.
pub fn factor(n: u64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(Error::FactorZero);
    }
    if n > i64::MAX as u64 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as f64,
            limit: i64::MAX as f64,
        });
    }
    let mut m = n;
    let mut factors = Vec::new();
    for p in [2u64, 3, 5] {
        let mut a = 0;
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        if a > 0 {
            factors.push((p, a));
        }
    }
    let mut p = 7u64;
    let mut i = 0;
    while p * p <= m {
        if m % p == 0 {
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            factors.push((p, a));
        }
        p += WHEEL[i];
        i = (i + 1) % 8;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInt { n, factors })
}

impl FactoredInt {
    /// Builds from a factor list, which must have distinct primes.
    pub fn from_factors(mut factors: Vec<(u64, u32)>) -> Self {
        factors.retain(|&(_, a)| a > 0);
        factors.sort_unstable();
        let n = factors.iter().fold(1u64, |acc, &(p, a)| acc * p.pow(a));
        FactoredInt { n, factors }
    }

    pub fn value(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, a)| a)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == 1)
    }

    pub fn is_square(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a % 2 == 0)
    }

    pub fn mu(&self) -> i64 {
        if self.is_squarefree() {
            if self.factors.len() % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, a)| a).sum()
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn liouville(&self) -> i64 {
        if self.big_omega() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1, |acc, &(p, a)| acc * (p - 1) * p.pow(a - 1))
    }

    pub fn num_divisors(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &(_, a)| acc * (a as u64 + 1))
    }

    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, a) in &self.factors {
            let len = out.len();
            let mut pk = 1;
            for _ in 0..a {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Named multiplicative (or additive) arithmetic functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultFn {
    Mu,
    Liouville,
    BigOmega,
    Omega,
    Phi,
    NumDivisors,
    Radical,
}

impl MultFn {
    pub fn eval(self, n: &FactoredInt) -> i64 {
        match self {
            MultFn::Mu => n.mu(),
            MultFn::Liouville => n.liouville(),
            MultFn::BigOmega => n.big_omega() as i64,
            MultFn::Omega => n.omega() as i64,
            MultFn::Phi => n.phi() as i64,
            MultFn::NumDivisors => n.num_divisors() as i64,
            MultFn::Radical => n.radical() as i64,
        }
    }
}

pub fn mult_fn(f: MultFn, n: u64) -> Result<i64> {
    Ok(f.eval(&factor(n)?))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0 and 1).
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    if n >= 1 {
        spf[1] = 1;
    }
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Factorisation read off a smallest-prime-factor table.
pub fn factor_with(spf: &[u32], mut n: usize) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    while n > 1 {
        let p = spf[n] as usize;
        let mut a = 0;
        while n % p == 0 {
            n /= p;
            a += 1;
        }
        out.push((p as u64, a));
    }
    out
}

const KRON2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: i64) -> i32 {
    assert!(n > 0 && n % 2 == 1, "jacobi needs odd positive modulus, got {n}");
    let mut n = n;
    let mut a = a.rem_euclid(n);
    let mut k = 1;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= KRON2[(n & 7) as usize];
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let v = n.trailing_zeros();
    let mut m = (n >> v) as i128;
    let mut k = if v % 2 == 0 {
        1
    } else {
        KRON2[(a & 7) as usize]
    };
    if m < 0 {
        m = -m;
        if a < 0 {
            k = -k;
        }
    }
    if m == 1 {
        return k;
    }
    let m = m as i64;
    k * jacobi(a.rem_euclid(m), m)
}

/// `epsilon_d`: 1 when d = 1 mod 4 and i when d = 3 mod 4.
pub fn epsilon_d(d: i64) -> Result<Complex64> {
    match d.rem_euclid(4) {
        1 => Ok(Complex64::new(1.0, 0.0)),
        3 => Ok(Complex64::new(0.0, 1.0)),
        _ => Err(Error::EvenArgument(d)),
    }
}

/// Odd squarefree integer, used as the modulus of a real character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discriminant {
    d: i64,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d % 2 == 0 {
            return Err(Error::EvenArgument(d));
        }
        if !factor(d.unsigned_abs())?.is_squarefree() {
            return Err(Error::NotSquarefree(d));
        }
        Ok(Discriminant { d })
    }

    pub fn value(&self) -> i64 {
        self.d
    }

    pub fn abs(&self) -> u64 {
        self.d.unsigned_abs()
    }

    pub fn is_fundamental(&self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    /// `chi_d(m)`, the Kronecker symbol `(d/m)`.
    pub fn chi(&self, m: i64) -> i32 {
        kronecker(self.d, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

/// Odd fundamental discriminants `d` of the given sign with `lo <= |d| <= hi`,
/// ordered by `|d|`.
pub fn enumerate_odd_fundamental(lo: u64, hi: u64, sign: Sign) -> Vec<Discriminant> {
    let lo = lo.max(1);
    if hi < lo {
        return Vec::new();
    }
    let len = (hi - lo + 1) as usize;
    let mut squarefree = vec![true; len];
    for p in primes_up_to(isqrt(hi)).into_iter().skip(1) {
        let q = p * p;
        let mut j = lo.div_ceil(q) * q;
        while j <= hi {
            squarefree[(j - lo) as usize] = false;
            j += q;
        }
    }
    let want = match sign {
        Sign::Positive => 1,
        Sign::Negative => 3,
    };
    (lo..=hi)
        .filter(|&m| m % 4 == want && squarefree[(m - lo) as usize])
        .map(|m| Discriminant {
            d: match sign {
                Sign::Positive => m as i64,
                Sign::Negative => -(m as i64),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primorial_factorisation() {
        let f = factor(9699690).unwrap();
        let primes: Vec<u64> = f.factors().iter().map(|&(p, _)| p).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(f.mu(), 1);
        assert_eq!(f.num_divisors(), 256);
    }

    #[test]
    fn factor_zero_is_rejected() {
        assert_eq!(factor(0), Err(Error::FactorZero));
        assert!(factor(u64::MAX).is_err());
    }

    #[test]
    fn large_prime_and_prime_power() {
        let p = 1_000_000_007u64;
        assert_eq!(factor(p).unwrap().factors(), &[(p, 1)]);
        assert_eq!(factor(3u64.pow(39)).unwrap().factors(), &[(3, 39)]);
    }

    #[test]
    fn multiplicative_function_values() {
        let f = factor(360).unwrap();
        assert_eq!(f.phi(), 96);
        assert_eq!(f.radical(), 30);
        assert_eq!(f.big_omega(), 6);
        assert_eq!(f.omega(), 3);
        assert_eq!(f.liouville(), 1);
        assert_eq!(f.mu(), 0);
        assert_eq!(f.divisors().len(), 24);
        assert_eq!(mult_fn(MultFn::Mu, 30).unwrap(), -1);
    }

    #[test]
    fn squarefree_detection_identity() {
        for n in 1..=10_000u64 {
            let s: i64 = (1..=isqrt(n))
                .filter(|a| n % (a * a) == 0)
                .map(|a| mult_fn(MultFn::Mu, a).unwrap())
                .sum();
            let expect = if factor(n).unwrap().is_squarefree() { 1 } else { 0 };
            assert_eq!(s, expect, "n = {n}");
        }
    }

    #[test]
    fn kronecker_special_values() {
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(kronecker(2, 4), 0);
        assert_eq!(kronecker(-1, 7), -1);
    }

    #[test]
    fn euler_criterion_small_primes() {
        for p in primes_up_to(97).into_iter().skip(1) {
            for a in 0..p {
                let mut r = 1u64;
                for _ in 0..(p - 1) / 2 {
                    r = r * a % p;
                }
                let e = if r == 0 { 0 } else if r == 1 { 1 } else { -1 };
                assert_eq!(kronecker(a as i64, p as i64), e, "({a}/{p})");
            }
        }
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_d(5).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(epsilon_d(-5).unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(epsilon_d(-3).unwrap(), Complex64::new(1.0, 0.0));
        assert!(epsilon_d(4).is_err());
    }

    #[test]
    fn discriminant_construction() {
        assert!(Discriminant::new(-15).unwrap().is_fundamental());
        assert!(!Discriminant::new(15).unwrap().is_fundamental());
        assert_eq!(Discriminant::new(9), Err(Error::NotSquarefree(9)));
        assert_eq!(Discriminant::new(6), Err(Error::EvenArgument(6)));
    }

    #[test]
    fn small_discriminant_lists() {
        let pos: Vec<i64> = enumerate_odd_fundamental(1, 20, Sign::Positive)
            .iter()
            .map(|d| d.value())
            .collect();
        assert_eq!(pos, vec![1, 5, 13, 17]);
        let neg: Vec<i64> = enumerate_odd_fundamental(1, 20, Sign::Negative)
            .iter()
            .map(|d| d.value())
            .collect();
        assert_eq!(neg, vec![-3, -7, -11, -15, -19]);
    }

    #[test]
    fn discriminant_count_grows_linearly() {
        let c4 = enumerate_odd_fundamental(1, 10_000, Sign::Positive).len() as f64 / 1e4;
        let c5 = enumerate_odd_fundamental(1, 100_000, Sign::Positive).len() as f64 / 1e5;
        assert!((c4 / c5 - 1.0).abs() < 0.02, "{c4} vs {c5}");
    }

    #[test]
    fn spf_factorisation_matches_trial_division() {
        let spf = spf_table(5000);
        for n in 1..=5000usize {
            assert_eq!(factor_with(&spf, n), factor(n as u64).unwrap().factors().to_vec());
        }
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(-2, 7), Some(3));
        assert_eq!(mod_inverse(2, 4), None);
    }

    proptest! {
        #[test]
        fn factorisation_reconstructs(n in 1u64..1_000_000_000_000) {
            let f = factor(n).unwrap();
            let prod: u64 = f.factors().iter().map(|&(p, a)| p.pow(a)).product();
            prop_assert_eq!(prod, n);
            for &(p, _) in f.factors() {
                prop_assert_eq!(factor(p).unwrap().factors().to_vec(), vec![(p, 1)]);
            }
        }

        #[test]
        fn kronecker_multiplicative_in_top(a in -500i64..500, b in -500i64..500, n in 1i64..500) {
            prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        }

        #[test]
        fn kronecker_multiplicative_in_bottom(a in -500i64..500, m in -300i64..300, n in -300i64..300) {
            prop_assume!(m != 0 && n != 0);
            prop_assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
        }

        #[test]
        fn fundamental_character_is_periodic(m in 1usize..200, x in 1i64..2000) {
            let all = enumerate_odd_fundamental(1, 200, Sign::Positive);
            let d = all[m % all.len()];
            let q = d.abs() as i64;
            prop_assert_eq!(d.chi(x), d.chi(x + q));
        }
    }
}
