use crate::calibration::STIRLING_RATIO_C;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

// B_{2k} / (2k (2k-1)) for k = 1..=10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const SHIFT_TO: f64 = 12.0;

fn stirling(z: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let zinv = z.inv();
    let z2inv = zinv * zinv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = zinv;
    for c in STIRLING {
        series += pow * c;
        pow *= z2inv;
    }
    (z - 0.5) * z.ln() - z + half_ln_2pi + series
}

/// Logarithm of the Gamma function, continued analytically from the positive
/// axis by the recurrence `ln G(z) = ln G(z+n) - sum ln(z+j)`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::InvalidArgument(format!("Gamma has a pole at {}", z.re)));
    }
    if z.re < -1e4 {
        return Err(Error::OutOfRange {
            what: "Re z",
            value: z.re,
            limit: -1e4,
        });
    }
    if z.re >= SHIFT_TO {
        return Ok(stirling(z));
    }
    let n = (SHIFT_TO - z.re).ceil() as usize;
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..n {
        shift += (z + j as f64).ln();
    }
    Ok(stirling(z + n as f64) - shift)
}

fn ln1p_c(w: Complex64) -> Complex64 {
    Complex64::new(0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p(), w.im.atan2(1.0 + w.re))
}

/// `log(Gamma(s+k) / (Gamma(k) k^s))` for real `k > 0`, evaluated so that the
/// absolute error scales with the (small) result rather than with `k log k`.
pub fn log_gamma_ratio(s: Complex64, k: f64) -> Result<Complex64> {
    if k <= 0.0 {
        return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
    }
    if k < SHIFT_TO {
        let n = (SHIFT_TO - k).ceil() as usize;
        let big = k + n as f64;
        let mut acc = log_gamma_ratio(s, big)? + s * (big / k).ln();
        for j in 0..n {
            let kj = k + j as f64;
            acc -= ln1p_c(s / kj);
        }
        return Ok(acc);
    }
    let zk = s + k;
    if zk.re <= 0.0 {
        return Ok(log_gamma(zk)? - log_gamma(Complex64::new(k, 0.0))? - s * k.ln());
    }
    let mut acc = (zk - 0.5) * ln1p_c(s / k) - s;
    let (zinv, kinv) = (zk.inv(), 1.0 / k);
    let (z2, k2) = (zinv * zinv, kinv * kinv);
    let (mut pz, mut pk) = (zinv, kinv);
    for c in STIRLING {
        acc += (pz - pk) * c;
        pz *= z2;
        pk *= k2;
    }
    Ok(acc)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// Real log-Gamma for `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    assert!(x > 0.0);
    log_gamma(Complex64::new(x, 0.0)).expect("positive argument").re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirlingCheck {
    /// `|Gamma(s+k)/Gamma(k) k^{-s} - 1|`
    pub deviation: f64,
    /// `|log(Gamma(s+k)/Gamma(k) k^{-s})|`
    pub log_deviation: f64,
    /// `C |s| (1 + |s|) / k`
    pub bound: f64,
    pub within: bool,
}

/// Compares `Gamma(s+k)/Gamma(k)` with `k^s`.
pub fn stirling_ratio_check(s: Complex64, k: f64) -> Result<StirlingCheck> {
    if k <= 0.0 || s.re < -k / 2.0 {
        return Err(Error::InvalidArgument(format!("need k > 0 and Re s >= -k/2 (s = {s}, k = {k})")));
    }
    let log_ratio = if s.im == 0.0 && s.re >= 0.0 && s.re == s.re.round() && s.re <= 64.0 {
        let mut r = 1.0;
        for j in 0..s.re as usize {
            r *= (k + j as f64) / k;
        }
        Complex64::new(r.ln(), 0.0)
    } else {
        log_gamma_ratio(s, k)?
    };
    let deviation = (log_ratio.exp() - 1.0).norm();
    let log_deviation = log_ratio.norm();
    let a = s.norm();
    let bound = STIRLING_RATIO_C * a * (1.0 + a) / k;
    Ok(StirlingCheck {
        deviation,
        log_deviation,
        bound,
        within: log_deviation <= bound,
    })
}
