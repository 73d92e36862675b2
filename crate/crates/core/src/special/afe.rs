//! The approximate functional equation weight
//! `V_k(xi) = (1/2 pi i) int_(sigma) (2 pi)^{-s} Gamma(s+k)/Gamma(k) xi^{-s} e^{s^2} ds/s`.
//!
//! The integrand is split as `y^{-s} e^{s^2}/s * (1 + R(s))` with
//! `y = 2 pi xi / k` and `R(s) = Gamma(s+k)/(Gamma(k) k^s) - 1`. The first
//! piece integrates to `erfc(log(y)/2)/2` on every line `sigma > 0`; the second
//! has a removable singularity at `s = 0` and is integrated numerically on the
//! requested line. This keeps the quadrature well conditioned when `xi` is
//! small and `sigma` is large.

use super::gamma::log_gamma_ratio;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::PI;

/// Contour parameters for `V_k`. `k` may be any real number `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AFEWeight {
    pub k: f64,
    pub sigma: f64,
    /// Half-length of the truncated contour; `None` picks it from the decay
    /// of the integrand.
    pub t_max: Option<f64>,
    pub step: f64,
}

fn expm1_c(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    Complex64::new(w.re.exp_m1() * c - 2.0 * half * half, w.re.exp() * s)
}

impl AFEWeight {
    pub fn new(k: u32) -> Self {
        Self::real(k as f64)
    }

    pub fn real(k: f64) -> Self {
        AFEWeight {
            k,
            sigma: 1.0,
            t_max: None,
            step: 0.05,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0) {
            return Err(Error::InvalidArgument(format!("weight k = {} must be >= 1", self.k)));
        }
        if !(self.sigma > 0.0) || !(self.step > 0.0) {
            return Err(Error::InvalidArgument("contour needs sigma > 0 and step > 0".into()));
        }
        Ok(())
    }

    fn ln_scale(&self) -> f64 {
        (2.0 * PI / self.k).ln()
    }

    /// `erfc(log(2 pi xi / k)/2)/2`, the contribution of the `R = 0` part.
    pub fn gaussian_part(&self, ln_xi: f64) -> f64 {
        0.5 * erfc(0.5 * (ln_xi + self.ln_scale()))
    }

    /// Log of a bound for the integrand at height 0 on `Re s = sigma`.
    fn log_peak(&self, sigma: f64, ln_xi: f64) -> f64 {
        -sigma * (ln_xi + self.ln_scale()) + sigma * sigma - sigma.abs().ln() + 2f64.ln()
    }

    fn contour_length(&self, sigma: f64, ln_xi: f64) -> f64 {
        if let Some(t) = self.t_max {
            return t;
        }
        (50.0 + self.log_peak(sigma, ln_xi).max(0.0)).sqrt() + 1.0
    }

    /// Bound for the neglected tail `int_{t > t_max}` of the remainder.
    pub fn tail_estimate(&self, sigma: f64, ln_xi: f64, t_max: f64) -> f64 {
        (self.log_peak(sigma, ln_xi) - t_max * t_max).exp() / (PI * t_max.max(1.0))
    }

    /// Trapezoidal nodes `(s_j, c_j)` on `Re s = sigma`, `t >= 0`, such that
    /// the remainder integral equals `Re sum_j c_j xi^{-s_j}`. Any
    /// `sigma > -k`, `sigma != 0`, is allowed.
    pub fn remainder_nodes(&self, sigma: f64, t_max: f64) -> Result<Vec<(Complex64, Complex64)>> {
        if !(self.k >= 1.0) || sigma <= -self.k || sigma == 0.0 {
            return Err(Error::InvalidArgument(format!("bad contour sigma = {sigma} for k = {}", self.k)));
        }
        let n = (t_max / self.step).ceil() as usize;
        let a = self.ln_scale();
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = j as f64 * self.step;
            let s = Complex64::new(sigma, t);
            let w = if j == 0 { 0.5 } else { 1.0 };
            let base = (-s * a + s * s).exp() / s;
            let c = base * expm1_c(log_gamma_ratio(s, self.k)?) * (w * self.step / PI);
            out.push((s, c));
        }
        Ok(out)
    }

    /// `V_k(xi)` for `xi > 0`, integrating on the line `Re s = self.sigma`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        self.validate()?;
        self.eval_on(xi, self.sigma)
    }

    /// `V_k(xi)` on a contour chosen for accuracy: left of the origin when
    /// `2 pi xi < k`, right of it otherwise.
    pub fn eval_stable(&self, xi: f64) -> Result<f64> {
        self.validate()?;
        let sigma = if xi.ln() + self.ln_scale() < 0.0 { -0.5 } else { self.sigma.max(1.0) };
        self.eval_on(xi, sigma)
    }

    fn eval_on(&self, xi: f64, sigma: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument(format!("xi = {xi} must be positive")));
        }
        let lx = xi.ln();
        let t_max = self.contour_length(sigma, lx);
        let tail = self.tail_estimate(sigma, lx, t_max);
        if tail > 1e-10 {
            return Err(Error::Check(format!("contour truncated at t = {t_max}: tail estimate {tail:e}")));
        }
        let nodes = self.remainder_nodes(sigma, t_max)?;
        let rem: f64 = nodes.iter().map(|(s, c)| (c * (-s * lx).exp()).re).sum();
        Ok(self.gaussian_part(lx) + rem)
    }
}

/// `V_k` tabulated on a uniform grid in `log xi` with cubic Hermite
/// interpolation, for bulk evaluation.
#[derive(Debug, Clone)]
pub struct VTable {
    weight: AFEWeight,
    u0: f64,
    du: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl VTable {
    /// Tabulates on `log xi` in `[u_min, u_max]` with spacing `du`.
    pub fn new(weight: AFEWeight, u_min: f64, u_max: f64, du: f64) -> Result<Self> {
        weight.validate()?;
        let a = weight.ln_scale();
        let left = weight.remainder_nodes(-0.5, weight.contour_length(-0.5, -a))?;
        let right = weight.remainder_nodes(1.0, weight.contour_length(1.0, -a))?;
        let n = ((u_max - u_min) / du).ceil() as usize + 1;
        let mut values = Vec::with_capacity(n);
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n {
            let u = u_min + i as f64 * du;
            let g = 0.5 * (u + a);
            let nodes = if u + a < 0.0 { &left } else { &right };
            let (mut v, mut dv) = (weight.gaussian_part(u), -(-g * g).exp() / (2.0 * PI.sqrt()));
            for (s, c) in nodes {
                let z = c * (-s * u).exp();
                v += z.re;
                dv += (-s * z).re;
            }
            values.push(v);
            slopes.push(dv);
        }
        Ok(VTable {
            weight,
            u0: u_min,
            du,
            values,
            slopes,
        })
    }

    /// Default table for `xi` in `[e^-25, e^16]`.
    pub fn standard(weight: AFEWeight) -> Result<Self> {
        Self::new(weight, -25.0, 16.0, 0.01)
    }

    pub fn weight(&self) -> &AFEWeight {
        &self.weight
    }

    /// `V_k(xi)`, interpolated inside the table and evaluated directly outside.
    pub fn eval(&self, xi: f64) -> f64 {
        let u = xi.ln();
        let pos = (u - self.u0) / self.du;
        if !(pos >= 0.0) || pos >= (self.values.len() - 1) as f64 {
            return self.weight.eval_stable(xi).unwrap_or(0.0);
        }
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.du, self.slopes[i + 1] * self.du);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use crate::special::gamma::log_gamma;

    #[test]
    fn small_argument_limit() {
        let v = AFEWeight::new(6).eval(1e-6).unwrap();
        assert!((v - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn contour_shift_at_unit_argument() {
        let a = AFEWeight::new(6).with_sigma(1.0).eval(1.0).unwrap();
        let b = AFEWeight::new(6).with_sigma(2.0).eval(1.0).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn contour_shift_grid() {
        for k in [6u32, 20, 100] {
            for xi in [1e-3, 1.0, 10.0] {
                let vals: Vec<f64> = [0.75, 1.0, 2.0]
                    .iter()
                    .map(|&s| AFEWeight::new(k).with_sigma(s).eval(xi).unwrap())
                    .collect();
                for v in &vals[1..] {
                    assert!((v - vals[0]).abs() < 1e-6, "k={k} xi={xi}: {vals:?}");
                }
            }
        }
    }

    #[test]
    fn split_agrees_with_unsplit_integrand() {
        // Direct quadrature of the full integrand on Re s = 1, a
        // well-conditioned case.
        for (k, xi) in [(6.0, 0.3), (12.0, 2.0), (20.5, 5.0)] {
            let w = AFEWeight::real(k);
            let f = |t: f64| {
                let s = Complex64::new(1.0, t);
                let l = log_gamma(s + k).unwrap() - log_gamma(Complex64::new(k, 0.0)).unwrap() - s * (2.0 * PI * xi).ln() + s * s;
                (l.exp() / s).re / PI
            };
            let direct = integrate(f, 0.0, 12.0, 60);
            let v = w.eval(xi).unwrap();
            assert!((v - direct).abs() < 1e-12, "k={k} xi={xi}: {v} vs {direct}");
        }
    }

    #[test]
    fn large_argument_decay() {
        let w = AFEWeight::new(6);
        let v3 = w.eval(1e3).unwrap();
        let v4 = w.eval(1e4).unwrap();
        let v5 = w.eval(1e5).unwrap();
        assert!(v4.abs() < v3.abs() && v5.abs() < v4.abs());
        assert!(v5.abs() < 1e-9, "{v3:e} {v4:e} {v5:e}");
    }

    #[test]
    fn decay_at_thousand() {
        // reference value from 30-digit quadrature of the defining integral
        let v = AFEWeight::new(6).eval(1e3).unwrap();
        assert!((v - 8.081_990_369_155_36e-7).abs() < 1e-15);
        assert!(v.abs() <= 1e-6);
    }

    #[test]
    fn monotone_in_decay_regime() {
        for k in [6u32, 20, 100] {
            let w = AFEWeight::new(k);
            let mut prev = f64::INFINITY;
            for i in 0..=40 {
                let xi = k as f64 * 10f64.powf(i as f64 * 0.05);
                let v = w.eval(xi).unwrap();
                assert!(v < prev, "k={k} xi={xi}");
                prev = v;
            }
        }
    }

    #[test]
    fn monotone_between_zero_and_one() {
        let w = AFEWeight::new(12);
        let mut prev = 1.0 + 1e-9;
        for i in 0..60 {
            let xi = 10f64.powf(-4.0 + i as f64 * 0.1);
            let v = w.eval(xi).unwrap();
            assert!(v <= prev + 1e-12 && v > -1e-12, "xi={xi}: {v}");
            prev = v;
        }
    }

    #[test]
    fn stable_and_table_evaluation() {
        let w = AFEWeight::new(6);
        let t = VTable::standard(w).unwrap();
        for xi in [1e-12, 1e-8, 3.3e-4, 0.2, 1.0, 7.5, 123.0, 4e4, 1e8] {
            let d = w.eval_stable(xi).unwrap();
            assert!((t.eval(xi) - d).abs() < 1e-10, "xi={xi}: {} vs {d}", t.eval(xi));
            if (1e-4..1e5).contains(&xi) {
                assert!((w.eval(xi).unwrap() - d).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn reports_short_contour() {
        let w = AFEWeight {
            t_max: Some(2.0),
            ..AFEWeight::new(6)
        };
        assert!(matches!(w.eval(1.0), Err(Error::Check(_))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(AFEWeight::new(6).eval(0.0).is_err());
        assert!(AFEWeight::real(0.5).eval(1.0).is_err());
        assert!(AFEWeight::new(6).with_sigma(-1.0).eval(1.0).is_err());
    }
}
