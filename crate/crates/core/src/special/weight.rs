//! The bump weight `h` and the oscillatory transforms built from it:
//! `hbar_z(v)`, its Mellin transform, `W(xi1, xi2, v)` and `W_K^(2)(m, n, v)`.

use super::afe::AFEWeight;
use super::gamma::log_gamma;
use crate::error::{Error, Result};
use crate::numeric::{cis_vy2_dd, dyadic_nodes, e, integrate_c, ChebInterp, ComplexKahan};
use libm::erfc;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `exp(1/r^2 - 1/((x-a)(b-x)))` on `(a, b)` with `r = (b-a)/2`, so the
/// peak value is 1 at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub a: f64,
    pub b: f64,
}

impl Default for WeightFunction {
    fn default() -> Self {
        WeightFunction { a: 1.0, b: 4.5 }
    }
}

impl WeightFunction {
    pub fn bump(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("bump support [{a}, {b}] must satisfy 0 < a < b")));
        }
        Ok(WeightFunction { a, b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let r = 0.5 * (self.b - self.a);
        (1.0 / (r * r) - 1.0 / ((x - self.a) * (self.b - x))).exp()
    }

    /// `int h(x) e(-x y) dx`.
    pub fn fourier(&self, y: f64) -> Complex64 {
        let panels = 200 + ((self.b - self.a) * y.abs()).ceil() as usize;
        integrate_c(|x| e(-x * y) * self.eval(x), self.a, self.b, panels)
    }

    /// Nodes `(x, w h(x))` of a composite Gauss rule on the support, with
    /// enough panels for an oscillation of `cycles` periods.
    fn weighted_nodes(&self, cycles: f64) -> Vec<(f64, f64)> {
        self.weighted_nodes_dd(cycles).into_iter().map(|(x, _, w)| (x, w)).collect()
    }

    /// As [`Self::weighted_nodes`] with double-double abscissae `(hi, lo, w h)`.
    fn weighted_nodes_dd(&self, cycles: f64) -> Vec<(f64, f64, f64)> {
        let panels = 200 + (1.5 * cycles).ceil() as usize;
        dyadic_nodes(self.a, self.b, panels)
            .into_iter()
            .map(|(x, lo, w)| (x, lo, w * self.eval(x)))
            .filter(|&(_, _, w)| w != 0.0)
            .collect()
    }
}

/// `erfc(log(2 pi xi)/2)/2`, the large-weight limit of `V_k(k xi)`.
pub fn limit_weight(xi: f64) -> f64 {
    0.5 * erfc(0.5 * (2.0 * PI * xi).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinInversion {
    pub value: Complex64,
    /// Height at which the vertical integral was truncated.
    pub t_max: f64,
    pub step: f64,
}

/// Transforms of a fixed weight `h`. All integrals are taken in `y = sqrt(u)`,
/// where `h(sqrt u) du / sqrt(2 pi u) = sqrt(2/pi) h(y) dy`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct OscillatoryTransforms {
    pub weight: WeightFunction,
}

impl OscillatoryTransforms {
    pub fn new(weight: WeightFunction) -> Self {
        OscillatoryTransforms { weight }
    }

    /// Periods of `e^{ivy^2}` across the support at its highest local
    /// frequency `2 v b`, which sizes a uniform panel grid.
    fn cycles_vy2(&self, v: f64) -> f64 {
        let (a, b) = (self.weight.a, self.weight.b);
        v.abs() * 2.0 * b * (b - a) / (2.0 * PI)
    }

    /// `hbar(v) = hbar_0(v)`.
    pub fn hbar(&self, v: f64) -> Complex64 {
        self.hbar_z(v, Complex64::new(0.0, 0.0))
    }

    /// `hbar_z(v) = int h(sqrt u)/sqrt(2 pi u) u^{z/2} e^{iuv} du`.
    pub fn hbar_z(&self, v: f64, z: Complex64) -> Complex64 {
        let mut acc = ComplexKahan::new();
        for (y, lo, w) in self.weight.weighted_nodes_dd(self.cycles_vy2(v)) {
            acc.add(cis_vy2_dd(v, y, lo) * (z * y.ln()).exp() * w);
        }
        acc.value() * (2.0 / PI).sqrt()
    }

    fn check_strip(s: Complex64) -> Result<()> {
        if !(s.re > 0.0 && s.re < 1.0) {
            return Err(Error::InvalidArgument(format!("Mellin variable {s} must satisfy 0 < Re s < 1")));
        }
        Ok(())
    }

    /// `Gamma(s) e^{i pi s/2} int h(sqrt u)/sqrt(2 pi u) u^{z/2-s} du` for
    /// `0 < Re s < 1`.
    pub fn mellin_hbar(&self, z: Complex64, s: Complex64) -> Result<Complex64> {
        Self::check_strip(s)?;
        let (a, b) = (self.weight.a, self.weight.b);
        let cycles = s.im.abs() * (b / a).ln() / PI;
        let mut acc = ComplexKahan::new();
        for (y, w) in self.weight.weighted_nodes(cycles) {
            acc.add(((z - 2.0 * s) * y.ln()).exp() * w);
        }
        let pre = (log_gamma(s)? + Complex64::new(0.0, PI / 2.0) * s).exp();
        Ok(pre * acc.value() * (2.0 / PI).sqrt())
    }

    /// `(1/2 pi i) int_(c) v^{-s} mellin_hbar(z, s) ds`, by the trapezoidal
    /// rule in `t = Im s`, extended until the integrand falls below `tol`.
    ///
    /// The `y`-integral inside the Mellin transform is the Fourier transform
    /// of `h(e^w) e^{w(z-2c+1)}` at frequency `2t`; it is computed for all `t`
    /// at once by an FFT over a uniform grid in `w`.
    pub fn mellin_inversion(&self, z: Complex64, v: f64, c: f64, tol: f64) -> Result<MellinInversion> {
        Self::check_strip(Complex64::new(c, 0.0))?;
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("v = {v} must be positive")));
        }
        let step = 0.1;
        let n = 1usize << 17;
        let dw = PI / (step * n as f64);
        let (w0, w1) = (self.weight.a.ln(), self.weight.b.ln());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let count = ((w1 - w0) / dw).ceil() as usize;
        if count >= n {
            return Err(Error::InvalidArgument("weight support too wide for the transform grid".into()));
        }
        for (j, slot) in buf.iter_mut().enumerate().take(count + 1) {
            let w = w0 + j as f64 * dw;
            *slot = ((z - 2.0 * c + 1.0) * w).exp() * (self.weight.eval(w.exp()) * dw * (2.0 / PI).sqrt());
        }
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        // buf[k] = sum_j g_j e^{-2 pi i jk/n}; with t = k step this is
        // e^{2 i t w0} M(c + it).
        let half_pi_i = Complex64::new(0.0, PI / 2.0);
        let integrand = |k: i64| -> Result<Complex64> {
            let t = k as f64 * step;
            let s = Complex64::new(c, t);
            let m = buf[k.rem_euclid(n as i64) as usize] * Complex64::new(0.0, -2.0 * t * w0).exp();
            Ok((log_gamma(s)? + half_pi_i * s - s * v.ln()).exp() * m)
        };
        let mut acc = ComplexKahan::new();
        acc.add(integrand(0)?);
        let block = 100i64;
        let limit = n as i64 / 4;
        let mut k = 1i64;
        loop {
            let mut block_max = 0.0f64;
            for _ in 0..block {
                let f = integrand(k)? + integrand(-k)?;
                block_max = block_max.max(f.norm());
                acc.add(f);
                k += 1;
            }
            if block_max < tol {
                break;
            }
            if k >= limit {
                return Err(Error::Check(format!(
                    "Mellin inversion not converged at |t| = {}: integrand {block_max:e}",
                    k as f64 * step
                )));
            }
        }
        Ok(MellinInversion {
            value: acc.value() * (step / (2.0 * PI)),
            t_max: k as f64 * step,
            step,
        })
    }

    /// `W(xi1, xi2, v)`. Exchanging the order of integration turns the double
    /// contour integral into `sqrt(2/pi) int h(y) e^{ivy^2} G(xi1/y) G(xi2/y) dy`
    /// with `G` the closed form of `(1/2 pi i) int (2 pi xi)^{-x} e^{x^2} dx/x`.
    pub fn w_eval(&self, xi1: f64, xi2: f64, v: f64) -> Result<Complex64> {
        if !(xi1 > 0.0 && xi2 > 0.0) {
            return Err(Error::InvalidArgument("W needs xi1, xi2 > 0".into()));
        }
        let mut acc = ComplexKahan::new();
        for (y, lo, w) in self.weight.weighted_nodes_dd(self.cycles_vy2(v)) {
            acc.add(cis_vy2_dd(v, y, lo) * (limit_weight(xi1 / y) * limit_weight(xi2 / y) * w));
        }
        Ok(acc.value() * (2.0 / PI).sqrt())
    }

    /// `y -> V_{yK+1}(m) V_{yK+1}(n)` on the support of `h`, as a Chebyshev
    /// interpolant.
    pub fn weight_product(&self, m: f64, n: f64, big_k: f64) -> Result<ChebInterp> {
        if !(m > 0.0 && n > 0.0 && big_k >= 1.0) {
            return Err(Error::InvalidArgument(format!("need m, n > 0 and K >= 1 (m={m}, n={n}, K={big_k})")));
        }
        let mut err = None;
        let interp = ChebInterp::new(
            |y| {
                let w = AFEWeight::real(y * big_k + 1.0);
                match (w.eval_stable(m), w.eval_stable(n)) {
                    (Ok(a), Ok(b)) => a * b,
                    (Err(x), _) | (_, Err(x)) => {
                        err = Some(x);
                        0.0
                    }
                }
            },
            self.weight.a,
            self.weight.b,
            64,
        );
        match err {
            Some(x) => Err(x),
            None => Ok(interp),
        }
    }

    /// `W_K^(2)(m, n, v) = int V_{sqrt(u)K+1}(m) V_{sqrt(u)K+1}(n) h(sqrt u)/sqrt(2 pi u) e^{iuv} du`.
    pub fn w_k2(&self, m: f64, n: f64, v: f64, big_k: f64) -> Result<Complex64> {
        let p = self.weight_product(m, n, big_k)?;
        Ok(self.w_k2_with(&p, v))
    }

    /// [`Self::w_k2`] with a precomputed [`Self::weight_product`].
    pub fn w_k2_with(&self, product: &ChebInterp, v: f64) -> Complex64 {
        let mut acc = ComplexKahan::new();
        for (y, lo, w) in self.weight.weighted_nodes_dd(self.cycles_vy2(v)) {
            acc.add(cis_vy2_dd(v, y, lo) * (product.eval(y) * w));
        }
        acc.value() * (2.0 / PI).sqrt()
    }
}
