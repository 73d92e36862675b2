//! Numerical checks of two asymptotic tools: the averaged Bessel identity
//! that turns a weighted `k`-sum of `J_{k-1}(t)` into `W_K^(2)`, and the
//! leading stationary-phase term of `int h(t) e(f(t)) dt`.

use super::afe::AFEWeight;
use super::bessel::bessel_j_integer_orders;
use super::weight::OscillatoryTransforms;
use crate::calibration::{BESSEL_AVERAGE_C, STATIONARY_PHASE_C};
use crate::error::{Error, Result};
use crate::numeric::{composite_nodes, e, linear_fit, ComplexKahan, KahanSum};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesselAverageCheck {
    pub big_k: u32,
    pub n: u64,
    pub m: u64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `int_R v^4 |int V_{uK+1}(n) V_{uK+1}(m) h(u) e^{iuv} du| dv`
    pub moment_integral: f64,
    /// `C t/K^4` times the moment integral.
    pub budget: f64,
    pub within: bool,
}

/// `int_R v^4 |Phi(v)| dv` for `Phi(v) = int F(u) e^{iuv} du`, `F` supported on
/// `[a, b]`, by one zero-padded FFT of trapezoidal samples of `F`.
fn fourth_moment_of_transform<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let dv = 0.05;
    let n = 1usize << 19;
    let du = 2.0 * PI / (dv * n as f64);
    let count = ((b - a) / du).ceil() as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, slot) in buf.iter_mut().enumerate().take(count + 1) {
        *slot = Complex64::new(f(a + j as f64 * du) * du, 0.0);
    }
    let mass: f64 = buf.iter().map(|z| z.norm()).sum();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    // F is real, so |Phi(-v)| = |Phi(v)|. Beyond the last frequency where
    // |Phi| clears the rounding floor the samples carry no information; the
    // neglected part is bounded by floor * v^5 / 5.
    let floor = 1e-14 * mass;
    let kmax = n / 4;
    let cut = (1..kmax).rev().find(|&k| buf[k].norm() > floor).unwrap_or(1);
    let mut total = KahanSum::new();
    for (k, z) in buf.iter().enumerate().take(cut + 1).skip(1) {
        let v = k as f64 * dv;
        total.add(2.0 * dv * v.powi(4) * z.norm());
    }
    let total = total.value();
    let v_cut = cut as f64 * dv;
    let neglected = 2.0 * floor * v_cut.powi(5) / 5.0;
    if cut + 1 >= kmax || neglected > 1e-2 * total {
        return Err(Error::Check(format!(
            "v^4 moment not resolved: cut at v = {v_cut}, neglected up to {neglected:e} of {total:e}"
        )));
    }
    Ok(total)
}

/// Compares `2 sum_{k even} i^k h((k-1)/K) V_k(n) V_k(m) J_{k-1}(t)` with
/// `-(K/sqrt t) Im(e^{-2 pi i/8} e^{it} W_K^(2)(n, m, K^2/(2t)))`.
pub fn bessel_average_check(tr: &OscillatoryTransforms, big_k: u32, n: u64, m: u64, t: f64) -> Result<BesselAverageCheck> {
    if !(20..=200).contains(&big_k) {
        return Err(Error::OutOfRange {
            what: "K",
            value: big_k as f64,
            limit: 200.0,
        });
    }
    let kf = big_k as f64;
    if !(t > 0.0 && t <= kf * kf / 10.0) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            limit: kf * kf / 10.0,
        });
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    let h = tr.weight;
    let k_hi = (h.b * kf + 1.0).floor() as usize;
    let bessel = bessel_j_integer_orders(k_hi, t)?;
    let mut lhs = KahanSum::new();
    let mut k = 2usize;
    while k <= k_hi {
        let hx = h.eval((k as f64 - 1.0) / kf);
        if hx != 0.0 {
            let w = AFEWeight::new(k as u32);
            let vv = w.eval_stable(n as f64)? * w.eval_stable(m as f64)?;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            lhs.add(2.0 * sign * hx * vv * bessel[k - 1]);
        }
        k += 2;
    }
    let lhs = lhs.value();
    let product = tr.weight_product(n as f64, m as f64, kf)?;
    let w = tr.w_k2_with(&product, kf * kf / (2.0 * t));
    let phase = Complex64::new(0.0, t - PI / 4.0).exp();
    let rhs = -(kf / t.sqrt()) * (phase * w).im;
    let moment_integral = fourth_moment_of_transform(|u| product.eval(u) * h.eval(u), h.a, h.b)?;
    let budget = BESSEL_AVERAGE_C * t / kf.powi(4) * moment_integral;
    let residual = (lhs - rhs).abs();
    Ok(BesselAverageCheck {
        big_k,
        n,
        m,
        t,
        lhs,
        rhs,
        residual,
        moment_integral,
        budget,
        within: residual <= budget,
    })
}

/// A phase `f` with its first two derivatives.
pub struct Phase<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub df: &'a dyn Fn(f64) -> f64,
    pub d2f: &'a dyn Fn(f64) -> f64,
}

/// The size parameters `X, Y, V, V_1, Q` of the stationary-phase estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleParams {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub v1: f64,
    pub q: f64,
}

impl SaddleParams {
    /// `Q^{3/2} X / Y^{3/2} (V^{-2} + Y^{2/3}/Q^2)`
    pub fn error_form(&self) -> f64 {
        self.q.powf(1.5) * self.x / self.y.powf(1.5) * (self.v.powi(-2) + self.y.powf(2.0 / 3.0) / (self.q * self.q))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryPhaseCheck {
    pub t0: f64,
    pub quadrature: Complex64,
    pub main_term: Complex64,
    pub residual: f64,
    pub error_form: f64,
    pub within: bool,
}

/// Locates the zero of `f'` on `[lo, hi]` by bisection.
pub fn stationary_point(df: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (df(a), df(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Check(format!("f' has no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = df(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Compares `int_lo^hi h(t) e(lambda f(t)) dt` with its leading
/// stationary-phase term `e^{sgn(f'') pi i/4} e(lambda f(t0)) h(t0)/sqrt(lambda |f''(t0)|)`.
pub fn stationary_phase_check(
    h: &dyn Fn(f64) -> f64,
    phase: &Phase,
    support: (f64, f64),
    lambda: f64,
    params: &SaddleParams,
) -> Result<StationaryPhaseCheck> {
    let (lo, hi) = support;
    if !(lo < hi && lambda > 0.0) {
        return Err(Error::InvalidArgument("need lo < hi and lambda > 0".into()));
    }
    let t0 = stationary_point(phase.df, lo, hi)?;
    let f2 = (phase.d2f)(t0);
    if f2 == 0.0 {
        return Err(Error::Check(format!("degenerate stationary point at {t0}")));
    }
    let samples = 2000;
    let width = (hi - lo) / samples as f64;
    let cycles: f64 = (0..samples)
        .map(|i| (phase.df)(lo + (i as f64 + 0.5) * width).abs() * width)
        .sum::<f64>()
        * lambda;
    let panels = 400 + (2.0 * cycles).ceil() as usize;
    let mut acc = ComplexKahan::new();
    for (t, w) in composite_nodes(lo, hi, panels) {
        acc.add(e(lambda * (phase.f)(t)) * (w * h(t)));
    }
    let quadrature = acc.value();
    let rot = Complex64::new(0.0, f2.signum() * PI / 4.0).exp();
    let main_term = rot * e(lambda * (phase.f)(t0)) * (h(t0) / (lambda * f2.abs()).sqrt());
    let residual = (quadrature - main_term).norm();
    let error_form = params.error_form();
    Ok(StationaryPhaseCheck {
        t0,
        quadrature,
        main_term,
        residual,
        error_form,
        within: residual <= STATIONARY_PHASE_C * error_form,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseScaling {
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log lambda`.
    pub observed_rate: f64,
    /// Slope of the error form with `Y` proportional to `lambda`.
    pub predicted_rate: f64,
}

/// Runs [`stationary_phase_check`] for each `lambda`, scaling `Y` with it.
pub fn stationary_phase_scaling(
    h: &dyn Fn(f64) -> f64,
    phase: &Phase,
    support: (f64, f64),
    lambdas: &[f64],
    base: &SaddleParams,
) -> Result<PhaseScaling> {
    let mut residuals = Vec::with_capacity(lambdas.len());
    let mut forms = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let p = SaddleParams { y: base.y * l, ..*base };
        let c = stationary_phase_check(h, phase, support, l, &p)?;
        residuals.push(c.residual);
        forms.push(c.error_form);
    }
    let ll: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let lr: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let lf: Vec<f64> = forms.iter().map(|r| r.ln()).collect();
    Ok(PhaseScaling {
        lambdas: lambdas.to_vec(),
        residuals,
        observed_rate: linear_fit(&ll, &lr).0,
        predicted_rate: linear_fit(&ll, &lf).0,
    })
}
