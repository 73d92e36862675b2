//! Small numerical toolkit shared by the analytic modules: compensated
//! summation, additive characters, Gauss quadrature and least squares.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// `e(x) = exp(2 pi i x)`, with `x` reduced mod 1 before scaling.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.floor();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` with the numerator reduced exactly.
pub fn e_ratio(num: i64, den: i64) -> Complex64 {
    debug_assert!(den > 0);
    e(num.rem_euclid(den) as f64 / den as f64)
}

/// Neumaier variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahan {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexKahan {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexKahan::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = if n == 1 { 2.0 } else { 2.0 / ((1.0 - z * z) * dp * dp) };
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

/// Composite 20-point Gauss-Legendre quadrature with `panels` equal panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl20();
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(w) {
            acc.add(0.5 * h * wi * f(mid + 0.5 * h * xi));
        }
    }
    acc.value()
}

/// Complex-valued counterpart of [`integrate`].
pub fn integrate_c<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let (x, w) = gl20();
    let h = (b - a) / panels as f64;
    let mut acc = ComplexKahan::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(w) {
            acc.add(f(mid + 0.5 * h * xi) * (0.5 * h * wi));
        }
    }
    acc.value()
}

/// Quadrature nodes (absolute abscissae, weights) of the composite rule used by
/// [`integrate`], for callers that evaluate an expensive integrand once and
/// reuse it.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gl20();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * x.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `exp(i v y^2)` with the phase formed in double-double and reduced mod
/// `2 pi`, so the result stays accurate when `v y^2` is large.
pub fn cis_vy2(v: f64, y: f64) -> Complex64 {
    cis_vy2_dd(v, y, 0.0)
}

/// [`cis_vy2`] at the double-double point `y = hi + lo`.
pub fn cis_vy2_dd(v: f64, hi: f64, lo: f64) -> Complex64 {
    let (s, se) = two_prod(hi, hi);
    let se = se + 2.0 * hi * lo;
    let (p, pe) = two_prod(v, s);
    let lo = pe + v * se;
    let n = (p / TWO_PI_HI).round();
    let r = (-n).mul_add(TWO_PI_HI, p) - n * TWO_PI_LO + lo;
    let (sn, cs) = r.sin_cos();
    Complex64::new(cs, sn)
}

/// Barycentric interpolation at the Chebyshev points of the first kind on
/// `[a, b]`.
#[derive(Debug, Clone)]
pub struct ChebInterp {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebInterp {
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let th = PI * (j as f64 + 0.5) / n as f64;
            nodes.push(th.cos());
            weights.push(if j % 2 == 0 { th.sin() } else { -th.sin() });
        }
        let values = nodes.iter().map(|&x| f(0.5 * (a + b) + 0.5 * (b - a) * x)).collect();
        ChebInterp {
            a,
            b,
            nodes,
            values,
            weights,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let x = (2.0 * y - self.a - self.b) / (self.b - self.a);
        let (mut num, mut den) = (0.0, 0.0);
        for ((&xj, &fj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            num += wj / d * fj;
            den += wj / d;
        }
        num / den
    }
}

/// Composite 20-point Gauss nodes on `[a, a + count * width]` with `width`
/// a power of two, returned as double-double abscissae `(hi, lo, weight)`.
/// Panel edges and nodes are exact, which matters when the integrand is
/// differentiated by a rapidly varying phase.
pub fn dyadic_nodes(a: f64, b: f64, min_panels: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gl20();
    let width = 2f64.powi(((b - a) / min_panels.max(1) as f64).log2().floor() as i32);
    let count = ((b - a) / width).ceil() as usize;
    let mut out = Vec::with_capacity(count * x.len());
    for p in 0..count {
        let mid = (p as f64 + 0.5) * width;
        for (xi, wi) in x.iter().zip(w) {
            let (q, ql) = two_sum(mid, 0.5 * width * xi);
            let (hi, e) = two_sum(a, q);
            out.push((hi, e + ql, 0.5 * width * wi));
        }
    }
    out
}

/// Ordinary least squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_point_rule_has_centre_node() {
        let (x, _) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
    }

    #[test]
    fn composite_rule_on_smooth_integrand() {
        let v = integrate(|t| t.sin(), 0.0, PI, 4);
        assert!((v - 2.0).abs() < 1e-14);
        let z = integrate_c(|t| e(t), 0.0, 0.25, 1);
        assert!((z - Complex64::new(1.0, 1.0) / (2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn additive_character_reduces_argument() {
        assert!((e(1e9 + 0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-6);
        assert!((e_ratio(-1, 4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-20);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t - 1.0).collect();
        let (m, c) = linear_fit(&x, &y);
        assert!((m - 3.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn accurate_phase() {
        let z = cis_vy2(1e4, 3.7);
        let want = Complex64::new(0.0, 136_900.0f64.rem_euclid(2.0 * PI)).exp();
        assert!((z - want).norm() < 1e-11);
        assert!((cis_vy2(0.5, 2.0) - Complex64::new(0.0, 2.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn chebyshev_interpolates_smooth_functions() {
        let c = ChebInterp::new(|x: f64| (x.ln() * 0.7).sin() + x.sqrt(), 1.0, 4.5, 48);
        for i in 0..100 {
            let x = 1.0 + 3.5 * (i as f64 + 0.37) / 100.0;
            assert!((c.eval(x) - ((x.ln() * 0.7).sin() + x.sqrt())).abs() < 1e-13);
        }
    }
}
