//! Constants fixed once by calibration runs (see `tests/calibration.rs`) and
//! then frozen. Checks compare against these; they are never refitted at run
//! time.

/// `|log(Gamma(s+k)/Gamma(k) k^{-s})| <= C |s| max(1,|s|) / k`.
pub const STIRLING_RATIO_C: f64 = 1.0;

/// Multiplier on `t/K^4 int v^4 |...| dv` in the averaged Bessel identity.
///
/// Largest observed ratio was 3.8e-4, at `K = 80, t = 160`, over
/// `K` in {40, 80} and `t` up to `K^2/10`.
pub const BESSEL_AVERAGE_C: f64 = 1e-3;

/// Multiplier on the stationary-phase error form. Largest observed ratio
/// was 0.12, for the phase `2 sqrt(t) - t` at `lambda = 1`.
pub const STATIONARY_PHASE_C: f64 = 0.25;

/// Multiplier on `K^{delta0} (log K)^{1/4}` in the mollifier size bound. The
/// bound is far from tight at every computable scale, so 1 is used as is.
pub const MOLLIFIER_SIZE_C: f64 = 1.0;

/// Bound on `|E(M_{2,j} prod L_p)|` and on `|Sigma(z)|` for `|z| <= 2`.
///
/// On intervals `[y, y^e]`, `y` in {23, 50, 100, 200}, the largest
/// `|Sigma(z)|` was 8.7e5 and did not grow with `y`. The size comes from
/// `z = -2`, where each prime contributes about `1 + 16/p`.
pub const MOLLIFIED_LOCAL_C: f64 = 2e6;

/// Lower bound multiplier on `(log K)^{-1/2}` for the mollified diagonal
/// product. Observed `product * (log K)^{1/2}` was 3.5 for schemes whose
/// intervals are all empty (`log K = 12.5`) and 782 for `log K = 2e6`.
pub const DIAGONAL_LOWER_C: f64 = 1.0;

/// Multiplier on `k^{-1/2}` in the dominant-term residual for coefficients
/// bounded by 1. Observed `residual * k^{1/2}` was at most 2.15 (constant
/// coefficients) and 1.67 (uniform random) for `k` from 1e4 to 1e5 with
/// `l = round(sqrt(k / (2 log k)))`.
pub const FOURIER_DOMINANT_C: f64 = 4.0;
