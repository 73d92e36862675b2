//! Special functions and the analytic transforms built from them.

pub mod afe;
pub mod bessel;
pub mod gamma;
pub mod oscillatory;
pub mod weight;

pub use afe::{AFEWeight, VTable};
pub use bessel::{bessel_bound, bessel_bound_check, bessel_j, bessel_j_integer_orders, BesselBoundCheck};
pub use gamma::{gamma, ln_gamma_real, log_gamma, log_gamma_ratio, stirling_ratio_check, StirlingCheck};
pub use weight::{limit_weight, MellinInversion, OscillatoryTransforms, WeightFunction};
pub use oscillatory::{
    bessel_average_check, stationary_phase_check, stationary_phase_scaling, stationary_point, BesselAverageCheck, Phase,
    PhaseScaling, SaddleParams, StationaryPhaseCheck,
};
