//! Special functions used by the envelopes, samplers and oracles.

mod bessel;
mod incgamma;
mod sqrt_gamma;

pub use bessel::{
    bessel_j, bessel_jy, bessel_k, bessel_k_scaled, bessel_y, ln_bessel_k, ln_scaled_hankel_sq,
    scaled_hankel_sq, BesselJY,
};
pub use incgamma::{
    ln_lower_inc_gamma, ln_upper_inc_gamma, lower_inc_gamma, lower_inc_gamma_scaled,
    reg_lower_inc_gamma, reg_upper_inc_gamma, upper_inc_gamma,
};
pub use sqrt_gamma::{sample_sqrt_gamma_truncated, Truncation, MIN_TRUNCATION_MASS};
pub use libm::{lgamma as ln_gamma, tgamma as gamma};

pub(crate) use bessel::ln_scaled_hankel_sq_raw;
pub(crate) use incgamma::{ln_lower_raw, ln_upper_raw, lower_scaled_raw};
pub(crate) use sqrt_gamma::draw as draw_sqrt_gamma;
