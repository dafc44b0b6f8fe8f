//! Instantaneous SINRs for one fading realisation.
//!
//! Receivers decode `x2`, then `x1`, then `c(t)` with successive
//! interference cancellation; the far user stops after `x2`. Imbalance
//! enters only through the composite scalars, noise power is 1.

use crate::channel::{FadingSample, Receiver, SystemParams};
use crate::iqi::ReceiverComposites;

/// SINR of `x2` at `rx`, treating `x1`, image leakage and the tag link as interference.
pub fn sinr_x2(rx: Receiver, s: &FadingSample, c: &ReceiverComposites, p: &SystemParams) -> f64 {
    let (rho, rho_g) = s.gains(rx);
    let g = p.snr;
    let num = c.xi * p.a2() * rho * g;
    num / (rho_g * s.rho_b * c.backscatter_power() * g + rho * c.c_coeff * g + c.d_coeff)
}

/// Far user's `x2` SINR.
pub fn sinr_far_x2(s: &FadingSample, c: &ReceiverComposites, p: &SystemParams) -> f64 {
    sinr_x2(Receiver::Far, s, c, p)
}

/// SINR of `x1` at `rx` after `x2` has been cancelled.
pub fn sinr_x1(rx: Receiver, s: &FadingSample, c: &ReceiverComposites, p: &SystemParams) -> f64 {
    let (rho, rho_g) = s.gains(rx);
    let g = p.snr;
    let num = c.xi * p.a1 * rho * g;
    num / (rho_g * s.rho_b * c.backscatter_power() * g
        + rho * (p.a2() * c.b_coeff + c.m_coeff) * g
        + c.d_coeff)
}

/// SINR of the tag signal `c(t)` at `rx` after both source signals are cancelled.
pub fn sinr_c(rx: Receiver, s: &FadingSample, c: &ReceiverComposites, p: &SystemParams) -> f64 {
    let (rho, rho_g) = s.gains(rx);
    let g = p.snr;
    let cascade = rho_g * s.rho_b;
    let num = c.q_coeff * cascade * g;
    num / (cascade * c.a_coeff * g + rho * c.residual() * g + c.d_coeff)
}
