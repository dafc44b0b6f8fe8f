//! I/Q imbalance coefficients and the per-receiver composite scalars.
//!
//! A front end with amplitude mismatch `ε` and phase mismatch `φ` maps a
//! baseband signal `x` to `μ·x + ν·x*`. Transmit and receive chains use the
//! same magnitudes but opposite phase signs:
//!
//! ```text
//! TX: μ = ½(1 + ε e^{+jφ}),  ν = ½(1 − ε e^{−jφ})
//! RX: μ = ½(1 + ε e^{−jφ}),  ν = ½(1 − ε e^{+jφ})
//! ```
//!
//! Only squared moduli of these pairs reach the SINR expressions, so
//! [`receiver_composites`] reduces four pairs (source TX, tag TX, tag RX and
//! the receiver's own RX) to seven real scalars.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitude and phase mismatch of one I/Q chain.
///
/// `epsilon == 1` and `phi == 0` is a perfect front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchParams {
    epsilon: f64,
    phi: f64,
}

impl MismatchParams {
    pub const IDEAL: MismatchParams = MismatchParams {
        epsilon: 1.0,
        phi: 0.0,
    };

    /// `phi` in radians.
    pub fn new(epsilon: f64, phi: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("amplitude mismatch must be finite and > 0, got {epsilon}"),
            ));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phi", format!("phase must be finite, got {phi}")));
        }
        Ok(MismatchParams { epsilon, phi })
    }

    pub fn from_degrees(epsilon: f64, phi_deg: f64) -> Result<Self> {
        Self::new(epsilon, phi_deg.to_radians())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Phase mismatch in radians.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_ideal(&self) -> bool {
        self.epsilon == 1.0 && self.phi == 0.0
    }
}

impl Default for MismatchParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Direct-path (`mu`) and image (`nu`) coefficients of one chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqPair {
    pub mu: Complex64,
    pub nu: Complex64,
}

impl IqPair {
    pub const IDEAL: IqPair = IqPair {
        mu: Complex64::new(1.0, 0.0),
        nu: Complex64::new(0.0, 0.0),
    };

    /// `|μ|² + |ν|²`, which equals `(1 + ε²)/2`.
    pub fn power(&self) -> f64 {
        self.mu.norm_sqr() + self.nu.norm_sqr()
    }
}

pub fn tx_coefficients(m: MismatchParams) -> IqPair {
    let rot = Complex64::from_polar(m.epsilon, m.phi);
    IqPair {
        mu: 0.5 * (1.0 + rot),
        nu: 0.5 * (1.0 - rot.conj()),
    }
}

pub fn rx_coefficients(m: MismatchParams) -> IqPair {
    let rot = Complex64::from_polar(m.epsilon, -m.phi);
    IqPair {
        mu: 0.5 * (1.0 + rot),
        nu: 0.5 * (1.0 - rot.conj()),
    }
}

/// Mismatch levels of every chain in the network.
///
/// The source and the tag transmit; the tag, both users and the
/// eavesdropper receive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IqiProfile {
    pub source_tx: MismatchParams,
    pub bd_tx: MismatchParams,
    pub bd_rx: MismatchParams,
    pub near_rx: MismatchParams,
    pub far_rx: MismatchParams,
    pub eve_rx: MismatchParams,
}

impl IqiProfile {
    pub const IDEAL: IqiProfile = IqiProfile {
        source_tx: MismatchParams::IDEAL,
        bd_tx: MismatchParams::IDEAL,
        bd_rx: MismatchParams::IDEAL,
        near_rx: MismatchParams::IDEAL,
        far_rx: MismatchParams::IDEAL,
        eve_rx: MismatchParams::IDEAL,
    };

    /// Every transmit chain gets `tx`, every receive chain gets `rx`.
    pub fn shared(tx: MismatchParams, rx: MismatchParams) -> Self {
        IqiProfile {
            source_tx: tx,
            bd_tx: tx,
            bd_rx: rx,
            near_rx: rx,
            far_rx: rx,
            eve_rx: rx,
        }
    }

    /// Same `(ε, φ)` on all chains.
    pub fn uniform(m: MismatchParams) -> Self {
        Self::shared(m, m)
    }

    pub fn is_ideal(&self) -> bool {
        [
            self.source_tx,
            self.bd_tx,
            self.bd_rx,
            self.near_rx,
            self.far_rx,
            self.eve_rx,
        ]
        .iter()
        .all(MismatchParams::is_ideal)
    }
}

/// The seven scalars that carry I/Q imbalance into one receiver's SINRs.
///
/// * `xi`: surviving gain on the wanted superposed signal.
/// * `a_coeff`, `q_coeff`: tag-link power landing on the image and on the
///   direct path of `c(t)` respectively.
/// * `b_coeff`: residual left after cancelling `x2`.
/// * `c_coeff`: interference on `x2` (the `x1` share plus image leakage).
/// * `d_coeff`: noise power after the receive chain.
/// * `m_coeff`: image leakage of the source signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverComposites {
    pub xi: f64,
    pub a_coeff: f64,
    pub q_coeff: f64,
    pub b_coeff: f64,
    pub c_coeff: f64,
    pub d_coeff: f64,
    pub m_coeff: f64,
}

impl ReceiverComposites {
    /// Closed-form values for a perfect network.
    pub fn ideal(a1: f64, beta: f64) -> Self {
        ReceiverComposites {
            xi: 1.0,
            a_coeff: 0.0,
            q_coeff: beta * beta,
            b_coeff: 0.0,
            c_coeff: a1,
            d_coeff: 1.0,
            m_coeff: 0.0,
        }
    }

    /// `A + Q`, the total tag-link power factor.
    pub fn backscatter_power(&self) -> f64 {
        self.a_coeff + self.q_coeff
    }

    /// `B + M`, the residual that limits `c(t)` decoding.
    pub fn residual(&self) -> f64 {
        self.b_coeff + self.m_coeff
    }
}

pub fn receiver_composites(
    tx_s: &IqPair,
    tx_bd: &IqPair,
    rx_bd: &IqPair,
    rx_i: &IqPair,
    a1: f64,
    beta: f64,
) -> ReceiverComposites {
    let mu_ri = rx_i.mu.norm_sqr();
    let nu_ri = rx_i.nu.norm_sqr();
    let mu_rbd = rx_bd.mu.norm_sqr();
    let nu_rbd = rx_bd.nu.norm_sqr();
    let mu_tbd = tx_bd.mu.norm_sqr();
    let nu_tbd = tx_bd.nu.norm_sqr();
    let mu_ts = tx_s.mu.norm_sqr();
    let nu_ts = tx_s.nu.norm_sqr();
    let source_power = mu_ts + nu_ts;
    let b2 = beta * beta;

    let a_coeff = b2
        * source_power
        * (mu_ri * mu_rbd * nu_tbd
            + mu_ri * nu_rbd * nu_tbd
            + nu_ri * mu_rbd * mu_tbd
            + nu_ri * nu_rbd * mu_tbd);
    let q_coeff = b2
        * source_power
        * (mu_ri * mu_rbd * mu_tbd
            + mu_ri * nu_rbd * mu_tbd
            + nu_ri * mu_rbd * nu_tbd
            + nu_ri * nu_rbd * nu_tbd);

    let xi = mu_ri * mu_ts + nu_ri * nu_ts;
    let m_coeff = mu_ri * nu_ts + nu_ri * mu_ts;
    let b_coeff = (rx_i.mu * tx_s.mu - 1.0).norm_sqr() + nu_ri * nu_ts;

    ReceiverComposites {
        xi,
        a_coeff,
        q_coeff,
        b_coeff,
        c_coeff: a1 * xi + m_coeff,
        d_coeff: mu_ri + nu_ri,
        m_coeff,
    }
}
