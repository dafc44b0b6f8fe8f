//! System parameters and Rayleigh-fading statistics.
//!
//! Every link is Rayleigh, so each power gain is exponential with the link's
//! variance as its mean. The backscatter path to a receiver is the product of
//! two such gains (source → tag and tag → receiver); its density is
//! `2/(ab) · K0(2√(y/(ab)))`.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::iqi::{
    receiver_composites, rx_coefficients, tx_coefficients, IqiProfile, ReceiverComposites,
};
use crate::special::{bessel_k0, bessel_k1};

/// A fading link in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    /// Source → near user (`h_Dn`).
    SourceNear,
    /// Source → far user (`h_Df`).
    SourceFar,
    /// Source → eavesdropper (`h_E`).
    SourceEve,
    /// Tag → near user (`g_Dn`).
    TagNear,
    /// Tag → far user (`g_Df`).
    TagFar,
    /// Tag → eavesdropper (`g_E`).
    TagEve,
    /// Source → tag (`h_b`).
    SourceTag,
}

/// `lambda1..lambda7` in order. This is the only place the numbered
/// variances are tied to links; config keys and CSV metadata go through it.
pub const LAMBDA_LINKS: [Link; 7] = [
    Link::SourceNear,
    Link::SourceFar,
    Link::SourceEve,
    Link::TagNear,
    Link::TagFar,
    Link::TagEve,
    Link::SourceTag,
];

/// Mean power gain of every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelVariances {
    values: [f64; 7],
}

impl ChannelVariances {
    /// `lambdas[k]` is `lambda{k+1}`.
    pub fn from_numbered(lambdas: [f64; 7]) -> Self {
        ChannelVariances { values: lambdas }
    }

    pub fn numbered(&self) -> [f64; 7] {
        self.values
    }

    fn slot(link: Link) -> usize {
        LAMBDA_LINKS
            .iter()
            .position(|&l| l == link)
            .expect("every link has a lambda index")
    }

    pub fn get(&self, link: Link) -> f64 {
        self.values[Self::slot(link)]
    }

    pub fn set(&mut self, link: Link, value: f64) {
        self.values[Self::slot(link)] = value;
    }

    /// `lambda{index}` with `index` in `1..=7`.
    pub fn lambda(&self, index: usize) -> Option<f64> {
        index.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

impl Default for ChannelVariances {
    fn default() -> Self {
        ChannelVariances::from_numbered([1.0, 0.1, 1.0, 0.5, 0.8, 0.2, 0.1])
    }
}

/// Decoding and wiretap SINR thresholds (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Far user's signal `x2`.
    pub x2: f64,
    /// Near user's signal `x1`.
    pub x1: f64,
    /// Tag signal `c(t)`.
    pub c: f64,
    /// Eavesdropper on `x2`.
    pub eve_far: f64,
    /// Eavesdropper on `x1`.
    pub eve_near: f64,
    /// Eavesdropper on `c(t)`.
    pub eve_bd: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            x2: 1.0,
            x1: 2.0,
            c: 0.1,
            eve_far: 1.2,
            eve_near: 1.0,
            eve_bd: 0.8,
        }
    }
}

/// A receiver that decodes the downlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Near,
    Far,
    Eve,
}

impl Receiver {
    pub fn direct_link(self) -> Link {
        match self {
            Receiver::Near => Link::SourceNear,
            Receiver::Far => Link::SourceFar,
            Receiver::Eve => Link::SourceEve,
        }
    }

    pub fn tag_link(self) -> Link {
        match self {
            Receiver::Near => Link::TagNear,
            Receiver::Far => Link::TagFar,
            Receiver::Eve => Link::TagEve,
        }
    }
}

/// Everything that defines one operating point. Noise power is 1, so
/// `snr` is the source transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Power share of the near user; the far user gets `1 - a1`.
    pub a1: f64,
    /// Tag reflection coefficient, real in `(0, 1]`.
    pub beta: f64,
    pub lambdas: ChannelVariances,
    /// Linear transmit SNR.
    pub snr: f64,
    pub thresholds: Thresholds,
    pub iqi: IqiProfile,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            a1: 0.1,
            beta: 0.1,
            lambdas: ChannelVariances::default(),
            snr: 100.0,
            thresholds: Thresholds::default(),
            iqi: IqiProfile::IDEAL,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl SystemParams {
    pub fn a2(&self) -> f64 {
        1.0 - self.a1
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }

    pub fn with_snr_db(mut self, db: f64) -> Self {
        self.snr = db_to_linear(db);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_a1(mut self, a1: f64) -> Self {
        self.a1 = a1;
        self
    }

    pub fn with_iqi(mut self, iqi: IqiProfile) -> Self {
        self.iqi = iqi;
        self
    }

    pub fn variance(&self, link: Link) -> f64 {
        self.lambdas.get(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > 0.0 && self.a1 < 0.5) {
            return Err(Error::invalid(
                "a1",
                format!("need 0 < a1 < a2 = 1 - a1, got a1 = {}", self.a1),
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(
                "beta",
                format!("reflection coefficient must lie in (0, 1], got {}", self.beta),
            ));
        }
        for (k, v) in self.lambdas.numbered().iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(
                    format!("lambda{}", k + 1),
                    format!("variance must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::invalid(
                "snr",
                format!("transmit SNR must be finite and > 0, got {}", self.snr),
            ));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("th_x2", t.x2),
            ("th_x1", t.x1),
            ("th_c", t.c),
            ("th_e_far", t.eve_far),
            ("th_e_near", t.eve_near),
            ("th_e_bd", t.eve_bd),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("threshold must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Composite I/Q-imbalance scalars seen by `rx`.
    pub fn composites(&self, rx: Receiver) -> ReceiverComposites {
        let own = match rx {
            Receiver::Near => self.iqi.near_rx,
            Receiver::Far => self.iqi.far_rx,
            Receiver::Eve => self.iqi.eve_rx,
        };
        receiver_composites(
            &tx_coefficients(self.iqi.source_tx),
            &tx_coefficients(self.iqi.bd_tx),
            &rx_coefficients(self.iqi.bd_rx),
            &rx_coefficients(own),
            self.a1,
            self.beta,
        )
    }

    /// Product-gain mean `λ_SourceTag · λ_tag→rx` of the backscatter path to `rx`.
    pub fn cascade_mean(&self, rx: Receiver) -> f64 {
        self.variance(Link::SourceTag) * self.variance(rx.tag_link())
    }
}

/// One realisation of every power gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSample {
    pub rho_dn: f64,
    pub rho_df: f64,
    pub rho_e: f64,
    pub rho_g_dn: f64,
    pub rho_g_df: f64,
    pub rho_g_e: f64,
    pub rho_b: f64,
}

impl FadingSample {
    /// `(direct gain, tag → receiver gain)` for `rx`.
    pub fn gains(&self, rx: Receiver) -> (f64, f64) {
        match rx {
            Receiver::Near => (self.rho_dn, self.rho_g_dn),
            Receiver::Far => (self.rho_df, self.rho_g_df),
            Receiver::Eve => (self.rho_e, self.rho_g_e),
        }
    }
}

/// Draws every gain independently, in a fixed order so a seeded generator
/// always yields the same stream.
pub fn sample_fading<R: Rng + ?Sized>(p: &SystemParams, rng: &mut R) -> FadingSample {
    let l = &p.lambdas;
    let mut draw = |link: Link| -> f64 {
        let e: f64 = rng.sample(Exp1);
        e * l.get(link)
    };
    let rho_dn = draw(Link::SourceNear);
    let rho_df = draw(Link::SourceFar);
    let rho_e = draw(Link::SourceEve);
    let rho_g_dn = draw(Link::TagNear);
    let rho_g_df = draw(Link::TagFar);
    let rho_g_e = draw(Link::TagEve);
    let rho_b = draw(Link::SourceTag);
    FadingSample {
        rho_dn,
        rho_df,
        rho_e,
        rho_g_dn,
        rho_g_df,
        rho_g_e,
        rho_b,
    }
}

fn check_means(function: &'static str, la: f64, lb: f64) -> Result<()> {
    for v in [la, lb] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain {
                function,
                value: v,
                expected: "positive finite means",
            });
        }
    }
    Ok(())
}

/// Density at `y` of the product of independent exponentials with means `la`, `lb`.
pub fn product_exp_pdf(y: f64, la: f64, lb: f64) -> Result<f64> {
    check_means("product_exp_pdf", la, lb)?;
    if !(y > 0.0) {
        return Err(Error::Domain {
            function: "product_exp_pdf",
            value: y,
            expected: "y > 0",
        });
    }
    let m = la * lb;
    Ok(2.0 / m * bessel_k0(2.0 * (y / m).sqrt())?)
}

/// `Pr(XY > z)` for independent exponentials with means `la`, `lb`.
///
/// Evaluated as `w·K1(w)` with `w = 2√(z/(la·lb))`.
pub fn product_exp_tail(z: f64, la: f64, lb: f64) -> Result<f64> {
    check_means("product_exp_tail", la, lb)?;
    if !(z >= 0.0) {
        return Err(Error::Domain {
            function: "product_exp_tail",
            value: z,
            expected: "z >= 0",
        });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let w = 2.0 * (z / (la * lb)).sqrt();
    if w.is_infinite() {
        return Ok(0.0);
    }
    Ok((w * bessel_k1(w)?).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iqi::MismatchParams;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_params_are_valid() {
        let p = SystemParams::default();
        p.validate().unwrap();
        assert_eq!(p.a2(), 0.9);
        assert_eq!(p.lambdas.lambda(7), Some(0.1));
        assert_eq!(p.lambdas.lambda(0), None);
        assert_eq!(p.variance(Link::TagFar), 0.8);
        assert_eq!(p.variance(Link::TagEve), 0.2);
    }

    #[test]
    fn validation_catches_ranges() {
        let p = SystemParams::default();
        assert!(p.with_a1(0.6).validate().is_err());
        assert!(p.with_a1(0.5).validate().is_err());
        assert!(p.with_beta(0.0).validate().is_err());
        assert!(p.with_beta(1.5).validate().is_err());
        let mut q = p;
        q.thresholds.c = 0.0;
        assert!(q.validate().is_err());
        let mut q = p;
        q.lambdas.set(Link::SourceTag, -1.0);
        assert!(q.validate().is_err());
    }

    #[test]
    fn ideal_profile_gives_ideal_composites() {
        let p = SystemParams::default();
        for rx in [Receiver::Near, Receiver::Far, Receiver::Eve] {
            assert_eq!(p.composites(rx), ReceiverComposites::ideal(p.a1, p.beta));
        }
    }

    #[test]
    fn shared_profile_reaches_every_receiver() {
        let m = MismatchParams::from_degrees(1.05, 20.0).unwrap();
        let p = SystemParams::default().with_iqi(IqiProfile::uniform(m));
        assert_eq!(p.composites(Receiver::Near), p.composites(Receiver::Eve));
    }

    #[test]
    fn seeded_stream_is_reproducible() {
        let p = SystemParams::default();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sample_fading(&p, &mut a), sample_fading(&p, &mut b));
        }
    }

    #[test]
    fn pdf_reference_point() {
        // 2·K0(2) from mpmath
        assert_relative_eq!(
            product_exp_pdf(1.0, 1.0, 1.0).unwrap(),
            0.227_787_745_499_066_87,
            max_relative = 1e-12
        );
        assert!(product_exp_pdf(0.0, 1.0, 1.0).is_err());
        assert!(product_exp_pdf(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tail_limits() {
        assert_eq!(product_exp_tail(0.0, 0.3, 2.0).unwrap(), 1.0);
        assert!(product_exp_tail(1e4, 1.0, 1.0).unwrap() < 1e-80);
        assert!(product_exp_tail(-1.0, 1.0, 1.0).is_err());
    }
}
