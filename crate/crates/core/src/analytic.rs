//! Closed-form outage and intercept probabilities.
//!
//! Every expression conditions on the backscatter cascade gain
//! `X = ρ_g·ρ_b` (product of two exponentials) and integrates the
//! exponential direct-link gain out analytically. Three building blocks
//! recur:
//!
//! * `E[e^{-sX}] = -Δ e^Δ Ei(-Δ)` with `Δ = 1/(s·E[X])`, always evaluated
//!   through [`scaled_ei_product`];
//! * partial Laplace integrals `∫_0^L f_X(x) e^{-sx} dx`, evaluated on
//!   Chebyshev nodes;
//! * the tag-decoding condition `X > κ(ρ·(B+M) + D/γ)`, which couples the
//!   two gains and yields a second, exponentially shifted tail term.
//!
//! Whenever a threshold exceeds the SINR ceiling reachable at any fading
//! state, the closed form's denominators go non-positive; those cases are
//! caught by the feasibility guards and return the certain answer (outage
//! 1, intercept 0) together with the reason.

use num_complex::Complex64;

use crate::channel::{Link, Receiver, SystemParams};
use crate::error::{Error, Result};
use crate::iqi::{rx_coefficients, tx_coefficients, ReceiverComposites};
use crate::metric::Metric;
use crate::special::{bessel_k0, scaled_ei_product, ChebyshevRule, QuadratureKind};

/// Slack allowed outside `[0, 1]` before a result is treated as an error.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Number of `τ` widths covered when the shifted tail is integrated directly.
const TAIL_SPAN: f64 = 40.0;

/// Which numerator the near-user intercept expression uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NearInterceptForm {
    /// `ξ_E·a1`, consistent with the eavesdropper's `x1` SINR.
    #[default]
    SinrConsistent,
    /// `|μ_rE|²|μ_tS|²·a1`, dropping the image-on-image term of `ξ_E`.
    DirectOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOptions {
    pub quadrature_n: usize,
    pub quadrature: QuadratureKind,
    pub near_intercept: NearInterceptForm,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        AnalyticOptions {
            quadrature_n: 200,
            quadrature: QuadratureKind::Smoothed,
            near_intercept: NearInterceptForm::SinrConsistent,
        }
    }
}

impl AnalyticOptions {
    pub fn with_n(n: usize) -> Self {
        AnalyticOptions {
            quadrature_n: n,
            ..Self::default()
        }
    }

    fn rule(&self) -> Result<ChebyshevRule> {
        ChebyshevRule::new(self.quadrature_n, self.quadrature)
    }
}

/// Ideal front ends everywhere, or the configured imbalance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Ideal,
    NonIdeal,
}

impl Branch {
    pub fn of(p: &SystemParams) -> Branch {
        if p.iqi.is_ideal() {
            Branch::Ideal
        } else {
            Branch::NonIdeal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// `ξ·a2 − C·γ_th2 ≤ 0` at the far user.
    FarX2Ceiling,
    /// `ξ·a2 − C·γ_th2 ≤ 0` at the near user.
    NearX2Ceiling,
    /// `ξ·a1 − (a2·B + M)·γ_th1 ≤ 0` at the near user.
    NearX1Ceiling,
    /// `Q − A·γ_thc ≤ 0` at the near user.
    TagCeiling,
    /// The `x1` and `c(t)` conditions cannot hold together at any fading state.
    TagJointRegionEmpty,
    EveX2Ceiling,
    EveX1Ceiling,
    EveTagCeiling,
}

impl InfeasibleReason {
    pub fn describe(self) -> &'static str {
        match self {
            InfeasibleReason::FarX2Ceiling => "far-user x2 SINR ceiling below threshold",
            InfeasibleReason::NearX2Ceiling => "near-user x2 SINR ceiling below threshold",
            InfeasibleReason::NearX1Ceiling => "near-user x1 SINR ceiling below threshold",
            InfeasibleReason::TagCeiling => "tag-signal SINR ceiling below threshold",
            InfeasibleReason::TagJointRegionEmpty => "x1 and c(t) conditions are disjoint",
            InfeasibleReason::EveX2Ceiling => "eavesdropper x2 SINR ceiling below threshold",
            InfeasibleReason::EveX1Ceiling => "eavesdropper x1 SINR ceiling below threshold",
            InfeasibleReason::EveTagCeiling => "eavesdropper c(t) SINR ceiling below threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub ok: bool,
    pub reason: Option<InfeasibleReason>,
}

impl Feasibility {
    pub const OK: Feasibility = Feasibility {
        ok: true,
        reason: None,
    };

    pub fn infeasible(reason: InfeasibleReason) -> Self {
        Feasibility {
            ok: false,
            reason: Some(reason),
        }
    }
}

/// A closed-form probability together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValue {
    pub probability: f64,
    pub feasibility: Feasibility,
    /// Chebyshev nodes used, when the expression carries a quadrature sum.
    pub quadrature_n: Option<usize>,
}

impl AnalyticValue {
    fn certain(probability: f64, reason: InfeasibleReason) -> Self {
        AnalyticValue {
            probability,
            feasibility: Feasibility::infeasible(reason),
            quadrature_n: None,
        }
    }
}

fn finish(metric: &'static str, raw: f64, quadrature_n: Option<usize>) -> Result<AnalyticValue> {
    if !(raw >= -PROBABILITY_SLACK && raw <= 1.0 + PROBABILITY_SLACK) {
        return Err(Error::ProbabilityOutOfRange { metric, value: raw });
    }
    Ok(AnalyticValue {
        probability: raw.clamp(0.0, 1.0),
        feasibility: Feasibility::OK,
        quadrature_n,
    })
}

/// `E[e^{-sX}]` for a cascade gain with mean `mean`, written as `-Δe^ΔEi(-Δ)`.
fn cascade_laplace(s: f64, mean: f64) -> Result<f64> {
    Ok(-scaled_ei_product(1.0 / (s * mean))?)
}

fn cascade_pdf(x: f64, mean: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    bessel_k0(2.0 * (x / mean).sqrt()).map_or(0.0, |k| 2.0 / mean * k)
}

/// `∫_0^upper f_X(x) e^{-sx} dx`.
///
/// Past a few cascade means the density has decayed and a single interval
/// would spend most nodes where nothing happens, so the integral becomes the
/// full transform minus its tail.
fn partial_laplace(rule: &ChebyshevRule, upper: f64, s: f64, mean: f64) -> Result<f64> {
    if upper <= mean {
        return Ok(rule.integrate(0.0, upper, |x| cascade_pdf(x, mean) * (-s * x).exp()));
    }
    Ok(cascade_laplace(s, mean)? - (-s * upper).exp() * laplace_tail(rule, upper, 1.0 / s, mean))
}

/// `∫_lo^∞ f_X(x) e^{-(x - lo)/τ} dx` for `lo > 0`, integrated directly.
///
/// The span stops after 40 widths of `τ` or once `2√(x/E[X])` has grown by
/// 40 beyond its value at `lo`, whichever is first.
fn laplace_tail(rule: &ChebyshevRule, lo: f64, tau: f64, mean: f64) -> f64 {
    let density_span = 40.0 * (lo * mean).sqrt() + 400.0 * mean;
    let span = (TAIL_SPAN * tau).min(density_span);
    rule.integrate(0.0, span, |u| cascade_pdf(lo + u, mean) * (-u / tau).exp())
}

/// `∫_lo^∞ f_X(x) e^{-(x - shift)/τ} dx` for `lo ≥ shift`.
///
/// For `lo` below both `τ` and `E[X]` the head `[0, lo]` is subtracted from
/// the full transform; elsewhere that difference would cancel, so the tail
/// is integrated directly.
fn shifted_tail(rule: &ChebyshevRule, lo: f64, shift: f64, tau: f64, mean: f64) -> Result<f64> {
    debug_assert!(lo >= shift && tau > 0.0);
    if lo <= tau.min(mean) {
        let full = cascade_laplace(1.0 / tau, mean)?;
        let head = partial_laplace(rule, lo, 1.0 / tau, mean)?;
        Ok((shift / tau).exp() * (full - head))
    } else {
        Ok((-(lo - shift) / tau).exp() * laplace_tail(rule, lo, tau, mean))
    }
}

fn checked(p: &SystemParams, opts: &AnalyticOptions) -> Result<()> {
    p.validate()?;
    if opts.quadrature_n == 0 {
        return Err(Error::invalid("quadrature_n", "need at least one node"));
    }
    Ok(())
}

/// `ξ·a2 − C·th`, the margin by which the `x2` ceiling clears `th`.
fn x2_margin(c: &ReceiverComposites, p: &SystemParams, th: f64) -> f64 {
    c.xi * p.a2() - c.c_coeff * th
}

fn x1_margin(gain: f64, c: &ReceiverComposites, p: &SystemParams, th: f64) -> f64 {
    gain * p.a1 - (p.a2() * c.b_coeff + c.m_coeff) * th
}

/// Joint `x2`/`x1` threshold ratio `ς` at the near user, or why it does not exist.
fn near_ratio(c: &ReceiverComposites, p: &SystemParams) -> std::result::Result<f64, InfeasibleReason> {
    let t = &p.thresholds;
    let m2 = x2_margin(c, p, t.x2);
    if m2 <= 0.0 {
        return Err(InfeasibleReason::NearX2Ceiling);
    }
    let m1 = x1_margin(c.xi, c, p, t.x1);
    if m1 <= 0.0 {
        return Err(InfeasibleReason::NearX1Ceiling);
    }
    Ok((t.x1 / m1).max(t.x2 / m2))
}

/// Far-user outage probability at the configured SNR.
pub fn op_far(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let c = p.composites(Receiver::Far);
    let th = p.thresholds.x2;
    let margin = x2_margin(&c, p, th);
    if margin <= 0.0 {
        return Ok(AnalyticValue::certain(1.0, InfeasibleReason::FarX2Ceiling));
    }
    let ratio = th / margin;
    let lambda = p.variance(Link::SourceFar);
    let delta1 = lambda / (p.cascade_mean(Receiver::Far) * ratio * c.backscatter_power());
    let direct = (-c.d_coeff * ratio / (lambda * p.snr)).exp();
    finish("op_far", 1.0 + direct * scaled_ei_product(delta1)?, None)
}

/// High-SNR floor of [`op_far`].
pub fn op_far_asymptotic(p: &SystemParams) -> Result<AnalyticValue> {
    checked(p, &AnalyticOptions::default())?;
    let c = p.composites(Receiver::Far);
    let th = p.thresholds.x2;
    let margin = x2_margin(&c, p, th);
    if margin <= 0.0 {
        return Ok(AnalyticValue::certain(1.0, InfeasibleReason::FarX2Ceiling));
    }
    let delta1 = p.variance(Link::SourceFar)
        / (p.cascade_mean(Receiver::Far) * (th / margin) * c.backscatter_power());
    finish("op_far_asymptotic", 1.0 + scaled_ei_product(delta1)?, None)
}

/// Near-user outage probability (`x2` and then `x1` must both decode).
pub fn op_near(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let c = p.composites(Receiver::Near);
    let ratio = match near_ratio(&c, p) {
        Ok(r) => r,
        Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
    };
    let lambda = p.variance(Link::SourceNear);
    let delta2 = lambda / (p.cascade_mean(Receiver::Near) * ratio * c.backscatter_power());
    let direct = (-ratio * c.d_coeff / (lambda * p.snr)).exp();
    finish("op_near", 1.0 + direct * scaled_ei_product(delta2)?, None)
}

/// High-SNR floor of [`op_near`].
pub fn op_near_asymptotic(p: &SystemParams) -> Result<AnalyticValue> {
    checked(p, &AnalyticOptions::default())?;
    let c = p.composites(Receiver::Near);
    let ratio = match near_ratio(&c, p) {
        Ok(r) => r,
        Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
    };
    let delta2 = p.variance(Link::SourceNear)
        / (p.cascade_mean(Receiver::Near) * ratio * c.backscatter_power());
    finish("op_near_asymptotic", 1.0 + scaled_ei_product(delta2)?, None)
}

/// `ς_id = max{γ_th2/(a2 − a1γ_th2), γ_th1/a1}`, or the failing ceiling.
fn ideal_near_ratio(p: &SystemParams) -> std::result::Result<f64, InfeasibleReason> {
    let t = &p.thresholds;
    let m2 = p.a2() - p.a1 * t.x2;
    if m2 <= 0.0 {
        return Err(InfeasibleReason::NearX2Ceiling);
    }
    Ok((t.x2 / m2).max(t.x1 / p.a1))
}

/// Tag outage probability with ideal front ends, whatever `p.iqi` says.
pub fn op_bd_ideal(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let ratio = match ideal_near_ratio(p) {
        Ok(r) => r,
        Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
    };
    let rule = opts.rule()?;
    let lambda1 = p.variance(Link::SourceNear);
    let mean = p.cascade_mean(Receiver::Near);
    let b2 = p.beta * p.beta;
    let delta3 = lambda1 / (mean * ratio * b2);
    // c(t) decodes iff X > γ_thc/(β²γ).
    let upper = p.thresholds.c / (b2 * p.snr);
    let head = partial_laplace(&rule, upper, ratio * b2 / lambda1, mean)?;
    let direct = (-ratio / (p.snr * lambda1)).exp();
    let raw = 1.0 + direct * (scaled_ei_product(delta3)? + head);
    finish("op_bd_ideal", raw, Some(rule.n()))
}

struct TagGeometry {
    ratio: f64,
    backscatter: f64,
    residual: f64,
    noise: f64,
    /// `κ = γ_thc / (Q − A·γ_thc)`
    kappa: f64,
}

fn tag_geometry(p: &SystemParams) -> std::result::Result<TagGeometry, InfeasibleReason> {
    let c = p.composites(Receiver::Near);
    let ratio = near_ratio(&c, p)?;
    let th = p.thresholds.c;
    let margin = c.q_coeff - c.a_coeff * th;
    if margin <= 0.0 {
        return Err(InfeasibleReason::TagCeiling);
    }
    let kappa = th / margin;
    let residual = c.residual();
    if residual > 0.0 && 1.0 / (kappa * residual) <= ratio * c.backscatter_power() {
        return Err(InfeasibleReason::TagJointRegionEmpty);
    }
    Ok(TagGeometry {
        ratio,
        backscatter: c.backscatter_power(),
        residual,
        noise: c.d_coeff,
        kappa,
    })
}

/// Tag outage probability under the configured imbalance.
///
/// Success needs `ρ > ς(W·X + D/γ)` and `X > κ(b·ρ + D/γ)` with
/// `W = A + Q`, `b = B + M`. For `b > 0` the two half-planes meet at
/// `X = x0 = D(1/b + ς)/(γ(1/(κb) − ςW))`, which is the upper limit of both
/// quadrature sums.
pub fn op_bd_nonideal(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let g = match tag_geometry(p) {
        Ok(g) => g,
        Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
    };
    let rule = opts.rule()?;
    let lambda1 = p.variance(Link::SourceNear);
    let mean = p.cascade_mean(Receiver::Near);
    let snr = p.snr;
    let delta5 = lambda1 / (mean * g.ratio * g.backscatter);
    let delta6 = g.kappa * g.noise / snr;
    let direct = (-g.ratio * g.noise / (lambda1 * snr)).exp();
    let s = g.ratio * g.backscatter / lambda1;

    let raw = if g.residual == 0.0 {
        1.0 + direct * (scaled_ei_product(delta5)? + partial_laplace(&rule, delta6, s, mean)?)
    } else {
        let slope = 1.0 / (g.kappa * g.residual) - g.ratio * g.backscatter;
        let x0 = g.noise * (1.0 / g.residual + g.ratio) / (snr * slope);
        let tau = g.kappa * g.residual * lambda1;
        1.0 + direct * (scaled_ei_product(delta5)? + partial_laplace(&rule, x0, s, mean)?)
            + shifted_tail(&rule, x0, delta6, tau, mean)?
    };
    finish("op_bd_nonideal", raw, Some(rule.n()))
}

/// High-SNR floor of the tag outage probability.
pub fn op_bd_asymptotic(p: &SystemParams, branch: Branch) -> Result<AnalyticValue> {
    checked(p, &AnalyticOptions::default())?;
    let lambda1 = p.variance(Link::SourceNear);
    let mean = p.cascade_mean(Receiver::Near);
    match branch {
        Branch::Ideal => {
            let ratio = match ideal_near_ratio(p) {
                Ok(r) => r,
                Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
            };
            let delta3 = lambda1 / (mean * ratio * p.beta * p.beta);
            finish("op_bd_asymptotic", 1.0 + scaled_ei_product(delta3)?, None)
        }
        Branch::NonIdeal => {
            let g = match tag_geometry(p) {
                Ok(g) => g,
                Err(reason) => return Ok(AnalyticValue::certain(1.0, reason)),
            };
            let delta5 = lambda1 / (mean * g.ratio * g.backscatter);
            let mut raw = 1.0 + scaled_ei_product(delta5)?;
            if g.residual > 0.0 {
                let delta4 = g.kappa * g.residual * lambda1 / mean;
                raw -= scaled_ei_product(delta4)?;
            }
            finish("op_bd_asymptotic", raw, None)
        }
    }
}

/// Tag outage on the branch matching `p.iqi`.
pub fn op_bd(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    match Branch::of(p) {
        Branch::Ideal => op_bd_ideal(p, opts),
        Branch::NonIdeal => op_bd_nonideal(p, opts),
    }
}

/// Far-user intercept probability: the eavesdropper's `x2` SINR clears `γ_thE,Df`.
pub fn ip_far(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let c = p.composites(Receiver::Eve);
    let th = p.thresholds.eve_far;
    let margin = x2_margin(&c, p, th);
    if margin <= 0.0 {
        return Ok(AnalyticValue::certain(0.0, InfeasibleReason::EveX2Ceiling));
    }
    let ratio = th / margin;
    let lambda3 = p.variance(Link::SourceEve);
    let delta9 = lambda3 / (p.cascade_mean(Receiver::Eve) * ratio * c.backscatter_power());
    let direct = (-c.d_coeff * ratio / (lambda3 * p.snr)).exp();
    finish("ip_far", -direct * scaled_ei_product(delta9)?, None)
}

/// Near-user intercept probability: the eavesdropper's `x1` SINR clears `γ_thE,Dn`.
pub fn ip_near(p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let c = p.composites(Receiver::Eve);
    let gain = match opts.near_intercept {
        NearInterceptForm::SinrConsistent => c.xi,
        NearInterceptForm::DirectOnly => {
            let mu_r: Complex64 = rx_coefficients(p.iqi.eve_rx).mu;
            let mu_t: Complex64 = tx_coefficients(p.iqi.source_tx).mu;
            mu_r.norm_sqr() * mu_t.norm_sqr()
        }
    };
    let th = p.thresholds.eve_near;
    let margin = x1_margin(gain, &c, p, th);
    if margin <= 0.0 {
        return Ok(AnalyticValue::certain(0.0, InfeasibleReason::EveX1Ceiling));
    }
    let ratio = th / margin;
    let lambda3 = p.variance(Link::SourceEve);
    let delta10 = lambda3 / (p.cascade_mean(Receiver::Eve) * ratio * c.backscatter_power());
    let direct = (-ratio * c.d_coeff / (lambda3 * p.snr)).exp();
    finish("ip_near", -direct * scaled_ei_product(delta10)?, None)
}

/// Tag intercept probability: the eavesdropper's `c(t)` SINR clears `γ_thE,BD`.
///
/// The ideal branch ignores `p.iqi`. Its event is `X > γ_thE,BD/(β²γ)`, whose
/// probability is the cascade tail in closed form. The non-ideal event is
/// `X > κ(b·ρ_E + D/γ)`.
pub fn ip_bd(p: &SystemParams, branch: Branch, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    checked(p, opts)?;
    let lambda6 = p.variance(Link::TagEve);
    let lambda7 = p.variance(Link::SourceTag);
    let th = p.thresholds.eve_bd;
    match branch {
        Branch::Ideal => {
            let lower = th / (p.beta * p.beta * p.snr);
            let tail = crate::channel::product_exp_tail(lower, lambda7, lambda6)?;
            finish("ip_bd_ideal", tail, None)
        }
        Branch::NonIdeal => {
            let c = p.composites(Receiver::Eve);
            let margin = c.q_coeff - c.a_coeff * th;
            if margin <= 0.0 {
                return Ok(AnalyticValue::certain(0.0, InfeasibleReason::EveTagCeiling));
            }
            let kappa = th / margin;
            let lower = kappa * c.d_coeff / p.snr;
            let tail = crate::channel::product_exp_tail(lower, lambda7, lambda6)?;
            let residual = c.residual();
            if residual == 0.0 {
                return finish("ip_bd_nonideal", tail, None);
            }
            let rule = opts.rule()?;
            let tau = kappa * residual * p.variance(Link::SourceEve);
            let blocked = shifted_tail(&rule, lower, lower, tau, lambda6 * lambda7)?;
            finish("ip_bd_nonideal", tail - blocked, Some(rule.n()))
        }
    }
}

/// Closed-form value of `metric`, picking the tag branch from `p.iqi`.
pub fn evaluate(metric: Metric, p: &SystemParams, opts: &AnalyticOptions) -> Result<AnalyticValue> {
    match metric {
        Metric::OpFar => op_far(p, opts),
        Metric::OpNear => op_near(p, opts),
        Metric::OpBd => op_bd(p, opts),
        Metric::IpFar => ip_far(p, opts),
        Metric::IpNear => ip_near(p, opts),
        Metric::IpBd => ip_bd(p, Branch::of(p), opts),
    }
}

/// High-SNR outage floor for an outage metric; `None` for intercept metrics.
pub fn outage_floor(metric: Metric, p: &SystemParams) -> Result<Option<AnalyticValue>> {
    Ok(match metric {
        Metric::OpFar => Some(op_far_asymptotic(p)?),
        Metric::OpNear => Some(op_near_asymptotic(p)?),
        Metric::OpBd => Some(op_bd_asymptotic(p, Branch::of(p))?),
        _ => None,
    })
}

/// Slope `−Δlog10(OP)/Δlog10(γ)` of an outage curve between two SNRs in dB.
pub fn diversity_order<F>(outage_at_snr: F, snr_lo_db: f64, snr_hi_db: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(snr_hi_db > snr_lo_db) {
        return Err(Error::invalid(
            "snr range",
            format!("need hi > lo, got [{snr_lo_db}, {snr_hi_db}] dB"),
        ));
    }
    let lo = outage_at_snr(crate::channel::db_to_linear(snr_lo_db))?;
    let hi = outage_at_snr(crate::channel::db_to_linear(snr_hi_db))?;
    if lo == hi {
        return Ok(0.0);
    }
    if !(lo > 0.0 && hi > 0.0) {
        return Err(Error::invalid("outage", "slope needs strictly positive outage values"));
    }
    Ok(-(hi.log10() - lo.log10()) / ((snr_hi_db - snr_lo_db) / 10.0))
}

/// Scalar intermediates of the closed forms at one operating point.
///
/// `None` marks a quantity whose defining denominator is non-positive.
/// `delta` holds `Δ1..Δ13` at indices `0..13`; `Δ7`, `Δ8` and `Δ13` vary with
/// the quadrature node and are always `None` here.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticIntermediates {
    /// `γ_th2/(ξ_Df·a2 − C_Df·γ_th2)`
    pub far_ratio: Option<f64>,
    /// `γ_thE,Df/(ξ_E·a2 − C_E·γ_thE,Df)`
    pub eve_far_ratio: Option<f64>,
    pub varsigma: Option<f64>,
    pub varsigma_ideal: Option<f64>,
    pub delta: [Option<f64>; 13],
}

pub fn intermediates(p: &SystemParams) -> Result<AnalyticIntermediates> {
    p.validate()?;
    let far = p.composites(Receiver::Far);
    let near = p.composites(Receiver::Near);
    let eve = p.composites(Receiver::Eve);
    let l1 = p.variance(Link::SourceNear);
    let l2 = p.variance(Link::SourceFar);
    let l3 = p.variance(Link::SourceEve);
    let m_near = p.cascade_mean(Receiver::Near);
    let m_far = p.cascade_mean(Receiver::Far);
    let m_eve = p.cascade_mean(Receiver::Eve);
    let t = &p.thresholds;
    let positive = |x: f64| (x > 0.0).then_some(x);

    let far_ratio = positive(x2_margin(&far, p, t.x2)).map(|m| t.x2 / m);
    let eve_far_ratio = positive(x2_margin(&eve, p, t.eve_far)).map(|m| t.eve_far / m);
    let varsigma = near_ratio(&near, p).ok();
    let varsigma_ideal = ideal_near_ratio(p).ok();

    let mut delta = [None; 13];
    delta[0] = far_ratio.map(|r| l2 / (m_far * r * far.backscatter_power()));
    delta[1] = varsigma.map(|s| l1 / (m_near * s * near.backscatter_power()));
    delta[2] = varsigma_ideal.map(|s| l1 / (m_near * s * p.beta * p.beta));
    let tag_margin = positive(near.q_coeff - near.a_coeff * t.c);
    delta[3] = tag_margin.map(|m| l1 * near.residual() * t.c / (m_near * m));
    delta[4] = delta[1];
    delta[5] = tag_margin.map(|m| near.d_coeff * t.c / (m * p.snr));
    delta[8] = eve_far_ratio.map(|r| l3 / (m_eve * r * eve.backscatter_power()));
    delta[9] = positive(x1_margin(eve.xi, &eve, p, t.eve_near))
        .map(|m| l3 * m / (m_eve * eve.backscatter_power() * t.eve_near));
    let eve_tag_margin = positive(eve.q_coeff - eve.a_coeff * t.eve_bd);
    delta[10] = eve_tag_margin.map(|m| eve.d_coeff * t.eve_bd / (m_eve * m * p.snr));
    delta[11] = eve_tag_margin.map(|m| l3 * eve.residual() * t.eve_bd / (m_eve * m));
    Ok(AnalyticIntermediates {
        far_ratio,
        eve_far_ratio,
        varsigma,
        varsigma_ideal,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iqi::{IqiProfile, MismatchParams};
    use approx::assert_relative_eq;

    fn iqi(eps: f64, deg: f64) -> IqiProfile {
        IqiProfile::uniform(MismatchParams::from_degrees(eps, deg).unwrap())
    }

    #[test]
    fn default_intermediates() {
        let p = SystemParams::default();
        let i = intermediates(&p).unwrap();
        assert_relative_eq!(i.far_ratio.unwrap(), 1.25, max_relative = 1e-14);
        assert_relative_eq!(i.delta[0].unwrap(), 100.0, max_relative = 1e-12);
        // max{1/(0.9 − 0.1), 2/0.1}
        assert_relative_eq!(i.varsigma_ideal.unwrap(), 20.0, max_relative = 1e-14);
        assert_relative_eq!(i.varsigma.unwrap(), 20.0, max_relative = 1e-14);
        assert_relative_eq!(i.delta[2].unwrap(), 100.0, max_relative = 1e-12);
    }

    #[test]
    fn infeasible_far_threshold_is_certain_outage() {
        let mut p = SystemParams::default();
        p.thresholds.x2 = 0.9 / 0.1; // ξa2/C
        let v = op_far(&p, &AnalyticOptions::default()).unwrap();
        assert_eq!(v.probability, 1.0);
        assert_eq!(v.feasibility.reason, Some(InfeasibleReason::FarX2Ceiling));
        assert_eq!(op_far_asymptotic(&p).unwrap().probability, 1.0);
    }

    #[test]
    fn infeasible_near_x1_under_imbalance() {
        let mut p = SystemParams::default().with_iqi(iqi(1.05, 20.0));
        let c = p.composites(Receiver::Near);
        p.thresholds.x1 = c.xi * p.a1 / (p.a2() * c.b_coeff + c.m_coeff) * 1.0001;
        let v = op_near(&p, &AnalyticOptions::default()).unwrap();
        assert_eq!(v.probability, 1.0);
        assert_eq!(v.feasibility.reason, Some(InfeasibleReason::NearX1Ceiling));
    }

    #[test]
    fn infeasible_tag_ceiling() {
        let mut p = SystemParams::default().with_iqi(iqi(1.1, 5.0));
        let c = p.composites(Receiver::Near);
        p.thresholds.c = c.q_coeff / c.a_coeff;
        let v = op_bd_nonideal(&p, &AnalyticOptions::default()).unwrap();
        assert_eq!(v.probability, 1.0);
        assert_eq!(v.feasibility.reason, Some(InfeasibleReason::TagCeiling));
    }

    #[test]
    fn infeasible_intercepts_are_zero() {
        let mut p = SystemParams::default();
        p.thresholds.eve_far = 1e3;
        p.thresholds.eve_near = 1e3;
        let o = AnalyticOptions::default();
        assert_eq!(ip_far(&p, &o).unwrap().probability, 0.0);
        assert_eq!(
            ip_far(&p, &o).unwrap().feasibility.reason,
            Some(InfeasibleReason::EveX2Ceiling)
        );
        // x1 has no ceiling without imbalance, only a vanishing probability.
        assert!(ip_near(&p, &o).unwrap().probability < 1e-30);
        let mut q = SystemParams::default().with_iqi(iqi(1.1, 5.0));
        let c = q.composites(Receiver::Eve);
        q.thresholds.eve_bd = c.q_coeff / c.a_coeff * 1.01;
        let v = ip_bd(&q, Branch::NonIdeal, &o).unwrap();
        assert_eq!(v.probability, 0.0);
        assert_eq!(v.feasibility.reason, Some(InfeasibleReason::EveTagCeiling));
    }

    #[test]
    fn far_outage_converges_to_floor() {
        let p = SystemParams::default().with_snr_db(120.0);
        let o = AnalyticOptions::default();
        let finite = op_far(&p, &o).unwrap().probability;
        let floor = op_far_asymptotic(&p).unwrap().probability;
        assert!((finite - floor).abs() < 1e-9);
        assert_relative_eq!(floor, 0.009_805_771_326_698_16, max_relative = 1e-9);
    }

    #[test]
    fn bd_branches_agree_at_ideal_inputs() {
        let o = AnalyticOptions::default();
        for db in [0.0, 15.0, 30.0] {
            let p = SystemParams::default().with_snr_db(db);
            let a = op_bd_ideal(&p, &o).unwrap().probability;
            let b = op_bd_nonideal(&p, &o).unwrap().probability;
            assert!((a - b).abs() < 1e-9, "{db} dB: {a} vs {b}");
        }
        let p = SystemParams::default();
        let a = op_bd_asymptotic(&p, Branch::Ideal).unwrap().probability;
        let b = op_bd_asymptotic(&p, Branch::NonIdeal).unwrap().probability;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn vanishing_beta_kills_the_tag() {
        let o = AnalyticOptions::default();
        let p = SystemParams::default().with_beta(1e-4).with_snr_db(20.0);
        assert!(op_bd_ideal(&p, &o).unwrap().probability > 1.0 - 1e-6);
        assert!(ip_bd(&p, Branch::Ideal, &o).unwrap().probability < 1e-6);
    }

    #[test]
    fn diversity_estimator_sanity() {
        assert_eq!(diversity_order(|_| Ok(0.3), 10.0, 20.0).unwrap(), 0.0);
        let d = diversity_order(|g| Ok(1.0 / g), 10.0, 20.0).unwrap();
        assert_relative_eq!(d, 1.0, max_relative = 1e-12);
        assert!(diversity_order(|_| Ok(0.3), 20.0, 10.0).is_err());
    }

    #[test]
    fn out_of_range_is_reported() {
        assert!(finish("x", 1.0 + 1e-6, None).is_err());
        assert!(finish("x", -1e-6, None).is_err());
        assert_eq!(finish("x", -1e-12, None).unwrap().probability, 0.0);
    }
}
