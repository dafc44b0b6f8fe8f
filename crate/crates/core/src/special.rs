//! Special functions and Chebyshev-node quadrature used by the closed forms.
//!
//! Only the branches the outage and intercept expressions need are covered:
//! the exponential integral on the negative axis, `K0`/`K1` on the positive
//! axis, and cosine-spaced quadrature on finite intervals.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

/// `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`, and `e^x E1(x)` when `scaled`.
fn exp_integral_e1(x: f64, scaled: bool) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        // -γ - ln x - Σ (-x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            term *= -x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < EPS * sum.abs() {
                break;
            }
        }
        let e1 = -EULER_GAMMA - x.ln() - sum;
        if scaled {
            e1 * x.exp()
        } else {
            e1
        }
    } else {
        // Modified Lentz evaluation of the continued fraction for e^x E1(x).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        if scaled {
            h
        } else {
            h * (-x).exp()
        }
    }
}

/// Exponential integral `Ei(x) = ∫_{-∞}^x e^t/t dt` for `x < 0`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain {
            function: "exp_integral_ei",
            value: x,
            expected: "x < 0",
        });
    }
    if x == f64::NEG_INFINITY {
        return Ok(-0.0);
    }
    Ok(-exp_integral_e1(-x, false))
}

/// `δ·e^δ·Ei(-δ)` for `δ > 0`, without forming `e^δ`.
///
/// The value lies in `(-1, 0)`: it tends to 0 as `δ → 0` and to `-1` as
/// `δ → ∞`.
pub fn scaled_ei_product(delta: f64) -> Result<f64> {
    if !(delta > 0.0) || delta.is_nan() {
        return Err(Error::Domain {
            function: "scaled_ei_product",
            value: delta,
            expected: "delta > 0",
        });
    }
    if delta.is_infinite() {
        return Ok(-1.0);
    }
    Ok(-delta * exp_integral_e1(delta, true))
}

fn bessel_k_small(x: f64) -> (f64, f64) {
    // Power series around 0; used for 0 < x <= 2.
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    let mut i0 = 1.0;
    let mut k0_sum = 0.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        k0_sum += term * harmonic;
        if term * harmonic < EPS * k0_sum {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;

    // K1 = 1/x + ln(x/2) I1(x) - (x/4) Σ [ψ(k+1) + ψ(k+2)] y^k / (k!(k+1)!)
    let mut i1 = 0.0;
    let mut psi_sum = 0.0;
    let mut t = 1.0; // y^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    for k in 0..MAX_ITER {
        let kf = k as f64;
        if k > 0 {
            t *= y / (kf * (kf + 1.0));
            psi_k1 += 1.0 / kf;
        }
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i1 += t;
        let contrib = (psi_k1 + psi_k2) * t;
        psi_sum += contrib;
        if k > 2 && contrib.abs() < EPS * psi_sum.abs() && t < EPS * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * psi_sum;
    (k0, k1)
}

fn bessel_k_large(x: f64) -> (f64, f64) {
    // Steed/Temme continued fraction for K_0 and K_1, valid for x >= 2.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn bessel_k01(x: f64, function: &'static str) -> Result<(f64, f64)> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain {
            function,
            value: x,
            expected: "x > 0",
        });
    }
    if x.is_infinite() {
        return Ok((0.0, 0.0));
    }
    Ok(if x <= 2.0 {
        bessel_k_small(x)
    } else {
        bessel_k_large(x)
    })
}

/// Modified Bessel function of the second kind, order 0.
pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k01(x, "bessel_k0").map(|(k0, _)| k0)
}

/// Modified Bessel function of the second kind, order 1.
pub fn bessel_k1(x: f64) -> Result<f64> {
    bessel_k01(x, "bessel_k1").map(|(_, k1)| k1)
}

/// Cosine-spaced nodes `ϑ_k = cos((2k−1)π/(2N))`, `k = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevNodes {
    nodes: Vec<f64>,
}

impl ChebyshevNodes {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nodes
    }
}

pub fn chebyshev_nodes(n: usize) -> Result<ChebyshevNodes> {
    if n == 0 {
        return Err(Error::Domain {
            function: "chebyshev_nodes",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let nf = n as f64;
    let nodes = (1..=n)
        .map(|k| ((2 * k - 1) as f64 * PI / (2.0 * nf)).cos())
        .collect();
    Ok(ChebyshevNodes { nodes })
}

/// How a finite integral is mapped onto the Chebyshev nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureKind {
    /// `∫_a^b f ≈ (π(b−a)/2N) Σ f(a + (b−a)(ϑ_k+1)/2) √(1−ϑ_k²)`.
    ///
    /// Second-order accurate; the integrand is not required to vanish at
    /// the endpoints.
    Plain,
    /// Same nodes, but the interval is traversed through the polynomial map
    /// `x = a + (b−a)·ψ(ϑ)` whose Jacobian carries `(1−ϑ²)^{5/2}`. The
    /// composite integrand then vanishes to high order at both ends, which
    /// restores fast convergence for integrands with logarithmic endpoint
    /// singularities such as `K0(2√x)`.
    #[default]
    Smoothed,
}

/// Chebyshev-node quadrature rule on finite intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevRule {
    nodes: ChebyshevNodes,
    kind: QuadratureKind,
    // (abscissa fraction in [0,1], weight) pairs for the unit interval.
    points: Vec<(f64, f64)>,
}

impl ChebyshevRule {
    pub fn new(n: usize, kind: QuadratureKind) -> Result<Self> {
        let nodes = chebyshev_nodes(n)?;
        let scale = PI / n as f64;
        let points = nodes
            .as_slice()
            .iter()
            .map(|&t| {
                let s2 = (1.0 - t * t).max(0.0);
                match kind {
                    QuadratureKind::Plain => (0.5 * (t + 1.0), 0.5 * scale * s2.sqrt()),
                    QuadratureKind::Smoothed => {
                        // ψ(θ) = (15/16)∫_0^θ sin⁵ normalised to [0, 1], in ϑ = cos θ.
                        let t3 = t * t * t;
                        let t5 = t3 * t * t;
                        let frac = 15.0 / 16.0
                            * ((1.0 - t) - (2.0 / 3.0) * (1.0 - t3) + 0.2 * (1.0 - t5));
                        let jac = 15.0 / 16.0 * s2 * s2 * s2.sqrt();
                        (frac, scale * jac)
                    }
                }
            })
            .collect();
        Ok(ChebyshevRule {
            nodes,
            kind,
            points,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn nodes(&self) -> &ChebyshevNodes {
        &self.nodes
    }

    /// Approximates `∫_a^b f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let width = b - a;
        if width == 0.0 {
            return 0.0;
        }
        width
            * self
                .points
                .iter()
                .map(|&(frac, w)| {
                    if w == 0.0 {
                        0.0
                    } else {
                        w * f(a + width * frac)
                    }
                })
                .sum::<f64>()
    }
}

/// The plain Gauss–Chebyshev estimate of `∫_a^b f` on `n` nodes.
pub fn gauss_chebyshev<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, f: F) -> Result<f64> {
    Ok(ChebyshevRule::new(n, QuadratureKind::Plain)?.integrate(a, b, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ei_reference_points() {
        // Values from adaptive quadrature of ∫_{|x|}^∞ e^{-t}/t dt.
        assert_relative_eq!(
            exp_integral_ei(-1.0).unwrap(),
            -0.219_383_934_395_520_27,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            exp_integral_ei(-0.5).unwrap(),
            -0.559_773_594_776_160_8,
            max_relative = 1e-12
        );
        let far = exp_integral_ei(-50.0).unwrap();
        assert!(far < 0.0 && far.abs() < 1e-20);
    }

    #[test]
    fn ei_domain() {
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(1.0).is_err());
        assert!(exp_integral_ei(f64::NAN).is_err());
    }

    #[test]
    fn scaled_product_reference_points() {
        assert_relative_eq!(
            scaled_ei_product(1.0).unwrap(),
            -0.596_347_362_323_194_1,
            max_relative = 1e-12
        );
        // Asymptotic series of x e^x E1(x) = 1 - 1/x + 2/x² - 6/x³ + ...
        assert_relative_eq!(
            scaled_ei_product(100.0).unwrap(),
            -0.990_194_228_673_301_8,
            max_relative = 1e-12
        );
        let huge = scaled_ei_product(1e6).unwrap();
        assert!(huge.is_finite() && huge > -1.0 && huge < 0.0);
        assert!(scaled_ei_product(0.0).is_err());
        assert!(scaled_ei_product(-1.0).is_err());
    }

    #[test]
    fn scaled_product_vanishes_at_zero() {
        let mut prev = scaled_ei_product(1e-6).unwrap();
        assert!(prev.abs() < 1e-4);
        for k in 7..15 {
            let v = scaled_ei_product(10f64.powi(-k)).unwrap();
            assert!(v.abs() < prev.abs());
            prev = v;
        }
    }

    #[test]
    fn k0_reference_points() {
        assert_relative_eq!(bessel_k0(1.0).unwrap(), 0.421_024_438_240_708_3, max_relative = 1e-12);
        assert_relative_eq!(bessel_k0(0.1).unwrap(), 2.427_069_024_702_016_6, max_relative = 1e-12);
        assert!(bessel_k0(50.0).unwrap() < 1e-20);
        assert!(bessel_k0(0.0).is_err());
    }

    #[test]
    fn k1_reference_points() {
        // mpmath besselk(1, x)
        assert_relative_eq!(bessel_k1(1.0).unwrap(), 0.601_907_230_197_234_6, max_relative = 1e-12);
        assert_relative_eq!(bessel_k1(2.0).unwrap(), 0.139_865_881_816_522_4, max_relative = 1e-12);
        assert_relative_eq!(bessel_k1(5.0).unwrap(), 0.004_044_613_445_452_164, max_relative = 1e-12);
    }

    #[test]
    fn k0_continuous_across_branch_split() {
        let below = bessel_k_small(2.0);
        let above = bessel_k_large(2.0);
        assert_relative_eq!(below.0, above.0, max_relative = 1e-13);
        assert_relative_eq!(below.1, above.1, max_relative = 1e-13);
    }

    #[test]
    fn nodes_small_cases() {
        assert!(chebyshev_nodes(0).is_err());
        let one = chebyshev_nodes(1).unwrap();
        assert!(one.as_slice()[0].abs() < 1e-16);
        let two = chebyshev_nodes(2).unwrap();
        assert_relative_eq!(two.as_slice()[0], std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(two.as_slice()[1], -std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        let four = chebyshev_nodes(4).unwrap();
        assert!(four.as_slice().iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn nodes_are_symmetric() {
        let n = 37;
        let nodes = chebyshev_nodes(n).unwrap();
        let v = nodes.as_slice();
        for k in 0..n {
            assert!((v[k] + v[n - 1 - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn plain_rule_convergence_is_second_order() {
        let exact = 1.0 - (-1.0f64).exp();
        let e50 = (gauss_chebyshev(50, 0.0, 1.0, |y| (-y).exp()).unwrap() - exact).abs();
        let e200 = (gauss_chebyshev(200, 0.0, 1.0, |y| (-y).exp()).unwrap() - exact).abs();
        let e1000 = (gauss_chebyshev(1000, 0.0, 1.0, |y| (-y).exp()).unwrap() - exact).abs();
        assert!(e200 < 1e-5);
        assert!(e1000 < 1e-6);
        let ratio = e50 / e200;
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn smoothed_rule_is_spectral_on_smooth_integrands() {
        let rule = ChebyshevRule::new(50, QuadratureKind::Smoothed).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((rule.integrate(0.0, 1.0, |y| (-y).exp()) - exact).abs() < 1e-9);
        let rule = ChebyshevRule::new(200, QuadratureKind::Smoothed).unwrap();
        assert!((rule.integrate(0.0, 1.0, |y| (-y).exp()) - exact).abs() < 1e-13);
    }

    #[test]
    fn zero_width_interval() {
        let rule = ChebyshevRule::new(10, QuadratureKind::Smoothed).unwrap();
        assert_eq!(rule.integrate(2.0, 2.0, |_| 1.0), 0.0);
    }
}
