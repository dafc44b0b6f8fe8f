//! Independent oracles shared by the integration tests.
//!
//! Both are trapezoid sums of integral representations whose
//! integrands are smooth and decay at both ends of the real line, where the
//! trapezoid rule converges geometrically:
//!
//! * `K0(x) = ∫_0^∞ e^{-x cosh t} dt`
//! * `E1(x) = ∫_{-∞}^{∞} exp(-x e^{e^v} + v) dv` (from `t = e^{e^v}` in `∫_1^∞ e^{-xt}/t dt`)

#![allow(dead_code)]

pub fn trapezoid(lo: f64, hi: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|k| f(lo + k as f64 * h)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

pub fn k0_oracle(x: f64) -> f64 {
    // Half-line integrand is even in t, so integrate over the whole line and halve.
    let hi = (800.0 / x).acosh().max(1.0);
    0.5 * trapezoid(-hi, hi, 1e-3, |t| (-x * t.cosh()).exp())
}

pub fn k1_oracle(x: f64) -> f64 {
    // K1(x) = ∫_0^∞ e^{-x cosh t} cosh t dt
    let hi = (800.0 / x).acosh().max(1.0);
    0.5 * trapezoid(-hi, hi, 1e-3, |t| (-x * t.cosh()).exp() * t.cosh())
}

pub fn e1_oracle(x: f64) -> f64 {
    // exp(v - x e^{e^v}) is below e^{-45} once v < -45 or x e^{e^v} > 800.
    let hi = (800.0 / x).ln().max(1.0).ln();
    trapezoid(-45.0, hi, 2e-3, |v| (v - x * v.exp().exp()).exp())
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

