//! Independent pricing oracle: the discounted expected payoff under
//! lognormal terminal dynamics, integrated numerically over the standard
//! normal density. Uses only `exp`; no normal CDF or erfc.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    Call,
    Put,
}

/// Composite Simpson over `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

/// `e^{-rT} E[payoff(S_T)]`, `S_T = S0·exp((r − σ²/2)T + σ√T·Z)`.
///
/// The payoff kink sits at `z* = (ln(K/S0) − (r − σ²/2)T) / (σ√T)`; each side
/// of it is integrated separately so Simpson sees a smooth integrand.
pub fn discounted_expectation(
    payoff: Payoff,
    spot: f64,
    strike: f64,
    maturity: f64,
    rate: f64,
    vol: f64,
) -> f64 {
    let drift = (rate - 0.5 * vol * vol) * maturity;
    let scale = vol * maturity.sqrt();
    let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let terminal = |z: f64| spot * (drift + scale * z).exp();
    let kink = ((strike / spot).ln() - drift) / scale;

    // The call integrand S0·exp(drift + scale·z)·φ(z) peaks near z = scale,
    // so the upper limit follows it.
    let lower = -12.0f64;
    let upper = 12.0 + scale;
    let n = 20_000;
    let value = match payoff {
        Payoff::Call => {
            let a = kink.clamp(lower, upper);
            simpson(|z| (terminal(z) - strike).max(0.0) * density(z), a, upper, n)
        }
        Payoff::Put => {
            let b = kink.clamp(lower, upper);
            simpson(|z| (strike - terminal(z)).max(0.0) * density(z), lower, b, n)
        }
    };
    (-rate * maturity).exp() * value
}
