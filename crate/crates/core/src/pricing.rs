//! European options on the ROI index, priced with Black–Scholes.
//!
//! The index level plays the role of the underlying:
//!
//! ```text
//! d1 = [ln(S0/K) + (r + σ²/2)·T] / (σ·√T)
//! d2 = d1 − σ·√T
//! C  = S0·N(d1) − K·e^(−rT)·N(d2)
//! P  = K·e^(−rT)·N(−d2) − S0·N(−d1)
//! ```
//!
//! Discounting is continuous. The index pays no carry, so there is no
//! dividend-yield term. Non-positive volatility or maturity is an error;
//! expiry values go through [`intrinsic_value`].

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("spot must be positive and finite (got {0})")]
    InvalidSpot(f64),
    #[error("strike must be positive and finite (got {0})")]
    InvalidStrike(f64),
    #[error("maturity must be positive and finite (got {0})")]
    InvalidMaturity(f64),
    #[error("volatility must be positive and finite (got {0})")]
    InvalidVol(f64),
    #[error("rate must be finite (got {0})")]
    InvalidRate(f64),
    #[error("normal CDF argument is not finite ({0})")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

/// Standard normal CDF, `Φ(x) = ½·erfc(−x/√2)`.
///
/// Errors on NaN or infinite input. Absolute error is at the level of the
/// underlying erfc (well under 1e-15 near the centre).
pub fn std_normal_cdf(x: f64) -> Result<f64, PricingError> {
    if !x.is_finite() {
        return Err(PricingError::NonFinite(x));
    }
    Ok(norm_cdf(x))
}

pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Validated pricing inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PricingInputs {
    spot: f64,
    strike: f64,
    maturity: f64,
    rate: f64,
    vol: f64,
}

impl PricingInputs {
    pub fn new(spot: f64, strike: f64, maturity: f64, rate: f64, vol: f64) -> Result<Self, PricingError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(spot) {
            return Err(PricingError::InvalidSpot(spot));
        }
        if !positive(strike) {
            return Err(PricingError::InvalidStrike(strike));
        }
        if !positive(maturity) {
            return Err(PricingError::InvalidMaturity(maturity));
        }
        if !rate.is_finite() {
            return Err(PricingError::InvalidRate(rate));
        }
        if !positive(vol) {
            return Err(PricingError::InvalidVol(vol));
        }
        Ok(Self { spot, strike, maturity, rate, vol })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }
    pub fn strike(&self) -> f64 {
        self.strike
    }
    pub fn maturity(&self) -> f64 {
        self.maturity
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn vol(&self) -> f64 {
        self.vol
    }

    /// `K·e^(−rT)`.
    pub fn discounted_strike(&self) -> f64 {
        self.strike * (-self.rate * self.maturity).exp()
    }
}

/// `d1`, `d2`, their CDF values and the option price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PricingOutputs {
    pub d1: f64,
    pub d2: f64,
    pub nd1: f64,
    pub nd2: f64,
    pub price: f64,
}

pub fn compute_d1_d2(inputs: &PricingInputs) -> (f64, f64) {
    let vol_sqrt_t = inputs.vol * inputs.maturity.sqrt();
    let d1 = ((inputs.spot / inputs.strike).ln()
        + (inputs.rate + 0.5 * inputs.vol * inputs.vol) * inputs.maturity)
        / vol_sqrt_t;
    (d1, d1 - vol_sqrt_t)
}

/// European call value.
///
/// ```
/// use roi_derivatives::pricing::{call_price, PricingInputs};
///
/// let inputs = PricingInputs::new(100.0, 110.0, 3.0, 0.03, 0.18).unwrap();
/// let out = call_price(&inputs);
/// assert!((out.price - 12.1561).abs() < 1e-4);
/// assert!((out.nd1 - 0.5552).abs() < 1e-4);
/// ```
pub fn call_price(inputs: &PricingInputs) -> PricingOutputs {
    let (d1, d2) = compute_d1_d2(inputs);
    let (nd1, nd2) = (norm_cdf(d1), norm_cdf(d2));
    let price = inputs.spot * nd1 - inputs.discounted_strike() * nd2;
    PricingOutputs { d1, d2, nd1, nd2, price: price.max(0.0) }
}

/// European put value. `nd1`/`nd2` still report `N(d1)`/`N(d2)`; the price
/// uses `N(−d1)`/`N(−d2)` evaluated directly rather than as `1 − N(d)`.
pub fn put_price(inputs: &PricingInputs) -> PricingOutputs {
    let (d1, d2) = compute_d1_d2(inputs);
    let price = inputs.discounted_strike() * norm_cdf(-d2) - inputs.spot * norm_cdf(-d1);
    PricingOutputs { d1, d2, nd1: norm_cdf(d1), nd2: norm_cdf(d2), price: price.max(0.0) }
}

pub fn price(kind: OptionKind, inputs: &PricingInputs) -> PricingOutputs {
    match kind {
        OptionKind::Call => call_price(inputs),
        OptionKind::Put => put_price(inputs),
    }
}

/// Payoff at expiry per index point.
pub fn intrinsic_value(spot: f64, strike: f64, kind: OptionKind) -> f64 {
    match kind {
        OptionKind::Call => (spot - strike).max(0.0),
        OptionKind::Put => (strike - spot).max(0.0),
    }
}

/// How a pricing walkthrough is rounded for display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableConvention {
    /// d1, d2 and N(·) to 6 decimals; price rounded half-up to cents.
    #[default]
    Full,
    /// Printed-table precision: d1, d2 and N(·) to 4 decimals, price
    /// truncated to cents, the way hand calculations from a 4-digit normal
    /// table are usually reported.
    PaperTables,
}

/// A priced option with its intermediate quantities, ready for display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walkthrough {
    pub kind: OptionKind,
    pub inputs: PricingInputs,
    pub outputs: PricingOutputs,
}

impl Walkthrough {
    pub fn new(kind: OptionKind, inputs: PricingInputs) -> Self {
        Self { kind, inputs, outputs: price(kind, &inputs) }
    }

    /// Price as displayed under `convention`, in cents-rounded text.
    pub fn display_price(&self, convention: TableConvention) -> String {
        let price = crate::money::decimal_from_f64(self.outputs.price)
            .expect("option prices are finite");
        let money = match convention {
            TableConvention::Full => crate::money::Money::from_decimal(price),
            TableConvention::PaperTables => crate::money::Money::from_decimal_truncated(price),
        };
        money.map(|m| m.to_string()).unwrap_or_else(|_| format!("{:.2}", self.outputs.price))
    }

    /// One quantity per line, matching a by-hand calculation.
    pub fn render(&self, convention: TableConvention) -> String {
        let places = match convention {
            TableConvention::Full => 6,
            TableConvention::PaperTables => 4,
        };
        let o = &self.outputs;
        let i = &self.inputs;
        let mut out = String::new();
        out.push_str(&format!(
            "{} S0={} K={} T={} r={} sigma={}\n",
            self.kind, i.spot, i.strike, i.maturity, i.rate, i.vol
        ));
        out.push_str(&format!("d1     = {:.*}\n", places, o.d1));
        out.push_str(&format!("d2     = {:.*}\n", places, o.d2));
        out.push_str(&format!("N(d1)  = {:.*}\n", places, o.nd1));
        out.push_str(&format!("N(d2)  = {:.*}\n", places, o.nd2));
        out.push_str(&format!("price  = {}\n", self.display_price(convention)));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format_version": 1,
            "kind": self.kind,
            "inputs": self.inputs,
            "d1": self.outputs.d1,
            "d2": self.outputs.d2,
            "nd1": self.outputs.nd1,
            "nd2": self.outputs.nd2,
            "price": self.outputs.price,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked() -> PricingInputs {
        PricingInputs::new(100.0, 110.0, 3.0, 0.03, 0.18).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_cdf(0.13885).unwrap() - 0.5552).abs() < 1e-4);
        // A 4-digit table gives 0.4315 here; the function value is 0.431362.
        assert!((std_normal_cdf(-0.1729).unwrap() - 0.431362).abs() < 1e-5);
        assert!(matches!(std_normal_cdf(f64::NAN), Err(PricingError::NonFinite(_))));
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_reference_values() {
        // scipy.stats.norm.cdf
        let table = [
            (-6.0, 9.865876450376982e-10),
            (-3.0, 0.0013498980316300946),
            (-1.0, 0.15865525393145707),
            (0.5, 0.6914624612740131),
            (1.959963984540054, 0.975),
            (2.5, 0.9937903346742238),
            (4.0, 0.9999683287581669),
        ];
        for (x, expected) in table {
            let got = std_normal_cdf(x).unwrap();
            assert!((got - expected).abs() < 1e-14, "Φ({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn d1_d2_examples() {
        let (d1, d2) = compute_d1_d2(&worked());
        assert!((d1 - 0.1389).abs() < 5e-4 && (d2 - -0.1729).abs() < 5e-4);
        assert!((d1 - 0.13885216301746403).abs() < 1e-12);

        let (d1, d2) = compute_d1_d2(&PricingInputs::new(100.0, 100.0, 1.0, 0.0, 0.2).unwrap());
        assert!((d1 - 0.1).abs() < 1e-15 && (d2 + 0.1).abs() < 1e-15);

        let (d1, d2) = compute_d1_d2(&PricingInputs::new(110.0, 100.0, 1.0, 0.05, 0.25).unwrap());
        assert!((d1 - 0.70624).abs() < 1e-5 && (d2 - 0.45624).abs() < 1e-5);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(PricingInputs::new(100.0, 110.0, 3.0, 0.03, 0.0), Err(PricingError::InvalidVol(0.0)));
        assert_eq!(
            PricingInputs::new(100.0, 110.0, 0.0, 0.03, 0.2),
            Err(PricingError::InvalidMaturity(0.0))
        );
        assert!(matches!(PricingInputs::new(-1.0, 1.0, 1.0, 0.0, 0.2), Err(PricingError::InvalidSpot(_))));
        assert!(matches!(PricingInputs::new(1.0, 0.0, 1.0, 0.0, 0.2), Err(PricingError::InvalidStrike(_))));
        assert!(matches!(
            PricingInputs::new(1.0, 1.0, 1.0, f64::NAN, 0.2),
            Err(PricingError::InvalidRate(_))
        ));
    }

    #[test]
    fn worked_example_prices() {
        let c = call_price(&worked());
        let p = put_price(&worked());
        assert!((c.price - 12.156148924049795).abs() < 1e-10);
        assert!((p.price - 12.688579303884914).abs() < 1e-10);
        assert!((c.d2 - (c.d1 - 0.18 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn far_out_of_the_money() {
        let c = call_price(&PricingInputs::new(100.0, 1e9, 3.0, 0.03, 0.18).unwrap());
        assert!(c.price < 1e-3);
        let p = put_price(&PricingInputs::new(1e9, 100.0, 3.0, 0.03, 0.18).unwrap());
        assert!(p.price < 1e-3);
    }

    #[test]
    fn intrinsic_examples() {
        assert_eq!(intrinsic_value(125.0, 110.0, OptionKind::Call), 15.0);
        assert_eq!(intrinsic_value(108.0, 110.0, OptionKind::Call), 0.0);
        assert_eq!(intrinsic_value(100.0, 100.0, OptionKind::Put), 0.0);
        assert_eq!(intrinsic_value(92.0, 100.0, OptionKind::Put), 8.0);
    }

    #[test]
    fn walkthrough_rendering() {
        let call = Walkthrough::new(OptionKind::Call, worked());
        assert_eq!(call.display_price(TableConvention::Full), "12.16");
        assert_eq!(call.display_price(TableConvention::PaperTables), "12.15");
        let put = Walkthrough::new(OptionKind::Put, worked());
        assert_eq!(put.display_price(TableConvention::Full), "12.69");
        assert_eq!(put.display_price(TableConvention::PaperTables), "12.68");
        let text = call.render(TableConvention::PaperTables);
        assert!(text.contains("d1     = 0.1389"));
        assert!(text.contains("N(d1)  = 0.5552"));
    }

    fn inputs_strategy() -> impl Strategy<Value = PricingInputs> {
        (10.0f64..500.0, 10.0f64..500.0, 0.1f64..10.0, 0.0f64..0.10, 0.01f64..1.0)
            .prop_map(|(s, k, t, r, v)| PricingInputs::new(s, k, t, r, v).unwrap())
    }

    proptest! {
        #[test]
        fn prices_within_no_arbitrage_bounds(i in inputs_strategy()) {
            let c = call_price(&i).price;
            let p = put_price(&i).price;
            let df_k = i.discounted_strike();
            let tol = 1e-9;
            prop_assert!(c >= (i.spot() - df_k).max(0.0) - tol && c <= i.spot() + tol);
            prop_assert!(p >= (df_k - i.spot()).max(0.0) - tol && p <= df_k + tol);
        }

        #[test]
        fn call_monotone(i in inputs_strategy(), bump in 1.0001f64..1.5) {
            let base = call_price(&i).price;
            let up = |s: f64, k: f64, t: f64, v: f64| {
                call_price(&PricingInputs::new(s, k, t, i.rate(), v).unwrap()).price
            };
            let tol = 1e-10;
            prop_assert!(up(i.spot() * bump, i.strike(), i.maturity(), i.vol()) >= base - tol);
            prop_assert!(up(i.spot(), i.strike(), i.maturity(), i.vol() * bump) >= base - tol);
            prop_assert!(up(i.spot(), i.strike(), i.maturity() * bump, i.vol()) >= base - tol);
            prop_assert!(up(i.spot(), i.strike() * bump, i.maturity(), i.vol()) <= base + tol);
        }

        #[test]
        fn put_monotone(i in inputs_strategy(), bump in 1.0001f64..1.5) {
            let base = put_price(&i).price;
            let at = |s: f64, k: f64| put_price(&PricingInputs::new(s, k, i.maturity(), i.rate(), i.vol()).unwrap()).price;
            prop_assert!(at(i.spot() * bump, i.strike()) <= base + 1e-10);
            prop_assert!(at(i.spot(), i.strike() * bump) >= base - 1e-10);
        }

        #[test]
        fn cdf_symmetry(x in -8.0f64..8.0) {
            let a = std_normal_cdf(x).unwrap();
            let b = std_normal_cdf(-x).unwrap();
            prop_assert!((a - (1.0 - b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn cdf_monotone_on_dense_grid() {
        let mut prev = 0.0;
        for i in -80_000..=80_000 {
            let v = std_normal_cdf(i as f64 * 1e-4).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
