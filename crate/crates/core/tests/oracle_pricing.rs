//! Black–Scholes prices against the quadrature oracle.

mod common;

use common::oracle::{discounted_expectation, Payoff};
use roi_derivatives::pricing::{call_price, put_price, PricingInputs};

// (spot, strike, maturity, rate, vol, call, put). Oracle output, matching
// scipy.stats.norm closed forms to 1e-11.
const FROZEN: [(f64, f64, f64, f64, f64, f64, f64); 5] = [
    (100.0, 110.0, 3.0, 0.03, 0.18, 12.156148924050, 12.688579303885),
    (110.0, 100.0, 1.0, 0.05, 0.25, 19.305091529311, 4.428033979383),
    (50.0, 60.0, 0.5, -0.01, 0.4, 2.351153279402, 12.651904530966),
    (300.0, 150.0, 10.0, 0.1, 1.0, 286.697009599000, 41.878925774718),
    (20.0, 480.0, 0.1, 0.0, 0.01, 0.0, 460.0),
];

#[test]
fn oracle_reproduces_frozen_values() {
    for (s, k, t, r, v, call, put) in FROZEN {
        assert!((discounted_expectation(Payoff::Call, s, k, t, r, v) - call).abs() < 1e-8);
        assert!((discounted_expectation(Payoff::Put, s, k, t, r, v) - put).abs() < 1e-8);
    }
}

#[test]
fn closed_form_matches_frozen_values() {
    for (s, k, t, r, v, call, put) in FROZEN {
        let i = PricingInputs::new(s, k, t, r, v).unwrap();
        assert!((call_price(&i).price - call).abs() < 1e-8, "call {s} {k} {t} {r} {v}");
        assert!((put_price(&i).price - put).abs() < 1e-8, "put {s} {k} {t} {r} {v}");
    }
}

#[test]
fn closed_form_matches_oracle_on_random_grid() {
    for (s, k, t, r, v) in common::pricing_grid(200, 7) {
        let i = PricingInputs::new(s, k, t, r, v).unwrap();
        let c = discounted_expectation(Payoff::Call, s, k, t, r, v);
        let p = discounted_expectation(Payoff::Put, s, k, t, r, v);
        assert!((call_price(&i).price - c).abs() < 1e-4, "call {s} {k} {t} {r} {v}");
        assert!((put_price(&i).price - p).abs() < 1e-4, "put {s} {k} {t} {r} {v}");
    }
}
