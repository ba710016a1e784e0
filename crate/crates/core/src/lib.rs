//! Derivatives on a composite Research Output Index.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`roi_index`] | component normalization, weights and the composite index |
//! | [`series`] | timestamped ROI observations |
//! | [`vol`] | historical volatility from log returns |
//! | [`pricing`] | Black–Scholes calls and puts on the index |
//! | [`contracts`] | futures/option settlement, caps, floors and liability ceilings |
//! | [`scenario`] | issuance, hedging and reserve-fund scenario runs |
//! | [`store`] | file formats and the append-only ROI history |
//! | [`money`] | exact cash amounts in cents |
//!
//! ```
//! use roi_derivatives::pricing::{call_price, put_price, PricingInputs};
//!
//! let inputs = PricingInputs::new(100.0, 110.0, 3.0, 0.03, 0.18).unwrap();
//! let call = call_price(&inputs).price;
//! let put = put_price(&inputs).price;
//! let parity = call - put - inputs.spot() + inputs.discounted_strike();
//! assert!(parity.abs() < 1e-9);
//! ```

pub mod contracts;
pub mod money;
pub mod pricing;
pub mod roi_index;
pub mod scenario;
pub mod series;
pub mod store;
pub mod vol;

// Compile and run the guide's snippets as doc-tests.
macro_rules! book_chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[cfg(doctest)]
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        )*
    };
}

book_chapters! {
    book_introduction => "introduction.md",
    book_index => "index.md",
    book_volatility => "volatility.md",
    book_pricing => "pricing.md",
    book_settlement => "settlement.md",
    book_scenarios => "scenarios.md",
    book_formats => "formats.md",
    book_cli => "cli.md",
}
