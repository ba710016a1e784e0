//! Exact cash amounts in integer minor units (cents).
//!
//! Index levels are real-valued, but every settlement figure ends up here.
//! Conversions from decimal products round half away from zero exactly once,
//! at the final figure.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("amount {0} is not a finite decimal number")]
    NotANumber(String),
    #[error("amount {0} does not fit in the cent range")]
    Overflow(String),
}

/// A signed cash amount, stored as whole cents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    /// Whole currency units, e.g. `Money::from_units(1000)` is 1,000.00.
    pub const fn from_units(units: i64) -> Self {
        Money(units * 100)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    /// Rounds a decimal amount in currency units half away from zero.
    pub fn from_decimal(amount: Decimal) -> Result<Self, MoneyError> {
        let cents = (amount * Decimal::ONE_HUNDRED)
            .round_dp_with_strategy(0, RoundingStrategy::MidpointAwayFromZero);
        cents
            .to_i64()
            .map(Money)
            .ok_or_else(|| MoneyError::Overflow(amount.to_string()))
    }

    /// Truncates toward zero instead of rounding.
    pub fn from_decimal_truncated(amount: Decimal) -> Result<Self, MoneyError> {
        let cents = (amount * Decimal::ONE_HUNDRED).trunc();
        cents
            .to_i64()
            .map(Money)
            .ok_or_else(|| MoneyError::Overflow(amount.to_string()))
    }

    pub fn from_f64(amount: f64) -> Result<Self, MoneyError> {
        Self::from_decimal(decimal_from_f64(amount)?)
    }

    pub fn to_decimal(self) -> Decimal {
        Decimal::new(self.0, 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn checked_add(self, other: Money) -> Option<Money> {
        self.0.checked_add(other.0).map(Money)
    }

    /// `1,234.56` / `-1,234.56`.
    pub fn grouped(self) -> String {
        group_cents(self.0, false)
    }

    /// Like [`Money::grouped`] but with an explicit `+` on positive amounts.
    pub fn signed(self) -> String {
        group_cents(self.0, true)
    }
}

fn group_cents(cents: i64, plus: bool) -> String {
    let magnitude = cents.unsigned_abs();
    let units = (magnitude / 100).to_string();
    let frac = magnitude % 100;
    let mut grouped = String::with_capacity(units.len() + units.len() / 3 + 4);
    for (i, ch) in units.chars().enumerate() {
        if i > 0 && (units.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    let sign = if cents < 0 {
        "-"
    } else if plus && cents > 0 {
        "+"
    } else {
        ""
    };
    format!("{sign}{grouped}.{frac:02}")
}

/// Converts an f64 through its shortest round-trip decimal rendering, so
/// `0.03` becomes exactly `0.03` rather than its binary expansion.
pub fn decimal_from_f64(value: f64) -> Result<Decimal, MoneyError> {
    if !value.is_finite() {
        return Err(MoneyError::NotANumber(value.to_string()));
    }
    let text = value.to_string();
    Decimal::from_str(&text).map_err(|_| MoneyError::Overflow(text))
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let magnitude = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", magnitude / 100, magnitude % 100)
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s.trim().chars().filter(|c| *c != ',' && *c != '_').collect();
        let amount = Decimal::from_str(&cleaned).map_err(|_| MoneyError::NotANumber(s.to_string()))?;
        if amount.scale() > 2 && amount != amount.round_dp(2) {
            return Err(MoneyError::NotANumber(format!("{s} (more than two decimal places)")));
        }
        Self::from_decimal(amount)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

// Serialized as a decimal string ("12150.00"); integers and plain JSON
// numbers are accepted on input.
impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MoneyVisitor;

        impl Visitor<'_> for MoneyVisitor {
            type Value = Money;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal currency amount")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Money, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Money, E> {
                Money::from_decimal(Decimal::from(v)).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Money, E> {
                Money::from_decimal(Decimal::from(v)).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Money, E> {
                let amount = decimal_from_f64(v).map_err(E::custom)?;
                if amount != amount.round_dp(2) {
                    return Err(E::custom(format!("{v} has more than two decimal places")));
                }
                Money::from_decimal(amount).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(MoneyVisitor)
    }
}
