//! Futures and option positions on the ROI index and their cash settlement.
//!
//! Futures settle once against the final verified index level:
//! `(final − entry) × quantity × notional_per_point`, positive meaning cash
//! to the long side. There is no daily mark-to-market.
//!
//! Risk controls clamp the effective settlement level relative to the
//! contract's own reference (entry level for futures, strike for options).
//! An aggregate ceiling caps what one issuer pays across a year, scaling
//! every issuer-pays flow pro rata.

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{decimal_from_f64, Money, MoneyError};
use crate::pricing::{intrinsic_value, OptionKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("final ROI must be positive and finite (got {0})")]
    NonPositiveRoi(f64),
    #[error("entry ROI must be positive and finite (got {0})")]
    InvalidEntry(f64),
    #[error("strike must be positive and finite (got {0})")]
    InvalidStrike(f64),
    #[error("notional per point must be positive (got {0})")]
    InvalidNotional(Money),
    #[error("quantity must be nonzero")]
    ZeroQuantity,
    #[error("units must be at least 1")]
    ZeroUnits,
    #[error("unit multiplier must be positive (got {0})")]
    InvalidMultiplier(Money),
    #[error("premium must be non-negative (got {0})")]
    NegativePremium(Money),
    #[error("cap ratio must be greater than 1 (got {0})")]
    InvalidCap(f64),
    #[error("floor ratio must be in (0, 1) (got {0})")]
    InvalidFloor(f64),
    #[error("liability ceiling must be positive (got {0})")]
    InvalidCeiling(Money),
    #[error(transparent)]
    Money(#[from] MoneyError),
}

fn check_roi(roi: f64) -> Result<(), ContractError> {
    if roi.is_finite() && roi > 0.0 {
        Ok(())
    } else {
        Err(ContractError::NonPositiveRoi(roi))
    }
}

fn default_notional() -> Money {
    Money::from_units(1000)
}

fn default_multiplier() -> Money {
    Money::from_units(1)
}

/// A cash-settled futures position on one institution's index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuturesContract {
    pub institution_id: String,
    /// Index level at trade time.
    pub entry_roi: f64,
    #[serde(default = "default_notional")]
    pub notional_per_point: Money,
    /// Positive is long.
    pub quantity: i64,
    pub settlement_date: NaiveDate,
    /// Free-form counterparty label (issuer, speculator, ...). Not used in
    /// settlement math.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
}

impl FuturesContract {
    pub fn validate(&self) -> Result<(), ContractError> {
        if !(self.entry_roi.is_finite() && self.entry_roi > 0.0) {
            return Err(ContractError::InvalidEntry(self.entry_roi));
        }
        if !self.notional_per_point.is_positive() {
            return Err(ContractError::InvalidNotional(self.notional_per_point));
        }
        if self.quantity == 0 {
            return Err(ContractError::ZeroQuantity);
        }
        Ok(())
    }

    /// The same contract from the other side.
    pub fn opposite(&self) -> Self {
        Self { quantity: -self.quantity, ..self.clone() }
    }
}

/// A European option position (always held long by its owner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionContract {
    pub institution_id: String,
    pub kind: OptionKind,
    pub strike: f64,
    pub units: u64,
    #[serde(default = "default_multiplier")]
    pub unit_multiplier: Money,
    #[serde(default)]
    pub premium_paid: Money,
    pub expiry: NaiveDate,
}

impl OptionContract {
    pub fn validate(&self) -> Result<(), ContractError> {
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(ContractError::InvalidStrike(self.strike));
        }
        if self.units == 0 {
            return Err(ContractError::ZeroUnits);
        }
        if !self.unit_multiplier.is_positive() {
            return Err(ContractError::InvalidMultiplier(self.unit_multiplier));
        }
        if self.premium_paid.is_negative() {
            return Err(ContractError::NegativePremium(self.premium_paid));
        }
        Ok(())
    }

    /// Cash per index point of intrinsic value across the whole position.
    pub fn cash_per_point(&self) -> Decimal {
        Decimal::from(self.units) * self.unit_multiplier.to_decimal()
    }
}

/// Contractual limits on settlement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskControls {
    /// Effective settlement level is at most `cap_ratio × reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_ratio: Option<f64>,
    /// Effective settlement level is at least `floor_ratio × reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor_ratio: Option<f64>,
    /// Aggregate annual amount the issuer pays across all contracts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liability_ceiling: Option<Money>,
}

impl RiskControls {
    pub const NONE: RiskControls = RiskControls { cap_ratio: None, floor_ratio: None, liability_ceiling: None };

    pub fn validate(&self) -> Result<(), ContractError> {
        if let Some(cap) = self.cap_ratio {
            if !(cap.is_finite() && cap > 1.0) {
                return Err(ContractError::InvalidCap(cap));
            }
        }
        if let Some(floor) = self.floor_ratio {
            if !(floor.is_finite() && floor > 0.0 && floor < 1.0) {
                return Err(ContractError::InvalidFloor(floor));
            }
        }
        if let Some(ceiling) = self.liability_ceiling {
            if !ceiling.is_positive() {
                return Err(ContractError::InvalidCeiling(ceiling));
            }
        }
        Ok(())
    }

    pub fn with_cap(cap_ratio: f64) -> Self {
        Self { cap_ratio: Some(cap_ratio), ..Self::NONE }
    }

    pub fn with_ceiling(ceiling: Money) -> Self {
        Self { liability_ceiling: Some(ceiling), ..Self::NONE }
    }
}

/// Settlement cash flow with an audit trail of the controls applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettlementResult {
    /// Before any control.
    pub gross: Money,
    /// After the cap/floor (and the ceiling, once aggregated).
    pub capped: Money,
    pub cap_applied: bool,
    #[serde(default)]
    pub floor_applied: bool,
    pub ceiling_applied: bool,
    pub raw_final_roi: f64,
    pub effective_final_roi: f64,
}

/// The clamped level and which side clamped it.
struct Clamp {
    level: Decimal,
    cap_applied: bool,
    floor_applied: bool,
}

fn clamp_level(final_roi: Decimal, reference: Decimal, controls: &RiskControls) -> Result<Clamp, ContractError> {
    let mut level = final_roi;
    let mut cap_applied = false;
    let mut floor_applied = false;
    if let Some(cap) = controls.cap_ratio {
        let ceiling = decimal_from_f64(cap)? * reference;
        if level > ceiling {
            level = ceiling;
            cap_applied = true;
        }
    }
    if let Some(floor) = controls.floor_ratio {
        let bottom = decimal_from_f64(floor)? * reference;
        if level < bottom {
            level = bottom;
            floor_applied = true;
        }
    }
    Ok(Clamp { level, cap_applied, floor_applied })
}

fn decimal_to_f64(d: Decimal) -> f64 {
    d.to_string().parse().expect("decimal renders as a float literal")
}

/// Settles a futures position against the final index level.
///
/// ```
/// use chrono::NaiveDate;
/// use roi_derivatives::contracts::{settle_futures, FuturesContract, RiskControls};
/// use roi_derivatives::money::Money;
///
/// let c = FuturesContract {
///     institution_id: "university-x".into(),
///     entry_roi: 100.0,
///     notional_per_point: Money::from_units(1000),
///     quantity: 50,
///     settlement_date: NaiveDate::from_ymd_opt(2026, 6, 30).unwrap(),
///     holder: None,
/// };
/// let r = settle_futures(&c, 115.0, &RiskControls::NONE).unwrap();
/// assert_eq!(r.gross, Money::from_units(750_000));
/// ```
pub fn settle_futures(
    contract: &FuturesContract,
    final_roi: f64,
    controls: &RiskControls,
) -> Result<SettlementResult, ContractError> {
    check_roi(final_roi)?;
    contract.validate()?;
    controls.validate()?;

    let entry = decimal_from_f64(contract.entry_roi)?;
    let final_level = decimal_from_f64(final_roi)?;
    let per_point = Decimal::from(contract.quantity) * contract.notional_per_point.to_decimal();
    let clamp = clamp_level(final_level, entry, controls)?;

    let gross = Money::from_decimal((final_level - entry) * per_point)?;
    let capped = Money::from_decimal((clamp.level - entry) * per_point)?;
    Ok(SettlementResult {
        gross,
        capped,
        cap_applied: clamp.cap_applied,
        floor_applied: clamp.floor_applied,
        ceiling_applied: false,
        raw_final_roi: final_roi,
        effective_final_roi: decimal_to_f64(clamp.level),
    })
}

/// Gross payoff and net P&L of an option position at expiry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionSettlement {
    pub gross_payoff: Money,
    pub net_pnl: Money,
}

pub fn settle_option(contract: &OptionContract, final_roi: f64) -> Result<OptionSettlement, ContractError> {
    let result = settle_option_controlled(contract, final_roi, &RiskControls::NONE)?;
    Ok(OptionSettlement { gross_payoff: result.gross, net_pnl: result.gross - contract.premium_paid })
}

/// Option payoff with caps applied relative to the strike: a call's
/// effective level is at most `cap_ratio × strike`, a put's at least
/// `floor_ratio × strike`. The amounts are gross payoffs (issuer pays),
/// not net of premium.
pub fn settle_option_controlled(
    contract: &OptionContract,
    final_roi: f64,
    controls: &RiskControls,
) -> Result<SettlementResult, ContractError> {
    check_roi(final_roi)?;
    contract.validate()?;
    controls.validate()?;

    let strike = decimal_from_f64(contract.strike)?;
    let final_level = decimal_from_f64(final_roi)?;
    let relevant = match contract.kind {
        OptionKind::Call => RiskControls { floor_ratio: None, ..*controls },
        OptionKind::Put => RiskControls { cap_ratio: None, ..*controls },
    };
    let clamp = clamp_level(final_level, strike, &relevant)?;
    let payoff = |level: Decimal| -> Result<Money, ContractError> {
        let points = match contract.kind {
            OptionKind::Call => (level - strike).max(Decimal::ZERO),
            OptionKind::Put => (strike - level).max(Decimal::ZERO),
        };
        Ok(Money::from_decimal(points * contract.cash_per_point())?)
    };
    let gross = payoff(final_level)?;
    let capped = payoff(clamp.level)?;
    debug_assert_eq!(
        gross.is_positive(),
        intrinsic_value(final_roi, contract.strike, contract.kind) > 0.0
    );
    Ok(SettlementResult {
        gross,
        capped,
        cap_applied: clamp.cap_applied,
        floor_applied: clamp.floor_applied,
        ceiling_applied: false,
        raw_final_roi: final_roi,
        effective_final_roi: decimal_to_f64(clamp.level),
    })
}

/// Issuer totals before and after the aggregate ceiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiabilityAggregate {
    /// Sum of issuer-pays (positive) settlements.
    pub total: Money,
    /// `min(total, ceiling)`.
    pub clipped: Money,
    pub ceiling_applied: bool,
    /// Settlements after pro-rata scaling, in input order.
    pub settlements: Vec<SettlementResult>,
}

/// Applies the aggregate liability ceiling across one issuer's settlements.
///
/// Positive amounts are scaled by `clipped / total`; the rounding residue is
/// distributed by largest remainder so the scaled amounts sum to `clipped`
/// exactly. Negative (issuer-receives) amounts pass through unchanged.
pub fn aggregate_issuer_liability(
    settlements: &[SettlementResult],
    controls: &RiskControls,
) -> Result<LiabilityAggregate, ContractError> {
    controls.validate()?;
    let total: Money = settlements.iter().map(|s| s.capped).filter(|m| m.is_positive()).sum();
    let ceiling = controls.liability_ceiling.filter(|c| *c < total);
    let Some(ceiling) = ceiling else {
        return Ok(LiabilityAggregate {
            total,
            clipped: total,
            ceiling_applied: false,
            settlements: settlements.to_vec(),
        });
    };

    let total_c = i128::from(total.cents());
    let ceiling_c = i128::from(ceiling.cents());
    // (index, floor share, remainder numerator)
    let mut shares: Vec<(usize, i128, i128)> = settlements
        .iter()
        .enumerate()
        .filter(|(_, s)| s.capped.is_positive())
        .map(|(i, s)| {
            let scaled = i128::from(s.capped.cents()) * ceiling_c;
            (i, scaled / total_c, scaled % total_c)
        })
        .collect();
    let allocated: i128 = shares.iter().map(|s| s.1).sum();
    let mut residue = ceiling_c - allocated;
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| shares[b].2.cmp(&shares[a].2).then(shares[a].0.cmp(&shares[b].0)));
    for k in order {
        if residue == 0 {
            break;
        }
        shares[k].1 += 1;
        residue -= 1;
    }

    let mut out = settlements.to_vec();
    for (i, cents, _) in shares {
        let cents = i64::try_from(cents).expect("scaled share is below its original amount");
        out[i].capped = Money::from_cents(cents);
        out[i].ceiling_applied = true;
    }
    Ok(LiabilityAggregate { total, clipped: ceiling, ceiling_applied: true, settlements: out })
}
