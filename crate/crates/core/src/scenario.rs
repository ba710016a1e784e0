//! End-to-end scenario runs: futures issuance, put hedges and reserve fund
//! projections, each producing a report with a per-party cash-flow ledger.
//!
//! Every report's cash flows net to zero across parties, and each party's
//! flows sum exactly to its final P&L.
//!
//! Issuance proceeds are a modeling assumption, not market data:
//! `quantity × notional_per_point × entry_roi × issue_price_factor`, where a
//! factor above 1 means investors paid above face.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::{
    aggregate_issuer_liability, settle_futures, settle_option, ContractError, FuturesContract, OptionContract,
    RiskControls, SettlementResult,
};
use crate::money::{decimal_from_f64, Money, MoneyError};
use crate::pricing::{put_price, OptionKind, PricingError, PricingInputs};
use crate::series::{Observation, Period, RoiSeries, SeriesError};
use crate::vol::{annualized_vol, annualized_vol_of, VolError};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("ROI path: {0}")]
    Path(#[from] SeriesError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error("volatility: {0}")]
    Vol(#[from] VolError),
    #[error(transparent)]
    Money(#[from] MoneyError),
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::InvalidConfig(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPoint {
    pub date: NaiveDate,
    pub roi: f64,
}

fn default_notional() -> Money {
    Money::from_units(1000)
}

fn default_factor() -> Decimal {
    Decimal::ONE
}

fn default_ppy() -> f64 {
    1.0
}

fn default_multiplier() -> Money {
    Money::from_units(1)
}

/// Futures sold by the institution to investors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuanceParams {
    pub quantity: i64,
    #[serde(default = "default_notional")]
    pub notional_per_point: Money,
    /// Issue price as a multiple of face (`entry_roi × notional`).
    #[serde(default = "default_factor")]
    pub issue_price_factor: Decimal,
    /// Defaults to the first ROI path point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_roi: Option<f64>,
    #[serde(default = "default_ppy")]
    pub periods_per_year: f64,
}

/// Puts bought by the institution against an index decline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeParams {
    pub strike: f64,
    pub units: u64,
    #[serde(default = "default_multiplier")]
    pub unit_multiplier: Money,
    /// Total premium. When absent the put is priced by Black–Scholes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premium: Option<Money>,
    pub maturity_years: f64,
    pub rate: f64,
    /// When absent, estimated from `vol_history`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vol: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vol_history: Vec<f64>,
    #[serde(default = "default_ppy")]
    pub periods_per_year: f64,
    /// Budget shortfall per index point below the reference level.
    pub shortfall_per_point: Money,
    /// Defaults to the strike.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortfall_reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_coverage: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compounding {
    #[default]
    Annual,
    Continuous,
}

/// Outstanding futures the reserve is meant to cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exposure {
    /// Defaults to the first ROI path point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_roi: Option<f64>,
    pub quantity: i64,
    #[serde(default = "default_notional")]
    pub notional_per_point: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReserveParams {
    pub proceeds: Money,
    pub reserve_fraction: f64,
    pub rate: f64,
    pub horizon_years: u32,
    #[serde(default)]
    pub compounding: Compounding,
    pub exposure: Exposure,
    /// Worst-case index level assumed for the liability.
    pub max_roi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    Issuance(IssuanceParams),
    /// Issuance over a multi-period path, with per-point exposure.
    Momentum(IssuanceParams),
    HedgePut(HedgeParams),
    ReserveProjection(ReserveParams),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Issuance(_) => "issuance",
            ScenarioKind::Momentum(_) => "momentum",
            ScenarioKind::HedgePut(_) => "hedge_put",
            ScenarioKind::ReserveProjection(_) => "reserve_projection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub format_version: u32,
    pub name: String,
    pub institution_id: String,
    pub roi_path: Vec<PathPoint>,
    #[serde(default)]
    pub controls: RiskControls,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

impl FromStr for ScenarioConfig {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cfg: ScenarioConfig = serde_json::from_str(s).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cfg.format_version != REPORT_FORMAT_VERSION {
            return Err(invalid(format!("unsupported format_version {}", cfg.format_version)));
        }
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    fn path_series(&self) -> Result<RoiSeries, ScenarioError> {
        let obs = self
            .roi_path
            .iter()
            .map(|p| Observation { period: Period::Date(p.date), roi: p.roi })
            .collect();
        Ok(RoiSeries::new(self.institution_id.clone(), obs)?)
    }

    fn endpoints(&self, min_points: usize) -> Result<(PathPoint, PathPoint), ScenarioError> {
        self.path_series()?;
        if self.roi_path.len() < min_points {
            return Err(invalid(format!(
                "roi_path needs at least {min_points} points, got {}",
                self.roi_path.len()
            )));
        }
        Ok((self.roi_path[0], *self.roi_path.last().expect("non-empty path")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Institution,
    Investor,
    ReserveFund,
}

impl Party {
    pub fn as_str(&self) -> &'static str {
        match self {
            Party::Institution => "institution",
            Party::Investor => "investor",
            Party::ReserveFund => "reserve_fund",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CashFlow {
    pub date: NaiveDate,
    pub party: Party,
    pub label: String,
    pub amount: Money,
}

/// Which contractual limits changed the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlsAudit {
    pub cap_applied: bool,
    pub floor_applied: bool,
    pub ceiling_applied: bool,
    pub raw_final_roi: f64,
    pub effective_final_roi: f64,
}

impl From<&SettlementResult> for ControlsAudit {
    fn from(s: &SettlementResult) -> Self {
        Self {
            cap_applied: s.cap_applied,
            floor_applied: s.floor_applied,
            ceiling_applied: s.ceiling_applied,
            raw_final_roi: s.raw_final_roi,
            effective_final_roi: s.effective_final_roi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRow {
    pub date: NaiveDate,
    pub roi: f64,
    /// What the institution would owe if the contracts settled here.
    pub issuer_pays: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssuanceSummary {
    pub entry_roi: f64,
    pub final_roi: f64,
    pub quantity: i64,
    pub notional_per_point: Money,
    pub issue_price_factor: Decimal,
    pub proceeds: Money,
    /// Settlement owed to investors before the aggregate ceiling.
    pub settlement: Money,
    /// What the institution actually pays (negative: receives).
    pub issuer_pays: Money,
    pub institution_net: Money,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exposure: Vec<ExposureRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_vol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeSummary {
    pub spot: f64,
    pub strike: f64,
    pub final_roi: f64,
    pub vol: f64,
    pub vol_estimated: bool,
    /// Black–Scholes value per index-point unit, when priced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_price: Option<f64>,
    pub premium: Money,
    pub payout: Money,
    pub shortfall: Money,
    /// `shortfall − payout + premium`.
    pub net_shortfall: Money,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_met: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveRow {
    pub year: u32,
    pub balance: Money,
    pub worst_case_liability: Money,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveSummary {
    pub initial_reserve: Money,
    pub compounding: Compounding,
    pub rows: Vec<ReserveRow>,
    pub uncovered_liability: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    Issuance(IssuanceSummary),
    HedgePut(HedgeSummary),
    ReserveProjection(ReserveSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub format_version: u32,
    pub scenario: String,
    pub kind: String,
    pub institution_id: String,
    pub cash_flows: Vec<CashFlow>,
    pub final_pnl: BTreeMap<Party, Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<ControlsAudit>,
    pub summary: Summary,
    pub narrative: Vec<String>,
}

impl ScenarioReport {
    fn new(cfg: &ScenarioConfig, cash_flows: Vec<CashFlow>, summary: Summary, narrative: Vec<String>) -> Self {
        let mut final_pnl = BTreeMap::new();
        for flow in &cash_flows {
            *final_pnl.entry(flow.party).or_insert(Money::ZERO) += flow.amount;
        }
        Self {
            format_version: REPORT_FORMAT_VERSION,
            scenario: cfg.name.clone(),
            kind: cfg.kind.name().to_string(),
            institution_id: cfg.institution_id.clone(),
            cash_flows,
            final_pnl,
            controls: None,
            summary,
            narrative,
        }
    }

    /// Each party's flows sum to its P&L and all flows net to zero.
    pub fn is_conserved(&self) -> bool {
        let mut sums: BTreeMap<Party, Money> = BTreeMap::new();
        for flow in &self.cash_flows {
            *sums.entry(flow.party).or_insert(Money::ZERO) += flow.amount;
        }
        let net: Money = self.cash_flows.iter().map(|f| f.amount).sum();
        sums == self.final_pnl && net == Money::ZERO
    }

    pub fn pnl(&self, party: Party) -> Money {
        self.final_pnl.get(&party).copied().unwrap_or(Money::ZERO)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Cash-flow ledger as CSV: `date,party,label,amount`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "party", "label", "amount"])?;
        for flow in &self.cash_flows {
            w.write_record([
                flow.date.to_string(),
                flow.party.as_str().to_string(),
                flow.label.clone(),
                flow.amount.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable report.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario   {} ({})", self.scenario, self.kind);
        let _ = writeln!(out, "institution {}", self.institution_id);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<12} {:<13} {:<34} {:>20}", "date", "party", "label", "amount");
        for f in &self.cash_flows {
            let _ = writeln!(out, "{:<12} {:<13} {:<34} {:>20}", f.date.to_string(), f.party.as_str(), f.label, f.amount.signed());
        }
        let _ = writeln!(out);
        for (party, pnl) in &self.final_pnl {
            let _ = writeln!(out, "net {:<24} {:>20}", party.as_str(), pnl.signed());
        }
        if let Some(c) = &self.controls {
            let _ = writeln!(
                out,
                "controls   cap_applied={} floor_applied={} ceiling_applied={} final_roi={:.4} effective_roi={:.4}",
                c.cap_applied, c.floor_applied, c.ceiling_applied, c.raw_final_roi, c.effective_final_roi
            );
        }
        match &self.summary {
            Summary::Issuance(s) if !s.exposure.is_empty() => {
                let _ = writeln!(out);
                let _ = writeln!(out, "{:<12} {:>10} {:>20}", "date", "roi", "issuer_pays");
                for row in &s.exposure {
                    let _ = writeln!(out, "{:<12} {:>10.4} {:>20}", row.date.to_string(), row.roi, row.issuer_pays.signed());
                }
                if let Some(v) = s.path_vol {
                    let _ = writeln!(out, "path sigma {v:.6}");
                }
            }
            Summary::ReserveProjection(s) => {
                let _ = writeln!(out);
                let _ = writeln!(out, "{:<6} {:>20} {:>20} {:>8}", "year", "reserve", "worst_case", "covered");
                for row in &s.rows {
                    let _ = writeln!(
                        out,
                        "{:<6} {:>20} {:>20} {:>8}",
                        row.year,
                        row.balance.grouped(),
                        row.worst_case_liability.grouped(),
                        if row.covered { "yes" } else { "no" }
                    );
                }
            }
            _ => {}
        }
        let _ = writeln!(out);
        for line in &self.narrative {
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

/// Dispatches on the scenario kind.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    match &cfg.kind {
        ScenarioKind::Issuance(_) | ScenarioKind::Momentum(_) => run_issuance(cfg),
        ScenarioKind::HedgePut(_) => run_hedge_put(cfg),
        ScenarioKind::ReserveProjection(_) => project_reserve(cfg),
    }
}

fn flow(date: NaiveDate, party: Party, label: &str, amount: Money) -> CashFlow {
    CashFlow { date, party, label: label.to_string(), amount }
}

/// Institution issues futures at the first path point and settles them at
/// the last.
pub fn run_issuance(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let (params, momentum) = match &cfg.kind {
        ScenarioKind::Issuance(p) => (p, false),
        ScenarioKind::Momentum(p) => (p, true),
        other => return Err(invalid(format!("run_issuance called with a {} scenario", other.name()))),
    };
    let (issue, settle) = cfg.endpoints(2)?;
    if params.quantity <= 0 {
        return Err(invalid("issuance quantity must be positive"));
    }
    if params.issue_price_factor <= Decimal::ZERO {
        return Err(invalid("issue_price_factor must be positive"));
    }
    let entry_roi = params.entry_roi.unwrap_or(issue.roi);
    let contract = FuturesContract {
        institution_id: cfg.institution_id.clone(),
        entry_roi,
        notional_per_point: params.notional_per_point,
        quantity: params.quantity,
        settlement_date: settle.date,
        holder: Some("investors".to_string()),
    };
    contract.validate()?;

    let face = Decimal::from(params.quantity) * params.notional_per_point.to_decimal() * decimal_from_f64(entry_roi)?;
    let proceeds = Money::from_decimal(face * params.issue_price_factor)?;

    let raw = settle_futures(&contract, settle.roi, &cfg.controls)?;
    let aggregate = aggregate_issuer_liability(&[raw], &cfg.controls)?;
    let settled = aggregate.settlements[0];
    let issuer_pays = settled.capped;

    let cash_flows = vec![
        flow(issue.date, Party::Institution, "issuance proceeds", proceeds),
        flow(issue.date, Party::Investor, "issuance purchase", -proceeds),
        flow(settle.date, Party::Institution, "futures settlement", -issuer_pays),
        flow(settle.date, Party::Investor, "futures settlement", issuer_pays),
    ];

    let exposure = if momentum {
        cfg.roi_path
            .iter()
            .map(|p| {
                let s = settle_futures(&contract, p.roi, &cfg.controls)?;
                let s = aggregate_issuer_liability(&[s], &cfg.controls)?.settlements[0];
                Ok(ExposureRow { date: p.date, roi: p.roi, issuer_pays: s.capped })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?
    } else {
        Vec::new()
    };
    let path_vol = if momentum && cfg.roi_path.len() >= 3 {
        Some(annualized_vol(&cfg.path_series()?, params.periods_per_year)?)
    } else {
        None
    };

    let mut narrative = vec![
        format!(
            "{} sells {} futures at ROI {:.4} ({} per point, issue price factor {}), raising {}.",
            cfg.institution_id,
            params.quantity,
            entry_roi,
            params.notional_per_point.grouped(),
            params.issue_price_factor.normalize(),
            proceeds.grouped()
        ),
        format!(
            "ROI settles at {:.4}: gross settlement {} to investors, {} after controls.",
            settle.roi,
            raw.gross.signed(),
            issuer_pays.signed()
        ),
    ];
    if raw.cap_applied {
        narrative.push(format!("Cap applied: effective settlement ROI {:.4}.", raw.effective_final_roi));
    }
    if aggregate.ceiling_applied {
        narrative.push(format!("Liability ceiling applied: payment clipped to {}.", aggregate.clipped.grouped()));
    }
    let institution_net = proceeds - issuer_pays;
    narrative.push(format!("Institution net: {}.", institution_net.signed()));

    let summary = Summary::Issuance(IssuanceSummary {
        entry_roi,
        final_roi: settle.roi,
        quantity: params.quantity,
        notional_per_point: params.notional_per_point,
        issue_price_factor: params.issue_price_factor,
        proceeds,
        settlement: raw.capped,
        issuer_pays,
        institution_net,
        exposure,
        path_vol,
    });
    let mut report = ScenarioReport::new(cfg, cash_flows, summary, narrative);
    report.controls = Some(ControlsAudit::from(&settled));
    Ok(report)
}

/// Institution buys puts at the first path point; they expire at the last.
pub fn run_hedge_put(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let ScenarioKind::HedgePut(params) = &cfg.kind else {
        return Err(invalid(format!("run_hedge_put called with a {} scenario", cfg.kind.name())));
    };
    let (start, expiry) = cfg.endpoints(2)?;

    let (vol, vol_estimated) = match params.vol {
        Some(v) => (v, false),
        None if !params.vol_history.is_empty() => (annualized_vol_of(&params.vol_history, params.periods_per_year)?, true),
        None => return Err(invalid("hedge_put needs either vol or vol_history")),
    };

    let mut contract = OptionContract {
        institution_id: cfg.institution_id.clone(),
        kind: OptionKind::Put,
        strike: params.strike,
        units: params.units,
        unit_multiplier: params.unit_multiplier,
        premium_paid: Money::ZERO,
        expiry: expiry.date,
    };
    contract.validate()?;

    let (premium, unit_price) = match params.premium {
        Some(p) => (p, None),
        None => {
            let inputs = PricingInputs::new(start.roi, params.strike, params.maturity_years, params.rate, vol)?;
            let unit = put_price(&inputs).price;
            let total = Money::from_decimal(decimal_from_f64(unit)? * contract.cash_per_point())?;
            (total, Some(unit))
        }
    };
    contract.premium_paid = premium;
    contract.validate()?;

    let settled = settle_option(&contract, expiry.roi)?;
    let payout = settled.gross_payoff;

    let reference = params.shortfall_reference.unwrap_or(params.strike);
    if !(reference.is_finite() && reference > 0.0) {
        return Err(invalid("shortfall_reference must be positive"));
    }
    let points_below = (decimal_from_f64(reference)? - decimal_from_f64(expiry.roi)?).max(Decimal::ZERO);
    let shortfall = Money::from_decimal(points_below * params.shortfall_per_point.to_decimal())?;
    let coverage_ratio = if shortfall.is_positive() {
        Some(payout.cents() as f64 / shortfall.cents() as f64)
    } else {
        None
    };
    let coverage_met = params.min_coverage.map(|min| coverage_ratio.is_none_or(|r| r >= min));
    let net_shortfall = shortfall - payout + premium;

    let cash_flows = vec![
        flow(start.date, Party::Institution, "put premium", -premium),
        flow(start.date, Party::Investor, "put premium", premium),
        flow(expiry.date, Party::Institution, "put payout", payout),
        flow(expiry.date, Party::Investor, "put payout", -payout),
    ];

    let mut narrative = vec![
        format!(
            "{} buys {} puts struck at {:.4} (multiplier {}) with ROI at {:.4}, sigma {:.6}{}.",
            cfg.institution_id,
            params.units,
            params.strike,
            params.unit_multiplier.grouped(),
            start.roi,
            vol,
            if vol_estimated { " (estimated)" } else { "" }
        ),
        format!("Premium paid: {}.", premium.grouped()),
        format!("ROI ends at {:.4}: put payout {}.", expiry.roi, payout.grouped()),
        format!("Budget shortfall {}; shortfall net of payout and premium {}.", shortfall.grouped(), net_shortfall.grouped()),
    ];
    if let Some(r) = coverage_ratio {
        narrative.push(format!("Coverage ratio {r:.4}."));
    }
    if let Some(met) = coverage_met {
        narrative.push(format!("Coverage target {}.", if met { "met" } else { "not met" }));
    }

    let summary = Summary::HedgePut(HedgeSummary {
        spot: start.roi,
        strike: params.strike,
        final_roi: expiry.roi,
        vol,
        vol_estimated,
        unit_price,
        premium,
        payout,
        shortfall,
        net_shortfall,
        coverage_ratio,
        coverage_met,
    });
    Ok(ScenarioReport::new(cfg, cash_flows, summary, narrative))
}

/// Reserve balance per year against a worst-case futures liability.
pub fn project_reserve(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let ScenarioKind::ReserveProjection(params) = &cfg.kind else {
        return Err(invalid(format!("project_reserve called with a {} scenario", cfg.kind.name())));
    };
    let (start, _) = cfg.endpoints(1)?;
    if !params.proceeds.is_positive() {
        return Err(invalid("proceeds must be positive"));
    }
    if !(0.0..=1.0).contains(&params.reserve_fraction) {
        return Err(invalid("reserve_fraction must be in [0, 1]"));
    }
    if params.horizon_years < 1 {
        return Err(invalid("horizon_years must be at least 1"));
    }
    if !(params.rate.is_finite() && params.rate > -1.0) {
        return Err(invalid("rate must be finite and above -100%"));
    }

    let initial = Money::from_decimal(decimal_from_f64(params.reserve_fraction)? * params.proceeds.to_decimal())?;

    let contract = FuturesContract {
        institution_id: cfg.institution_id.clone(),
        entry_roi: params.exposure.entry_roi.unwrap_or(start.roi),
        notional_per_point: params.exposure.notional_per_point,
        quantity: params.exposure.quantity,
        settlement_date: start.date,
        holder: Some("investors".to_string()),
    };
    let worst = settle_futures(&contract, params.max_roi, &cfg.controls)?;
    let worst = aggregate_issuer_liability(&[worst], &cfg.controls)?.settlements[0];
    let liability = worst.capped.max(Money::ZERO);

    let growth = decimal_from_f64(1.0 + params.rate)?;
    let mut rows = Vec::with_capacity(params.horizon_years as usize + 1);
    let mut compounded = initial.to_decimal();
    for year in 0..=params.horizon_years {
        let balance = match params.compounding {
            Compounding::Annual => {
                if year > 0 {
                    compounded *= growth;
                }
                Money::from_decimal(compounded)?
            }
            Compounding::Continuous => Money::from_f64(initial.to_f64() * (params.rate * f64::from(year)).exp())?,
        };
        rows.push(ReserveRow { year, balance, worst_case_liability: liability, covered: balance >= liability });
    }
    let uncovered = !rows.last().expect("horizon has rows").covered;

    let cash_flows = vec![
        flow(start.date, Party::Institution, "reserve allocation", -initial),
        flow(start.date, Party::ReserveFund, "reserve allocation", initial),
    ];
    let last = rows.last().expect("horizon has rows");
    let mut narrative = vec![
        format!(
            "{} sets aside {} of {} proceeds ({:.2}%) at {:.4}% {}.",
            cfg.institution_id,
            initial.grouped(),
            params.proceeds.grouped(),
            params.reserve_fraction * 100.0,
            params.rate * 100.0,
            match params.compounding {
                Compounding::Annual => "compounded annually",
                Compounding::Continuous => "compounded continuously",
            }
        ),
        format!(
            "Worst case at ROI {:.4}: liability {}; reserve after {} years {}.",
            params.max_roi,
            liability.grouped(),
            params.horizon_years,
            last.balance.grouped()
        ),
    ];
    if uncovered {
        narrative.push(format!(
            "Uncovered liability: {} short at the horizon.",
            (liability - last.balance).grouped()
        ));
    }

    let summary = Summary::ReserveProjection(ReserveSummary {
        initial_reserve: initial,
        compounding: params.compounding,
        rows,
        uncovered_liability: uncovered,
    });
    let mut report = ScenarioReport::new(cfg, cash_flows, summary, narrative);
    report.controls = Some(ControlsAudit::from(&worst));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn path(points: &[f64]) -> Vec<PathPoint> {
        points.iter().zip(2025..).map(|(&roi, y)| PathPoint { date: d(y, 6, 30), roi }).collect()
    }

    fn issuance(points: &[f64], quantity: i64, controls: RiskControls) -> ScenarioConfig {
        ScenarioConfig {
            format_version: 1,
            name: "test".into(),
            institution_id: "u".into(),
            roi_path: path(points),
            controls,
            kind: ScenarioKind::Issuance(IssuanceParams {
                quantity,
                notional_per_point: Money::from_units(1000),
                issue_price_factor: Decimal::ONE,
                entry_roi: None,
                periods_per_year: 1.0,
            }),
        }
    }

    fn reserve(fraction: f64, rate: f64) -> ScenarioConfig {
        ScenarioConfig {
            format_version: 1,
            name: "reserve".into(),
            institution_id: "u".into(),
            roi_path: path(&[100.0]),
            controls: RiskControls::NONE,
            kind: ScenarioKind::ReserveProjection(ReserveParams {
                proceeds: Money::from_units(10_000_000),
                reserve_fraction: fraction,
                rate,
                horizon_years: 3,
                compounding: Compounding::Annual,
                exposure: Exposure { entry_roi: None, quantity: 100, notional_per_point: Money::from_units(1000) },
                max_roi: 150.0,
            }),
        }
    }

    #[test]
    fn flat_issuance_keeps_proceeds() {
        let report = run_issuance(&issuance(&[100.0, 100.0], 1000, RiskControls::NONE)).unwrap();
        let Summary::Issuance(s) = &report.summary else { panic!() };
        assert_eq!(s.proceeds, Money::from_units(100_000_000));
        assert_eq!(s.issuer_pays, Money::ZERO);
        assert_eq!(s.institution_net, s.proceeds);
        assert!(report.is_conserved());
    }

    #[test]
    fn capped_issuance() {
        let report = run_issuance(&issuance(&[100.0, 130.0], 10, RiskControls::with_cap(1.2))).unwrap();
        let Summary::Issuance(s) = &report.summary else { panic!() };
        assert_eq!(s.issuer_pays, Money::from_units(200_000));
        let c = report.controls.unwrap();
        assert!(c.cap_applied);
        assert_eq!(c.effective_final_roi, 120.0);
        assert_eq!(report.pnl(Party::Investor), Money::from_units(200_000) - s.proceeds);
    }

    #[test]
    fn ceiling_clips_issuance() {
        let controls = RiskControls::with_ceiling(Money::from_units(250_000));
        let report = run_issuance(&issuance(&[100.0, 130.0], 10, controls)).unwrap();
        let Summary::Issuance(s) = &report.summary else { panic!() };
        assert_eq!(s.settlement, Money::from_units(300_000));
        assert_eq!(s.issuer_pays, Money::from_units(250_000));
        assert!(report.controls.unwrap().ceiling_applied);
        assert!(report.is_conserved());
    }

    #[test]
    fn issuance_rejects_bad_configs() {
        assert!(run_issuance(&issuance(&[100.0], 10, RiskControls::NONE)).is_err());
        assert!(run_issuance(&issuance(&[100.0, 101.0], 0, RiskControls::NONE)).is_err());
        assert!(run_issuance(&issuance(&[100.0, -1.0], 5, RiskControls::NONE)).is_err());
        assert!(run_hedge_put(&issuance(&[100.0, 101.0], 5, RiskControls::NONE)).is_err());
    }

    #[test]
    fn reserve_examples() {
        let report = project_reserve(&reserve(1.0, 0.03)).unwrap();
        let Summary::ReserveProjection(s) = &report.summary else { panic!() };
        assert_eq!(s.rows[3].balance, Money::from_units(10_927_270));
        assert_eq!(s.rows[0].balance, Money::from_units(10_000_000));

        let flat = project_reserve(&reserve(0.4, 0.0)).unwrap();
        let Summary::ReserveProjection(s) = &flat.summary else { panic!() };
        assert!(s.rows.iter().all(|r| r.balance == Money::from_units(4_000_000)));

        let none = project_reserve(&reserve(0.0, 0.03)).unwrap();
        let Summary::ReserveProjection(s) = &none.summary else { panic!() };
        assert!(s.rows.iter().all(|r| r.balance == Money::ZERO));
        assert!(s.uncovered_liability);
        assert!(none.narrative.iter().any(|l| l.starts_with("Uncovered liability")));

        assert!(project_reserve(&reserve(1.5, 0.03)).is_err());
    }

    #[test]
    fn reserve_monotone_in_inputs() {
        let balance = |fraction: f64, rate: f64| {
            let r = project_reserve(&reserve(fraction, rate)).unwrap();
            let Summary::ReserveProjection(s) = r.summary else { panic!() };
            s.rows.last().unwrap().balance
        };
        let mut prev = Money::ZERO;
        for i in 0..=10 {
            let b = balance(i as f64 / 10.0, 0.02);
            assert!(b >= prev);
            prev = b;
        }
        let mut prev = Money::ZERO;
        for i in 0..=10 {
            let b = balance(0.5, i as f64 / 100.0);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn csv_ledger() {
        let report = run_issuance(&issuance(&[100.0, 115.0], 50, RiskControls::NONE)).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("date,party,label,amount"));
        assert!(text.contains("2026-06-30,investor,futures settlement,750000.00"));
    }
}
