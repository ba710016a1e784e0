//! `roidx`: index construction, option pricing, settlement and scenario
//! replay from the command line.
//!
//! Exit codes: 0 success, 1 domain or validation error, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use roi_derivatives::contracts::{
    aggregate_issuer_liability, settle_futures, settle_option, settle_option_controlled, RiskControls,
    SettlementResult,
};
use roi_derivatives::money::Money;
use roi_derivatives::pricing::{OptionKind, PricingInputs, TableConvention, Walkthrough};
use roi_derivatives::roi_index::compute_roi;
use roi_derivatives::scenario::{run_scenario, ScenarioConfig};
use roi_derivatives::series::RoiSeries;
use roi_derivatives::store::{self, load_contract, load_metrics, load_weights, Contract, Store};
use roi_derivatives::vol::annualized_vol;

#[derive(Parser)]
#[command(name = "roidx", version, about = "Research Output Index derivatives toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Composite index construction.
    Roi {
        #[command(subcommand)]
        command: RoiCommand,
    },
    /// Black–Scholes price of a European call or put on the index.
    Price(PriceArgs),
    /// Cash settlement of a futures or option contract document.
    Settle {
        #[command(subcommand)]
        command: SettleCommand,
    },
    /// Historical volatility.
    Vol {
        #[command(subcommand)]
        command: VolCommand,
    },
    /// Run a scenario config and print its report.
    Scenario(ScenarioArgs),
}

#[derive(Subcommand)]
enum RoiCommand {
    /// Compute the index for every record in a metrics file.
    Compute {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Append each computed ROI to this store.
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Call,
    Put,
}

impl From<Kind> for OptionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Call => OptionKind::Call,
            Kind::Put => OptionKind::Put,
        }
    }
}

#[derive(Args)]
struct PriceArgs {
    kind: Kind,
    #[arg(long, allow_negative_numbers = true)]
    spot: f64,
    #[arg(long, allow_negative_numbers = true)]
    strike: f64,
    /// Years to expiry.
    #[arg(long, allow_negative_numbers = true)]
    maturity: f64,
    /// Continuously compounded risk-free rate.
    #[arg(long, allow_negative_numbers = true)]
    rate: f64,
    /// Annualized volatility.
    #[arg(long, allow_negative_numbers = true)]
    vol: f64,
    #[arg(long)]
    json: bool,
    /// Report at 4-digit table precision with the price truncated to cents.
    #[arg(long)]
    paper_tables: bool,
}

#[derive(Args)]
struct ControlArgs {
    #[arg(long)]
    cap_ratio: Option<f64>,
    #[arg(long)]
    floor_ratio: Option<f64>,
    /// Aggregate liability ceiling, in currency units.
    #[arg(long)]
    ceiling: Option<Money>,
}

impl ControlArgs {
    fn controls(&self) -> RiskControls {
        RiskControls { cap_ratio: self.cap_ratio, floor_ratio: self.floor_ratio, liability_ceiling: self.ceiling }
    }
}

#[derive(Subcommand)]
enum SettleCommand {
    Futures {
        contract: PathBuf,
        #[arg(long)]
        final_roi: f64,
        #[command(flatten)]
        controls: ControlArgs,
        #[arg(long)]
        json: bool,
    },
    Option {
        contract: PathBuf,
        #[arg(long)]
        final_roi: f64,
        #[command(flatten)]
        controls: ControlArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum VolCommand {
    /// Annualized volatility from a store or a JSON Lines series file.
    Estimate {
        #[arg(long)]
        institution: Option<String>,
        #[arg(long, conflicts_with = "series_file")]
        store: Option<PathBuf>,
        #[arg(long)]
        series_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        periods_per_year: f64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    config: PathBuf,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
    /// Write the cash-flow ledger as CSV.
    #[arg(long)]
    emit_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(1)
        }
    }
}

// Library errors often embed their source in Display; skip causes already shown.
fn one_line(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg.replace('\n', " ")
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Roi { command: RoiCommand::Compute { metrics, weights, store } } => {
            cmd_roi_compute(metrics, weights, store)
        }
        Command::Price(args) => cmd_price(&args),
        Command::Settle { command } => cmd_settle(command),
        Command::Vol { command: VolCommand::Estimate { institution, store, series_file, periods_per_year } } => {
            cmd_vol_estimate(institution, store, series_file, periods_per_year)
        }
        Command::Scenario(args) => cmd_scenario(&args),
    }
}

fn cmd_roi_compute(metrics: PathBuf, weights: PathBuf, store: Option<PathBuf>) -> Result<String> {
    let file = load_metrics(&metrics)?;
    let weights = load_weights(&weights)?;
    let mut rows = Vec::with_capacity(file.records.len());
    for record in &file.records {
        let scores = record.normalize().with_context(|| record.institution_id.clone())?;
        rows.push((record.institution_id.clone(), record.period, scores, compute_roi(&scores, &weights)));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

    let store = store.map(Store::open).transpose()?;
    let mut out = String::new();
    for (id, period, s, roi) in &rows {
        let _ = writeln!(
            out,
            "{id} {period} P={:.4} C={:.4} G={:.4} I={:.4} S={:.4} ROI={roi:.4}",
            s.publications(),
            s.citations(),
            s.grants(),
            s.innovation(),
            s.societal()
        );
        if let Some(store) = &store {
            store.append_roi(id, *period, *roi)?;
        }
    }
    Ok(out)
}

fn cmd_price(args: &PriceArgs) -> Result<String> {
    let inputs = PricingInputs::new(args.spot, args.strike, args.maturity, args.rate, args.vol)?;
    let walk = Walkthrough::new(args.kind.into(), inputs);
    let convention = if args.paper_tables { TableConvention::PaperTables } else { TableConvention::Full };
    if args.json {
        let mut v = walk.to_json();
        v["display_price"] = walk.display_price(convention).into();
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v)?));
    }
    Ok(walk.render(convention))
}

fn render_settlement(out: &mut String, r: &SettlementResult) {
    let _ = writeln!(out, "final_roi       {:.4}", r.raw_final_roi);
    let _ = writeln!(out, "effective_roi   {:.4}", r.effective_final_roi);
    let _ = writeln!(out, "gross           {}", r.gross.signed());
    let _ = writeln!(out, "capped          {}", r.capped.signed());
    let _ = writeln!(out, "cap_applied     {}", r.cap_applied);
    let _ = writeln!(out, "floor_applied   {}", r.floor_applied);
    let _ = writeln!(out, "ceiling_applied {}", r.ceiling_applied);
}

fn with_ceiling(result: SettlementResult, controls: &RiskControls) -> Result<SettlementResult> {
    Ok(aggregate_issuer_liability(&[result], controls)?.settlements[0])
}

fn cmd_settle(command: SettleCommand) -> Result<String> {
    match command {
        SettleCommand::Futures { contract, final_roi, controls, json } => {
            let doc = load_contract(&contract)?;
            let Contract::Futures(c) = doc.contract else {
                bail!("{}: expected a futures contract document", contract.display());
            };
            let controls = controls.controls();
            let result = with_ceiling(settle_futures(&c, final_roi, &controls)?, &controls)?;
            if json {
                return Ok(format!("{}\n", serde_json::to_string_pretty(&result)?));
            }
            let mut out = String::new();
            let _ = writeln!(out, "institution     {}", c.institution_id);
            let _ = writeln!(out, "quantity        {}", c.quantity);
            let _ = writeln!(out, "entry_roi       {:.4}", c.entry_roi);
            render_settlement(&mut out, &result);
            Ok(out)
        }
        SettleCommand::Option { contract, final_roi, controls, json } => {
            let doc = load_contract(&contract)?;
            let Contract::Option(c) = doc.contract else {
                bail!("{}: expected an option contract document", contract.display());
            };
            let controls = controls.controls();
            let plain = settle_option(&c, final_roi)?;
            let controlled = with_ceiling(settle_option_controlled(&c, final_roi, &controls)?, &controls)?;
            let net = controlled.capped - c.premium_paid;
            if json {
                let v = serde_json::json!({
                    "gross_payoff": plain.gross_payoff,
                    "net_pnl": net,
                    "settlement": controlled,
                });
                return Ok(format!("{}\n", serde_json::to_string_pretty(&v)?));
            }
            let mut out = String::new();
            let _ = writeln!(out, "institution     {}", c.institution_id);
            let _ = writeln!(out, "kind            {}", c.kind);
            let _ = writeln!(out, "strike          {:.4}", c.strike);
            let _ = writeln!(out, "premium         {}", c.premium_paid.grouped());
            render_settlement(&mut out, &controlled);
            let _ = writeln!(out, "net             {}", net.signed());
            Ok(out)
        }
    }
}

fn cmd_vol_estimate(
    institution: Option<String>,
    store: Option<PathBuf>,
    series_file: Option<PathBuf>,
    periods_per_year: f64,
) -> Result<String> {
    let series: RoiSeries = match (store, series_file) {
        (Some(root), None) => {
            let Some(id) = institution else { bail!("--institution is required with --store") };
            Store::open(root)?.load_series(&id)?
        }
        (None, Some(file)) => {
            let records = store::read_history(&file)?;
            let mut all = store::series_from_history(&records)?;
            match institution {
                Some(id) => all.remove(&id).with_context(|| format!("{}: no records for {id}", file.display()))?,
                None if all.len() == 1 => all.into_values().next().expect("one series"),
                None => bail!("{} holds {} institutions; pass --institution", file.display(), all.len()),
            }
        }
        _ => bail!("pass exactly one of --store or --series-file"),
    };
    let sigma = annualized_vol(&series, periods_per_year)?;
    Ok(format!("{} sigma={sigma:.6} observations={}\n", series.institution_id(), series.len()))
}

fn cmd_scenario(args: &ScenarioArgs) -> Result<String> {
    let cfg = ScenarioConfig::from_path(&args.config)?;
    let report = run_scenario(&cfg)?;
    if let Some(path) = &args.emit_csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        fs::write(path, buf).with_context(|| path.display().to_string())?;
    }
    Ok(if args.json { report.to_json() } else { report.render_table() })
}
