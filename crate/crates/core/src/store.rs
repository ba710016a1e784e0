//! File formats and the on-disk ROI history store.
//!
//! * Metrics files: JSON with `format_version`, an audit block and raw
//!   per-institution records.
//! * Weights: JSON with `format_version` and one raw weight per component.
//! * History: append-only JSON Lines, `{"institution_id", "period", "roi"}`
//!   with `roi` as a decimal string so values replay bit-for-bit.
//! * Contracts and scenarios: JSON documents with `format_version`.
//!
//! A store directory holds `roi_history.jsonl`, `weights.json` and
//! `contracts/<name>.json`. Writers take an exclusive `.lock` file; readers
//! take no lock.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::{FuturesContract, OptionContract};
use crate::roi_index::{normalize_weights, IndexError, RawMetrics, WeightVector};
use crate::series::{Observation, Period, RoiSeries, SeriesError};

pub const FORMAT_VERSION: u32 = 1;

const HISTORY_FILE: &str = "roi_history.jsonl";
const WEIGHTS_FILE: &str = "weights.json";
const CONTRACTS_DIR: &str = "contracts";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: record {index} ({institution_id}): {source}")]
    Validation { path: PathBuf, index: usize, institution_id: String, source: IndexError },
    #[error("{path}: duplicate record for {institution_id} period {period}")]
    DuplicateRecord { path: PathBuf, institution_id: String, period: i32 },
    #[error("{path}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { path: PathBuf, found: u32 },
    #[error("{institution_id} already has an ROI for period {period}")]
    DuplicatePeriod { institution_id: String, period: Period },
    #[error("ROI must be positive and finite (got {0})")]
    InvalidRoi(f64),
    #[error("unknown institution {0}")]
    UnknownInstitution(String),
    #[error("{path}:{line}: corrupt history record: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error("weights: {0}")]
    Weights(IndexError),
    #[error("{institution_id}: {source}")]
    Series { institution_id: String, source: SeriesError },
    #[error("invalid contract name {0:?}")]
    BadName(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, e: serde_json::Error) -> StoreError {
    StoreError::Parse { path: path.to_path_buf(), line: e.line(), column: e.column(), message: e.to_string() }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

fn check_version(path: &Path, found: u32) -> Result<(), StoreError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(StoreError::UnsupportedVersion { path: path.to_path_buf(), found })
    }
}

/// Who submitted and audited a metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditBlock {
    pub source: String,
    pub submission_date: NaiveDate,
    pub auditor_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    pub format_version: u32,
    pub audit: AuditBlock,
    pub records: Vec<RawMetrics>,
}

/// Parses and fully validates a metrics file. Any bad record fails the
/// whole load.
pub fn load_metrics(path: impl AsRef<Path>) -> Result<MetricsFile, StoreError> {
    let path = path.as_ref();
    let file: MetricsFile = read_json(path)?;
    check_version(path, file.format_version)?;
    let mut seen = HashSet::new();
    for (index, record) in file.records.iter().enumerate() {
        record.validate().map_err(|source| StoreError::Validation {
            path: path.to_path_buf(),
            index,
            institution_id: record.institution_id.clone(),
            source,
        })?;
        if !seen.insert((record.institution_id.as_str(), record.period)) {
            return Err(StoreError::DuplicateRecord {
                path: path.to_path_buf(),
                institution_id: record.institution_id.clone(),
                period: record.period,
            });
        }
    }
    Ok(file)
}

/// Raw (unnormalized) component weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWeights {
    pub publications: f64,
    pub citations: f64,
    pub grants: f64,
    pub innovation: f64,
    pub societal: f64,
}

impl RawWeights {
    pub fn normalize(&self) -> Result<WeightVector, IndexError> {
        normalize_weights([self.publications, self.citations, self.grants, self.innovation, self.societal])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub format_version: u32,
    pub weights: RawWeights,
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightVector, StoreError> {
    let path = path.as_ref();
    let file: WeightsFile = read_json(path)?;
    check_version(path, file.format_version)?;
    file.weights.normalize().map_err(StoreError::Weights)
}

/// A futures or option term sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Contract {
    Futures(FuturesContract),
    Option(OptionContract),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub contract: Contract,
}

impl ContractDocument {
    pub fn new(contract: Contract) -> Self {
        Self { format_version: FORMAT_VERSION, contract }
    }
}

pub fn load_contract(path: impl AsRef<Path>) -> Result<ContractDocument, StoreError> {
    let path = path.as_ref();
    let doc: ContractDocument = read_json(path)?;
    check_version(path, doc.format_version)?;
    Ok(doc)
}

/// One line of the history file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryRecord {
    pub institution_id: String,
    pub period: Period,
    /// Shortest round-trip decimal rendering of the ROI.
    pub roi: String,
}

impl HistoryRecord {
    pub fn new(institution_id: impl Into<String>, period: Period, roi: f64) -> Result<Self, StoreError> {
        if !(roi.is_finite() && roi > 0.0) {
            return Err(StoreError::InvalidRoi(roi));
        }
        Ok(Self { institution_id: institution_id.into(), period, roi: roi.to_string() })
    }

    fn roi_value(&self) -> Option<f64> {
        self.roi.parse::<f64>().ok().filter(|r| r.is_finite() && *r > 0.0)
    }
}

/// Reads a JSON Lines history file. Blank lines are skipped; anything else
/// that fails to parse is an error, never dropped.
pub fn read_history(path: impl AsRef<Path>) -> Result<Vec<(HistoryRecord, f64)>, StoreError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| StoreError::Corrupt { path: path.to_path_buf(), line: i + 1, message };
        let record: HistoryRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        let roi = record
            .roi_value()
            .ok_or_else(|| corrupt(format!("roi {:?} is not a positive decimal", record.roi)))?;
        if !seen.insert((record.institution_id.clone(), record.period)) {
            return Err(corrupt(format!("duplicate period {} for {}", record.period, record.institution_id)));
        }
        out.push((record, roi));
    }
    Ok(out)
}

/// Builds per-institution series from history records, sorted by period.
pub fn series_from_history(records: &[(HistoryRecord, f64)]) -> Result<BTreeMap<String, RoiSeries>, StoreError> {
    let mut grouped: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    for (record, roi) in records {
        grouped
            .entry(record.institution_id.clone())
            .or_default()
            .push(Observation { period: record.period, roi: *roi });
    }
    grouped
        .into_iter()
        .map(|(id, mut obs)| {
            obs.sort_by_key(|o| o.period);
            let series = RoiSeries::new(id.clone(), obs)
                .map_err(|source| StoreError::Series { institution_id: id.clone(), source })?;
            Ok((id, series))
        })
        .collect()
}

/// Directory-backed store.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Held while writing; removes the lock file on drop.
struct WriteLock {
    path: PathBuf,
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn history_path(&self) -> PathBuf {
        self.root.join(HISTORY_FILE)
    }

    fn lock(&self) -> Result<WriteLock, StoreError> {
        let path = self.root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WriteLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(StoreError::StorageFailure(format!(
                "store {} is locked by another writer ({})",
                self.root.display(),
                path.display()
            ))),
            Err(source) => Err(StoreError::Io { path, source }),
        }
    }

    fn history(&self) -> Result<Vec<(HistoryRecord, f64)>, StoreError> {
        let path = self.history_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_history(path)
    }

    /// Appends one ROI observation. Existing lines are never rewritten.
    pub fn append_roi(&self, institution_id: &str, period: impl Into<Period>, roi: f64) -> Result<(), StoreError> {
        let period = period.into();
        let record = HistoryRecord::new(institution_id, period, roi)?;
        let _lock = self.lock()?;

        let mut existing = self.history()?;
        if existing.iter().any(|(r, _)| r.institution_id == institution_id && r.period == period) {
            return Err(StoreError::DuplicatePeriod { institution_id: institution_id.to_string(), period });
        }
        existing.retain(|(r, _)| r.institution_id == institution_id);
        existing.push((record.clone(), roi));
        series_from_history(&existing)?;

        let path = self.history_path();
        let mut line = serde_json::to_string(&record).map_err(|e| StoreError::StorageFailure(e.to_string()))?;
        line.push('\n');
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_all())
            .map_err(|e| StoreError::StorageFailure(format!("{}: {e}", path.display())))
    }

    pub fn load_series(&self, institution_id: &str) -> Result<RoiSeries, StoreError> {
        let mine: Vec<_> = self.history()?.into_iter().filter(|(r, _)| r.institution_id == institution_id).collect();
        series_from_history(&mine)?
            .remove(institution_id)
            .ok_or_else(|| StoreError::UnknownInstitution(institution_id.to_string()))
    }

    /// Institution ids with at least one observation, sorted.
    pub fn institutions(&self) -> Result<Vec<String>, StoreError> {
        let mut ids: Vec<String> = self.history()?.into_iter().map(|(r, _)| r.institution_id).collect();
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    pub fn save_weights(&self, weights: &RawWeights) -> Result<(), StoreError> {
        let _lock = self.lock()?;
        let doc = WeightsFile { format_version: FORMAT_VERSION, weights: *weights };
        write_json(&self.root.join(WEIGHTS_FILE), &doc)
    }

    pub fn load_weights(&self) -> Result<WeightVector, StoreError> {
        load_weights(self.root.join(WEIGHTS_FILE))
    }

    pub fn save_contract(&self, name: &str, doc: &ContractDocument) -> Result<(), StoreError> {
        let path = self.contract_path(name)?;
        let _lock = self.lock()?;
        let dir = self.root.join(CONTRACTS_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        write_json(&path, doc)
    }

    pub fn load_contract(&self, name: &str) -> Result<ContractDocument, StoreError> {
        load_contract(self.contract_path(name)?)
    }

    fn contract_path(&self, name: &str) -> Result<PathBuf, StoreError> {
        let ok = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            && !name.starts_with('.');
        if !ok {
            return Err(StoreError::BadName(name.to_string()));
        }
        Ok(self.root.join(CONTRACTS_DIR).join(format!("{name}.json")))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| StoreError::StorageFailure(e.to_string()))?;
    text.push('\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}
