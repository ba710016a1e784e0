//! Composite Research Output Index.
//!
//! Five normalized component scores (publication output, citation impact,
//! grant income, innovation output, societal impact) are blended with a
//! weight vector that sums to one:
//!
//! ```text
//! ROI = w1·P + w2·C + w3·G + w4·I + w5·S
//! ```
//!
//! Components are normalized by ratio to a declared baseline, so a score of
//! 100 means "at benchmark".

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of index components.
pub const COMPONENTS: usize = 5;

/// Component names in index order.
pub const COMPONENT_NAMES: [&str; COMPONENTS] =
    ["publications", "citations", "grants", "innovation", "societal"];

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
    #[error("{field} is negative ({value})")]
    Negative { field: &'static str, value: f64 },
    #[error("baseline for {field} must be positive (got {value})")]
    ZeroBaseline { field: &'static str, value: f64 },
    #[error("weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
}

fn check_nonneg(field: &'static str, value: f64) -> Result<f64, IndexError> {
    if !value.is_finite() {
        return Err(IndexError::NonFinite { field });
    }
    if value < 0.0 {
        return Err(IndexError::Negative { field, value });
    }
    Ok(value)
}

/// Normalized component scores, in index points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentScores {
    publications: f64,
    citations: f64,
    grants: f64,
    innovation: f64,
    societal: f64,
}

impl ComponentScores {
    pub fn new(
        publications: f64,
        citations: f64,
        grants: f64,
        innovation: f64,
        societal: f64,
    ) -> Result<Self, IndexError> {
        Self::from_array([publications, citations, grants, innovation, societal])
    }

    pub fn from_array(values: [f64; COMPONENTS]) -> Result<Self, IndexError> {
        for (name, v) in COMPONENT_NAMES.iter().zip(values) {
            check_nonneg(name, v)?;
        }
        let [publications, citations, grants, innovation, societal] = values;
        Ok(Self { publications, citations, grants, innovation, societal })
    }

    pub fn uniform(score: f64) -> Result<Self, IndexError> {
        Self::from_array([score; COMPONENTS])
    }

    pub fn as_array(&self) -> [f64; COMPONENTS] {
        [self.publications, self.citations, self.grants, self.innovation, self.societal]
    }

    pub fn publications(&self) -> f64 {
        self.publications
    }
    pub fn citations(&self) -> f64 {
        self.citations
    }
    pub fn grants(&self) -> f64 {
        self.grants
    }
    pub fn innovation(&self) -> f64 {
        self.innovation
    }
    pub fn societal(&self) -> f64 {
        self.societal
    }

    /// Multiplies every score by a non-negative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self, IndexError> {
        Self::from_array(self.as_array().map(|v| v * factor))
    }
}

/// Index weights; each in `[0, 1]`, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; COMPONENTS]")]
pub struct WeightVector([f64; COMPONENTS]);

impl WeightVector {
    /// Accepts weights that are already normalized (sum within 1e-12 of 1).
    pub fn new(weights: [f64; COMPONENTS]) -> Result<Self, IndexError> {
        for (name, w) in COMPONENT_NAMES.iter().zip(weights) {
            check_nonneg(name, w)?;
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(IndexError::WeightsNotNormalized(sum));
        }
        Ok(Self(weights))
    }

    pub fn uniform() -> Self {
        Self([1.0 / COMPONENTS as f64; COMPONENTS])
    }

    pub fn as_array(&self) -> [f64; COMPONENTS] {
        self.0
    }
}

impl From<WeightVector> for [f64; COMPONENTS] {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Scales raw non-negative weights so they sum to one.
///
/// ```
/// use roi_derivatives::roi_index::normalize_weights;
///
/// let w = normalize_weights([3.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
/// assert_eq!(w.as_array(), [0.375, 0.125, 0.125, 0.125, 0.25]);
/// ```
pub fn normalize_weights(raw: [f64; COMPONENTS]) -> Result<WeightVector, IndexError> {
    for (name, w) in COMPONENT_NAMES.iter().zip(raw) {
        check_nonneg(name, w)?;
    }
    let sum: f64 = raw.iter().sum();
    if !sum.is_finite() {
        return Err(IndexError::NonFinite { field: "weight sum" });
    }
    if sum == 0.0 {
        return Err(IndexError::AllZeroWeights);
    }
    Ok(WeightVector(raw.map(|w| w / sum)))
}

/// `100 × raw / baseline`: at-baseline performance maps to 100.
pub fn normalize_component(raw: f64, baseline: f64) -> Result<f64, IndexError> {
    normalize_named("component", raw, baseline)
}

fn normalize_named(field: &'static str, raw: f64, baseline: f64) -> Result<f64, IndexError> {
    check_nonneg(field, raw)?;
    if !baseline.is_finite() {
        return Err(IndexError::NonFinite { field });
    }
    if baseline <= 0.0 {
        return Err(IndexError::ZeroBaseline { field, value: baseline });
    }
    Ok(100.0 * raw / baseline)
}

/// Weighted sum of the component scores.
pub fn compute_roi(scores: &ComponentScores, weights: &WeightVector) -> f64 {
    scores
        .as_array()
        .iter()
        .zip(weights.0.iter())
        .map(|(s, w)| s * w)
        .sum()
}

/// One raw reported value and the benchmark it is normalized against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawValue {
    pub value: f64,
    pub baseline: f64,
}

/// Raw institutional metrics for one reporting period, before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMetrics {
    pub institution_id: String,
    pub period: i32,
    /// Peer-reviewed publication count.
    pub publications: RawValue,
    /// Citation metric, pre-computed by the reporting institution.
    pub citations: RawValue,
    /// Competitive grant income in currency units.
    pub grants: RawValue,
    /// Patent filings, licenses and spin-offs.
    pub innovation: RawValue,
    /// Societal impact indicator.
    pub societal: RawValue,
}

impl RawMetrics {
    fn raw_values(&self) -> [RawValue; COMPONENTS] {
        [self.publications, self.citations, self.grants, self.innovation, self.societal]
    }

    /// Checks every raw value is finite and non-negative and every baseline
    /// positive. The error names the offending component.
    pub fn validate(&self) -> Result<(), IndexError> {
        self.normalize().map(|_| ())
    }

    pub fn normalize(&self) -> Result<ComponentScores, IndexError> {
        let mut scores = [0.0; COMPONENTS];
        for ((slot, name), raw) in scores.iter_mut().zip(COMPONENT_NAMES).zip(self.raw_values()) {
            *slot = normalize_named(name, raw.value, raw.baseline)?;
        }
        ComponentScores::from_array(scores)
    }
}
