//! Timestamped ROI observations for a single institution.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("observations are not strictly increasing in time ({prev} then {next})")]
    NotIncreasing { prev: Period, next: Period },
    #[error("ROI at {period} must be positive and finite (got {roi})")]
    NonPositive { period: Period, roi: f64 },
    #[error("series mixes calendar-year and dated periods")]
    MixedPeriods,
    #[error("invalid period {0:?}: expected a calendar year or YYYY-MM-DD")]
    BadPeriod(String),
}

/// A reporting period: a calendar year or a specific date.
///
/// Serialized as a JSON integer (`2025`) or an ISO date string
/// (`"2025-06-30"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Period {
    Year(i32),
    Date(NaiveDate),
}

impl Period {
    fn same_kind(&self, other: &Period) -> bool {
        matches!(
            (self, other),
            (Period::Year(_), Period::Year(_)) | (Period::Date(_), Period::Date(_))
        )
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Year(y) => write!(f, "{y}"),
            Period::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl FromStr for Period {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(year) = s.parse::<i32>() {
            return Ok(Period::Year(year));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(Period::Date)
            .map_err(|_| SeriesError::BadPeriod(s.to_string()))
    }
}

impl From<i32> for Period {
    fn from(y: i32) -> Self {
        Period::Year(y)
    }
}

impl From<NaiveDate> for Period {
    fn from(d: NaiveDate) -> Self {
        Period::Date(d)
    }
}

impl Serialize for Period {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Period::Year(y) => serializer.serialize_i32(*y),
            Period::Date(_) => serializer.collect_str(self),
        }
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PeriodVisitor;

        impl Visitor<'_> for PeriodVisitor {
            type Value = Period;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a calendar year or an ISO date")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Period, E> {
                i32::try_from(v).map(Period::Year).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Period, E> {
                i32::try_from(v).map(Period::Year).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Period, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(PeriodVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub period: Period,
    pub roi: f64,
}

/// Observations strictly increasing in time, all with positive ROI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoiSeries {
    institution_id: String,
    observations: Vec<Observation>,
}

impl RoiSeries {
    pub fn new(
        institution_id: impl Into<String>,
        observations: Vec<Observation>,
    ) -> Result<Self, SeriesError> {
        for obs in &observations {
            if !(obs.roi.is_finite() && obs.roi > 0.0) {
                return Err(SeriesError::NonPositive { period: obs.period, roi: obs.roi });
            }
        }
        for pair in observations.windows(2) {
            let (prev, next) = (pair[0].period, pair[1].period);
            if !prev.same_kind(&next) {
                return Err(SeriesError::MixedPeriods);
            }
            if prev.cmp(&next) != Ordering::Less {
                return Err(SeriesError::NotIncreasing { prev, next });
            }
        }
        Ok(Self { institution_id: institution_id.into(), observations })
    }

    /// Builds a series over consecutive calendar years starting at `first_year`.
    pub fn from_annual(
        institution_id: impl Into<String>,
        first_year: i32,
        rois: &[f64],
    ) -> Result<Self, SeriesError> {
        let observations = rois
            .iter()
            .zip(first_year..)
            .map(|(&roi, year)| Observation { period: Period::Year(year), roi })
            .collect();
        Self::new(institution_id, observations)
    }

    pub fn institution_id(&self) -> &str {
        &self.institution_id
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.observations.iter().map(|o| o.roi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_serde() {
        let p: Period = serde_json::from_str("2025").unwrap();
        assert_eq!(p, Period::Year(2025));
        let d: Period = serde_json::from_str("\"2025-06-30\"").unwrap();
        assert_eq!(d.to_string(), "2025-06-30");
        assert_eq!(serde_json::to_string(&p).unwrap(), "2025");
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"2025-06-30\"");
        assert!(serde_json::from_str::<Period>("\"June\"").is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(RoiSeries::from_annual("a", 2020, &[100.0, 101.0]).is_ok());
        assert!(matches!(
            RoiSeries::from_annual("a", 2020, &[100.0, 0.0]),
            Err(SeriesError::NonPositive { .. })
        ));
        let obs = vec![
            Observation { period: Period::Year(2021), roi: 1.0 },
            Observation { period: Period::Year(2021), roi: 1.0 },
        ];
        assert!(matches!(RoiSeries::new("a", obs), Err(SeriesError::NotIncreasing { .. })));
        let obs = vec![
            Observation { period: Period::Year(2021), roi: 1.0 },
            Observation { period: "2022-01-01".parse().unwrap(), roi: 1.0 },
        ];
        assert_eq!(RoiSeries::new("a", obs), Err(SeriesError::MixedPeriods));
    }
}
