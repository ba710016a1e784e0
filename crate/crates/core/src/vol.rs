//! Historical volatility of an ROI series.
//!
//! Close-to-close estimator: sample standard deviation (n − 1 denominator)
//! of consecutive log returns, scaled by `√periods_per_year`. Annual ROI data
//! uses `periods_per_year = 1`; with so few observations per year the
//! estimate is necessarily noisy.

use thiserror::Error;

use crate::series::RoiSeries;

/// Spread of log returns at or below this is indistinguishable from the
/// rounding of `ln(a/b)` and is reported as zero dispersion.
const RETURN_RESOLUTION: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolError {
    #[error("series has {got} observations, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("ROI observation {index} is not positive ({roi})")]
    NonPositive { index: usize, roi: f64 },
    #[error("periods per year must be positive and finite (got {0})")]
    InvalidPeriodsPerYear(f64),
}

/// `ln(roi[i+1] / roi[i])` for each consecutive pair.
pub fn log_returns(series: &RoiSeries) -> Result<Vec<f64>, VolError> {
    log_returns_of(&series.values().collect::<Vec<_>>())
}

/// Same as [`log_returns`] over a bare slice of levels.
pub fn log_returns_of(levels: &[f64]) -> Result<Vec<f64>, VolError> {
    if levels.len() < 2 {
        return Err(VolError::TooShort { got: levels.len(), need: 2 });
    }
    if let Some((index, &roi)) = levels.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
        return Err(VolError::NonPositive { index, roi });
    }
    Ok(levels.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Annualized volatility of the series.
///
/// ```
/// use roi_derivatives::series::RoiSeries;
/// use roi_derivatives::vol::annualized_vol;
///
/// let s = RoiSeries::from_annual("lab", 2021, &[100.0, 110.0, 100.0]).unwrap();
/// let sigma = annualized_vol(&s, 1.0).unwrap();
/// assert!((sigma - 1.1f64.ln() * 2f64.sqrt()).abs() < 1e-12);
/// ```
pub fn annualized_vol(series: &RoiSeries, periods_per_year: f64) -> Result<f64, VolError> {
    annualized_vol_of(&series.values().collect::<Vec<_>>(), periods_per_year)
}

pub fn annualized_vol_of(levels: &[f64], periods_per_year: f64) -> Result<f64, VolError> {
    if !(periods_per_year.is_finite() && periods_per_year > 0.0) {
        return Err(VolError::InvalidPeriodsPerYear(periods_per_year));
    }
    if levels.len() < 3 {
        return Err(VolError::TooShort { got: levels.len(), need: 3 });
    }
    let returns = log_returns_of(levels)?;
    Ok(sample_std(&returns) * periods_per_year.sqrt())
}

fn sample_std(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi - lo <= RETURN_RESOLUTION {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}
