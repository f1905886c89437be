//! Fitted constants and log-log trend slopes.
//!
//! A finite computation cannot prove that a ratio stays bounded. What it can
//! report is the sup over the tested range (the stand-in for the constant
//! `K(C)` of an `O(·)` claim) together with the least-squares slope of
//! `ln(ratio)` against `ln(n)` over the top two dyadic decades of that
//! range. The same slope cap is used by every checker.

use serde::Serialize;

use crate::json::{ext_real, ext_real_opt};

/// Slope cap for the trend heuristic: a log-log slope at or above this over
/// the top two dyadic decades is read as growth.
pub const TREND_SLOPE_CAP: f64 = 0.1;

/// Least-squares slope of `ln y` against `ln x` over the finite, positive
/// points. `None` when fewer than two distinct abscissae remain.
pub fn log_log_slope<I>(points: I) -> Option<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope over the samples with `n ≥ n_max / 4`.
pub fn top_decade_slope(samples: &[(u64, f64)]) -> Option<f64> {
    let n_max = samples.iter().map(|s| s.0).max()?;
    log_log_slope(
        samples
            .iter()
            .filter(|s| s.0.saturating_mul(4) >= n_max)
            .map(|&(n, v)| (n as f64, v)),
    )
}

/// Sup of a sampled ratio with its argmax and top-decade trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedConstant {
    #[serde(serialize_with = "ext_real")]
    pub sup: f64,
    /// Smallest index attaining `sup`.
    pub argmax: u64,
    #[serde(serialize_with = "ext_real_opt")]
    pub slope: Option<f64>,
}

impl FittedConstant {
    pub fn fit(samples: &[(u64, f64)]) -> Self {
        let mut sup = 0.0;
        let mut argmax = samples.first().map_or(0, |s| s.0);
        for &(n, v) in samples {
            if v > sup || (v.is_nan() && !sup.is_nan()) {
                sup = v;
                argmax = n;
            }
        }
        Self {
            sup,
            argmax,
            slope: top_decade_slope(samples),
        }
    }

    /// Consistent with an `O(·)` bound: finite sup and no upward trend.
    pub fn bounded(&self) -> bool {
        self.sup.is_finite() && self.slope.map_or(true, |s| s < TREND_SLOPE_CAP)
    }

    /// `|slope| < cap` (or too few points to fit).
    pub fn trend_free(&self) -> bool {
        self.slope.map_or(true, |s| s.abs() < TREND_SLOPE_CAP)
    }
}

/// Fit of a two-sided window `[1/C, C]` around a sampled ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowFit {
    /// Smallest `C ≥ 1` with every sample in `[1/C, C]`.
    #[serde(serialize_with = "ext_real")]
    pub c: f64,
    #[serde(serialize_with = "ext_real_opt")]
    pub slope: Option<f64>,
}

impl WindowFit {
    pub fn fit(samples: &[(u64, f64)]) -> Self {
        let c = samples
            .iter()
            .map(|&(_, r)| if r > 0.0 { r.max(1.0 / r) } else { f64::INFINITY })
            .fold(1.0, f64::max);
        Self {
            c,
            slope: top_decade_slope(samples),
        }
    }

    pub fn within(&self, cap: f64, slope_cap: f64) -> bool {
        self.c <= cap && self.slope.map_or(true, |s| s.abs() < slope_cap)
    }
}
