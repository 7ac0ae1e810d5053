//! Least-squares slope fits on `log₂` data.

use serde::{Deserialize, Serialize};

/// Values below this are treated as exact zeros and left out of fits.
pub const FLOOR: f64 = 1e-13;
/// Minimum number of usable points for a fit.
pub const MIN_POINTS: usize = 4;

/// What a fitted slope is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitTarget {
    /// `|slope - target| <= tolerance`.
    Within { target: f64, tolerance: f64 },
    /// `slope >= bound`.
    AtLeast { bound: f64 },
}

impl FitTarget {
    pub fn accepts(&self, slope: f64) -> bool {
        match *self {
            FitTarget::Within { target, tolerance } => (slope - target).abs() <= tolerance,
            FitTarget::AtLeast { bound } => slope >= bound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Pass,
    Fail,
    /// Fewer than [`MIN_POINTS`] values above [`FLOOR`], some nonzero.
    Degenerate,
    /// Every value is below [`FLOOR`]: the bound holds trivially.
    IdenticallyZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitSample {
    pub x: f64,
    pub value: f64,
    /// `log₂ value`, absent when the value is below the floor.
    pub log2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub samples: Vec<FitSample>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square residual of the fit in `log₂` units.
    pub residual: Option<f64>,
    pub target: FitTarget,
    pub status: FitStatus,
}

impl DecayFit {
    /// Fits `log₂ value` against `x`.
    pub fn fit(xs: &[f64], values: &[f64], target: FitTarget) -> Self {
        let samples: Vec<FitSample> = xs
            .iter()
            .zip(values)
            .map(|(&x, &value)| FitSample {
                x,
                value,
                log2: (value.abs() >= FLOOR && value.is_finite()).then(|| value.abs().log2()),
            })
            .collect();
        let used: Vec<(f64, f64)> = samples.iter().filter_map(|s| s.log2.map(|y| (s.x, y))).collect();
        if used.is_empty() {
            return DecayFit {
                samples,
                slope: None,
                intercept: None,
                residual: None,
                target,
                status: FitStatus::IdenticallyZero,
            };
        }
        if used.len() < MIN_POINTS {
            return DecayFit {
                samples,
                slope: None,
                intercept: None,
                residual: None,
                target,
                status: FitStatus::Degenerate,
            };
        }
        let n = used.len() as f64;
        let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
        let my = used.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return DecayFit {
                samples,
                slope: None,
                intercept: None,
                residual: None,
                target,
                status: FitStatus::Degenerate,
            };
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = (used
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let status = if target.accepts(slope) {
            FitStatus::Pass
        } else {
            FitStatus::Fail
        };
        DecayFit {
            samples,
            slope: Some(slope),
            intercept: Some(intercept),
            residual: Some(residual),
            target,
            status,
        }
    }

    /// Target met (an identically zero profile meets any decay bound).
    pub fn met(&self) -> bool {
        matches!(self.status, FitStatus::Pass | FitStatus::IdenticallyZero)
    }
}
