//! Check reports: per-resolution maxima, trends, verdicts.
//!
//! `CheckReport` is what lands in `report.json`; it deliberately excludes
//! wall time so that reports are byte-identical across runs and thread
//! counts. Timing travels separately in `CheckOutcome` and surfaces only on
//! stdout and in `summary.csv`.

use serde::Serialize;

pub const VERDICT_PASS: &str = "PASS";
pub const VERDICT_FAIL: &str = "FAIL";
pub const VERDICT_GATED: &str = "hypothesis-gated";

#[derive(Debug, Clone, Serialize)]
pub struct ResolutionEntry {
    /// Grid resolution N (for CHK-L14: the quadrature node count).
    pub n: usize,
    pub max_ratio: f64,
    pub witness: String,
}

/// Toolkit version embedded in every report.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub version: String,
    pub config_hash: String,
    pub resolutions: Vec<ResolutionEntry>,
    /// Consecutive-resolution ratio factors, resolutions.len() - 1 entries.
    pub trends: Vec<f64>,
    pub verdict: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict != VERDICT_FAIL
    }
}

/// A report plus its wall time.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub report: CheckReport,
    pub seconds: f64,
}

/// Trend factors between consecutive maxima; maxima below `floor` are treated
/// as exact zeros (trend 1.0) so noise at machine precision never reads as
/// divergence.
pub fn trend_factors(maxima: &[f64], floor: f64) -> Vec<f64> {
    maxima
        .windows(2)
        .map(|w| {
            if w[0].abs() <= floor && w[1].abs() <= floor {
                1.0
            } else {
                w[1] / w[0]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trends_treat_tiny_maxima_as_stable() {
        assert_eq!(trend_factors(&[1e-15, 3e-15], 1e-12), vec![1.0]);
        let t = trend_factors(&[2.0, 3.0], 1e-12);
        assert!((t[0] - 1.5).abs() < 1e-12);
    }
}
