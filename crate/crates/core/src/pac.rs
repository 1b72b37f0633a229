//! Finite-sample guarantees: the PAC sample-size bound for estimating MCI
//! from data and the deterministic inequality it rests on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::mci::mci_exact;
use crate::valuation::{Valuation, ENUMERATION_CAP};

/// Float slack absorbing rounding in the stability comparison; the
/// underlying inequality is a theorem in exact arithmetic.
const STABILITY_SLACK: f64 = 1e-12;

/// Inputs to the sample-size bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PacParameters {
    /// Accuracy, in (0, 1].
    pub epsilon: f64,
    /// Confidence parameter, in (0, 1).
    pub delta: f64,
    /// Largest hypothesis-class size over all feature subsets, ≥ 1.
    pub hypothesis_count: u64,
    /// Feature count, ≥ 1.
    pub feature_count: u64,
}

impl PacParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if self.hypothesis_count < 1 {
            return Err(Error::InvalidParameter("hypothesis count must be >= 1".into()));
        }
        if self.feature_count < 1 {
            return Err(Error::InvalidParameter("feature count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Smallest m with m ≥ (2/ε²)·(log2(2·|H|/δ) + |F|); a sample of that size
/// keeps every estimated MCI score within ε of the truth with probability
/// at least 1 − δ.
pub fn sample_size(params: &PacParameters) -> Result<u64> {
    params.validate()?;
    let log_term = (2.0 * params.hypothesis_count as f64 / params.delta).log2();
    let raw = 2.0 / (params.epsilon * params.epsilon) * (log_term + params.feature_count as f64);
    Ok(raw.ceil() as u64)
}

/// max over all subsets S of |ν_D(S) − ν(S)|.
pub fn valuation_deviation_bound(estimated: &Valuation, truth: &Valuation) -> Result<f64> {
    let n = truth.n();
    if estimated.n() != n {
        return Err(Error::InvalidParameter(format!(
            "feature counts differ: {} vs {n}",
            estimated.n()
        )));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    let mut worst = 0.0f64;
    for mask in 0..1u64 << n {
        let s = FeatureSet::from_mask(n, mask);
        let gap = (estimated.value(s)? - truth.value(s)?).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Outcome of the deterministic stability inequality.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StabilityReport {
    /// max over features of |I_{ν_D}(f) − I_ν(f)|.
    pub max_score_gap: f64,
    /// 2 · max over subsets of |ν_D(S) − ν(S)|.
    pub bound: f64,
    /// Whether the gap respects the bound; true for every pair of valuations.
    pub holds: bool,
}

/// Verifies max_f |I_{ν_D}(f) − I_ν(f)| ≤ 2·max_S |ν_D(S) − ν(S)| by exact
/// MCI on both valuations.
pub fn mci_stability_check(estimated: &Valuation, truth: &Valuation) -> Result<StabilityReport> {
    let deviation = valuation_deviation_bound(estimated, truth)?;
    let estimated_scores = mci_exact(estimated)?;
    let truth_scores = mci_exact(truth)?;
    let max_score_gap = estimated_scores
        .scores
        .iter()
        .zip(&truth_scores.scores)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let bound = 2.0 * deviation;
    Ok(StabilityReport { max_score_gap, bound, holds: max_score_gap <= bound + STABILITY_SLACK })
}
