//! Plug-in mutual information between feature subsets and the target.

use std::collections::BTreeMap;

use crate::feature_set::FeatureSet;

use super::dataset::Dataset;

/// Empirical-frequency estimator of I(X_S; Y) in bits.
///
/// Maximum-likelihood plug-in with no bias correction; counts are folded in
/// sorted key order so repeated evaluations are bit-identical.
#[derive(Clone, Debug)]
pub(crate) struct MiModel {
    dataset: Dataset,
    target_entropy: f64,
}

impl MiModel {
    pub(crate) fn new(dataset: Dataset) -> Self {
        let counts = target_counts(&dataset);
        let target_entropy = entropy(counts.values().copied(), dataset.row_count() as u64);
        MiModel { dataset, target_entropy }
    }

    pub(crate) fn value(&self, subset: FeatureSet) -> f64 {
        if subset.is_empty() {
            return 0.0;
        }
        let ids: Vec<usize> = subset.iter().collect();
        let m = self.dataset.row_count() as u64;
        let target_col = self.dataset.feature_count();

        // joint counts keyed by (projected features, y); BTreeMap fixes order
        let mut joint: BTreeMap<(Vec<u16>, u16), u64> = BTreeMap::new();
        for row in self.dataset.rows() {
            let key: Vec<u16> = ids.iter().map(|&i| row[i]).collect();
            *joint.entry((key, row[target_col])).or_insert(0) += 1;
        }
        let mut marginal: BTreeMap<&[u16], u64> = BTreeMap::new();
        for ((key, _), &c) in &joint {
            *marginal.entry(key.as_slice()).or_insert(0) += c;
        }

        let h_joint = entropy(joint.values().copied(), m);
        let h_features = entropy(marginal.values().copied(), m);
        // I = H(X_S) + H(Y) - H(X_S, Y); clamp float dust below zero
        (h_features + self.target_entropy - h_joint).max(0.0)
    }
}

fn target_counts(dataset: &Dataset) -> BTreeMap<u16, u64> {
    let target_col = dataset.feature_count();
    let mut counts = BTreeMap::new();
    for row in dataset.rows() {
        *counts.entry(row[target_col]).or_insert(0u64) += 1;
    }
    counts
}

/// Shannon entropy in bits of a count vector: log2(m) − Σ c·log2(c) / m.
fn entropy(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let m = total as f64;
    let mut sum = 0.0;
    for c in counts {
        if c > 1 {
            let c = c as f64;
            sum += c * c.log2();
        }
    }
    m.log2() - sum / m
}
