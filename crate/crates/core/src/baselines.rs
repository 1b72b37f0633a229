//! Reference scores MCI is compared against: Shapley value (exact and
//! permutation-sampled), ablation and bivariate association.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_set::{for_each_subset_of, FeatureSet};
use crate::kahan::KahanSum;
use crate::mci::prefix_marginals;
use crate::permutation::PermutationPlan;
use crate::scores::{BoundKind, ImportanceScores, Method};
use crate::valuation::{Valuation, ENUMERATION_CAP};

/// Exact Shapley value: Σ over S ⊆ F∖{f} of w(|S|)·Δ(f, S, ν) with
/// w(s) = s!(n−1−s)!/n!, the subset form of the permutation average.
///
/// Scores sum to ν(F) − ν(∅) (efficiency). Weights are built by iterative
/// products, stable for every n up to the bitmask width.
pub fn shapley_exact(v: &Valuation) -> Result<ImportanceScores> {
    let n = v.n();
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    let before = v.evaluated_subsets();
    let weights = subset_weights(n);
    let full = FeatureSet::full(n).mask();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|f| {
            let mut acc = KahanSum::default();
            let mut first_error = None;
            for_each_subset_of(full & !(1 << f), |mask| {
                if first_error.is_some() {
                    return;
                }
                match v.delta(f, FeatureSet::from_mask(n, mask)) {
                    Ok(delta) => acc.add(weights[mask.count_ones() as usize] * delta),
                    Err(e) => first_error = Some(e),
                }
            });
            match first_error {
                Some(e) => Err(e),
                None => Ok(acc.total()),
            }
        })
        .collect::<Result<_>>()?;
    Ok(ImportanceScores {
        method: Method::ShapleyExact,
        bound_kind: BoundKind::Exact,
        scores,
        contexts: None,
        intervals: None,
        valuation_calls: v.evaluated_subsets() - before,
        seed: None,
    })
}

/// w(s) = s!(n−1−s)!/n! via w(0) = 1/n, w(s+1) = w(s)·(s+1)/(n−1−s).
fn subset_weights(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut weights = vec![0.0; n];
    weights[0] = 1.0 / n as f64;
    for s in 0..n - 1 {
        weights[s + 1] = weights[s] * (s + 1) as f64 / (n - 1 - s) as f64;
    }
    weights
}

/// Permutation-sampled Shapley value: the mean marginal contribution over
/// the plan's prefix contexts, an unbiased estimator of the exact score.
///
/// Marginal vectors are computed per permutation (in parallel) and then
/// summed compensated in fixed permutation order, so output is bit-identical
/// across worker counts. With an exhaustive plan the average is the exact
/// value and is reported as such.
pub fn shapley_sampled(v: &Valuation, plan: &PermutationPlan) -> Result<ImportanceScores> {
    let n = v.n();
    if plan.n() != n {
        return Err(Error::InvalidParameter(format!(
            "plan is over {} features, valuation over {n}",
            plan.n()
        )));
    }
    let before = v.evaluated_subsets();
    let count = plan.count();
    if count == 0 || n == 0 {
        return Ok(ImportanceScores {
            method: Method::ShapleySampled,
            bound_kind: if plan.seed().is_none() { BoundKind::Exact } else { BoundKind::Estimate },
            scores: vec![0.0; n],
            contexts: None,
            intervals: None,
            valuation_calls: 0,
            seed: plan.seed(),
        });
    }
    let marginal_rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let mut row = vec![0.0; n];
            for (feature, (delta, _)) in prefix_marginals(v, &plan.permutation(j))? {
                row[feature] = delta;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut sums = vec![KahanSum::default(); n];
    for row in &marginal_rows {
        for (f, &delta) in row.iter().enumerate() {
            sums[f].add(delta);
        }
    }
    let scores: Vec<f64> = sums.iter().map(|s| s.total() / count as f64).collect();
    Ok(ImportanceScores {
        method: Method::ShapleySampled,
        bound_kind: if plan.seed().is_none() { BoundKind::Exact } else { BoundKind::Estimate },
        scores,
        contexts: None,
        intervals: None,
        valuation_calls: v.evaluated_subsets() - before,
        seed: plan.seed(),
    })
}

/// Ablation score ν(F) − ν(F∖{f}); n+1 valuation calls.
pub fn ablation(v: &Valuation) -> Result<ImportanceScores> {
    let n = v.n();
    let before = v.evaluated_subsets();
    let full = FeatureSet::full(n);
    let total = v.value(full)?;
    let scores: Vec<f64> =
        (0..n).map(|f| Ok(total - v.value(full.without(f))?)).collect::<Result<_>>()?;
    Ok(ImportanceScores {
        method: Method::Ablation,
        bound_kind: BoundKind::Exact,
        scores,
        contexts: None,
        intervals: None,
        valuation_calls: v.evaluated_subsets() - before,
        seed: None,
    })
}

/// Bivariate association ν({f}); n valuation calls.
pub fn bivariate(v: &Valuation) -> Result<ImportanceScores> {
    let n = v.n();
    let before = v.evaluated_subsets();
    let empty = FeatureSet::empty(n);
    let scores: Vec<f64> =
        (0..n).map(|f| v.value(empty.with(f))).collect::<Result<_>>()?;
    Ok(ImportanceScores {
        method: Method::Bivariate,
        bound_kind: BoundKind::Exact,
        scores,
        contexts: None,
        intervals: None,
        valuation_calls: v.evaluated_subsets() - before,
        seed: None,
    })
}
