//! Marginal contribution feature importance: I(f) = max over contexts S of
//! Δ(f, S, ν), with exact, size-bounded, branch-and-bound and sampled search.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_set::{for_each_combination, for_each_subset_of, FeatureSet};
use crate::permutation::PermutationPlan;
use crate::scores::{BoundKind, ImportanceScores, Method};
use crate::valuation::{check_valuation, CheckOptions, Valuation, ENUMERATION_CAP};

/// Largest n at which soft k-size submodularity is verified exhaustively;
/// beyond it `mci_k_bounded` reports a lower bound.
pub const KSIZE_VERIFY_CAP: usize = 12;

/// Running maximum with deterministic tie-breaking: higher Δ wins, then the
/// smaller context (cardinality, then numeric bitmask).
#[derive(Clone, Copy, Debug)]
pub(crate) struct BestContext {
    pub delta: f64,
    pub mask: u64,
    pop: u32,
}

impl BestContext {
    pub(crate) fn unset() -> Self {
        BestContext { delta: f64::NEG_INFINITY, mask: u64::MAX, pop: u32::MAX }
    }

    pub(crate) fn consider(&mut self, delta: f64, mask: u64) {
        let pop = mask.count_ones();
        if delta > self.delta || (delta == self.delta && (pop, mask) < (self.pop, self.mask)) {
            *self = BestContext { delta, mask, pop };
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.consider(other.delta, other.mask);
        self
    }
}

fn scores_from(
    method: Method,
    bound_kind: BoundKind,
    best: Vec<BestContext>,
    n: usize,
    calls: u64,
) -> ImportanceScores {
    ImportanceScores {
        method,
        bound_kind,
        scores: best.iter().map(|b| b.delta).collect(),
        contexts: Some(best.iter().map(|b| FeatureSet::from_mask(n, b.mask)).collect()),
        intervals: None,
        valuation_calls: calls,
        seed: None,
    }
}

/// Exact MCI by full enumeration: for each feature the maximum of
/// Δ(f, S, ν) over every S ⊆ F∖{f}, plus the smallest maximizing context.
pub fn mci_exact(v: &Valuation) -> Result<ImportanceScores> {
    let n = v.n();
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    let before = v.evaluated_subsets();
    let full = FeatureSet::full(n).mask();
    let best: Vec<BestContext> = (0..n)
        .into_par_iter()
        .map(|f| {
            let mut best = BestContext::unset();
            let mut first_error = None;
            for_each_subset_of(full & !(1 << f), |mask| {
                if first_error.is_some() {
                    return;
                }
                match v.delta(f, FeatureSet::from_mask(n, mask)) {
                    Ok(delta) => best.consider(delta, mask),
                    Err(e) => first_error = Some(e),
                }
            });
            match first_error {
                Some(e) => Err(e),
                None => Ok(best),
            }
        })
        .collect::<Result<_>>()?;
    let calls = v.evaluated_subsets() - before;
    Ok(scores_from(Method::MciExact, BoundKind::Exact, best, n, calls))
}

/// MCI restricted to contexts of size at most k: O(n^(k+1)) valuation calls.
///
/// The result is exact whenever every context is covered (k ≥ n−1) or, for
/// n ≤ [`KSIZE_VERIFY_CAP`], when soft k-size submodularity is confirmed by
/// exhaustive check; otherwise it is reported as a lower bound.
pub fn mci_k_bounded(v: &Valuation, k: usize) -> Result<ImportanceScores> {
    let n = v.n();
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let before = v.evaluated_subsets();
    let best: Vec<BestContext> = (0..n)
        .into_par_iter()
        .map(|f| {
            let pool: Vec<usize> = (0..n).filter(|&i| i != f).collect();
            let mut best = BestContext::unset();
            let mut first_error = None;
            for size in 0..=k.min(pool.len()) {
                for_each_combination(&pool, size, |mask| {
                    if first_error.is_some() {
                        return;
                    }
                    match v.delta(f, FeatureSet::from_mask(n, mask)) {
                        Ok(delta) => best.consider(delta, mask),
                        Err(e) => first_error = Some(e),
                    }
                });
            }
            match first_error {
                Some(e) => Err(e),
                None => Ok(best),
            }
        })
        .collect::<Result<_>>()?;

    let exact = if k + 1 >= n {
        true
    } else if n <= KSIZE_VERIFY_CAP {
        let report = check_valuation(
            v,
            CheckOptions { cap: KSIZE_VERIFY_CAP, k: Some(k), ..Default::default() },
        )?;
        report.soft_k_size_submodular == Some(true)
    } else {
        false
    };
    let calls = v.evaluated_subsets() - before;
    Ok(scores_from(
        Method::MciK,
        if exact { BoundKind::Exact } else { BoundKind::Lower },
        best,
        n,
        calls,
    ))
}

/// Branch-and-bound MCI for monotone valuations.
///
/// Context layers are evaluated from both ends of the size range,
/// alternately deepening the small side and the large side. With bottom
/// layers of size ≤ k and top layers of size ≥ K evaluated, every remaining
/// context S (k < |S| < K) satisfies Δ(f, S, ν) ≤ max ν(S'∪{f}) − min ν(T')
/// over S' in layer K, T' in layer k, so the achieved maximum and that cap
/// bracket the exact score. Deepening stops once the bracket is within
/// `tolerance` or the layers meet.
///
/// Monotonicity is diagnosed exhaustively up front; a violation aborts with
/// the witnessing pair. Scores are the achieved lower bounds; `bound_kind`
/// is `Exact` when every bracket closed completely, `Interval` otherwise.
pub fn mci_branch_and_bound(v: &Valuation, tolerance: f64) -> Result<ImportanceScores> {
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let n = v.n();
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    let before = v.evaluated_subsets();
    diagnose_monotone(v)?;

    let results: Vec<(BestContext, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|f| bound_one_feature(v, f, tolerance))
        .collect::<Result<_>>()?;

    let exact = results.iter().all(|&(_, lo, hi)| lo == hi);
    let calls = v.evaluated_subsets() - before;
    let mut scores = scores_from(
        Method::MciBnb,
        if exact { BoundKind::Exact } else { BoundKind::Interval },
        results.iter().map(|&(b, _, _)| b).collect(),
        n,
        calls,
    );
    scores.intervals = Some(results.iter().map(|&(_, lo, hi)| (lo, hi)).collect());
    Ok(scores)
}

fn diagnose_monotone(v: &Valuation) -> Result<()> {
    let n = v.n();
    let values = v.dense_values()?;
    for mask in 0..values.len() as u64 {
        for i in 0..n {
            let bit = 1u64 << i;
            if mask & bit == 0 && values[mask as usize] > values[(mask | bit) as usize] + 1e-12 {
                let small = FeatureSet::from_mask(n, mask);
                let large = FeatureSet::from_mask(n, mask | bit);
                return Err(Error::NonMonotone {
                    small_key: small.key(),
                    large_key: large.key(),
                    small_value: values[mask as usize],
                    large_value: values[(mask | bit) as usize],
                });
            }
        }
    }
    Ok(())
}

fn bound_one_feature(v: &Valuation, f: usize, tolerance: f64) -> Result<(BestContext, f64, f64)> {
    let n = v.n();
    let pool: Vec<usize> = (0..n).filter(|&i| i != f).collect();
    let m = pool.len();
    let mut best = BestContext::unset();

    // size-0 layer
    let empty = FeatureSet::empty(n);
    let mut min_bottom = v.value(empty)?;
    best.consider(v.delta(f, empty)?, 0);
    if m == 0 {
        let lo = best.delta;
        return Ok((best, lo, lo));
    }

    // size-m layer (the full complement)
    let all_mask = pool.iter().fold(0u64, |acc, &i| acc | 1 << i);
    let all = FeatureSet::from_mask(n, all_mask);
    let mut max_top = v.value(all.with(f))?;
    best.consider(v.delta(f, all)?, all_mask);

    let mut bottom = 0usize; // all sizes 0..=bottom evaluated
    let mut top = m; // all sizes top..=m evaluated
    let mut extend_bottom_next = true;
    loop {
        let (lo, hi) = bracket(&best, min_bottom, max_top, bottom, top);
        if hi - lo <= tolerance || top <= bottom + 1 {
            return Ok((best, lo, hi));
        }
        let size = if extend_bottom_next { bottom + 1 } else { top - 1 };
        let mut layer_min = f64::INFINITY;
        let mut layer_max = f64::NEG_INFINITY;
        let mut first_error = None;
        for_each_combination(&pool, size, |mask| {
            if first_error.is_some() {
                return;
            }
            let set = FeatureSet::from_mask(n, mask);
            let result = (|| -> Result<()> {
                let base = v.value(set)?;
                let with_f = v.value(set.with(f))?;
                best.consider(with_f - base, mask);
                layer_min = layer_min.min(base);
                layer_max = layer_max.max(with_f);
                Ok(())
            })();
            if let Err(e) = result {
                first_error = Some(e);
            }
        });
        if let Some(e) = first_error {
            return Err(e);
        }
        if extend_bottom_next {
            bottom = size;
            min_bottom = layer_min;
        } else {
            top = size;
            max_top = layer_max;
        }
        extend_bottom_next = !extend_bottom_next;
    }
}

fn bracket(best: &BestContext, min_bottom: f64, max_top: f64, bottom: usize, top: usize) -> (f64, f64) {
    let lo = best.delta;
    if top <= bottom + 1 {
        (lo, lo)
    } else {
        (lo, lo.max(max_top - min_bottom))
    }
}

/// Sampled MCI lower bound: the maximum Δ over the permutation-prefix
/// contexts of the plan, per the shared prefix-sampling scheme.
///
/// Deterministic for a fixed plan regardless of worker count. An empty plan
/// yields the trivial lower bound 0 with no contexts.
pub fn mci_sampled(v: &Valuation, plan: &PermutationPlan) -> Result<ImportanceScores> {
    let n = v.n();
    if plan.n() != n {
        return Err(Error::InvalidParameter(format!(
            "plan is over {} features, valuation over {n}",
            plan.n()
        )));
    }
    let before = v.evaluated_subsets();
    if plan.count() == 0 || n == 0 {
        return Ok(ImportanceScores {
            method: Method::MciSampled,
            bound_kind: BoundKind::Lower,
            scores: vec![0.0; n],
            contexts: None,
            intervals: None,
            valuation_calls: 0,
            seed: plan.seed(),
        });
    }
    let best = (0..plan.count())
        .into_par_iter()
        .map(|j| -> Result<Vec<BestContext>> {
            let mut best = vec![BestContext::unset(); n];
            let marginals = prefix_marginals(v, &plan.permutation(j))?;
            for (feature, (delta, prefix_mask)) in marginals {
                best[feature].consider(delta, prefix_mask);
            }
            Ok(best)
        })
        .try_reduce(
            || vec![BestContext::unset(); n],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )?;
    let calls = v.evaluated_subsets() - before;
    let mut scores = scores_from(Method::MciSampled, BoundKind::Lower, best, n, calls);
    scores.seed = plan.seed();
    Ok(scores)
}

/// Walks one permutation, returning (feature, (Δ, prefix mask)) for every
/// position: consecutive prefix values give every marginal in n+1 queries.
pub(crate) fn prefix_marginals(
    v: &Valuation,
    perm: &[usize],
) -> Result<Vec<(usize, (f64, u64))>> {
    let n = v.n();
    let mut out = Vec::with_capacity(perm.len());
    let mut mask = 0u64;
    let mut prev = v.value(FeatureSet::empty(n))?;
    for &feature in perm {
        let next_mask = mask | 1 << feature;
        let next = v.value(FeatureSet::from_mask(n, next_mask))?;
        out.push((feature, (next - prev, mask)));
        mask = next_mask;
        prev = next;
    }
    Ok(out)
}
