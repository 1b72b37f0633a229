//! Exhaustive valuation diagnostics: normalization, monotonicity,
//! submodularity and its size-restricted variants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;

use super::Valuation;

/// Default ceiling for exhaustive diagnostics (2^n values, O(4^n) pair scans).
pub const CHECK_CAP: usize = 16;

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Largest feature count the exhaustive scans will accept.
    pub cap: usize,
    /// When set, also test k-size and soft k-size submodularity at this k.
    pub k: Option<usize>,
    /// Slack applied to every inequality, absorbing float dust.
    pub tolerance: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { cap: CHECK_CAP, k: None, tolerance: 1e-12 }
    }
}

/// First witness found for each violated property.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "property", rename_all = "kebab-case")]
pub enum Violation {
    Normalization { value: f64 },
    Monotonicity { subset: String, superset: String, subset_value: f64, superset_value: f64 },
    Submodularity { s: String, t: String, lhs: f64, rhs: f64 },
    KSizeSubmodularity { s: String, t: String, lhs: f64, rhs: f64 },
    SoftKSizeSubmodularity { t: String, feature: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub n: usize,
    pub normalized: bool,
    pub monotone: bool,
    pub submodular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_size_submodular: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soft_k_size_submodular: Option<bool>,
    pub violations: Vec<Violation>,
}

/// Evaluates every subset and verifies the evaluation-function contract.
///
/// Global submodularity is checked through the second-difference form
/// `ν(S∪{i}) + ν(S∪{j}) ≥ ν(S∪{i,j}) + ν(S)`, which is equivalent to the
/// pairwise inequality but needs O(n²·2^n) work instead of O(4^n). The
/// k-size variants scan subset pairs directly.
pub fn check_valuation(v: &Valuation, opts: CheckOptions) -> Result<CheckReport> {
    let n = v.n();
    if n > opts.cap {
        return Err(Error::CapExceeded { n, cap: opts.cap });
    }
    if let Some(k) = opts.k {
        if k > n {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
        }
    }
    let values = v.dense_values()?;
    let tol = opts.tolerance;
    let key = |mask: u64| FeatureSet::from_mask(n, mask).key();
    let mut violations = Vec::new();

    let normalized = values[0].abs() <= tol;
    if !normalized {
        violations.push(Violation::Normalization { value: values[0] });
    }

    let size = values.len() as u64;
    let mut monotone = true;
    'mono: for mask in 0..size {
        for i in 0..n {
            let bit = 1u64 << i;
            if mask & bit == 0 && values[mask as usize] > values[(mask | bit) as usize] + tol {
                monotone = false;
                violations.push(Violation::Monotonicity {
                    subset: key(mask),
                    superset: key(mask | bit),
                    subset_value: values[mask as usize],
                    superset_value: values[(mask | bit) as usize],
                });
                break 'mono;
            }
        }
    }

    let mut submodular = true;
    'sub: for mask in 0..size {
        for i in 0..n {
            if mask >> i & 1 == 1 {
                continue;
            }
            for j in i + 1..n {
                if mask >> j & 1 == 1 {
                    continue;
                }
                let si = mask | 1 << i;
                let sj = mask | 1 << j;
                let sij = si | 1 << j;
                let lhs = values[si as usize] + values[sj as usize];
                let rhs = values[sij as usize] + values[mask as usize];
                if lhs + tol < rhs {
                    submodular = false;
                    violations.push(Violation::Submodularity {
                        s: key(si),
                        t: key(sj),
                        lhs,
                        rhs,
                    });
                    break 'sub;
                }
            }
        }
    }

    let (k_size_submodular, soft_k_size_submodular) = match opts.k {
        None => (None, None),
        Some(k) => {
            let k_size = check_k_size(&values, n, k, tol, &mut violations);
            let soft = check_soft_k_size(&values, n, k, tol, &mut violations);
            (Some(k_size), Some(soft))
        }
    };

    Ok(CheckReport {
        n,
        normalized,
        monotone,
        submodular,
        k: opts.k,
        k_size_submodular,
        soft_k_size_submodular,
        violations,
    })
}

/// ν(S) + ν(T) ≥ ν(S∪T) + ν(S∩T) for every pair with |S|, |T| ≥ k.
fn check_k_size(values: &[f64], n: usize, k: usize, tol: f64, out: &mut Vec<Violation>) -> bool {
    let size = values.len() as u64;
    for s in 0..size {
        if (s.count_ones() as usize) < k {
            continue;
        }
        for t in 0..size {
            if (t.count_ones() as usize) < k {
                continue;
            }
            let lhs = values[s as usize] + values[t as usize];
            let rhs = values[(s | t) as usize] + values[(s & t) as usize];
            if lhs + tol < rhs {
                out.push(Violation::KSizeSubmodularity {
                    s: FeatureSet::from_mask(n, s).key(),
                    t: FeatureSet::from_mask(n, t).key(),
                    lhs,
                    rhs,
                });
                return false;
            }
        }
    }
    true
}

/// For every |T| > k and every feature f, some S ⊆ T with |S| ≤ k satisfies
/// ν(S∪{f}) + ν(T) ≥ ν((S∪{f})∪T) + ν((S∪{f})∩T).
fn check_soft_k_size(values: &[f64], n: usize, k: usize, tol: f64, out: &mut Vec<Violation>) -> bool {
    let size = values.len() as u64;
    for t in 0..size {
        if t.count_ones() as usize <= k {
            continue;
        }
        for f in 0..n {
            let fbit = 1u64 << f;
            let mut found = false;
            crate::feature_set::for_each_subset_of(t, |s| {
                if found || s.count_ones() as usize > k {
                    return;
                }
                let sf = s | fbit;
                let lhs = values[sf as usize] + values[t as usize];
                let rhs = values[(sf | t) as usize] + values[(sf & t) as usize];
                if lhs + tol >= rhs {
                    found = true;
                }
            });
            if !found {
                out.push(Violation::SoftKSizeSubmodularity {
                    t: FeatureSet::from_mask(n, t).key(),
                    feature: f,
                });
                return false;
            }
        }
    }
    true
}
