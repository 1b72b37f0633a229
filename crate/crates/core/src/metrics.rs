//! Rankings, ranking-quality metrics (NDCG, minimizing Kendall distance)
//! and the duplication-robustness harness.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scores::{ImportanceScores, Method, MethodSpec};
use crate::valuation::Valuation;

/// Feature ids ordered best-first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ranking {
    pub order: Vec<usize>,
}

/// Orders features by descending score, ties broken by ascending feature id;
/// optionally truncated to the top k.
pub fn rank(scores: &ImportanceScores, k: Option<usize>) -> Ranking {
    let mut order: Vec<usize> = (0..scores.n()).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b].total_cmp(&scores.scores[a]).then(a.cmp(&b))
    });
    if let Some(k) = k {
        order.truncate(k);
    }
    Ranking { order }
}

/// NDCG of the top-k prefix against a binary relevance set.
///
/// Gains are 1 for relevant ids, discount 1/log2(i+1) at 1-based position i,
/// normalized by the ideal prefix (all relevant items first).
pub fn ndcg_at_k(ranking: &Ranking, relevant: &HashSet<usize>, k: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevanceSet);
    }
    if k > ranking.order.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds ranking length {}",
            ranking.order.len()
        )));
    }
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let dcg: f64 = ranking.order[..k]
        .iter()
        .enumerate()
        .filter(|(_, id)| relevant.contains(id))
        .map(|(i, _)| discount(i))
        .sum();
    let ideal: f64 = (0..k.min(relevant.len())).map(discount).sum();
    Ok(if ideal == 0.0 { 0.0 } else { dcg / ideal })
}

/// Minimizing Kendall distance between two equal-length top-k prefixes over a
/// shared universe: the smallest Kendall-tau distance attainable by any pair
/// of completions to full rankings.
///
/// A pair of ids costs 1 exactly when both prefixes force an order on it and
/// the forced orders conflict; every other pair admits agreeing completions.
pub fn mkd(prefix_a: &[usize], prefix_b: &[usize], universe: &[usize]) -> Result<u64> {
    if prefix_a.len() != prefix_b.len() {
        return Err(Error::PrefixLengthMismatch { left: prefix_a.len(), right: prefix_b.len() });
    }
    let members: HashSet<usize> = universe.iter().copied().collect();
    let positions = |prefix: &[usize]| -> Result<HashMap<usize, usize>> {
        let mut map = HashMap::new();
        for (pos, &id) in prefix.iter().enumerate() {
            if !members.contains(&id) {
                return Err(Error::PrefixNotInUniverse { id });
            }
            if map.insert(id, pos).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate id {id} in prefix")));
            }
        }
        Ok(map)
    };
    let pos_a = positions(prefix_a)?;
    let pos_b = positions(prefix_b)?;

    // Order forced on (x, y) by one prefix: Some(true) if x must precede y in
    // every completion, Some(false) for the reverse, None if free.
    let forced = |pos: &HashMap<usize, usize>, x: usize, y: usize| -> Option<bool> {
        match (pos.get(&x), pos.get(&y)) {
            (Some(px), Some(py)) => Some(px < py),
            (Some(_), None) => Some(true),
            (None, Some(_)) => Some(false),
            (None, None) => None,
        }
    };

    let mut distance = 0u64;
    for (i, &x) in universe.iter().enumerate() {
        for &y in &universe[i + 1..] {
            if let (Some(a), Some(b)) = (forced(&pos_a, x, y), forced(&pos_b, x, y)) {
                if a != b {
                    distance += 1;
                }
            }
        }
    }
    Ok(distance)
}

/// Outcome of the duplication-robustness protocol for one method.
#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    pub method: Method,
    pub duplicated_feature: usize,
    pub copies: usize,
    /// Prefix length → MKD between the pre- and post-duplication rankings.
    pub mkd_at_k: BTreeMap<usize, u64>,
    pub ranking_before: Ranking,
    pub ranking_after: Ranking,
}

impl RobustnessReport {
    /// Plot-ready `k,mkd` lines.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("k,mkd\n");
        for (k, d) in &self.mkd_at_k {
            out.push_str(&format!("{k},{d}\n"));
        }
        out
    }
}

/// Scores `v`, duplicates the top-ranked feature `copies` times, rescores,
/// and reports the MKD between top-k prefixes for each requested k.
///
/// Copy ids in the post-duplication ranking are mapped back to the original
/// feature and only its first occurrence is kept, so both rankings share the
/// original universe.
pub fn robustness_harness(
    v: &Valuation,
    spec: &MethodSpec,
    copies: usize,
    ks: &[usize],
) -> Result<RobustnessReport> {
    let n = v.n();
    if n == 0 {
        return Err(Error::InvalidParameter("robustness needs at least one feature".into()));
    }
    for &k in ks {
        if k > n {
            return Err(Error::InvalidParameter(format!("prefix length {k} exceeds n = {n}")));
        }
    }
    let before_scores = spec.score(v)?;
    let ranking_before = rank(&before_scores, None);
    let top = ranking_before.order[0];

    let after_valuation =
        if copies == 0 { v.clone() } else { v.duplicate_feature(top, copies)? };
    let after_scores = spec.score(&after_valuation)?;
    let raw_after = rank(&after_scores, None);
    // first-occurrence rule: copies collapse onto the duplicated feature
    let mut seen = HashSet::new();
    let mut order = Vec::with_capacity(n);
    for &id in &raw_after.order {
        let mapped = if id >= n { top } else { id };
        if seen.insert(mapped) {
            order.push(mapped);
        }
    }
    let ranking_after = Ranking { order };

    let universe: Vec<usize> = (0..n).collect();
    let mut mkd_at_k = BTreeMap::new();
    for &k in ks {
        let d = mkd(&ranking_before.order[..k], &ranking_after.order[..k], &universe)?;
        mkd_at_k.insert(k, d);
    }
    Ok(RobustnessReport {
        method: spec.method(),
        duplicated_feature: top,
        copies,
        mkd_at_k,
        ranking_before,
        ranking_after,
    })
}
