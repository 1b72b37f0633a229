//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here recomputes expected values through routes that do not
//! touch the library's own enumeration or estimation paths: closed-form
//! entropy arithmetic for the AND/OR game, plain max/average scans over raw
//! tables for the scores, and full completion enumeration for MKD.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mci_core::{Dataset, FeatureSet, Valuation, ValuationTable};

// ---------------------------------------------------------------------------
// The three-feature AND/OR game: y = f1 ∧ (f2 ∨ f3) over fair coins.
// ---------------------------------------------------------------------------

/// All 8 equiprobable rows of (f1, f2, f3, y).
pub fn andor_dataset() -> Dataset {
    let mut rows = Vec::new();
    for bits in 0..8u16 {
        let f1 = bits & 1;
        let f2 = bits >> 1 & 1;
        let f3 = bits >> 2 & 1;
        rows.push(vec![f1, f2, f3, f1 & (f2 | f3)]);
    }
    Dataset::from_rows(rows).expect("andor dataset")
}

/// The game's mutual-information valuation.
pub fn andor_mi_valuation() -> Valuation {
    Valuation::mutual_information(andor_dataset())
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Closed-form I(X_S; Y) for the AND/OR game, via I = H(Y) − H(Y | X_S).
///
/// Groups the 8 outcomes by their projection onto S and folds the binary
/// entropy of p(y = 1 | group) — a different route than the plug-in
/// count-table estimator it checks.
pub fn andor_closed_form(subset: FeatureSet) -> f64 {
    let ids: Vec<usize> = subset.iter().collect();
    let mut group_total = std::collections::BTreeMap::new();
    let mut group_ones = std::collections::BTreeMap::new();
    for bits in 0..8u32 {
        let f = [bits & 1, bits >> 1 & 1, bits >> 2 & 1];
        let y = f[0] & (f[1] | f[2]);
        let key: Vec<u32> = ids.iter().map(|&i| f[i]).collect();
        *group_total.entry(key.clone()).or_insert(0u32) += 1;
        *group_ones.entry(key).or_insert(0u32) += y;
    }
    let h_y = binary_entropy(3.0 / 8.0);
    let mut conditional = 0.0;
    for (key, &total) in &group_total {
        let ones = group_ones[key];
        conditional += total as f64 / 8.0 * binary_entropy(ones as f64 / total as f64);
    }
    h_y - conditional
}

/// The game as an explicit table built from the closed form.
pub fn andor_table() -> ValuationTable {
    ValuationTable::from_fn(3, andor_closed_form).expect("andor table")
}

// ---------------------------------------------------------------------------
// Random table generators.
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform values in [0, 1), empty set pinned to 0; generally non-monotone.
pub fn random_table(n: usize, rng: &mut StdRng) -> ValuationTable {
    ValuationTable::from_fn(n, |_| rng.random_range(0.0..1.0)).expect("random table")
}

/// Monotone table: each set's value is the max over its facets plus a
/// nonnegative increment (zero with probability 0.3).
pub fn random_monotone_table(n: usize, rng: &mut StdRng) -> ValuationTable {
    let size = 1usize << n;
    let mut values = vec![0.0f64; size];
    for mask in 1..size as u64 {
        let mut floor = 0.0f64;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            floor = floor.max(values[(mask & !(1u64 << i)) as usize]);
        }
        let bump = if rng.random_bool(0.7) { rng.random_range(0.0..0.25) } else { 0.0 };
        values[mask as usize] = floor + bump;
    }
    let mut table = ValuationTable::new(n).expect("table");
    for mask in 1..size as u64 {
        table
            .insert(feature_set(n, mask), values[mask as usize])
            .expect("insert");
    }
    table
}

/// Weighted-coverage table: monotone and submodular by construction.
pub fn random_coverage_table(n: usize, rng: &mut StdRng) -> ValuationTable {
    let universe = 6;
    let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(0.1..1.0)).collect();
    let covers: Vec<u32> = (0..n)
        .map(|_| (0..universe).filter(|_| rng.random_bool(0.45)).fold(0u32, |acc, u| acc | 1 << u))
        .collect();
    ValuationTable::from_fn(n, |s| {
        let covered = s.iter().fold(0u32, |acc, i| acc | covers[i]);
        (0..universe).filter(|&u| covered >> u & 1 == 1).map(|u| weights[u]).sum()
    })
    .expect("coverage table")
}

pub fn feature_set(n: usize, mask: u64) -> FeatureSet {
    FeatureSet::from_indices(n, &(0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .expect("feature set")
}

pub fn table_values(table: &ValuationTable) -> Vec<f64> {
    let n = table.n();
    (0..1u64 << n).map(|mask| table.get(feature_set(n, mask)).expect("total table")).collect()
}

pub fn to_valuation(table: &ValuationTable) -> Valuation {
    Valuation::from_table(table.clone())
}

// ---------------------------------------------------------------------------
// Independent score oracles over raw tables.
// ---------------------------------------------------------------------------

/// Straight max-over-all-subsets MCI, scanning every mask of the raw table.
pub fn brute_force_mci(table: &ValuationTable) -> Vec<f64> {
    let n = table.n();
    let values = table_values(table);
    (0..n)
        .map(|f| {
            let mut best = f64::NEG_INFINITY;
            for mask in 0..1u64 << n {
                if mask >> f & 1 == 1 {
                    continue;
                }
                let d = values[(mask | 1 << f) as usize] - values[mask as usize];
                if d > best {
                    best = d;
                }
            }
            best
        })
        .collect()
}

/// Shapley value as the plain average over all n! permutation marginals.
pub fn brute_force_shapley(table: &ValuationTable) -> Vec<f64> {
    let n = table.n();
    let values = table_values(table);
    let mut sums = vec![0.0f64; n];
    let mut count = 0u64;
    for perm in permutations(&(0..n).collect::<Vec<_>>()) {
        let mut mask = 0u64;
        for &f in &perm {
            let next = mask | 1 << f;
            sums[f] += values[next as usize] - values[mask as usize];
            mask = next;
        }
        count += 1;
    }
    sums.iter().map(|s| s / count as f64).collect()
}

/// Max over subsets T ⊆ S of the raw value, scanned directly.
pub fn brute_force_monotone_closure(table: &ValuationTable) -> Vec<f64> {
    let n = table.n();
    let values = table_values(table);
    (0..1u64 << n)
        .map(|mask| {
            let mut best = f64::NEG_INFINITY;
            let mut sub = 0u64;
            loop {
                best = best.max(values[sub as usize]);
                if sub == mask {
                    break;
                }
                sub = sub.wrapping_sub(mask) & mask;
            }
            best
        })
        .collect()
}

/// All permutations of `items`, by simple recursion.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Kendall-tau distance between two full rankings of the same ids.
pub fn kendall_distance(a: &[usize], b: &[usize]) -> u64 {
    let pos = |r: &[usize]| -> std::collections::HashMap<usize, usize> {
        r.iter().enumerate().map(|(i, &x)| (x, i)).collect()
    };
    let pa = pos(a);
    let pb = pos(b);
    let mut d = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (x, y) = (a[i], a[j]);
            if (pa[&x] < pa[&y]) != (pb[&x] < pb[&y]) {
                d += 1;
            }
        }
    }
    d
}

/// MKD by full enumeration of completion pairs.
pub fn brute_force_mkd(prefix_a: &[usize], prefix_b: &[usize], universe: &[usize]) -> u64 {
    let tails = |prefix: &[usize]| -> Vec<usize> {
        universe.iter().copied().filter(|u| !prefix.contains(u)).collect()
    };
    let mut best = u64::MAX;
    for tail_a in permutations(&tails(prefix_a)) {
        let mut full_a = prefix_a.to_vec();
        full_a.extend(tail_a);
        for tail_b in permutations(&tails(prefix_b)) {
            let mut full_b = prefix_b.to_vec();
            full_b.extend(tail_b);
            best = best.min(kendall_distance(&full_a, &full_b));
        }
    }
    best
}
