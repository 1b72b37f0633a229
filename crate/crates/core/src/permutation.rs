//! Seeded feature permutations shared by the sampled estimators.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default sample size for the sampled estimators (2^15 permutations).
pub const DEFAULT_PERMUTATION_COUNT: usize = 1 << 15;

/// Largest n for which the exhaustive all-n! plan is allowed.
const EXHAUSTIVE_CAP: usize = 10;

/// A reproducible set of permutations of `0..n`.
///
/// Permutation `j` of a seeded plan is generated from `(seed, j)` alone —
/// ChaCha stream `j` drives a Fisher–Yates shuffle — so any subrange can be
/// materialized independently of the rest and results do not depend on how
/// work is split across threads. The exhaustive variant enumerates all `n!`
/// permutations in lexicographic order.
#[derive(Clone, Debug)]
pub struct PermutationPlan {
    seed: u64,
    count: usize,
    n: usize,
    exhaustive: bool,
}

impl PermutationPlan {
    /// `count` seeded permutations of `0..n`.
    pub fn seeded(seed: u64, count: usize, n: usize) -> Self {
        PermutationPlan { seed, count, n, exhaustive: false }
    }

    /// All `n!` permutations, lexicographically ordered.
    pub fn exhaustive(n: usize) -> Result<Self> {
        if n > EXHAUSTIVE_CAP {
            return Err(Error::CapExceeded { n, cap: EXHAUSTIVE_CAP });
        }
        let count = (1..=n).product::<usize>().max(1);
        Ok(PermutationPlan { seed: 0, count, n, exhaustive: true })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The seed, for seeded plans.
    pub fn seed(&self) -> Option<u64> {
        (!self.exhaustive).then_some(self.seed)
    }

    /// Materializes permutation `j`.
    pub fn permutation(&self, j: usize) -> Vec<usize> {
        assert!(j < self.count, "permutation index {j} out of range");
        if self.exhaustive {
            return unrank(j, self.n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(j as u64);
        let mut perm: Vec<usize> = (0..self.n).collect();
        for i in (1..self.n).rev() {
            let pick = uniform_index(&mut rng, (i + 1) as u64) as usize;
            perm.swap(i, pick);
        }
        perm
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.count).map(move |j| self.permutation(j))
    }
}

/// Unbiased uniform draw from `0..bound` by rejection.
fn uniform_index(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound; // 2^64 mod bound
    loop {
        let r = rng.next_u64();
        if r >= threshold {
            return r % bound;
        }
    }
}

/// The `j`-th permutation of `0..n` in lexicographic order (Lehmer code).
fn unrank(mut j: usize, n: usize) -> Vec<usize> {
    let mut available: Vec<usize> = (0..n).collect();
    let mut factorial: usize = (1..n.max(1)).product::<usize>().max(1);
    let mut perm = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let idx = j / factorial;
        j %= factorial;
        perm.push(available.remove(idx));
        if remaining > 1 {
            factorial /= remaining - 1;
        }
    }
    perm
}
