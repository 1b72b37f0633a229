//! Feature subsets as fixed-width bit vectors.

use crate::error::{Error, Result};

/// Hard cap on the feature count: subsets are stored in a `u64` bitmask.
pub const MAX_FEATURES: usize = 64;

/// A subset of the features `0..n`, stored as a bitmask.
///
/// The ground-set size `n` travels with the mask so that complements and
/// exhaustive enumeration are well defined. `n = 0` is allowed (the only
/// subset is the empty one); it arises from eliminating every feature.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    mask: u64,
    n: usize,
}

impl FeatureSet {
    /// The empty subset of a ground set with `n` features.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_FEATURES, "feature count {n} exceeds {MAX_FEATURES}");
        FeatureSet { mask: 0, n }
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_FEATURES, "feature count {n} exceeds {MAX_FEATURES}");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        FeatureSet { mask, n }
    }

    /// Builds a subset from explicit indices. Errors if an index is out of range.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut set = Self::empty(n);
        for &i in indices {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "feature id {i} out of range for n = {n}"
                )));
            }
            set.mask |= 1 << i;
        }
        Ok(set)
    }

    /// Wraps a raw bitmask. The caller guarantees all set bits are below `n`.
    pub(crate) fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= MAX_FEATURES);
        debug_assert!(n == 64 || mask >> n == 0, "mask {mask:#x} has bits >= {n}");
        FeatureSet { mask, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.mask >> i & 1 == 1
    }

    /// This set with feature `i` added. Panics if `i >= n`.
    pub fn with(&self, i: usize) -> Self {
        assert!(i < self.n, "feature id {i} out of range for n = {}", self.n);
        FeatureSet { mask: self.mask | 1 << i, n: self.n }
    }

    /// This set with feature `i` removed. Panics if `i >= n`.
    pub fn without(&self, i: usize) -> Self {
        assert!(i < self.n, "feature id {i} out of range for n = {}", self.n);
        FeatureSet { mask: self.mask & !(1 << i), n: self.n }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        FeatureSet { mask: self.mask | other.mask, n: self.n }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        FeatureSet { mask: self.mask & other.mask, n: self.n }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.n == other.n && self.mask & !other.mask == 0
    }

    /// Ascending iterator over member indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.n).filter(move |i| mask >> i & 1 == 1)
    }

    /// Canonical key: sorted comma-separated indices, `""` for the empty set.
    pub fn key(&self) -> String {
        let ids: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        ids.join(",")
    }

    /// Parses a canonical key back into a subset of `0..n`.
    pub fn parse_key(key: &str, n: usize) -> Result<Self> {
        let mut set = Self::empty(n);
        if key.is_empty() {
            return Ok(set);
        }
        for part in key.split(',') {
            let i: usize = part.trim().parse().map_err(|_| Error::InvalidSubsetKey {
                key: key.to_string(),
                reason: format!("{part:?} is not an index"),
            })?;
            if i >= n {
                return Err(Error::InvalidSubsetKey {
                    key: key.to_string(),
                    reason: format!("index {i} out of range for n = {n}"),
                });
            }
            set.mask |= 1 << i;
        }
        Ok(set)
    }
}

impl std::fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

/// Visits every subset of `mask` (including the empty set and `mask` itself)
/// in ascending numeric order.
pub(crate) fn for_each_subset_of(mask: u64, mut visit: impl FnMut(u64)) {
    let mut sub = 0u64;
    loop {
        visit(sub);
        if sub == mask {
            break;
        }
        sub = sub.wrapping_sub(mask) & mask;
    }
}

/// Visits every `size`-element subset of the indices in `pool`, ascending in
/// the induced numeric order.
pub(crate) fn for_each_combination(pool: &[usize], size: usize, mut visit: impl FnMut(u64)) {
    if size > pool.len() {
        return;
    }
    if size == 0 {
        visit(0);
        return;
    }
    // Gosper's hack over the compact index space, expanded through `pool`.
    let m = pool.len();
    let mut compact: u64 = (1u64 << size) - 1;
    let limit: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    loop {
        let mut mask = 0u64;
        let mut bits = compact;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            mask |= 1 << pool[i];
            bits &= bits - 1;
        }
        visit(mask);
        // Next compact combination.
        let c = compact & compact.wrapping_neg();
        let r = compact + c;
        if r > limit || r == 0 {
            break;
        }
        compact = (((r ^ compact) >> 2) / c) | r;
    }
}
