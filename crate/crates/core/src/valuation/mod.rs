//! Evaluation functions ν over feature subsets: table, mutual-information and
//! external-oracle backends plus elimination, duplication and monotone
//! closure transforms.

mod check;
mod dataset;
mod mi;
mod oracle;
mod table;

pub use check::{check_valuation, CheckOptions, CheckReport, Violation, CHECK_CAP};
pub use dataset::{BinningMode, BinningSpec, Dataset};
pub use table::ValuationTable;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::feature_set::{FeatureSet, MAX_FEATURES};

/// Default cap for exact methods that enumerate all `2^n` subsets.
pub const ENUMERATION_CAP: usize = 24;

/// An evaluation function ν: subsets of features → nonnegative reals.
///
/// Cloning is cheap and shares the memo cache, so one valuation can be handed
/// to many workers; evaluation is safe under concurrent read access and every
/// repeated query replays the cached value bit-exactly.
#[derive(Clone, Debug)]
pub struct Valuation {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    n: usize,
    kind: Kind,
    cache: DashMap<u64, f64>,
    cache_hits: AtomicU64,
}

#[derive(Debug)]
enum Kind {
    Table(ValuationTable),
    MutualInfo(mi::MiModel),
    Oracle(oracle::OracleBackend),
    /// Restriction to the kept features; `kept[new_id] = old_id`.
    Eliminated { parent: Valuation, kept: Vec<usize> },
    /// Features `parent.n()..n` behave exactly like `source`.
    Duplicated { parent: Valuation, source: usize },
}

impl Valuation {
    fn from_kind(n: usize, kind: Kind) -> Self {
        Valuation {
            inner: Arc::new(Inner {
                n,
                kind,
                cache: DashMap::new(),
                cache_hits: AtomicU64::new(0),
            }),
        }
    }

    /// Wraps an explicit value table.
    pub fn from_table(table: ValuationTable) -> Self {
        let n = table.n();
        Self::from_kind(n, Kind::Table(table))
    }

    /// Plug-in mutual information I(X_S; Y) in bits over a discrete dataset.
    pub fn mutual_information(dataset: Dataset) -> Self {
        let n = dataset.feature_count();
        Self::from_kind(n, Kind::MutualInfo(mi::MiModel::new(dataset)))
    }

    /// Delegates evaluation to an external program; see the module docs of
    /// `oracle` for the line protocol. Replies persist at `cache_path`.
    pub fn oracle(command: &str, n: usize, cache_path: Option<PathBuf>) -> Result<Self> {
        if n > MAX_FEATURES {
            return Err(Error::CapExceeded { n, cap: MAX_FEATURES });
        }
        let backend = oracle::OracleBackend::new(command.to_string(), n, cache_path)?;
        Ok(Self::from_kind(n, Kind::Oracle(backend)))
    }

    /// Feature count of the ground set.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of distinct subsets evaluated so far (memo-cache size).
    pub fn evaluated_subsets(&self) -> u64 {
        self.inner.cache.len() as u64
    }

    /// Number of queries answered from the memo cache.
    pub fn cache_hits(&self) -> u64 {
        self.inner.cache_hits.load(Ordering::Relaxed)
    }

    /// Process-invocation count for oracle-backed valuations.
    pub fn oracle_invocations(&self) -> Option<u64> {
        match &self.inner.kind {
            Kind::Oracle(backend) => Some(backend.invocations()),
            _ => None,
        }
    }

    /// ν(S). Returns 0 for the empty set on every backend.
    pub fn value(&self, subset: FeatureSet) -> Result<f64> {
        assert_eq!(subset.n(), self.inner.n, "subset arity does not match valuation");
        let mask = subset.mask();
        if let Some(v) = self.inner.cache.get(&mask) {
            self.inner.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*v);
        }
        let value = match &self.inner.kind {
            Kind::Table(table) => table
                .get_mask(mask)
                .ok_or_else(|| Error::MissingEntry { key: subset.key() })?,
            Kind::MutualInfo(model) => model.value(subset),
            Kind::Oracle(backend) => backend.query(subset)?,
            Kind::Eliminated { parent, kept } => {
                let mut parent_mask = 0u64;
                for (new_id, &old_id) in kept.iter().enumerate() {
                    if mask >> new_id & 1 == 1 {
                        parent_mask |= 1 << old_id;
                    }
                }
                parent.value(FeatureSet::from_mask(parent.n(), parent_mask))?
            }
            Kind::Duplicated { parent, source } => {
                let base_n = parent.n();
                let low = if base_n == 64 { mask } else { mask & ((1u64 << base_n) - 1) };
                let collapsed =
                    if base_n < 64 && mask >> base_n != 0 { low | 1 << source } else { low };
                parent.value(FeatureSet::from_mask(base_n, collapsed))?
            }
        };
        debug_assert!(value.is_finite(), "valuation produced non-finite value");
        self.inner.cache.insert(mask, value);
        Ok(value)
    }

    /// Marginal contribution Δ(f, S, ν) = ν(S∪{f}) − ν(S); exactly 0 when f ∈ S.
    pub fn delta(&self, f: usize, subset: FeatureSet) -> Result<f64> {
        assert!(f < self.inner.n, "feature id {f} out of range for n = {}", self.inner.n);
        if subset.contains(f) {
            return Ok(0.0);
        }
        Ok(self.value(subset.with(f))? - self.value(subset)?)
    }

    /// Restricts ν to F∖T, reindexing the kept features densely.
    ///
    /// Returns the restricted valuation and the old→new id mapping
    /// (`None` for eliminated features).
    pub fn eliminate(&self, removed: FeatureSet) -> (Valuation, Vec<Option<usize>>) {
        assert_eq!(removed.n(), self.inner.n, "subset arity does not match valuation");
        let kept: Vec<usize> = (0..self.inner.n).filter(|&i| !removed.contains(i)).collect();
        let mut mapping = vec![None; self.inner.n];
        for (new_id, &old_id) in kept.iter().enumerate() {
            mapping[old_id] = Some(new_id);
        }
        let n = kept.len();
        let v = Self::from_kind(n, Kind::Eliminated { parent: self.clone(), kept });
        (v, mapping)
    }

    /// Extends ν with `copies` informationally identical copies of feature
    /// `f`; the copies get ids `n..n+copies`.
    pub fn duplicate_feature(&self, f: usize, copies: usize) -> Result<Valuation> {
        assert!(f < self.inner.n, "feature id {f} out of range for n = {}", self.inner.n);
        if copies == 0 {
            return Err(Error::InvalidParameter("copies must be positive".into()));
        }
        let n = self.inner.n + copies;
        if n > MAX_FEATURES {
            return Err(Error::CapExceeded { n, cap: MAX_FEATURES });
        }
        Ok(Self::from_kind(n, Kind::Duplicated { parent: self.clone(), source: f }))
    }

    /// ν̃(S) = max over T ⊆ S of ν(T), the least monotone majorant.
    ///
    /// Computed by subset-lattice dynamic programming in O(n·2^n) and returned
    /// as a table-backed valuation. Idempotent; identity on monotone inputs.
    pub fn monotone_closure(&self) -> Result<Valuation> {
        let n = self.inner.n;
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
        }
        let mut closed = self.dense_values()?;
        for mask in 1..closed.len() as u64 {
            let mut best = closed[mask as usize];
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                let below = closed[(mask & !(1u64 << i)) as usize];
                if below > best {
                    best = below;
                }
            }
            closed[mask as usize] = best;
        }
        let mut table = ValuationTable::new(n)?;
        for (mask, &value) in closed.iter().enumerate().skip(1) {
            table.insert(FeatureSet::from_mask(n, mask as u64), value)?;
        }
        Ok(Valuation::from_table(table))
    }

    /// Evaluates every subset, indexed by mask. Caller enforces a cap.
    pub(crate) fn dense_values(&self) -> Result<Vec<f64>> {
        let n = self.inner.n;
        assert!(n < usize::BITS as usize, "dense evaluation needs a capped n");
        let mut values = Vec::with_capacity(1usize << n);
        for mask in 0..1u64 << n {
            values.push(self.value(FeatureSet::from_mask(n, mask))?);
        }
        Ok(values)
    }
}
