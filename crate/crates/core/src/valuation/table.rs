//! Explicit value tables over the subset lattice.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_set::{FeatureSet, MAX_FEATURES};

/// A mapping from subsets to values, the simplest valuation backend.
///
/// The empty set is pinned to 0 at construction. Entries must be finite and
/// nonnegative; totality over all `2^n` subsets is not required here — exact
/// scoring surfaces a `MissingEntry` error when it hits a gap.
#[derive(Clone, Debug)]
pub struct ValuationTable {
    n: usize,
    values: HashMap<u64, f64>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    n: usize,
    values: BTreeMap<String, f64>,
}

impl ValuationTable {
    /// An empty table holding only ν(∅) = 0.
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_FEATURES {
            return Err(Error::CapExceeded { n, cap: MAX_FEATURES });
        }
        let mut values = HashMap::new();
        values.insert(0u64, 0.0);
        Ok(ValuationTable { n, values })
    }

    /// A total table produced by evaluating `f` on every subset.
    pub fn from_fn(n: usize, mut f: impl FnMut(FeatureSet) -> f64) -> Result<Self> {
        let mut table = Self::new(n)?;
        let full = FeatureSet::full(n).mask();
        for mask in 1..=full {
            table.insert(FeatureSet::from_mask(n, mask), f(FeatureSet::from_mask(n, mask)))?;
            if mask == full {
                break; // avoid overflow when n == 64 (never at exact scale, but cheap)
            }
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inserts one entry. The empty set may only carry 0.
    pub fn insert(&mut self, set: FeatureSet, value: f64) -> Result<()> {
        assert_eq!(set.n(), self.n, "subset arity does not match table");
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidValue { key: set.key(), value });
        }
        if set.is_empty() && value != 0.0 {
            return Err(Error::Normalization { value });
        }
        self.values.insert(set.mask(), value);
        Ok(())
    }

    pub fn get(&self, set: FeatureSet) -> Option<f64> {
        assert_eq!(set.n(), self.n, "subset arity does not match table");
        self.values.get(&set.mask()).copied()
    }

    pub(crate) fn get_mask(&self, mask: u64) -> Option<f64> {
        self.values.get(&mask).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every one of the `2^n` subsets has an entry.
    pub fn is_total(&self) -> bool {
        self.n < usize::BITS as usize && self.values.len() == 1usize << self.n
    }

    /// Reads the JSON table format `{"n": int, "values": {"0,2": 0.5, ...}}`.
    ///
    /// The `""` entry (empty set) must be present and zero.
    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let file: TableFile = serde_json::from_reader(reader)?;
        if file.n > MAX_FEATURES {
            return Err(Error::CapExceeded { n: file.n, cap: MAX_FEATURES });
        }
        match file.values.get("") {
            None => return Err(Error::MissingEntry { key: String::new() }),
            Some(&v) if v != 0.0 => return Err(Error::Normalization { value: v }),
            Some(_) => {}
        }
        let mut table = Self::new(file.n)?;
        for (key, value) in &file.values {
            let set = FeatureSet::parse_key(key, file.n)?;
            table.insert(set, *value)?;
        }
        Ok(table)
    }

    pub fn from_json_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_reader(std::fs::File::open(path)?)
    }

    /// Writes the JSON table format with keys in lexicographic order.
    pub fn to_json_writer(&self, writer: impl Write) -> Result<()> {
        let values: BTreeMap<String, f64> = self
            .values
            .iter()
            .map(|(&mask, &v)| (FeatureSet::from_mask(self.n, mask).key(), v))
            .collect();
        let file = TableFile { n: self.n, values };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }

    pub fn to_json_path(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        self.to_json_writer(&mut file)?;
        use std::io::Write as _;
        writeln!(file)?;
        Ok(())
    }
}
