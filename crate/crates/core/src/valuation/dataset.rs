//! Discrete tabular datasets and the binning used to produce them.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::feature_set::MAX_FEATURES;

/// How continuous columns are discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinningMode {
    /// Equal-count bins from the empirical quantiles; ties share a bin.
    Quantile,
    /// Equal-width bins over `[min, max]`.
    Width,
}

/// Discretization settings for dataset ingestion.
#[derive(Clone, Copy, Debug)]
pub struct BinningSpec {
    pub bins: usize,
    pub mode: BinningMode,
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec { bins: 8, mode: BinningMode::Quantile }
    }
}

/// Rows of discrete feature values plus one discrete target.
///
/// All values are small nonnegative integers after binning; the target is the
/// last column internally regardless of its position in the source file.
#[derive(Clone, Debug)]
pub struct Dataset {
    rows: Vec<Vec<u16>>,
    n: usize,
    cardinalities: Vec<usize>,
    names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from pre-binned rows. Each row carries `n` feature
    /// values followed by the target value.
    pub fn from_rows(rows: Vec<Vec<u16>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptyDataset);
        };
        if first.is_empty() {
            return Err(Error::MalformedDataset("rows need at least a target column".into()));
        }
        let arity = first.len();
        let n = arity - 1;
        if n > MAX_FEATURES {
            return Err(Error::CapExceeded { n, cap: MAX_FEATURES });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != arity {
                return Err(Error::MalformedDataset(format!(
                    "row {i} has {} cells, expected {arity}",
                    row.len()
                )));
            }
        }
        let cardinalities = (0..arity)
            .map(|c| {
                let mut distinct: Vec<u16> = rows.iter().map(|r| r[c]).collect();
                distinct.sort_unstable();
                distinct.dedup();
                distinct.len()
            })
            .collect();
        let names = (0..n)
            .map(|i| format!("f{i}"))
            .chain(std::iter::once("target".to_string()))
            .collect();
        Ok(Dataset { rows, n, cardinalities, names })
    }

    /// Reads a CSV with a header row. The target is the last column unless
    /// `target` names another one. Columns are discretized per `binning`.
    pub fn from_csv_reader(
        reader: impl Read,
        target: Option<&str>,
        binning: BinningSpec,
    ) -> Result<Self> {
        if binning.bins < 1 || binning.bins > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "bins must be in 1..={}, got {}",
                u16::MAX,
                binning.bins
            )));
        }
        let mut csv_reader = csv::Reader::from_reader(reader);
        let headers: Vec<String> =
            csv_reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let target_col = match target {
            Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::MalformedDataset(format!("no column named {name:?}"))
            })?,
            None => headers.len() - 1,
        };

        let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in csv_reader.records() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::MalformedDataset(format!(
                    "record has {} cells, expected {}",
                    record.len(),
                    headers.len()
                )));
            }
            for (c, cell) in record.iter().enumerate() {
                columns[c].push(cell.trim().to_string());
            }
        }
        if columns[0].is_empty() {
            return Err(Error::EmptyDataset);
        }

        let coded: Vec<Vec<u16>> = columns
            .iter()
            .enumerate()
            .map(|(c, col)| discretize_column(col, binning).map_err(|e| annotate(e, &headers[c])))
            .collect::<Result<_>>()?;

        let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != target_col).collect();
        let n = feature_cols.len();
        if n > MAX_FEATURES {
            return Err(Error::CapExceeded { n, cap: MAX_FEATURES });
        }
        let row_count = columns[0].len();
        let mut rows = Vec::with_capacity(row_count);
        for r in 0..row_count {
            let mut row: Vec<u16> = feature_cols.iter().map(|&c| coded[c][r]).collect();
            row.push(coded[target_col][r]);
            rows.push(row);
        }
        let mut dataset = Dataset::from_rows(rows)?;
        dataset.names = feature_cols
            .iter()
            .map(|&c| headers[c].clone())
            .chain(std::iter::once(headers[target_col].clone()))
            .collect();
        Ok(dataset)
    }

    pub fn from_csv_path(
        path: impl AsRef<Path>,
        target: Option<&str>,
        binning: BinningSpec,
    ) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?, target, binning)
    }

    /// Feature count (target excluded).
    pub fn feature_count(&self) -> usize {
        self.n
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Distinct-value counts per column, features first, target last.
    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    /// Column names, features first, target last.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn rows(&self) -> &[Vec<u16>] {
        &self.rows
    }
}

fn annotate(e: Error, column: &str) -> Error {
    match e {
        Error::MalformedDataset(msg) => {
            Error::MalformedDataset(format!("column {column:?}: {msg}"))
        }
        other => other,
    }
}

/// Maps one raw column to small integer codes.
///
/// Non-numeric columns become categories in lexicographic value order.
/// Numeric columns with at most `bins` distinct values become categories in
/// ascending value order; wider ones are binned per the spec.
fn discretize_column(cells: &[String], binning: BinningSpec) -> Result<Vec<u16>> {
    let parsed: Option<Vec<f64>> = cells.iter().map(|c| c.parse::<f64>().ok()).collect();
    let Some(numeric) = parsed else {
        let mut distinct: Vec<&String> = cells.iter().collect();
        distinct.sort();
        distinct.dedup();
        if distinct.len() > u16::MAX as usize {
            return Err(Error::MalformedDataset(format!(
                "{} distinct categories exceed {}",
                distinct.len(),
                u16::MAX
            )));
        }
        let code: BTreeMap<&String, u16> =
            distinct.iter().enumerate().map(|(i, &s)| (s, i as u16)).collect();
        return Ok(cells.iter().map(|c| code[c]).collect());
    };
    if numeric.iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedDataset("non-finite numeric cell".into()));
    }

    let mut distinct = numeric.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= binning.bins {
        let codes = numeric
            .iter()
            .map(|v| distinct.partition_point(|d| d < v) as u16)
            .collect();
        return Ok(codes);
    }

    match binning.mode {
        BinningMode::Quantile => {
            let mut sorted = numeric.clone();
            sorted.sort_by(f64::total_cmp);
            let m = sorted.len();
            // Upper edge of bin j is the ((j+1)·m/bins)-th order statistic, so
            // equal values always land in the same bin.
            let edges: Vec<f64> =
                (1..binning.bins).map(|j| sorted[(j * m / binning.bins).max(1) - 1]).collect();
            Ok(numeric.iter().map(|v| edges.partition_point(|e| e < v) as u16).collect())
        }
        BinningMode::Width => {
            let lo = numeric.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = numeric.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            Ok(numeric
                .iter()
                .map(|v| {
                    let b = ((v - lo) / span * binning.bins as f64) as usize;
                    b.min(binning.bins - 1) as u16
                })
                .collect())
        }
    }
}
