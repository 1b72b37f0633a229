//! External-process valuations with a persistent reply cache.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;

/// Tolerance on the oracle's reply for the empty set.
const EMPTY_SET_TOLERANCE: f64 = 1e-12;

/// Runs `sh -c command` once per distinct subset, writing the subset key on
/// stdin and reading one decimal value from stdout. Replies are persisted to
/// `cache_path` (JSON object of subset-key to value) so re-runs never
/// re-invoke the program.
pub(crate) struct OracleBackend {
    command: String,
    n: usize,
    cache_path: Option<PathBuf>,
    replies: DashMap<u64, f64>,
    gates: DashMap<u64, Arc<Mutex<()>>>,
    invocations: AtomicU64,
    disk: Mutex<()>,
}

impl OracleBackend {
    pub(crate) fn new(command: String, n: usize, cache_path: Option<PathBuf>) -> Result<Self> {
        let replies = DashMap::new();
        if let Some(path) = &cache_path {
            if path.exists() {
                let text = std::fs::read_to_string(path)?;
                let stored: BTreeMap<String, f64> = serde_json::from_str(&text)?;
                for (key, value) in stored {
                    let set = FeatureSet::parse_key(&key, n)?;
                    replies.insert(set.mask(), value);
                }
            }
        }
        Ok(OracleBackend {
            command,
            n,
            cache_path,
            replies,
            gates: DashMap::new(),
            invocations: AtomicU64::new(0),
            disk: Mutex::new(()),
        })
    }

    pub(crate) fn invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }

    pub(crate) fn query(&self, subset: FeatureSet) -> Result<f64> {
        if let Some(v) = self.replies.get(&subset.mask()) {
            return Ok(*v);
        }
        // One in-flight process per distinct subset; distinct subsets may run
        // concurrently.
        let gate = self
            .gates
            .entry(subset.mask())
            .or_insert_with(|| Arc::new(Mutex::new(())))
            .clone();
        let _held = gate.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(v) = self.replies.get(&subset.mask()) {
            return Ok(*v);
        }
        let value = self.invoke(subset)?;
        self.replies.insert(subset.mask(), value);
        self.persist()?;
        Ok(value)
    }

    fn invoke(&self, subset: FeatureSet) -> Result<f64> {
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::OracleFailure { reason: format!("spawn failed: {e}") })?;
        child
            .stdin
            .take()
            .expect("stdin was piped")
            .write_all(format!("{}\n", subset.key()).as_bytes())
            .map_err(|e| Error::OracleFailure { reason: format!("write failed: {e}") })?;
        let output = child
            .wait_with_output()
            .map_err(|e| Error::OracleFailure { reason: format!("wait failed: {e}") })?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(Error::OracleFailure {
                reason: format!("exit status {} ({})", output.status, stderr.trim()),
            });
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let reply = stdout.trim();
        let value: f64 = reply.parse().map_err(|_| Error::OracleFailure {
            reason: format!("unparsable reply {reply:?} for subset {{{}}}", subset.key()),
        })?;
        if !value.is_finite() {
            return Err(Error::OracleFailure {
                reason: format!("non-finite reply {value} for subset {{{}}}", subset.key()),
            });
        }
        if subset.is_empty() {
            if value.abs() > EMPTY_SET_TOLERANCE {
                return Err(Error::Normalization { value });
            }
            return Ok(0.0);
        }
        if value < 0.0 {
            return Err(Error::OracleFailure {
                reason: format!("negative reply {value} for subset {{{}}}", subset.key()),
            });
        }
        Ok(value)
    }

    fn persist(&self) -> Result<()> {
        let Some(path) = &self.cache_path else {
            return Ok(());
        };
        let _held = self.disk.lock().unwrap_or_else(|e| e.into_inner());
        let snapshot: BTreeMap<String, f64> = self
            .replies
            .iter()
            .map(|entry| (FeatureSet::from_mask(self.n, *entry.key()).key(), *entry.value()))
            .collect();
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&snapshot)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

impl std::fmt::Debug for OracleBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleBackend")
            .field("command", &self.command)
            .field("n", &self.n)
            .field("cached", &self.replies.len())
            .finish()
    }
}
