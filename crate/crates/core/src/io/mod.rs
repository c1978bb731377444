//! Run configuration, atomic file output and the content-addressed solve cache.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::DomainSpec;
use crate::error::Result;
use crate::solver::{solve_spectrum, SolveResult, SolverConfig};

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "STEKLOV_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".steklov-cache";
const ENTRY_SCHEMA: &str = "steklov-cache/1";

/// Fully resolved invocation, embedded verbatim in every artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub family: Option<String>,
    pub dim: Option<usize>,
    pub params: BTreeMap<String, f64>,
    pub schedule: Vec<f64>,
    pub j_max: Option<usize>,
    pub solver: Option<SolverConfig>,
    /// Coarsest-level mesh size of each solved point.
    pub h_ladder: Vec<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), version: crate::VERSION.to_string(), ..Self::default() }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config is plain data")
    }
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(
        ".{name}.tmp-{}-{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// An entry existed but could not be used; it was recomputed.
    Replaced,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    schema: String,
    key: String,
    version: String,
    domain: DomainSpec,
    config: SolverConfig,
    result: SolveResult,
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    schema: &'a str,
    version: &'a str,
    domain: &'a DomainSpec,
    config: &'a SolverConfig,
}

#[derive(Clone, Debug)]
pub struct Cache {
    pub dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from [`CACHE_ENV`] if set, else `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)),
            _ => Self::new(fallback),
        }
    }

    /// SHA-256 over the canonical JSON of everything that affects a solve.
    pub fn key(spec: &DomainSpec, cfg: &SolverConfig) -> String {
        let material = KeyMaterial { schema: ENTRY_SCHEMA, version: crate::VERSION, domain: spec, config: cfg };
        let bytes = serde_json::to_vec(&material).expect("key material is plain data");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// `Ok(None)` on a miss; `Err` text when an entry exists but is unusable.
    fn read(&self, spec: &DomainSpec, cfg: &SolverConfig) -> std::result::Result<Option<SolveResult>, String> {
        let key = Self::key(spec, cfg);
        let path = self.path(&key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("{}: {e}", path.display())),
        };
        let entry: Entry = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if entry.schema != ENTRY_SCHEMA || entry.key != key || entry.domain != *spec || entry.config != *cfg {
            return Err(format!("{}: entry does not match its key", path.display()));
        }
        Ok(Some(entry.result))
    }

    pub fn get(&self, spec: &DomainSpec, cfg: &SolverConfig) -> Option<SolveResult> {
        self.read(spec, cfg).unwrap_or_else(|e| {
            warn!("ignoring corrupt cache entry {e}");
            None
        })
    }

    pub fn put(&self, result: &SolveResult) -> Result<PathBuf> {
        let key = Self::key(&result.domain, &result.config);
        let entry = Entry {
            schema: ENTRY_SCHEMA.to_string(),
            key: key.clone(),
            version: crate::VERSION.to_string(),
            domain: result.domain.clone(),
            config: result.config.clone(),
            result: result.clone(),
        };
        let path = self.path(&key);
        write_atomic(&path, serde_json::to_string(&entry)?.as_bytes())?;
        Ok(path)
    }

    /// Returns the cached result, or solves and stores it.
    pub fn solve(&self, spec: &DomainSpec, cfg: &SolverConfig) -> Result<(SolveResult, CacheStatus)> {
        let status = match self.read(spec, cfg) {
            Ok(Some(hit)) => {
                debug!("cache hit {}", Self::key(spec, cfg));
                return Ok((hit, CacheStatus::Hit));
            }
            Ok(None) => CacheStatus::Miss,
            Err(e) => {
                warn!("recomputing over corrupt cache entry {e}");
                CacheStatus::Replaced
            }
        };
        let result = solve_spectrum(spec, cfg)?;
        self.put(&result)?;
        Ok((result, status))
    }

    pub fn clear(&self) -> Result<()> {
        if self.dir.exists() {
            fs::remove_dir_all(&self.dir)?;
        }
        Ok(())
    }
}
