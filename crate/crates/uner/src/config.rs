//! Run configuration. Later sources win: the TOML file, then the endpoint
//! environment variable, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dump::DumpFormat;
use crate::error::{Error, Result};
use crate::sparql::{LinkerConfig, DEFAULT_BATCH_SIZE, DEFAULT_ENDPOINT, ENDPOINT_ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dump files for `extract`; the corpus for `stats`, `enrich` and `eval`.
    pub input: Vec<PathBuf>,
    pub format: DumpFormat,
    pub out: PathBuf,
    /// Mapping tables; the shipped tables when unset.
    pub equivalences: Option<PathBuf>,
    pub priorities: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub offline: bool,
    pub resource_base: String,
    pub batch_size: usize,
    pub retries: u32,
    pub timeout_secs: f64,
    pub requests_per_second: f64,
    pub concurrency: usize,
    pub experiments: Vec<u32>,
    pub collapse_depth: Option<usize>,
    pub kg_map: Option<PathBuf>,
    pub golden: Option<PathBuf>,
    pub system: Option<PathBuf>,
    /// Documents handed to the worker pool at a time.
    pub chunk_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let linker = LinkerConfig::default();
        RunConfig {
            input: Vec::new(),
            format: DumpFormat::default(),
            out: PathBuf::from("out"),
            equivalences: None,
            priorities: None,
            cache: None,
            endpoint: None,
            offline: false,
            resource_base: linker.resource_base,
            batch_size: DEFAULT_BATCH_SIZE,
            retries: linker.retries,
            timeout_secs: 30.0,
            requests_per_second: linker.requests_per_second,
            concurrency: std::thread::available_parallelism().map_or(1, |n| n.get()),
            experiments: Vec::new(),
            collapse_depth: None,
            kg_map: None,
            golden: None,
            system: None,
            chunk_size: 1024,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    /// Parses `text`; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Usage(format!("invalid configuration: {e}")))?;
        for p in cfg.input.iter_mut() {
            resolve(base, p);
        }
        resolve(base, &mut cfg.out);
        for p in [
            &mut cfg.equivalences,
            &mut cfg.priorities,
            &mut cfg.cache,
            &mut cfg.kg_map,
            &mut cfg.golden,
            &mut cfg.system,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read configuration {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        RunConfig::from_toml(&text, base)
    }

    /// Applies the endpoint environment variable when set and non-empty.
    pub fn apply_env(&mut self) {
        if let Ok(v) = std::env::var(ENDPOINT_ENV) {
            if !v.trim().is_empty() {
                self.endpoint = Some(v.trim().to_owned());
            }
        }
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| self.out.join("class_cache.tsv"))
    }

    /// The endpoint to query (the public one unless configured), or `None`
    /// when running offline.
    pub fn live_endpoint(&self) -> Option<&str> {
        if self.offline {
            None
        } else {
            Some(self.endpoint.as_deref().unwrap_or(DEFAULT_ENDPOINT))
        }
    }

    pub fn linker_config(&self) -> LinkerConfig {
        LinkerConfig {
            resource_base: self.resource_base.clone(),
            batch_size: self.batch_size,
            retries: self.retries,
            concurrency: self.concurrency,
            requests_per_second: self.requests_per_second,
            ..LinkerConfig::default()
        }
    }

    /// Checks values and referenced files before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.concurrency == 0 {
            return Err(Error::Usage("concurrency must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Usage("batch_size must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Usage("chunk_size must be at least 1".into()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(Error::Usage("timeout_secs must be positive".into()));
        }
        if let Some(&bad) = self.experiments.iter().find(|e| !(1..=7).contains(*e)) {
            return Err(Error::Usage(format!("experiment {bad} does not exist (valid ids are 1-7)")));
        }
        if self.collapse_depth == Some(0) {
            return Err(Error::Usage("collapse depth must be at least 1".into()));
        }
        let files = self
            .input
            .iter()
            .chain(&self.equivalences)
            .chain(&self.priorities)
            .chain(&self.kg_map)
            .chain(&self.golden);
        for f in files {
            if !f.is_file() {
                return Err(Error::Usage(format!("no such file: {}", f.display())));
            }
        }
        if self.out.exists() && !self.out.is_dir() {
            return Err(Error::Usage(format!("output path {} is not a directory", self.out.display())));
        }
        Ok(())
    }
}
