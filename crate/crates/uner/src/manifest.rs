//! The per-run `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::Result;
use crate::fsutil::write_string;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub counters: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
    pub seconds: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl StageRecord {
    pub fn start(name: &str) -> Self {
        StageRecord {
            name: name.to_owned(),
            counters: BTreeMap::new(),
            outputs: Vec::new(),
            seconds: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn count(&mut self, key: &str, value: impl Into<Value>) {
        self.counters.insert(key.to_owned(), value.into());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn finish(&mut self) {
        if let Some(t) = self.started.take() {
            self.seconds = t.elapsed().as_secs_f64();
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub stages: Vec<StageRecord>,
    pub status: &'static str,
    pub error: Option<String>,
    pub exit_code: u8,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            config: config.clone(),
            stages: Vec::new(),
            status: "running",
            error: None,
            exit_code: 0,
        }
    }

    pub fn push(&mut self, mut stage: StageRecord) {
        stage.finish();
        self.stages.push(stage);
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_string(&dir.join(MANIFEST_FILE), &text)?;
        Ok(())
    }
}
