//! Run manifest: every command writes one next to its outputs, recording
//! the resolved flags so the run can be reproduced exactly.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every flag with its resolved value, defaults included.
    pub flags: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub model_path: Option<PathBuf>,
    pub dataset_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            flags: BTreeMap::new(),
            seed: None,
            model_path: None,
            dataset_paths: Vec::new(),
            output_dir: output_dir.to_path_buf(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn flag(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn write(&self) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest always serializes");
        std::fs::write(self.output_dir.join(MANIFEST_FILE), json)?;
        Ok(())
    }
}
