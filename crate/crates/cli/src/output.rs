//! Output directory handling, format selection and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Collects files written by one command and finishes with a manifest.
pub struct Outputs {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, formats: &[Format]) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let formats = if formats.is_empty() {
            vec![Format::Csv, Format::Json, Format::Svg]
        } else {
            formats.to_vec()
        };
        Ok(Outputs {
            dir: dir.to_path_buf(),
            formats,
            written: Vec::new(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json`: command, merged config, library version and
    /// seed. No timestamps, so identical runs give identical files.
    pub fn finish(
        mut self,
        command: &str,
        config: &impl Serialize,
        seed: Option<u64>,
    ) -> Result<()> {
        let manifest = serde_json::json!({
            "tool": "pshrink",
            "version": poisson_shrink::VERSION,
            "estimator_spec_version": poisson_shrink::ESTIMATOR_SPEC_VERSION,
            "command": command,
            "config": config,
            "seed": seed,
            "outputs": self.written,
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.write("manifest.json", &text)
    }
}

/// One-line JSON echo of a config, used as a header comment.
pub fn config_line(config: &impl Serialize) -> String {
    serde_json::to_string(config).expect("config serializes")
}

/// A CSV document whose first line records the config as a `#` comment.
pub fn csv_with_config(config: &impl Serialize, body: &str) -> String {
    format!("# config {}\n{body}", config_line(config))
}

/// JSON document `{"config": ..., key: value}`.
pub fn json_with_config(config: &impl Serialize, key: &str, value: Value) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), serde_json::to_value(config)?);
    doc.insert(key.into(), value);
    Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
}
