use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use randpad_core::config::Config;
use randpad_core::rng::sha256_hex;
use serde::Serialize;

/// Record of one invocation: enough to rerun it and check its outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: BTreeMap<String, String>,
    pub config_hash: String,
    pub config: Config,
    /// Input path → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

/// Output directory that tracks every file written into it.
pub struct OutDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl OutDir {
    pub fn create(dir: &Path, command: &str, config: &Config) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                args: BTreeMap::new(),
                config_hash: config.hash(),
                config: config.clone(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
        })
    }

    pub fn arg(&mut self, key: &str, value: impl ToString) {
        self.manifest.args.insert(key.to_string(), value.to_string());
    }

    /// Hash an input file and remember it.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest
            .inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Register a file some library call already wrote.
    pub fn written(&mut self, name: &str) -> Result<()> {
        let path = self.path(name);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut text = String::new();
        for r in rows {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(name, &bytes)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
