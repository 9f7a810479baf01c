//! File formats, statement sources, the evaluation harness and the CLI
//! plumbing around [`cypherkit_core`].

pub mod file_source;
pub mod graph_io;
pub mod harness;
pub mod jsonl;
pub mod rewriter_http;
pub mod sparql;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cypherkit_core::rdf::{MappingConfig, UnitTable};

pub use cypherkit_core;

/// `--source` values: `sparql:<url>` or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    Sparql(String),
    File(PathBuf),
}

impl FromStr for SourceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(url) = s.strip_prefix("sparql:") {
            return Ok(SourceSpec::Sparql(url.into()));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(SourceSpec::File(p.into()));
        }
        Err(format!("`{s}` is neither sparql:<url> nor file:<path>"))
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))
}

pub fn load_mapping_config(path: &Path) -> anyhow::Result<MappingConfig> {
    let cfg: MappingConfig = serde_json::from_slice(&read(path)?)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    cfg.validate()
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok(cfg)
}

/// Reads `{"entries": [{"unit_id", "target", "factor"}]}`.
pub fn load_unit_table(path: &Path) -> anyhow::Result<UnitTable> {
    serde_json::from_slice(&read(path)?).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
