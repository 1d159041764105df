//! File formats: pattern CSV with a window sidecar, summary tables, model
//! and family documents, and run manifests.

mod manifest;
mod pattern;
mod table;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{Constraint, FreeParam};
use crate::model::{ModelSpec, ModelSpecDoc};

pub use manifest::{sha256_file, RunManifest};
pub use pattern::{read_pattern, read_pattern_with_sidecar, window_sidecar, write_pattern};
pub use table::{read_summary_table, write_summary_table, TableHeader};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parses JSON, reporting syntax and schema errors with file position.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    from_json_str(&text, &path.display().to_string())
}

pub(crate) fn from_json_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        reason: e.to_string(),
    })
}

/// Writes pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

/// Reads and validates a model document. Schema problems come back as
/// [`Error::Parse`]; domain problems as [`Error::Validation`] with field paths.
pub fn parse_model_spec(path: &Path) -> Result<ModelSpec> {
    let doc: ModelSpecDoc = read_json(path)?;
    ModelSpec::from_doc(&doc)
}

pub fn model_spec_from_str(text: &str) -> Result<ModelSpec> {
    let doc: ModelSpecDoc = from_json_str(text, "<model>")?;
    ModelSpec::from_doc(&doc)
}

/// A model template plus the parameters to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub model: ModelSpecDoc,
    pub free: Vec<FreeParam>,
    #[serde(default)]
    pub constraint: Constraint,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    5
}

impl FamilyDoc {
    pub fn template(&self) -> Result<ModelSpec> {
        ModelSpec::from_doc(&self.model)
    }
}

pub fn parse_family(path: &Path) -> Result<FamilyDoc> {
    let doc: FamilyDoc = read_json(path)?;
    let template = doc.template()?;
    for (i, p) in doc.free.iter().enumerate() {
        template
            .param(&p.path)
            .map_err(|_| Error::invalid(format!("free[{i}].path"), format!("`{}` is not a model parameter", p.path)))?;
    }
    Ok(doc)
}
