//! Run configuration: an optional JSON file mirrored by command-line flags,
//! with flags taking precedence. Two runs with the same effective
//! configuration produce byte-identical artifacts.

use serde::{Deserialize, Serialize};

use crate::maplang::parse_rational;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Construction {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    #[serde(default = "default_f1")]
    pub f1: String,
    #[serde(default = "default_f2")]
    pub f2: String,
}

fn default_f1() -> String {
    "hopf".to_string()
}

fn default_f2() -> String {
    "degree1".to_string()
}

impl RunConfig {
    pub fn load(path: &str) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("read {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("parse {path}: {e}"))
    }

    pub fn epsilon_values(&self) -> Result<Option<Vec<f64>>, String> {
        match &self.epsilon_grid {
            None => Ok(None),
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for item in list {
                    out.push(parse_rational(item)?);
                }
                Ok(Some(out))
            }
        }
    }
}

/// Atomic write: to a temporary sibling, then rename over the target.
pub fn write_atomic(path: &std::path::Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
