use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EngineError;

pub const SEEDS_FORMAT: &str = "scengraph-seeds/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub valid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid: Option<String>,
}

/// Input literals keyed by the entity or widget text they fill.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Seeds {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub seeds: BTreeMap<String, SeedEntry>,
}

fn default_format() -> String {
    SEEDS_FORMAT.to_string()
}

impl Seeds {
    pub fn from_toml(src: &str) -> Result<Self, EngineError> {
        let s: Seeds = toml::from_str(src).map_err(|e| EngineError::Seeds(e.to_string()))?;
        if s.format != SEEDS_FORMAT {
            return Err(EngineError::Seeds(format!("unsupported format {:?}", s.format)));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let src = std::fs::read_to_string(path).map_err(|e| EngineError::Seeds(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src).map_err(|e| EngineError::Seeds(format!("{}: {e}", path.display())))
    }

    pub fn insert(&mut self, key: &str, valid: &str, invalid: Option<&str>) {
        self.seeds.insert(key.into(), SeedEntry { valid: valid.into(), invalid: invalid.map(Into::into) });
    }

    pub fn get(&self, key: &str) -> Option<&SeedEntry> {
        self.seeds.get(key)
    }
}
