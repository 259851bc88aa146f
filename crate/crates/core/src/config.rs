//! Run configuration, loaded from TOML or JSON and echoed into every run
//! directory.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::BackendConfig;
use crate::error::{Error, Result};
use crate::evaluation::{IclConfig, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub backend: BackendConfig,
    /// `hashed-bow` or `external:<endpoint>`.
    pub embed_backend: String,
    /// Seed for adapter initialization on the toy backend.
    pub adapter_seed: u64,
    pub split_ratios: (f64, f64, f64),
    pub split_seed: u64,
    pub train: TrainConfig,
    pub icl: IclConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::default(),
            embed_backend: "hashed-bow".into(),
            adapter_seed: 7,
            split_ratios: (0.6, 0.2, 0.2),
            split_seed: 42,
            train: TrainConfig::default(),
            icl: IclConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `.json` files as JSON and everything else as TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// First 12 hex digits of the SHA-256 of `value`'s canonical JSON.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes to JSON");
    hex::encode(Sha256::digest(json))[..12].to_string()
}
