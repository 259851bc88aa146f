//! Trained-state files. Only adapter, head, weighting-net and threshold
//! parameters are stored; the backbone is rebuilt from its config.
//!
//! Layout of a checkpoint directory:
//!
//! ```text
//! checkpoint.json   backend config, label set, training config, version
//! head.json         head shape manifest {n, d_model, d_h, m}
//! head.bin          head parameters, f64 little-endian, [W1, b1, W2, b2]
//! adapters.bin      adapter parameters, f32 little-endian
//! weighting.json    weighting net {w, b}
//! thresholds.json   per-label decision thresholds
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::BackendConfig;
use crate::corpus::LabelSet;
use crate::error::{Error, Result};
use crate::evaluation::{ThresholdProfile, TrainConfig};
use crate::verbalizer::{HeadShape, VerbalizerHead};
use crate::weighcon::WeightingNet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub version: String,
    pub backend: BackendConfig,
    pub adapter_seed: u64,
    pub label_set: LabelSet,
    pub train: TrainConfig,
    pub best_epoch: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub head: VerbalizerHead,
    pub adapters: Vec<f32>,
    pub net: WeightingNet,
    pub profile: ThresholdProfile,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_thresholds(path: &Path, profile: &ThresholdProfile) -> Result<()> {
    write_json(path, profile)
}

pub fn read_thresholds(path: &Path) -> Result<ThresholdProfile> {
    read_json(path)
}

impl Checkpoint {
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        write_json(&dir.join("checkpoint.json"), &self.meta)?;
        write_json(&dir.join("head.json"), &self.head.shape())?;
        let head: Vec<u8> = self.head.params().iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.join("head.bin"), head)?;
        let adapters: Vec<u8> = self.adapters.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(dir.join("adapters.bin"), adapters)?;
        write_json(&dir.join("weighting.json"), &self.net)?;
        write_thresholds(&dir.join("thresholds.json"), &self.profile)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: CheckpointMeta = read_json(&dir.join("checkpoint.json"))?;
        let shape: HeadShape = read_json(&dir.join("head.json"))?;
        let bytes = fs::read(dir.join("head.bin"))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Shape("head.bin is not a whole number of f64 values".into()));
        }
        let params = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let head = VerbalizerHead::from_params(shape, params)?;
        let bytes = fs::read(dir.join("adapters.bin"))?;
        if bytes.len() % 4 != 0 {
            return Err(Error::Shape("adapters.bin is not a whole number of f32 values".into()));
        }
        let adapters = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        let net: WeightingNet = read_json(&dir.join("weighting.json"))?;
        if net.m() != shape.m || net.w.len() % 2 != 0 {
            return Err(Error::Shape("weighting net does not match the head's label count".into()));
        }
        let profile = read_thresholds(&dir.join("thresholds.json"))?;
        if profile.thresholds.len() != shape.m {
            return Err(Error::Shape("threshold count does not match the head's label count".into()));
        }
        Ok(Self {
            meta,
            head,
            adapters,
            net,
            profile,
        })
    }
}
