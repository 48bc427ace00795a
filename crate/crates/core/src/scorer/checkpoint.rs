//! JSON model checkpoints.
//!
//! ```json
//! {
//!   "format": "crowdseq-checkpoint",
//!   "version": 1,
//!   "label_space": { "entity_types": ["PER", "TIME"] },
//!   "scorer": { "buckets": 4096, "embed_dim": 32, ... },
//!   "metadata": { ... free-form ... },
//!   "params": [0.0123, ...]
//! }
//! ```
//!
//! Parameters are written with shortest round-trip float formatting, so a
//! save/load cycle reproduces every bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ReferenceScorer, ScorerConfig, TokenScorer};
use crate::data::LabelSpace;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "crowdseq-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub label_space: LabelSpace,
    pub scorer: ScorerConfig,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(label_space: LabelSpace, scorer: &ReferenceScorer) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            label_space,
            scorer: scorer.config().clone(),
            metadata: BTreeMap::new(),
            params: scorer.params().to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::invalid(
                "checkpoint",
                format!("unknown format {:?}", ckpt.format),
            ));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::invalid(
                "checkpoint",
                format!("unsupported version {}", ckpt.version),
            ));
        }
        Ok(ckpt)
    }

    pub fn scorer(&self) -> Result<ReferenceScorer> {
        ReferenceScorer::from_params(self.scorer.clone(), self.label_space.len(), self.params.clone())
    }
}
