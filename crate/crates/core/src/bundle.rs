//! Serialized construction runs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cauchy::CauchyConstruction;
use crate::coord::CoordConstruction;
use crate::error::Result;
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::weight::WeightSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Bundle {
    Coordinatewise(CoordConstruction),
    Cauchy(CauchyConstruction),
}

impl Bundle {
    pub fn space(&self) -> &SpaceSpec {
        match self {
            Bundle::Coordinatewise(c) => &c.space,
            Bundle::Cauchy(c) => &c.space,
        }
    }

    pub fn weight(&self) -> &WeightSpec {
        match self {
            Bundle::Coordinatewise(c) => &c.weight,
            Bundle::Cauchy(c) => &c.weight,
        }
    }

    pub fn rounds(&self) -> u64 {
        match self {
            Bundle::Coordinatewise(c) => c.rounds.len() as u64,
            Bundle::Cauchy(c) => c.rounds.len() as u64,
        }
    }

    /// Number of generators `K`.
    pub fn generator_count(&self) -> usize {
        match self {
            Bundle::Coordinatewise(c) => c.partition_k as usize,
            Bundle::Cauchy(c) => c.generators.unwrap_or(1),
        }
    }

    /// Truncated generators `x^{(1)}, …, x^{(K)}`.
    pub fn generators(&self) -> Vec<FiniteSeq> {
        match self {
            Bundle::Coordinatewise(c) => c.generators(),
            Bundle::Cauchy(c) => c.generator_truncations(),
        }
    }

    /// Whether every stored certificate passes.
    pub fn all_pass(&self) -> bool {
        match self {
            Bundle::Coordinatewise(c) => c.all_pass(),
            Bundle::Cauchy(c) => c.all_pass(),
        }
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("bundles always serialize");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundles always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
