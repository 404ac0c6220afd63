use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::config::ModelConfig;
use super::network::Model;
use super::params::ModelParams;
use crate::order::OrderMethod;
use crate::sketch::Format;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// How drawings were turned into sequences for this model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingInfo {
    pub format: Format,
    pub ordering: OrderMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub optimizer_state: Option<AdamState>,
    /// Attribute name per output unit.
    pub attributes: Vec<String>,
    pub encoding: Option<EncodingInfo>,
}

// Non-finite values serialize as JSON null, so a poisoned model still writes
// and is rejected on load.
#[derive(Serialize, Deserialize)]
struct RawOptimizer {
    m: Vec<Option<f64>>,
    v: Vec<Option<f64>>,
    t: u64,
}

#[derive(Serialize, Deserialize)]
struct RawCheckpoint {
    format_version: u32,
    config: ModelConfig,
    params: BTreeMap<String, Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer_state: Option<RawOptimizer>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encoding: Option<EncodingInfo>,
}

fn finite(values: Vec<Option<f64>>, what: &str) -> Result<Vec<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Numeric(format!("{what}[{i}] is not a finite number"))))
        .collect()
}

impl Checkpoint {
    pub fn new(model: Model) -> Self {
        Checkpoint {
            model,
            optimizer_state: None,
            attributes: Vec::new(),
            encoding: None,
        }
    }

    fn to_raw(&self) -> RawCheckpoint {
        let p = &self.model.params;
        let params = p
            .layout
            .blocks
            .iter()
            .map(|b| (b.name.clone(), p.values[b.range()].iter().map(|&v| Some(v)).collect()))
            .collect();
        let wrap = |xs: &[f64]| xs.iter().map(|&v| Some(v)).collect();
        RawCheckpoint {
            format_version: FORMAT_VERSION,
            config: self.model.config.clone(),
            params,
            optimizer_state: self.optimizer_state.as_ref().map(|s| RawOptimizer {
                m: wrap(&s.m),
                v: wrap(&s.v),
                t: s.t,
            }),
            attributes: self.attributes.clone(),
            encoding: self.encoding.clone(),
        }
    }

    fn from_raw(raw: RawCheckpoint) -> Result<Self> {
        if raw.format_version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint format_version {}",
                raw.format_version
            )));
        }
        raw.config.validate()?;
        let mut params = ModelParams::zeros(&raw.config);
        let mut named = raw.params;
        for b in params.layout.blocks.clone() {
            let values = named
                .remove(&b.name)
                .ok_or_else(|| Error::Shape(format!("checkpoint is missing parameter block {}", b.name)))?;
            if values.len() != b.len() {
                return Err(Error::Shape(format!(
                    "block {} has {} values, expected {}",
                    b.name,
                    values.len(),
                    b.len()
                )));
            }
            params.values[b.range()].copy_from_slice(&finite(values, &b.name)?);
        }
        if let Some(extra) = named.keys().next() {
            return Err(Error::Shape(format!("unexpected parameter block {extra}")));
        }
        let optimizer_state = match raw.optimizer_state {
            Some(o) => {
                let state = AdamState {
                    m: finite(o.m, "optimizer_state.m")?,
                    v: finite(o.v, "optimizer_state.v")?,
                    t: o.t,
                };
                if state.m.len() != params.len() || state.v.len() != params.len() {
                    return Err(Error::Shape("optimizer state does not match parameter count".into()));
                }
                Some(state)
            }
            None => None,
        };
        if !raw.attributes.is_empty() && raw.attributes.len() != raw.config.outputs {
            return Err(Error::Shape(format!(
                "{} attribute names for {} outputs",
                raw.attributes.len(),
                raw.config.outputs
            )));
        }
        Ok(Checkpoint {
            model: Model::new(raw.config, params)?,
            optimizer_state,
            attributes: raw.attributes,
            encoding: raw.encoding,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_raw())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_raw(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    /// Output index of `attribute`; a single-output model without names
    /// answers for any attribute.
    pub fn attribute_index(&self, attribute: &str) -> Result<usize> {
        if let Some(k) = self.attributes.iter().position(|a| a == attribute) {
            return Ok(k);
        }
        if self.attributes.is_empty() && self.model.config.outputs == 1 {
            return Ok(0);
        }
        Err(Error::InvalidConfig(format!(
            "attribute {attribute:?} not in checkpoint (has {})",
            self.attributes.join(", ")
        )))
    }
}
