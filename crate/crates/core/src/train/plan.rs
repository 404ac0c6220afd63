use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::split::SplitSpec;
use crate::model::ModelConfig;
use crate::order::OrderMethod;
use crate::sketch::Format;
use crate::{Error, Result};

/// Which attributes a plan trains on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeSelection {
    All,
    Named(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub format: Format,
    /// `Random { seed }` carries the base seed; each drawing mixes in its id.
    pub ordering: OrderMethod,
    pub config: String,
    pub attributes: AttributeSelection,
    pub split: SplitSpec,
    pub epochs: usize,
    pub seed: u64,
    pub lr: f64,
    pub batch_size: usize,
    pub clip: f64,
}

pub const PRESETS: [&str; 3] = ["stage1", "stage2", "stage3"];

impl ExperimentPlan {
    /// The three stages: 30/15 screening, 95/5 finalists, multilabel.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentPlan {
            name: name.to_string(),
            format: Format::Absolute,
            ordering: OrderMethod::MinLength,
            config: "3bi-ga-d1".into(),
            attributes: AttributeSelection::Named(vec!["Male".into()]),
            split: SplitSpec { train: 0.30, test: 0.15 },
            epochs: 10,
            seed: 42,
            lr: 1e-3,
            batch_size: 32,
            clip: 5.0,
        };
        match name {
            "stage1" => Ok(base),
            "stage2" => Ok(ExperimentPlan {
                split: SplitSpec { train: 0.95, test: 0.05 },
                ..base
            }),
            "stage3" => Ok(ExperimentPlan {
                split: SplitSpec { train: 0.95, test: 0.05 },
                attributes: AttributeSelection::All,
                ..base
            }),
            _ => Err(Error::InvalidConfig(format!(
                "unknown preset {name:?}; valid: {}",
                PRESETS.join(", ")
            ))),
        }
    }

    /// Flat `key = value` text; `#` starts a comment. A `preset` key picks
    /// the starting values, every other key overrides one field.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_inner(text, None)
    }

    /// As [`parse`](Self::parse), with `seed` used unless the text sets one.
    pub fn parse_seeded(text: &str, seed: u64) -> Result<Self> {
        Self::parse_inner(text, Some(seed))
    }

    fn parse_inner(text: &str, default_seed: Option<u64>) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: format!("expected key = value, found {line:?}"),
            })?;
            kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }

        let mut plan = match kv.remove("preset") {
            Some((_, p)) => Self::preset(&p)?,
            None => Self::preset("stage1").map(|p| ExperimentPlan { name: "custom".into(), ..p })?,
        };
        if let Some(seed) = default_seed {
            plan.seed = seed;
        }
        let mut random_seed = None;
        for (key, (line, value)) in kv {
            let bad = |what: &str| Error::Parse {
                line,
                reason: format!("{key}: {what}, found {value:?}"),
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad("expected a number"));
            let int = |v: &str| v.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
            match key.as_str() {
                "name" => plan.name = value.clone(),
                "format" => {
                    plan.format = match value.as_str() {
                        "absolute" => Format::Absolute,
                        "relative" => Format::Relative,
                        _ => return Err(bad("expected absolute or relative")),
                    }
                }
                "ordering" => {
                    plan.ordering = match value.as_str() {
                        "min_length" | "sorted" => OrderMethod::MinLength,
                        "random" | "unsorted" => OrderMethod::Random { seed: 0 },
                        "identity" => OrderMethod::Identity,
                        _ => return Err(bad("expected min_length, random or identity")),
                    }
                }
                "ordering_seed" => random_seed = Some(int(&value)?),
                "config" => plan.config = value.clone(),
                "attributes" => {
                    plan.attributes = if value == "all" {
                        AttributeSelection::All
                    } else {
                        let names: Vec<String> = value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect();
                        if names.is_empty() {
                            return Err(bad("expected attribute names or all"));
                        }
                        AttributeSelection::Named(names)
                    }
                }
                "train" => plan.split.train = num(&value)?,
                "test" => plan.split.test = num(&value)?,
                "epochs" => plan.epochs = int(&value)? as usize,
                "seed" => plan.seed = int(&value)?,
                "lr" => plan.lr = num(&value)?,
                "batch_size" => plan.batch_size = int(&value)? as usize,
                "clip" => plan.clip = num(&value)?,
                _ => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        if let OrderMethod::Random { seed } = &mut plan.ordering {
            *seed = random_seed.unwrap_or(plan.seed);
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn load_seeded(path: &Path, seed: u64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_seeded(&text, seed)
    }

    pub fn to_text(&self) -> String {
        let format = match self.format {
            Format::Absolute => "absolute",
            Format::Relative => "relative",
        };
        let (ordering, oseed) = match self.ordering {
            OrderMethod::MinLength => ("min_length", None),
            OrderMethod::Random { seed } => ("random", Some(seed)),
            OrderMethod::Identity => ("identity", None),
        };
        let attributes = match &self.attributes {
            AttributeSelection::All => "all".to_string(),
            AttributeSelection::Named(n) => n.join(","),
        };
        let mut s = format!(
            "name = {}\nformat = {format}\nordering = {ordering}\nconfig = {}\nattributes = {attributes}\n\
             train = {}\ntest = {}\nepochs = {}\nseed = {}\nlr = {}\nbatch_size = {}\nclip = {}\n",
            self.name,
            self.config,
            self.split.train,
            self.split.test,
            self.epochs,
            self.seed,
            self.lr,
            self.batch_size,
            self.clip
        );
        if let Some(seed) = oseed {
            s.push_str(&format!("ordering_seed = {seed}\n"));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::InvalidConfig(format!("lr must be finite and >= 0, got {}", self.lr)));
        }
        if !(self.clip.is_finite() && self.clip > 0.0) {
            return Err(Error::InvalidConfig(format!("clip must be positive, got {}", self.clip)));
        }
        // Surface unknown configuration names before any data is touched.
        ModelConfig::from_name(&self.config, 1)?;
        Ok(())
    }

    /// Concrete attribute names given the table's columns.
    pub fn resolve_attributes(&self, available: &[String]) -> Result<Vec<String>> {
        match &self.attributes {
            AttributeSelection::All => Ok(available.to_vec()),
            AttributeSelection::Named(names) => {
                for n in names {
                    if !available.contains(n) {
                        return Err(Error::InvalidConfig(format!(
                            "attribute {n:?} not in the attribute table ({})",
                            available.join(", ")
                        )));
                    }
                }
                Ok(names.clone())
            }
        }
    }

    /// Fields other than format, ordering and configuration.
    pub(crate) fn protocol_key(&self) -> String {
        format!(
            "attributes={:?} split={}/{} epochs={} seed={} lr={} batch_size={} clip={}",
            self.attributes, self.split.train, self.split.test, self.epochs, self.seed, self.lr, self.batch_size, self.clip
        )
    }

    pub fn label(&self) -> String {
        let format = match self.format {
            Format::Absolute => "absolute",
            Format::Relative => "relative",
        };
        let ordering = match self.ordering {
            OrderMethod::MinLength => "sorted",
            OrderMethod::Random { .. } => "unsorted",
            OrderMethod::Identity => "identity",
        };
        format!("{format}-{ordering}-{}", self.config)
    }
}
