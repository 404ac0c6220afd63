use rand::{Rng, RngExt};

use super::config::ModelConfig;
use crate::{Error, Result};

/// Offsets of one LSTM direction inside the flat parameter vector.
///
/// Gate rows are stacked in the order input, forget, cell candidate, output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionLayout {
    pub inputs: usize,
    pub cells: usize,
    pub w_input: usize,
    pub w_recurrent: usize,
    pub bias: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineLayout {
    pub inputs: usize,
    pub units: usize,
    pub weight: usize,
    pub bias: usize,
}

/// A named, row-major block of the parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// `lstm[layer][direction]`, direction 0 forward and 1 backward.
    pub lstm: Vec<Vec<DirectionLayout>>,
    pub dense: Vec<AffineLayout>,
    pub output: AffineLayout,
    pub blocks: Vec<Block>,
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &ModelConfig) -> Self {
        let mut blocks = Vec::new();
        let mut total = 0;
        let mut push = |name: String, rows: usize, cols: usize| {
            let offset = total;
            blocks.push(Block { name, rows, cols, offset });
            total += rows * cols;
            offset
        };

        let mut lstm = Vec::with_capacity(cfg.lstm_layers.len());
        let mut width = cfg.input_dim;
        for (l, layer) in cfg.lstm_layers.iter().enumerate() {
            let h = layer.cells;
            let dirs = (0..layer.directions())
                .map(|d| {
                    let tag = if d == 0 { "fwd" } else { "bwd" };
                    DirectionLayout {
                        inputs: width,
                        cells: h,
                        w_input: push(format!("lstm.{l}.{tag}.w_input"), 4 * h, width),
                        w_recurrent: push(format!("lstm.{l}.{tag}.w_recurrent"), 4 * h, h),
                        bias: push(format!("lstm.{l}.{tag}.bias"), 4 * h, 1),
                    }
                })
                .collect();
            lstm.push(dirs);
            width = layer.output_width();
        }

        let mut dense = Vec::with_capacity(cfg.dense.len());
        for (i, d) in cfg.dense.iter().enumerate() {
            dense.push(AffineLayout {
                inputs: width,
                units: d.units,
                weight: push(format!("dense.{i}.weight"), d.units, width),
                bias: push(format!("dense.{i}.bias"), d.units, 1),
            });
            width = d.units;
        }
        let output = AffineLayout {
            inputs: width,
            units: cfg.outputs,
            weight: push("output.weight".into(), cfg.outputs, width),
            bias: push("output.bias".into(), cfg.outputs, 1),
        };

        Layout { lstm, dense, output, blocks, total }
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

/// Flat parameter vector plus the layout that names its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layout: Layout,
    pub values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let layout = Layout::new(cfg);
        let values = vec![0.0; layout.total];
        ModelParams { layout, values }
    }

    /// Uniform(-k, k) with `k = 1/sqrt(fan_in)` per matrix, zero biases
    /// except the forget gate at +1.
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Self {
        let mut p = Self::zeros(cfg);
        let blocks = p.layout.blocks.clone();
        for b in &blocks {
            let v = &mut p.values[b.range()];
            if b.cols > 1 || !b.name.ends_with("bias") {
                let k = 1.0 / (b.cols as f64).sqrt();
                for w in v.iter_mut() {
                    *w = rng.random_range(-k..k);
                }
            }
        }
        for dirs in &p.layout.lstm {
            for d in dirs {
                let forget = d.bias + d.cells;
                p.values[forget..forget + d.cells].fill(1.0);
            }
        }
        p
    }

    pub fn from_values(cfg: &ModelConfig, values: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(cfg);
        if values.len() != layout.total {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                layout.total,
                values.len()
            )));
        }
        Ok(ModelParams { layout, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.layout.block(name).map(|b| &self.values[b.range()])
    }

    pub fn block_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let r = self.layout.block(name)?.range();
        Some(&mut self.values[r])
    }

    /// Name of the block containing flat index `i`.
    pub fn name_of(&self, i: usize) -> &str {
        self.layout
            .blocks
            .iter()
            .find(|b| b.range().contains(&i))
            .map_or("?", |b| b.name.as_str())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
