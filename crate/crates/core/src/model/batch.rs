use crate::{Error, Result};

/// Padded batch of feature sequences with binary targets.
///
/// `features` is `batch x max_len x input_dim` row-major; row `b` is valid on
/// its first `lengths[b]` steps and zero beyond. `targets` is
/// `batch x outputs` with entries in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    pub features: Vec<f64>,
    pub lengths: Vec<usize>,
    pub targets: Vec<f64>,
    pub max_len: usize,
    pub input_dim: usize,
    pub outputs: usize,
}

impl SequenceBatch {
    /// Builds a batch from row-major `T x input_dim` sequences.
    pub fn new(sequences: &[&[f64]], targets: &[Vec<f64>], input_dim: usize) -> Result<Self> {
        if sequences.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} sequences but {} target rows",
                sequences.len(),
                targets.len()
            )));
        }
        let outputs = targets.first().map_or(1, Vec::len);
        if input_dim == 0 || outputs == 0 {
            return Err(Error::Shape("input_dim and outputs must be positive".into()));
        }
        for (b, s) in sequences.iter().enumerate() {
            if s.len() % input_dim != 0 {
                return Err(Error::Shape(format!(
                    "sequence {b} has {} values, not a multiple of {input_dim}",
                    s.len()
                )));
            }
            if s.is_empty() {
                return Err(Error::EmptySequence { index: b });
            }
        }
        for (b, t) in targets.iter().enumerate() {
            if t.len() != outputs {
                return Err(Error::Shape(format!("target row {b} has {} entries, expected {outputs}", t.len())));
            }
            if t.iter().any(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::Shape(format!("target row {b} is not binary")));
            }
        }
        let lengths: Vec<usize> = sequences.iter().map(|s| s.len() / input_dim).collect();
        let max_len = lengths.iter().copied().max().unwrap_or(0);
        let mut features = vec![0.0; sequences.len() * max_len * input_dim];
        for (b, s) in sequences.iter().enumerate() {
            let start = b * max_len * input_dim;
            features[start..start + s.len()].copy_from_slice(s);
        }
        Ok(SequenceBatch {
            features,
            lengths,
            targets: targets.concat(),
            max_len,
            input_dim,
            outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Valid prefix of row `b`, `lengths[b] x input_dim`.
    pub fn sequence(&self, b: usize) -> &[f64] {
        let start = b * self.max_len * self.input_dim;
        &self.features[start..start + self.lengths[b] * self.input_dim]
    }

    pub fn target(&self, b: usize) -> &[f64] {
        &self.targets[b * self.outputs..(b + 1) * self.outputs]
    }

    /// Same batch with `extra` additional padded steps per row.
    pub fn padded(&self, extra: usize, fill: f64) -> Self {
        let max_len = self.max_len + extra;
        let row = max_len * self.input_dim;
        let mut features = vec![fill; self.len() * row];
        for b in 0..self.len() {
            let s = self.sequence(b);
            features[b * row..b * row + s.len()].copy_from_slice(s);
        }
        SequenceBatch {
            features,
            max_len,
            ..self.clone()
        }
    }

    /// Rows `idx` in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let seqs: Vec<&[f64]> = idx.iter().map(|&b| self.sequence(b)).collect();
        let targets: Vec<Vec<f64>> = idx.iter().map(|&b| self.target(b).to_vec()).collect();
        let mut out = SequenceBatch::new(&seqs, &targets, self.input_dim).expect("rows of a valid batch");
        out.outputs = self.outputs;
        out
    }
}
