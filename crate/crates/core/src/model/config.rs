use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmLayer {
    pub cells: usize,
    pub bidirectional: bool,
}

impl LstmLayer {
    pub fn directions(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }

    /// Width of the per-timestep vector this layer emits.
    pub fn output_width(&self) -> usize {
        self.cells * self.directions()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Final states: forward `h` at the last valid step, backward `h` at the first.
    Fs,
    /// Global average of the last layer's hidden states over valid steps.
    Ga,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub units: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub lstm_layers: Vec<LstmLayer>,
    pub head: Head,
    pub dense: Vec<DenseLayer>,
    pub outputs: usize,
}

pub const CONFIG_NAMES: [&str; 8] = [
    "1bi-fs-d1",
    "1bi-fs-d40",
    "1bi-ga-d1",
    "1bi-ga-d40",
    "3bi-fs-d1",
    "3bi-fs-d40",
    "3bi-ga-d1",
    "3bi-ga-d40",
];

impl ModelConfig {
    /// Parses names of the form `<L>bi[(cells)]-<fs|ga>-d<K>`.
    ///
    /// `1bi` is one bidirectional layer of 256 cells and `3bi` three of 150;
    /// a parenthesised width overrides the cell count. `d1` is the output
    /// layer alone. `dK` with `K > 1` inserts a ReLU hidden layer of `K`
    /// units, unless `K == outputs`, in which case the output layer itself
    /// has `K` units. `uni` in place of `bi` gives unidirectional layers.
    pub fn from_name(name: &str, outputs: usize) -> Result<Self> {
        let unknown = || Error::UnknownConfig {
            name: name.to_string(),
            valid: CONFIG_NAMES.join(", "),
        };
        if outputs == 0 {
            return Err(Error::InvalidConfig("outputs must be at least 1".into()));
        }
        let parts: Vec<&str> = name.trim().split('-').collect();
        let [lstm, head, dense] = parts[..] else {
            return Err(unknown());
        };

        let (lstm, width) = match lstm.split_once('(') {
            Some((base, rest)) => {
                let cells = rest
                    .strip_suffix(')')
                    .and_then(|c| c.parse::<usize>().ok())
                    .filter(|&c| c > 0)
                    .ok_or_else(unknown)?;
                (base, Some(cells))
            }
            None => (lstm, None),
        };
        let (count, bidirectional) = if let Some(n) = lstm.strip_suffix("bi") {
            (n, true)
        } else if let Some(n) = lstm.strip_suffix("uni") {
            (n, false)
        } else {
            return Err(unknown());
        };
        let layers: usize = count.parse().ok().filter(|&n| n > 0).ok_or_else(unknown)?;
        let cells = match (width, layers) {
            (Some(c), _) => c,
            (None, 1) => 256,
            (None, 3) => 150,
            (None, _) => return Err(unknown()),
        };

        let head = match head {
            "fs" => Head::Fs,
            "ga" => Head::Ga,
            _ => return Err(unknown()),
        };

        let units: usize = dense
            .strip_prefix('d')
            .and_then(|k| k.parse().ok())
            .filter(|&k| k > 0)
            .ok_or_else(unknown)?;
        let dense = if units == 1 || units == outputs {
            Vec::new()
        } else {
            vec![DenseLayer {
                units,
                activation: Activation::Relu,
            }]
        };

        let cfg = ModelConfig {
            input_dim: 3,
            lstm_layers: vec![LstmLayer { cells, bidirectional }; layers],
            head,
            dense,
            outputs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.input_dim == 0 {
            return bad("input_dim must be positive");
        }
        if self.lstm_layers.is_empty() {
            return bad("at least one LSTM layer is required");
        }
        if self.lstm_layers.iter().any(|l| l.cells == 0) {
            return bad("LSTM layers need at least one cell");
        }
        if self.dense.iter().any(|d| d.units == 0) {
            return bad("dense layers need at least one unit");
        }
        if self.outputs == 0 {
            return bad("outputs must be at least 1");
        }
        Ok(())
    }

    /// Width of the vector fed into the first dense (or output) layer.
    pub fn pooled_width(&self) -> usize {
        self.lstm_layers.last().map_or(0, LstmLayer::output_width)
    }

    /// True when the logits are an affine function of the pooled vector.
    pub fn is_affine_head(&self) -> bool {
        self.dense.iter().all(|d| d.activation == Activation::None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_configurations() {
        let c = ModelConfig::from_name("1bi-ga-d1", 1).unwrap();
        assert_eq!(c.lstm_layers, vec![LstmLayer { cells: 256, bidirectional: true }]);
        assert_eq!(c.head, Head::Ga);
        assert!(c.dense.is_empty());
        assert_eq!(c.outputs, 1);

        let c = ModelConfig::from_name("3bi-fs-d40", 1).unwrap();
        assert_eq!(c.lstm_layers.len(), 3);
        assert!(c.lstm_layers.iter().all(|l| l.cells == 150 && l.bidirectional));
        assert_eq!(
            c.dense,
            vec![DenseLayer { units: 40, activation: Activation::Relu }]
        );
        assert_eq!(c.outputs, 1);
        assert_eq!(c.pooled_width(), 300);
    }

    #[test]
    fn multilabel_output_layer_is_the_last_dense() {
        let c = ModelConfig::from_name("3bi-ga-d40", 40).unwrap();
        assert!(c.dense.is_empty());
        assert_eq!(c.outputs, 40);
        let c = ModelConfig::from_name("3bi-ga-d1", 40).unwrap();
        assert!(c.dense.is_empty());
        assert_eq!(c.outputs, 40);
    }

    #[test]
    fn width_override_and_unidirectional() {
        let c = ModelConfig::from_name("1bi(16)-ga-d1", 1).unwrap();
        assert_eq!(c.lstm_layers[0].cells, 16);
        let c = ModelConfig::from_name("2uni(8)-fs-d1", 1).unwrap();
        assert_eq!(c.lstm_layers, vec![LstmLayer { cells: 8, bidirectional: false }; 2]);
        assert_eq!(c.pooled_width(), 8);
    }

    #[test]
    fn unknown_names_list_the_valid_ones() {
        for bad in ["", "1bi-ga", "2bi-ga-d1", "1bi-xx-d1", "1bi-ga-d0", "1bi()-ga-d1", "lstm-ga-d1"] {
            match ModelConfig::from_name(bad, 1) {
                Err(Error::UnknownConfig { valid, .. }) => assert!(valid.contains("3bi-ga-d1")),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn json_shape() {
        let c = ModelConfig::from_name("1bi(4)-fs-d40", 1).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["head"], "fs");
        assert_eq!(v["dense"][0]["activation"], "relu");
        let back: ModelConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
