use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{EncodingInfo, Head, Model};
use crate::sketch::Drawing;
use crate::train::prepare_sequence;
use crate::{Error, Result};

/// Per-timestep pre-sigmoid scores of every output, plus the global logits.
#[derive(Debug, Clone, PartialEq)]
pub struct PointScores {
    pub id: String,
    pub outputs: usize,
    /// Row-major `T x outputs`.
    pub points: Vec<f64>,
    pub logits: Vec<f64>,
}

/// One output's scores; the JSONL record written by `score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScores {
    pub id: String,
    pub logit: f64,
    pub points: Vec<f64>,
}

impl PointScores {
    pub fn len(&self) -> usize {
        self.points.len() / self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn column(&self, k: usize) -> Result<AttributeScores> {
        if k >= self.outputs {
            return Err(Error::OutOfRange(format!("output {k} of {}", self.outputs)));
        }
        Ok(AttributeScores {
            id: self.id.clone(),
            logit: self.logits[k],
            points: self.points.iter().skip(k).step_by(self.outputs).copied().collect(),
        })
    }
}

fn check_affine_ga(model: &Model) -> Result<()> {
    if model.config.head != Head::Ga {
        return Err(Error::UnsupportedHead(
            "per-point scores need a ga head; fs models keep only the sequence ends".into(),
        ));
    }
    if !model.config.is_affine_head() {
        return Err(Error::UnsupportedHead(
            "per-point scores need an affine head (d1); a ReLU dense layer does not commute with the mean".into(),
        ));
    }
    Ok(())
}

/// Head applied to each last-layer hidden vector instead of their mean.
///
/// For affine heads the mean of the per-point scores over the sequence
/// equals the model logit.
pub fn per_point_scores(model: &Model, id: &str, features: &[f64]) -> Result<PointScores> {
    check_affine_ga(model)?;
    let hidden = model.hidden_sequences(features)?;
    let last = hidden.last().expect("nonempty layers");
    let width = model.config.pooled_width();
    let points = last.chunks_exact(width).flat_map(|h| model.affine_head(h)).collect();
    Ok(PointScores {
        id: id.to_string(),
        outputs: model.config.outputs,
        points,
        logits: model.sequence_logits(features)?,
    })
}

/// One LSTM cell's hidden value per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrace {
    pub forward: Vec<f64>,
    /// `None` for unidirectional layers.
    pub backward: Option<Vec<f64>>,
}

pub fn cell_trace(model: &Model, features: &[f64], layer: usize, cell: usize) -> Result<CellTrace> {
    let layers = &model.config.lstm_layers;
    let spec = layers
        .get(layer)
        .ok_or_else(|| Error::OutOfRange(format!("layer {layer} of {}", layers.len())))?;
    if cell >= spec.cells {
        return Err(Error::OutOfRange(format!("cell {cell} of {} in layer {layer}", spec.cells)));
    }
    let hidden = model.hidden_sequences(features)?;
    let rows = hidden[layer].chunks_exact(spec.output_width());
    Ok(CellTrace {
        forward: rows.clone().map(|r| r[cell]).collect(),
        backward: spec.bidirectional.then(|| rows.map(|r| r[spec.cells + cell]).collect()),
    })
}

/// A drawing in model order together with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDrawing {
    pub drawing: Drawing,
    pub scores: PointScores,
}

/// Reorders and encodes each drawing as recorded in `encoding`, then scores
/// it. The returned drawings are in the order the model read them, so their
/// points line up with the scores.
pub fn score_drawings(model: &Model, drawings: &[Drawing], encoding: EncodingInfo, seed: u64) -> Result<Vec<ScoredDrawing>> {
    check_affine_ga(model)?;
    drawings
        .par_iter()
        .map(|d| {
            let ordered = crate::order::reorder(d, crate::train::ordering_for(encoding.ordering, &d.id), seed)?;
            let seq = prepare_sequence(&ordered, encoding.format, crate::order::OrderMethod::Identity, seed)?;
            let scores = per_point_scores(model, &d.id, &seq.features())?;
            Ok(ScoredDrawing { drawing: ordered, scores })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, ModelParams};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(rng: &mut ChaCha8Rng, t: usize) -> Vec<f64> {
        (0..3 * t).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn mean_of_points_is_the_logit() {
        let model = Model::init(ModelConfig::from_name("1bi(8)-ga-d1", 1).unwrap(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let t = rng.random_range(1..60);
            let s = per_point_scores(&model, "x", &random_seq(&mut rng, t)).unwrap();
            assert_eq!(s.len(), t);
            let mean = s.points.iter().sum::<f64>() / t as f64;
            assert!((mean - s.logits[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_hidden_gives_constant_scores() {
        // Zero weights and a closed forget gate: every step computes the
        // same cell state from the biases alone.
        let cfg = ModelConfig::from_name("1bi(4)-ga-d1", 1).unwrap();
        let mut params = ModelParams::zeros(&cfg);
        for dir in ["fwd", "bwd"] {
            let bias = params.block_mut(&format!("lstm.0.{dir}.bias")).unwrap();
            bias[..4].fill(0.2);
            bias[4..8].fill(-50.0);
            bias[8..12].copy_from_slice(&[0.5, -0.3, 0.9, 0.1]);
            bias[12..].fill(0.4);
        }
        params.block_mut("output.weight").unwrap().copy_from_slice(&[1.0, -2.0, 0.5, 0.25, 3.0, 1.0, -1.0, 0.5]);
        params.block_mut("output.bias").unwrap()[0] = 0.7;
        let model = Model::new(cfg, params).unwrap();
        let s = per_point_scores(&model, "c", &random_seq(&mut ChaCha8Rng::seed_from_u64(1), 7)).unwrap();
        assert_eq!(s.len(), 7);
        assert!(s.points[0] != 0.7);
        assert!(s.points.iter().all(|&p| (p - s.logits[0]).abs() < 1e-12));
    }

    #[test]
    fn column_slice_matches_single_output_model() {
        let multi = Model::init(ModelConfig::from_name("1bi(6)-ga-d1", 3).unwrap(), 4).unwrap();
        let x = random_seq(&mut ChaCha8Rng::seed_from_u64(5), 12);
        let all = per_point_scores(&multi, "m", &x).unwrap();
        for k in 0..3 {
            let cfg = ModelConfig::from_name("1bi(6)-ga-d1", 1).unwrap();
            let mut p = ModelParams::zeros(&cfg);
            let n = p.layout.total - 13;
            p.values[..n].copy_from_slice(&multi.params.values[..n]);
            let w = multi.params.block("output.weight").unwrap();
            p.block_mut("output.weight").unwrap().copy_from_slice(&w[k * 12..(k + 1) * 12]);
            p.block_mut("output.bias").unwrap()[0] = multi.params.block("output.bias").unwrap()[k];
            let single = per_point_scores(&Model::new(cfg, p).unwrap(), "s", &x).unwrap();
            let col = all.column(k).unwrap();
            assert_eq!(col.points, single.points);
            assert_eq!(col.logit, single.logits[0]);
        }
        assert!(all.column(3).is_err());
    }

    #[test]
    fn unsupported_heads() {
        let x = vec![0.1; 6];
        for name in ["1bi(4)-fs-d1", "1bi(4)-ga-d40"] {
            let m = Model::init(ModelConfig::from_name(name, 1).unwrap(), 1).unwrap();
            assert!(matches!(per_point_scores(&m, "x", &x), Err(Error::UnsupportedHead(_))), "{name}");
        }
    }

    #[test]
    fn traces() {
        let m = Model::init(ModelConfig::from_name("3bi(5)-ga-d1", 1).unwrap(), 2).unwrap();
        let x = random_seq(&mut ChaCha8Rng::seed_from_u64(3), 9);
        let t = cell_trace(&m, &x, 2, 0).unwrap();
        assert_eq!(t.forward.len(), 9);
        let bwd = t.backward.unwrap();
        assert_eq!(bwd.len(), 9);
        assert!(t.forward.iter().chain(&bwd).all(|v| v.abs() < 1.0));
        assert!(matches!(cell_trace(&m, &x, 3, 0), Err(Error::OutOfRange(_))));
        assert!(matches!(cell_trace(&m, &x, 0, 5), Err(Error::OutOfRange(_))));

        let cfg = ModelConfig::from_name("1uni(4)-ga-d1", 1).unwrap();
        let zero = Model::new(cfg.clone(), ModelParams::zeros(&cfg)).unwrap();
        let z = cell_trace(&zero, &x, 0, 3).unwrap();
        assert!(z.forward.iter().all(|&v| v == 0.0));
        assert!(z.backward.is_none());
    }
}
