use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::attributes::AttributeTable;
use super::plan::ExperimentPlan;
use super::split::split;
use crate::model::{
    adam_step, balanced_accuracy_column, bce_loss, clip_global_norm, AdamConfig, AdamState, Checkpoint, EncodingInfo,
    Model, ModelConfig, SequenceBatch,
};
use crate::order::{reorder, OrderMethod};
use crate::sketch::{encode, CoordMode, Drawing, EncodedSequence, Format};
use crate::{Error, Result};

/// Per-drawing variant of `method`: random orderings mix the drawing id
/// into the seed so a drawing's order does not depend on its position.
pub fn ordering_for(method: OrderMethod, id: &str) -> OrderMethod {
    match method {
        OrderMethod::Random { seed } => {
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for b in id.bytes() {
                h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
            }
            OrderMethod::Random { seed: seed ^ h }
        }
        m => m,
    }
}

/// Reorders and encodes one drawing the way the model sees it.
pub fn prepare_sequence(d: &Drawing, format: Format, ordering: OrderMethod, seed: u64) -> Result<EncodedSequence> {
    let ordered = reorder(d, ordering_for(ordering, &d.id), seed)?;
    Ok(encode(&ordered, format, CoordMode::Normalized))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub ids: Vec<String>,
    /// Row-major `T x 3` per drawing.
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub attributes: Vec<String>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Length-bucketed batches over `rows`: sorted by length, then chunked.
    pub fn batches(&self, rows: &[usize], batch_size: usize) -> Result<Vec<SequenceBatch>> {
        let mut rows = rows.to_vec();
        rows.sort_by_key(|&r| (self.features[r].len(), r));
        rows.chunks(batch_size.max(1))
            .map(|chunk| {
                let seqs: Vec<&[f64]> = chunk.iter().map(|&r| self.features[r].as_slice()).collect();
                let targets: Vec<Vec<f64>> = chunk.iter().map(|&r| self.targets[r].clone()).collect();
                SequenceBatch::new(&seqs, &targets, 3)
            })
            .collect()
    }
}

/// Encodes every drawing (in parallel, order preserved) and looks up its
/// targets in `table`.
pub fn encode_dataset(
    drawings: &[Drawing],
    table: &AttributeTable,
    attributes: &[String],
    format: Format,
    ordering: OrderMethod,
    seed: u64,
) -> Result<EncodedDataset> {
    let columns: Vec<usize> = attributes
        .iter()
        .map(|a| {
            table
                .attribute_index(a)
                .ok_or_else(|| Error::InvalidConfig(format!("attribute {a:?} not in the attribute table")))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = drawings
        .par_iter()
        .map(|d| {
            let targets = table
                .targets(&d.id, &columns)
                .ok_or_else(|| Error::InvalidDrawing(format!("drawing {:?} has no attribute row", d.id)))?;
            let seq = prepare_sequence(d, format, ordering, seed)?;
            if seq.is_empty() {
                return Err(Error::InvalidDrawing(format!("drawing {:?} has no strokes", d.id)));
            }
            Ok((seq.features(), targets))
        })
        .collect::<Result<_>>()?;
    let (features, targets) = rows.into_iter().unzip();
    Ok(EncodedDataset {
        ids: drawings.iter().map(|d| d.id.clone()).collect(),
        features,
        targets,
        attributes: attributes.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub split: &'static str,
    pub loss: f64,
    /// Per attribute; `None` when a class is absent from the split.
    pub balanced_accuracy: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub attributes: Vec<String>,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["epoch".to_string(), "split".into(), "loss".into()];
        header.extend(self.attributes.iter().map(|a| format!("bacc_{a}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.epoch.to_string(), r.split.to_string(), r.loss.to_string()];
            rec.extend(r.balanced_accuracy.iter().map(|b| b.map_or(String::new(), |v| v.to_string())));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Rows of one split in epoch order.
    pub fn split_rows(&self, split: &str) -> impl Iterator<Item = &MetricsRow> + '_ {
        let split = split.to_string();
        self.rows.iter().filter(move |r| r.split == split)
    }

    /// Attributes whose final test balanced accuracy exceeds one half.
    pub fn eligible_attributes(&self) -> Vec<String> {
        let Some(last) = self.split_rows("test").last() else {
            return Vec::new();
        };
        self.attributes
            .iter()
            .zip(&last.balanced_accuracy)
            .filter(|(_, b)| b.is_some_and(|v| v > 0.5))
            .map(|(a, _)| a.clone())
            .collect()
    }
}

/// Mean BCE and per-output balanced accuracy over a set of batches.
pub fn evaluate(model: &Model, batches: &[SequenceBatch]) -> Result<(f64, Vec<Option<f64>>)> {
    let k = model.config.outputs;
    let mut probs = Vec::new();
    let mut targets = Vec::new();
    for b in batches {
        probs.extend(model.predict(b)?);
        targets.extend_from_slice(&b.targets);
    }
    let loss = bce_loss(&probs, &targets);
    let bacc = (0..k)
        .map(|j| balanced_accuracy_column(&probs, &targets, k, j).ok())
        .collect();
    Ok((loss, bacc))
}

pub struct StageOutcome {
    pub metrics: MetricsTable,
    pub checkpoint: Checkpoint,
    pub eligible: Vec<String>,
}

/// Trains the plan's configuration on `drawings` labelled by `table`.
pub fn run_stage(plan: &ExperimentPlan, drawings: &[Drawing], table: &AttributeTable) -> Result<StageOutcome> {
    run_stage_with(plan, drawings, table, None, |_| {})
}

/// As [`run_stage`], optionally continuing from `init` and reporting each
/// metrics row as it is produced.
pub fn run_stage_with(
    plan: &ExperimentPlan,
    drawings: &[Drawing],
    table: &AttributeTable,
    init: Option<Checkpoint>,
    on_row: impl FnMut(&MetricsRow),
) -> Result<StageOutcome> {
    plan.validate()?;
    let attributes = plan.resolve_attributes(table.names())?;
    let config = ModelConfig::from_name(&plan.config, attributes.len())?;
    let data = encode_dataset(drawings, table, &attributes, plan.format, plan.ordering, plan.seed)?;
    train_encoded(plan, config, &data, init, on_row)
}

pub(crate) fn train_encoded(
    plan: &ExperimentPlan,
    config: ModelConfig,
    data: &EncodedDataset,
    init: Option<Checkpoint>,
    mut on_row: impl FnMut(&MetricsRow),
) -> Result<StageOutcome> {
    let rows: Vec<usize> = (0..data.len()).collect();
    let (train_rows, test_rows) = split(&rows, plan.split, plan.seed)?;
    if train_rows.is_empty() {
        return Err(Error::InvalidConfig("the split leaves no training drawings".into()));
    }
    let train = data.batches(&train_rows, plan.batch_size)?;
    let test = data.batches(&test_rows, plan.batch_size)?;

    let (mut model, mut state) = match init {
        Some(c) => {
            if c.model.config != config {
                return Err(Error::InvalidConfig(
                    "initial checkpoint configuration differs from the plan's".into(),
                ));
            }
            let n = c.model.params.len();
            (c.model, c.optimizer_state.unwrap_or_else(|| AdamState::new(n)))
        }
        None => {
            let m = Model::init(config, plan.seed)?;
            let n = m.params.len();
            (m, AdamState::new(n))
        }
    };
    let adam = AdamConfig {
        lr: plan.lr,
        ..AdamConfig::default()
    };
    let mut metrics = MetricsTable {
        attributes: data.attributes.clone(),
        rows: Vec::new(),
    };
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x5eed_0f_ba7c4e5);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=plan.epochs {
        order.shuffle(&mut shuffle_rng);
        for (step, &b) in order.iter().enumerate() {
            let (loss, mut grad) = model.loss_and_grad(&train[b])?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!("non-finite loss or gradient at epoch {epoch}, step {}", step + 1)));
            }
            clip_global_norm(&mut grad, plan.clip);
            adam_step(&mut model.params.values, &grad, &mut state, &adam);
        }
        for (name, batches) in [("train", &train), ("test", &test)] {
            if batches.is_empty() {
                continue;
            }
            let (loss, balanced_accuracy) = evaluate(&model, batches)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite {name} loss at epoch {epoch}")));
            }
            let row = MetricsRow {
                epoch,
                split: name,
                loss,
                balanced_accuracy,
            };
            on_row(&row);
            metrics.rows.push(row);
        }
    }

    let eligible = metrics.eligible_attributes();
    let checkpoint = Checkpoint {
        model,
        optimizer_state: Some(state),
        attributes: data.attributes.clone(),
        encoding: Some(EncodingInfo {
            format: plan.format,
            ordering: plan.ordering,
        }),
    };
    Ok(StageOutcome {
        metrics,
        checkpoint,
        eligible,
    })
}
