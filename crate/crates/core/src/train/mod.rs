//! Attribute tables, splits, the staged training loop and plan comparison.

mod attributes;
mod compare;
mod plan;
mod split;
mod stage;
pub mod toy;

pub use attributes::{load_attributes, write_attributes, AttributeTable};
pub use compare::{compare_matrix, ComparisonReport};
pub use plan::{AttributeSelection, ExperimentPlan, PRESETS};
pub use split::{split, SplitSpec};
pub use stage::{
    encode_dataset, evaluate, ordering_for, prepare_sequence, run_stage, run_stage_with, EncodedDataset, MetricsRow,
    MetricsTable, StageOutcome,
};
