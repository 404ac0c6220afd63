//! LSTM sequence classifier: bidirectional stacks, fs/ga heads, dense
//! layers, BPTT gradients and Adam.

mod adam;
mod batch;
mod cell;
pub mod checkpoint;
mod config;
pub mod gradcheck;
mod loss;
mod network;
mod params;

pub use adam::{adam_step, clip_global_norm, AdamConfig, AdamState};
pub use batch::SequenceBatch;
pub use cell::{lstm_cell_step, CellParams};
pub use checkpoint::{Checkpoint, EncodingInfo};
pub use config::{Activation, DenseLayer, Head, LstmLayer, ModelConfig, CONFIG_NAMES};
pub use loss::{balanced_accuracy, balanced_accuracy_column, bce_loss, PROB_CLAMP};
pub use network::{ForwardOutput, Model};
pub use params::{AffineLayout, Block, DirectionLayout, Layout, ModelParams};
