//! Line-drawing classifiers and the per-point scoring trick behind FaCells.
//!
//! The crate covers the whole pipeline from raster portraits to attribute
//! images:
//!
//! - [`sketch`]: drawings, strokes, and the absolute / relative `(a, b, p)`
//!   sequence encodings.
//! - [`vectorize`]: Canny edges traced into strokes.
//! - [`order`]: stroke ordering for minimum pen-up travel (open TSP with
//!   stroke orientation), exact for small drawings and heuristic otherwise.
//! - [`model`]: a from-scratch bidirectional LSTM classifier with `fs` / `ga`
//!   heads, BPTT gradients and Adam.
//! - [`train`]: attribute tables, splits, the staged training protocol and
//!   the format × ordering comparison harness.
//! - [`facells`]: per-point scores, line filtering and FaCell composition.
//!
//! All numerics are `f64`. Every source of randomness takes an explicit seed.

pub mod error;
pub mod facells;
pub mod model;
pub mod order;
pub mod sketch;
pub mod train;
pub mod vectorize;

pub use error::{Error, ErrorKind, Result};
pub use facells::{FaCell, FaCellSpec, PointScores, Polarity};
pub use sketch::{CoordMode, Drawing, EncodedSequence, Format, PenState, Point, Stroke};

pub use vectorize::{RasterImage, VectorizeConfig};
pub use model::{Head, Model, ModelConfig, ModelParams, SequenceBatch};
pub use train::{AttributeTable, ExperimentPlan};
pub use order::{OrderMethod, Tour};
