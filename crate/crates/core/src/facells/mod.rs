//! Per-point attribute scores and FaCell composition.
//!
//! A `ga` model averages its last hidden layer over time before an affine
//! output. Applying that affine map at every timestep instead gives one
//! score per point whose mean is exactly the model logit.

mod compose;
mod scores;

pub use compose::{compose_facell, filter_lines, AnnotatedDrawing, FaCell, FaCellSpec, Polarity, DEFAULT_LINE_FRACTION};
pub use scores::{cell_trace, per_point_scores, score_drawings, AttributeScores, CellTrace, PointScores, ScoredDrawing};
