//! Drawing data model, geometry and sequence encodings.

mod encode;
pub mod io;
pub mod svg;
mod types;

pub use encode::{
    accepts_pen_grammar, check_pen_grammar, decode, encode, encode_absolute, encode_relative,
    CoordMode, EncodedSequence, Format, PenState, Triple,
};
pub use types::{pen_up_length, total_ink_length, Drawing, Labels, Point, Stroke};
