use serde::{Deserialize, Serialize};

use super::types::{Drawing, Point, Stroke};
use crate::{Error, Result};

/// Per-point pen marker: begin, continue or end of a stroke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum PenState {
    Begin,
    Continue,
    End,
}

impl PenState {
    /// The value fed to the model as the third input channel.
    pub fn value(self) -> f64 {
        match self {
            PenState::Begin => 1.0,
            PenState::Continue => 0.0,
            PenState::End => -1.0,
        }
    }
}

impl TryFrom<i8> for PenState {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(PenState::Begin),
            0 => Ok(PenState::Continue),
            -1 => Ok(PenState::End),
            other => Err(format!("pen state must be 1, 0 or -1, got {other}")),
        }
    }
}

impl From<PenState> for i8 {
    fn from(p: PenState) -> i8 {
        match p {
            PenState::Begin => 1,
            PenState::Continue => 0,
            PenState::End => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Absolute,
    Relative,
}

/// Coordinate frame of encoded values.
///
/// `Raw` keeps canvas units (absolute values are canvas coordinates,
/// relative values start from the canvas center). `Normalized` moves the
/// origin to the canvas center and scales by `2 / max(width, height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordMode {
    Raw,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, PenState)", into = "(f64, f64, PenState)")]
pub struct Triple {
    pub a: f64,
    pub b: f64,
    pub p: PenState,
}

impl From<(f64, f64, PenState)> for Triple {
    fn from((a, b, p): (f64, f64, PenState)) -> Self {
        Self { a, b, p }
    }
}

impl From<Triple> for (f64, f64, PenState) {
    fn from(t: Triple) -> Self {
        (t.a, t.b, t.p)
    }
}

/// A drawing flattened into `(a, b, p)` triples, one per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedSequence {
    pub format: Format,
    pub mode: CoordMode,
    pub triples: Vec<Triple>,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Row-major `len × 3` features.
    pub fn features(&self) -> Vec<f64> {
        self.triples
            .iter()
            .flat_map(|t| [t.a, t.b, t.p.value()])
            .collect()
    }

    pub fn pen_states(&self) -> impl Iterator<Item = PenState> + '_ {
        self.triples.iter().map(|t| t.p)
    }
}

struct Frame {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl Frame {
    fn new(width: f64, height: f64, mode: CoordMode) -> Self {
        let scale = match mode {
            CoordMode::Raw => 1.0,
            CoordMode::Normalized => 2.0 / width.max(height),
        };
        Self {
            cx: width / 2.0,
            cy: height / 2.0,
            scale,
        }
    }

    fn centered(&self, p: Point) -> (f64, f64) {
        ((p.x - self.cx) * self.scale, (p.y - self.cy) * self.scale)
    }

    fn uncentered(&self, a: f64, b: f64) -> Point {
        Point::new(a / self.scale + self.cx, b / self.scale + self.cy)
    }
}

fn pen_state(i: usize, len: usize) -> PenState {
    if i == 0 {
        PenState::Begin
    } else if i + 1 == len {
        PenState::End
    } else {
        PenState::Continue
    }
}

pub fn encode(d: &Drawing, format: Format, mode: CoordMode) -> EncodedSequence {
    match format {
        Format::Absolute => encode_absolute(d, mode),
        Format::Relative => encode_relative(d, mode),
    }
}

pub fn encode_absolute(d: &Drawing, mode: CoordMode) -> EncodedSequence {
    let frame = Frame::new(d.width(), d.height(), mode);
    let mut triples = Vec::with_capacity(d.point_count());
    for stroke in d.strokes() {
        let n = stroke.len();
        for (i, &pt) in stroke.points().iter().enumerate() {
            let (a, b) = match mode {
                CoordMode::Raw => (pt.x, pt.y),
                CoordMode::Normalized => frame.centered(pt),
            };
            triples.push(Triple { a, b, p: pen_state(i, n) });
        }
    }
    EncodedSequence {
        format: Format::Absolute,
        mode,
        triples,
    }
}

/// Offsets from the previous point of the flattened sequence; the first
/// point is taken relative to the canvas center. Deltas run across stroke
/// boundaries.
pub fn encode_relative(d: &Drawing, mode: CoordMode) -> EncodedSequence {
    let frame = Frame::new(d.width(), d.height(), mode);
    let mut triples = Vec::with_capacity(d.point_count());
    let mut prev = (0.0, 0.0);
    for stroke in d.strokes() {
        let n = stroke.len();
        for (i, &pt) in stroke.points().iter().enumerate() {
            let cur = frame.centered(pt);
            triples.push(Triple {
                a: cur.0 - prev.0,
                b: cur.1 - prev.1,
                p: pen_state(i, n),
            });
            prev = cur;
        }
    }
    EncodedSequence {
        format: Format::Relative,
        mode,
        triples,
    }
}

/// Runs the `(+1 0* −1)*` automaton and reports the first offending index.
pub fn check_pen_grammar(states: impl IntoIterator<Item = PenState>) -> Result<()> {
    let mut inside = false;
    let mut last = 0;
    for (i, p) in states.into_iter().enumerate() {
        last = i;
        inside = match (inside, p) {
            (false, PenState::Begin) => true,
            (true, PenState::Continue) => true,
            (true, PenState::End) => false,
            (false, _) => {
                return Err(Error::MalformedSequence {
                    index: i,
                    reason: "expected stroke begin (+1)",
                })
            }
            (true, PenState::Begin) => {
                return Err(Error::MalformedSequence {
                    index: i,
                    reason: "stroke begins before previous stroke ended",
                })
            }
        };
    }
    if inside {
        return Err(Error::MalformedSequence {
            index: last,
            reason: "sequence ends inside a stroke (missing -1)",
        });
    }
    Ok(())
}

pub fn accepts_pen_grammar(states: impl IntoIterator<Item = PenState>) -> bool {
    check_pen_grammar(states).is_ok()
}

/// Inverse of the encoders. The result has an empty id and no labels.
pub fn decode(s: &EncodedSequence, width: f64, height: f64) -> Result<Drawing> {
    check_pen_grammar(s.pen_states())?;
    let frame = Frame::new(width, height, s.mode);
    let mut strokes = Vec::new();
    let mut current = Vec::new();
    let mut acc = (0.0, 0.0);
    for t in &s.triples {
        let pt = match (s.format, s.mode) {
            (Format::Absolute, CoordMode::Raw) => Point::new(t.a, t.b),
            (Format::Absolute, CoordMode::Normalized) => frame.uncentered(t.a, t.b),
            (Format::Relative, _) => {
                acc = (acc.0 + t.a, acc.1 + t.b);
                frame.uncentered(acc.0, acc.1)
            }
        };
        current.push(pt);
        if t.p == PenState::End {
            strokes.push(Stroke::new(std::mem::take(&mut current))?);
        }
    }
    Drawing::new("", width, height, strokes)
}
