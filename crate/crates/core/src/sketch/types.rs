use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// A polyline drawn without lifting the pen. Always has at least two points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Stroke {
    points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidDrawing(format!(
                "stroke needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidDrawing(format!("non-finite point at index {i}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Polyline length. Summed from the lexicographically smaller end so a
    /// stroke and its reversal give bit-identical results.
    pub fn length(&self) -> f64 {
        let (a, b) = (self.first(), self.last());
        let segs = self.points.windows(2).map(|w| w[0].distance(w[1]));
        if (a.x, a.y) <= (b.x, b.y) {
            segs.sum()
        } else {
            segs.rev().sum()
        }
    }
}

impl TryFrom<Vec<Point>> for Stroke {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Stroke::new(points)
    }
}

impl From<Stroke> for Vec<Point> {
    fn from(s: Stroke) -> Self {
        s.points
    }
}

/// Attribute labels in the CelebA convention: `+1` present, `-1` absent.
pub type Labels = BTreeMap<String, i8>;

/// An ordered list of strokes on a `width × height` canvas (y grows downward).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDrawing", into = "RawDrawing")]
pub struct Drawing {
    pub id: String,
    width: f64,
    height: f64,
    strokes: Vec<Stroke>,
    pub labels: Option<Labels>,
}

impl Drawing {
    pub fn new(id: impl Into<String>, width: f64, height: f64, strokes: Vec<Stroke>) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(Error::InvalidDrawing(format!(
                "canvas must be positive, got {width}x{height}"
            )));
        }
        for (si, stroke) in strokes.iter().enumerate() {
            for p in stroke.points() {
                if p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height {
                    return Err(Error::InvalidDrawing(format!(
                        "stroke {si} point ({}, {}) outside canvas {width}x{height}",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(Self {
            id: id.into(),
            width,
            height,
            strokes,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if let Some((name, v)) = labels.iter().find(|(_, v)| !matches!(**v, -1 | 1)) {
            return Err(Error::InvalidDrawing(format!(
                "label `{name}` must be 1 or -1, got {v}"
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn point_count(&self) -> usize {
        self.strokes.iter().map(Stroke::len).sum()
    }

    /// Same canvas, id and labels with a different stroke list. The caller
    /// guarantees the strokes stay on the canvas.
    pub(crate) fn with_strokes(&self, strokes: Vec<Stroke>) -> Self {
        Self {
            id: self.id.clone(),
            width: self.width,
            height: self.height,
            strokes,
            labels: self.labels.clone(),
        }
    }

    /// Label of `attribute` as a 0/1 target, if present.
    pub fn target(&self, attribute: &str) -> Option<f64> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(attribute))
            .map(|&v| if v > 0 { 1.0 } else { 0.0 })
    }
}

#[derive(Serialize, Deserialize)]
struct RawDrawing {
    id: String,
    width: f64,
    height: f64,
    strokes: Vec<Stroke>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Labels>,
}

impl TryFrom<RawDrawing> for Drawing {
    type Error = Error;

    fn try_from(raw: RawDrawing) -> Result<Self> {
        let d = Drawing::new(raw.id, raw.width, raw.height, raw.strokes)?;
        match raw.labels {
            Some(l) => d.with_labels(l),
            None => Ok(d),
        }
    }
}

impl From<Drawing> for RawDrawing {
    fn from(d: Drawing) -> Self {
        RawDrawing {
            id: d.id,
            width: d.width,
            height: d.height,
            strokes: d.strokes,
            labels: d.labels,
        }
    }
}

/// Sum of polyline lengths, independent of stroke order and direction
/// down to the last bit.
pub fn total_ink_length(d: &Drawing) -> f64 {
    let mut lengths: Vec<f64> = d.strokes.iter().map(Stroke::length).collect();
    lengths.sort_by(f64::total_cmp);
    lengths.iter().sum()
}

/// Travel between strokes in their current order: each stroke's last point
/// to the next stroke's first point.
pub fn pen_up_length(d: &Drawing) -> f64 {
    d.strokes
        .windows(2)
        .map(|w| w[0].last().distance(w[1].first()))
        .sum()
}
