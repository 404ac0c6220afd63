use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scores::AttributeScores;
use crate::sketch::svg::{header, polyline};
use crate::sketch::{Drawing, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// "Attribute X-Y": overlay `count` drawings, keep points beyond `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaCellSpec {
    pub attribute: String,
    pub count: usize,
    pub threshold: f64,
    pub polarity: Polarity,
}

impl FaCellSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("FaCell count must be at least 1".into()));
        }
        if self.threshold.is_nan() {
            return Err(Error::InvalidConfig("FaCell threshold is NaN".into()));
        }
        Ok(())
    }

    pub fn passes(&self, score: f64) -> bool {
        match self.polarity {
            Polarity::Positive => score > self.threshold,
            Polarity::Negative => score < -self.threshold,
        }
    }

    /// Whether the drawing's prediction agrees with the polarity.
    pub fn qualifies(&self, logit: f64) -> bool {
        match self.polarity {
            Polarity::Positive => logit > 0.0,
            Polarity::Negative => logit < 0.0,
        }
    }
}

pub const DEFAULT_LINE_FRACTION: f64 = 0.5;

/// A drawing with its passing points and strokes marked.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedDrawing {
    pub drawing: Drawing,
    /// One flag per point, strokes concatenated.
    pub point_pass: Vec<bool>,
    pub stroke_pass: Vec<bool>,
}

pub fn filter_lines(d: &Drawing, scores: &AttributeScores, spec: &FaCellSpec, line_fraction: f64) -> Result<AnnotatedDrawing> {
    if scores.points.len() != d.point_count() {
        return Err(Error::Shape(format!(
            "{}: {} scores for {} points",
            d.id,
            scores.points.len(),
            d.point_count()
        )));
    }
    if !(0.0..=1.0).contains(&line_fraction) {
        return Err(Error::InvalidConfig(format!("line fraction {line_fraction} outside [0, 1]")));
    }
    let point_pass: Vec<bool> = scores.points.iter().map(|&s| spec.passes(s)).collect();
    let mut stroke_pass = Vec::with_capacity(d.strokes().len());
    let mut at = 0;
    for st in d.strokes() {
        let n = st.len();
        let passed = point_pass[at..at + n].iter().filter(|&&p| p).count();
        stroke_pass.push(passed as f64 >= line_fraction * n as f64);
        at += n;
    }
    Ok(AnnotatedDrawing {
        drawing: d.clone(),
        point_pass,
        stroke_pass,
    })
}

impl AnnotatedDrawing {
    /// Annotated strokes in red over the rest in light grey; passing points
    /// as dots.
    pub fn to_svg(&self) -> String {
        let d = &self.drawing;
        let mut s = header(d.width(), d.height());
        for (st, &hit) in d.strokes().iter().zip(&self.stroke_pass) {
            polyline(&mut s, st.points(), if hit { "red" } else { "#bbbbbb" });
        }
        let points = d.strokes().iter().flat_map(|st| st.points());
        for (p, _) in points.zip(&self.point_pass).filter(|(_, &hit)| hit) {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="1" fill="black"/>"#, p.x, p.y);
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Accumulated passing points of many drawings on one canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct FaCell {
    pub width: usize,
    pub height: usize,
    /// Row-major hit count per pixel.
    pub counts: Vec<u32>,
    pub points: Vec<Point>,
    pub ids: Vec<String>,
}

/// Overlays the passing points of the first `spec.count` qualifying
/// drawings, taken in a seeded order that ignores the input order.
pub fn compose_facell(items: &[(Drawing, AttributeScores)], spec: &FaCellSpec, seed: u64) -> Result<FaCell> {
    spec.validate()?;
    let mut qualifying: Vec<&(Drawing, AttributeScores)> = items.iter().filter(|(_, s)| spec.qualifies(s.logit)).collect();
    if qualifying.len() < spec.count {
        return Err(Error::NotEnoughDrawings {
            wanted: spec.count,
            found: qualifying.len(),
        });
    }
    qualifying.sort_by(|a, b| a.0.id.cmp(&b.0.id).then(a.1.logit.total_cmp(&b.1.logit)));
    qualifying.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    qualifying.truncate(spec.count);

    let (w, h) = (qualifying[0].0.width(), qualifying[0].0.height());
    let (width, height) = (w.ceil().max(1.0) as usize, h.ceil().max(1.0) as usize);
    let mut cell = FaCell {
        width,
        height,
        counts: vec![0; width * height],
        points: Vec::new(),
        ids: Vec::with_capacity(spec.count),
    };
    for (d, scores) in qualifying {
        if d.width() != w || d.height() != h {
            return Err(Error::InvalidDrawing(format!(
                "{}: canvas {}x{} differs from {w}x{h}",
                d.id,
                d.width(),
                d.height()
            )));
        }
        let kept = filter_lines(d, scores, spec, DEFAULT_LINE_FRACTION)?;
        let points = d.strokes().iter().flat_map(|st| st.points());
        for (&p, _) in points.zip(&kept.point_pass).filter(|(_, &hit)| hit) {
            let col = (p.x.floor() as usize).min(width - 1);
            let row = (p.y.floor() as usize).min(height - 1);
            cell.counts[row * width + col] += 1;
            cell.points.push(p);
        }
        cell.ids.push(d.id.clone());
    }
    Ok(cell)
}

impl FaCell {
    /// Sum of counts over pixels whose centres lie within `radius` of `center`.
    pub fn region_mass(&self, center: (f64, f64), radius: f64) -> u64 {
        let mut total = 0;
        for row in 0..self.height {
            for col in 0..self.width {
                let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
                if (x - center.0).hypot(y - center.1) <= radius {
                    total += u64::from(self.counts[row * self.width + col]);
                }
            }
        }
        total
    }

    pub fn total_mass(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Points as dots of the given opacity.
    pub fn to_svg(&self, opacity: f64) -> String {
        let mut s = header(self.width as f64, self.height as f64);
        let _ = writeln!(s, r#"<g fill="black" fill-opacity="{opacity}">"#);
        for p in &self.points {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="0.8"/>"#, p.x, p.y);
        }
        s.push_str("</g>\n</svg>\n");
        s
    }

    /// White canvas darkened by `step` grey levels per hit, clamped at black.
    pub fn to_gray(&self, step: u8) -> image::GrayImage {
        let pixels = self
            .counts
            .iter()
            .map(|&c| 255 - (u64::from(c) * u64::from(step)).min(255) as u8)
            .collect();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, pixels).expect("buffer matches dimensions")
    }

    /// Binary (P5) PGM of [`to_gray`](Self::to_gray).
    pub fn write_pgm(&self, path: &Path, step: u8) -> Result<()> {
        use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
        use image::ImageEncoder;
        let mut bytes = Vec::new();
        PnmEncoder::new(&mut bytes)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&self.to_gray(step), self.width as u32, self.height as u32, image::ExtendedColorType::L8)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}
