//! Raster portrait to stroke drawing: Canny edges, then greedy edge tracing
//! and Ramer–Douglas–Peucker simplification.

mod canny;
mod simplify;
mod trace;

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

pub use canny::{canny_edges, EdgeMap};
pub use simplify::{segment_distance, simplify};
pub use trace::trace_strokes;

use crate::sketch::Drawing;
use crate::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Decodes a binary (P5) or ASCII (P2) PGM.
    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let img = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Pnm).decode()?;
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        Self::new(w as usize, h as usize, gray.into_raw())
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_pgm_bytes(&bytes)
    }

    /// Binary PGM (P5).
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorizeConfig {
    pub blur_sigma: f64,
    /// Hysteresis thresholds on the Sobel magnitude, in 8-bit units.
    pub canny_low: f64,
    pub canny_high: f64,
    pub min_stroke_points: usize,
    pub simplify_epsilon: f64,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        Self {
            blur_sigma: 1.4,
            canny_low: 50.0,
            canny_high: 120.0,
            min_stroke_points: 4,
            simplify_epsilon: 1.0,
        }
    }
}

impl VectorizeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.blur_sigma > 0.0
            && self.canny_low > 0.0
            && self.canny_low < self.canny_high
            && self.min_stroke_points >= 2
            && self.simplify_epsilon >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Full raster-to-drawing conversion.
pub fn vectorize(img: &RasterImage, cfg: &VectorizeConfig, id: &str) -> Result<Drawing> {
    cfg.validate()?;
    let edges = canny_edges(img, cfg)?;
    let mut d = trace_strokes(&edges, cfg);
    d.id = id.to_string();
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let mut img = RasterImage::filled(5, 4, 200);
        img.set(2, 3, 7);
        let back = RasterImage::from_pgm_bytes(&img.to_pgm_bytes()).unwrap();
        assert_eq!(back, img);
        let ascii = b"P2\n2 2\n255\n0 10\n20 255\n";
        let a = RasterImage::from_pgm_bytes(ascii).unwrap();
        assert_eq!(a.pixels(), &[0, 10, 20, 255]);
    }

    #[test]
    fn config_validation() {
        assert!(VectorizeConfig::default().validate().is_ok());
        let bad = VectorizeConfig {
            canny_low: 130.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = VectorizeConfig {
            min_stroke_points: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn uniform_image_has_no_strokes() {
        let img = RasterImage::filled(40, 30, 128);
        let d = vectorize(&img, &VectorizeConfig::default(), "u").unwrap();
        assert!(d.strokes().is_empty());
        assert_eq!(d.width(), 40.0);
    }
}
