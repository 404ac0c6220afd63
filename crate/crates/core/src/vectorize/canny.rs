use super::{RasterImage, VectorizeConfig};
use crate::{Error, Result};

/// Binary edge map, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            edges: vec![false; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.edges[y * self.width + x] = v;
    }

    /// Signed lookup, out of bounds is "no edge".
    pub(crate) fn at(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.edges[y as usize * self.width + x as usize]
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with clamp-to-edge borders.
fn blur(img: &RasterImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * f64::from(img.get(clamp(x as isize + i as isize - r, w), y)))
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp[clamp(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Standard Canny: Gaussian blur, 3×3 Sobel, non-maximum suppression along
/// the quantized gradient direction, double-threshold hysteresis.
pub fn canny_edges(img: &RasterImage, cfg: &VectorizeConfig) -> Result<EdgeMap> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    let b = blur(img, cfg.blur_sigma);
    let px = |x: usize, y: usize| b[y * w + x];

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let dx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            let dy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            let i = y * w + x;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = dx.hypot(dy);
        }
    }

    // Ties between the two neighbours keep only the first one, so a
    // symmetric two-pixel ridge thins to a single pixel.
    let mut thin = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (before, after) = if !(22.5..157.5).contains(&angle) {
                (mag[i - 1], mag[i + 1])
            } else if angle < 67.5 {
                (mag[i - w - 1], mag[i + w + 1])
            } else if angle < 112.5 {
                (mag[i - w], mag[i + w])
            } else {
                (mag[i - w + 1], mag[i + w - 1])
            };
            if m > before && m >= after {
                thin[i] = m;
            }
        }
    }

    let mut out = EdgeMap::new(w, h);
    let mut stack = Vec::new();
    for i in 0..w * h {
        if thin[i] < cfg.canny_high || out.edges[i] {
            continue;
        }
        out.edges[i] = true;
        stack.push(i);
        while let Some(j) = stack.pop() {
            let (x, y) = ((j % w) as isize, (j / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let k = ny as usize * w + nx as usize;
                    if !out.edges[k] && thin[k] >= cfg.canny_low {
                        out.edges[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(1.4);
        assert_eq!(k.len(), 11);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k[0], k[10]);
    }

    #[test]
    fn too_small() {
        let img = RasterImage::filled(2, 5, 0);
        assert!(matches!(
            canny_edges(&img, &VectorizeConfig::default()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn uniform_gray_has_no_edges() {
        let img = RasterImage::filled(32, 32, 90);
        assert_eq!(canny_edges(&img, &VectorizeConfig::default()).unwrap().count(), 0);
    }

    #[test]
    fn vertical_step_edge_stays_at_the_step() {
        let (w, h, c) = (40, 30, 17);
        let mut img = RasterImage::filled(w, h, 255);
        for y in 0..h {
            for x in 0..c {
                img.set(x, y, 0);
            }
        }
        let edges = canny_edges(&img, &VectorizeConfig::default()).unwrap();
        assert!(edges.count() > 0);
        for y in 0..h {
            for x in 0..w {
                if edges.get(x, y) {
                    assert!((c - 1..=c + 1).contains(&x), "edge at column {x}");
                }
            }
        }
        // one pixel per interior row
        for y in 1..h - 1 {
            assert_eq!((0..w).filter(|&x| edges.get(x, y)).count(), 1, "row {y}");
        }
    }

    #[test]
    fn rectangle_boundary_covered() {
        let (w, h) = (128, 100);
        let (x0, y0, x1, y1) = (24usize, 20usize, 103usize, 79usize);
        let mut img = RasterImage::filled(w, h, 255);
        for y in y0..=y1 {
            for x in x0..=x1 {
                img.set(x, y, 0);
            }
        }
        let edges = canny_edges(&img, &VectorizeConfig::default()).unwrap();
        let boundary: Vec<(usize, usize)> = (y0..=y1)
            .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
            .filter(|&(x, y)| x == x0 || x == x1 || y == y0 || y == y1)
            .collect();
        let near_boundary = |x: usize, y: usize| {
            boundary
                .iter()
                .any(|&(bx, by)| bx.abs_diff(x) <= 1 && by.abs_diff(y) <= 1)
        };
        for y in 0..h {
            for x in 0..w {
                if edges.get(x, y) {
                    assert!(near_boundary(x, y), "stray edge pixel ({x},{y})");
                }
            }
        }
        let covered = boundary
            .iter()
            .filter(|&&(bx, by)| {
                (by.saturating_sub(1)..=by + 1)
                    .any(|y| (bx.saturating_sub(1)..=bx + 1).any(|x| edges.get(x, y)))
            })
            .count();
        let coverage = covered as f64 / boundary.len() as f64;
        assert!(coverage >= 0.95, "coverage {coverage}");
    }
}
