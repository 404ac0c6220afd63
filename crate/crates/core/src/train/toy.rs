use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::attributes::AttributeTable;
use crate::sketch::{Drawing, Point, Stroke};

pub const TOY_CANVAS: f64 = 256.0;
pub const TOY_ATTRIBUTE: &str = "glasses";
pub const LEFT_EYE: (f64, f64) = (92.0, 110.0);
pub const RIGHT_EYE: (f64, f64) = (164.0, 110.0);
/// Largest glasses circle radius.
pub const GLASSES_RADIUS: f64 = 26.0;
/// Largest offset of the whole face from its nominal position, per axis.
pub const FACE_JITTER: f64 = 5.0;
const PART_JITTER: f64 = 2.0;
const POINT_NOISE: f64 = 1.0;

/// Discs that contain every glasses circle of every toy drawing.
pub fn glasses_regions() -> [((f64, f64), f64); 2] {
    let r = GLASSES_RADIUS + (FACE_JITTER + PART_JITTER + POINT_NOISE) * std::f64::consts::SQRT_2;
    [(LEFT_EYE, r), (RIGHT_EYE, r)]
}

/// Same-size discs over the lower cheeks and mouth, where every toy
/// drawing has ink regardless of its label.
pub fn control_regions() -> [((f64, f64), f64); 2] {
    let [(_, r), _] = glasses_regions();
    [((LEFT_EYE.0, 190.0), r), ((RIGHT_EYE.0, 190.0), r)]
}

struct Sketcher {
    rng: ChaCha8Rng,
}

impl Sketcher {
    fn jitter(&mut self, a: f64) -> f64 {
        self.rng.random_range(-a..=a)
    }

    fn point(&mut self, x: f64, y: f64) -> Point {
        let x = (x + self.jitter(POINT_NOISE)).clamp(0.0, TOY_CANVAS);
        let y = (y + self.jitter(POINT_NOISE)).clamp(0.0, TOY_CANVAS);
        Point::new(x, y)
    }

    /// Closed ellipse polyline, `n` segments from a random start angle.
    fn ellipse(&mut self, c: (f64, f64), rx: f64, ry: f64, n: usize) -> Stroke {
        let start = self.rng.random_range(0.0..TAU);
        let mut pts: Vec<Point> = (0..n)
            .map(|k| {
                let a = start + TAU * k as f64 / n as f64;
                self.point(c.0 + rx * a.cos(), c.1 + ry * a.sin())
            })
            .collect();
        pts.push(pts[0]);
        Stroke::new(pts).expect("ellipse has at least two finite points")
    }

    fn polyline(&mut self, pts: &[(f64, f64)]) -> Stroke {
        let pts = pts.iter().map(|&(x, y)| self.point(x, y)).collect();
        Stroke::new(pts).expect("polyline has at least two finite points")
    }
}

/// Synthetic face sketches with a balanced binary `glasses` label.
///
/// Each drawing has an oval, two eyes, a nose and a mouth; with probability
/// one half it also has two circles around the eyes. Strokes come out in a
/// shuffled order with random directions.
pub fn make_toy_dataset(n: usize, seed: u64) -> Vec<Drawing> {
    let mut s = Sketcher {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    (0..n)
        .map(|i| {
            let (dx, dy) = (s.jitter(FACE_JITTER), s.jitter(FACE_JITTER));
            let at = |p: (f64, f64), s: &mut Sketcher| (p.0 + dx + s.jitter(PART_JITTER), p.1 + dy + s.jitter(PART_JITTER));
            let glasses = s.rng.random_bool(0.5);

            let mut strokes = Vec::with_capacity(7);
            let face = at((128.0, 128.0), &mut s);
            let (rx, ry) = (84.0 + s.jitter(4.0), 104.0 + s.jitter(4.0));
            strokes.push(s.ellipse(face, rx, ry, 32));
            for eye in [LEFT_EYE, RIGHT_EYE] {
                let c = at(eye, &mut s);
                strokes.push(s.ellipse(c, 12.0, 5.0, 9));
            }
            let nose = at((128.0, 120.0), &mut s);
            strokes.push(s.polyline(&[nose, (nose.0 - 8.0, nose.1 + 30.0), (nose.0 + 4.0, nose.1 + 33.0)]));
            let mouth = at((128.0, 182.0), &mut s);
            let depth = 4.0 + s.jitter(3.0);
            let arc: Vec<(f64, f64)> = (0..9)
                .map(|k| {
                    let u = k as f64 / 8.0;
                    (mouth.0 - 28.0 + 56.0 * u, mouth.1 + depth * (std::f64::consts::PI * u).sin())
                })
                .collect();
            strokes.push(s.polyline(&arc));
            if glasses {
                for eye in [LEFT_EYE, RIGHT_EYE] {
                    let c = at(eye, &mut s);
                    let r = s.rng.random_range(GLASSES_RADIUS - 6.0..=GLASSES_RADIUS);
                    strokes.push(s.ellipse(c, r, r, 18));
                }
            }

            strokes.shuffle(&mut s.rng);
            let strokes = strokes
                .into_iter()
                .map(|st| if s.rng.random_bool(0.5) { st.reversed() } else { st })
                .collect();
            let labels = BTreeMap::from([(TOY_ATTRIBUTE.to_string(), if glasses { 1 } else { -1 })]);
            Drawing::new(format!("toy{i:06}"), TOY_CANVAS, TOY_CANVAS, strokes)
                .and_then(|d| d.with_labels(labels))
                .expect("toy drawings are constructed inside the canvas")
        })
        .collect()
}

/// Attribute table built from the drawings' own labels.
pub fn labels_to_table(drawings: &[Drawing]) -> AttributeTable {
    let mut names: Vec<String> = drawings
        .iter()
        .flat_map(|d| d.labels.iter().flat_map(|l| l.keys().cloned()))
        .collect();
    names.sort();
    names.dedup();
    let mut t = AttributeTable::new(names.clone());
    for d in drawings {
        let Some(labels) = &d.labels else { continue };
        if let Some(row) = names.iter().map(|n| labels.get(n).copied()).collect::<Option<Vec<i8>>>() {
            t.push(d.id.clone(), row).expect("labels are validated on construction");
        }
    }
    t
}
