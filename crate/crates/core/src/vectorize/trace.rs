use super::canny::EdgeMap;
use super::simplify::simplify;
use super::VectorizeConfig;
use crate::sketch::{Drawing, Point, Stroke};

/// Clockwise ring of 8-neighbour offsets (y grows downward), starting east.
/// Even indices are 4-connected.
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn turn(a: usize, b: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(8 - d)
}

/// Number of separate edge runs around the pixel's 8-ring. Three or more
/// means branches meet here.
fn crossings(edges: &EdgeMap, x: isize, y: isize) -> usize {
    let ring: Vec<bool> = DIRS.iter().map(|&(dx, dy)| edges.at(x + dx, y + dy)).collect();
    (0..8).filter(|&k| ring[k] && !ring[(k + 7) % 8]).count()
}

struct Tracer<'a> {
    edges: &'a EdgeMap,
    visited: Vec<bool>,
}

impl Tracer<'_> {
    fn free(&self, x: isize, y: isize) -> bool {
        self.edges.at(x, y) && !self.visited[y as usize * self.edges.width + x as usize]
    }

    fn take(&mut self, x: isize, y: isize) {
        self.visited[y as usize * self.edges.width + x as usize] = true;
    }

    /// Next step from `(x, y)`: a diagonal is skipped when an adjacent
    /// 4-neighbour also qualifies (it is reachable through that pixel), then
    /// the smallest turn from `heading` wins, ties to the lower ring index.
    fn next_dir(&self, x: isize, y: isize, heading: Option<usize>) -> Option<usize> {
        let open: Vec<bool> = DIRS.iter().map(|&(dx, dy)| self.free(x + dx, y + dy)).collect();
        (0..8)
            .filter(|&k| open[k])
            .filter(|&k| k % 2 == 0 || !(open[(k + 1) % 8] || open[(k + 7) % 8]))
            .min_by_key(|&k| (heading.map_or(0, |h| turn(h, k)), k % 2, k))
    }

    fn walk(&mut self, mut x: isize, mut y: isize) -> Vec<(isize, isize)> {
        let mut path = Vec::new();
        let mut heading = None;
        while let Some(k) = self.next_dir(x, y, heading) {
            x += DIRS[k].0;
            y += DIRS[k].1;
            self.take(x, y);
            path.push((x, y));
            heading = Some(k);
            if crossings(self.edges, x, y) >= 3 {
                break;
            }
        }
        path
    }
}

/// Greedy tracing of an edge map into strokes.
///
/// Seeds are taken in row-major order. From each seed the tracer walks both
/// ways through unvisited 8-connected edge pixels, preferring to keep its
/// heading, and stops at dead ends or junctions. Every edge pixel ends up in
/// at most one polyline. Polylines with fewer than `min_stroke_points`
/// pixels are dropped, the rest are RDP-simplified. Point coordinates are
/// pixel indices.
pub fn trace_strokes(edges: &EdgeMap, cfg: &VectorizeConfig) -> Drawing {
    let (w, h) = (edges.width, edges.height);
    let mut tracer = Tracer {
        edges,
        visited: vec![false; w * h],
    };
    let mut strokes = Vec::new();

    for y in 0..h as isize {
        for x in 0..w as isize {
            if !tracer.free(x, y) {
                continue;
            }
            tracer.take(x, y);
            let forward = tracer.walk(x, y);
            let backward = if crossings(edges, x, y) >= 3 {
                Vec::new()
            } else {
                tracer.walk(x, y)
            };

            let mut pixels: Vec<(isize, isize)> = backward.into_iter().rev().collect();
            pixels.push((x, y));
            pixels.extend(forward);
            // close loops that came back next to their seed
            if let (Some(&first), Some(&last)) = (pixels.first(), pixels.last()) {
                if pixels.len() >= 3
                    && first != last
                    && (first.0 - last.0).abs() <= 1
                    && (first.1 - last.1).abs() <= 1
                {
                    pixels.push(first);
                }
            }
            if pixels.len() < cfg.min_stroke_points {
                continue;
            }
            let points: Vec<Point> = pixels
                .iter()
                .map(|&(px, py)| Point::new(px as f64, py as f64))
                .collect();
            let simplified = simplify(&points, cfg.simplify_epsilon);
            if let Ok(stroke) = Stroke::new(simplified) {
                strokes.push(stroke);
            }
        }
    }

    Drawing::new("", w as f64, h as f64, strokes).expect("traced points lie on the pixel grid")
}
