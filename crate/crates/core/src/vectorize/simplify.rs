use crate::sketch::Point;

/// Ramer–Douglas–Peucker. Endpoints are always kept; an `epsilon` of zero
/// only drops points lying exactly on the kept segment.
///
/// Distances are measured to the segment rather than the infinite line, so
/// every dropped point stays within `epsilon` of the simplified polyline
/// even when the trace doubles back.
pub fn simplify(points: &[Point], epsilon: f64) -> Vec<Point> {
    if points.len() < 3 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;

    // explicit stack: long traced contours would recurse deeply
    let mut stack = vec![(0, points.len() - 1)];
    while let Some((start, end)) = stack.pop() {
        if end <= start + 1 {
            continue;
        }
        let (mut max_d, mut max_i) = (0.0, start);
        for i in start + 1..end {
            let d = segment_distance(points[i], points[start], points[end]);
            if d > max_d {
                max_d = d;
                max_i = i;
            }
        }
        if max_d > epsilon {
            keep[max_i] = true;
            stack.push((start, max_i));
            stack.push((max_i, end));
        }
    }
    points
        .iter()
        .zip(keep)
        .filter_map(|(&p, k)| k.then_some(p))
        .collect()
}

/// Distance from `p` to the segment `a`–`b`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / l2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn brute_segment_distance(p: Point, a: Point, b: Point) -> f64 {
        (0..=10_000)
            .map(|i| {
                let t = f64::from(i) / 10_000.0;
                p.distance(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn segment_distance_matches_sampling() {
        let (a, b) = (Point::new(1.0, 1.0), Point::new(4.0, 5.0));
        for p in pts(&[(0.0, 0.0), (3.0, 1.0), (9.0, 9.0), (2.5, 3.0)]) {
            let exact = segment_distance(p, a, b);
            assert!((exact - brute_segment_distance(p, a, b)).abs() < 1e-3);
        }
        assert_eq!(segment_distance(Point::new(3.0, 4.0), a, a), Point::new(3.0, 4.0).distance(a));
    }

    #[test]
    fn collinear_collapses() {
        let line = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(simplify(&line, 0.0), pts(&[(0.0, 0.0), (3.0, 0.0)]));
    }

    #[test]
    fn spike_survives() {
        let line = pts(&[(0.0, 0.0), (1.0, 0.1), (2.0, 5.0), (3.0, 0.0)]);
        assert_eq!(simplify(&line, 1.0), pts(&[(0.0, 0.0), (2.0, 5.0), (3.0, 0.0)]));
    }

    #[test]
    fn short_inputs_untouched() {
        let two = pts(&[(0.0, 0.0), (5.0, 5.0)]);
        assert_eq!(simplify(&two, 10.0), two);
    }

    proptest! {
        #[test]
        fn dropped_points_stay_within_epsilon(
            raw in prop::collection::vec((0.0..50.0f64, 0.0..50.0f64), 3..40),
            eps in 0.0..5.0f64,
        ) {
            let line = pts(&raw);
            let simple = simplify(&line, eps);
            prop_assert_eq!(simple[0], line[0]);
            prop_assert_eq!(*simple.last().unwrap(), *line.last().unwrap());
            for p in &line {
                let d = simple
                    .windows(2)
                    .map(|w| segment_distance(*p, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(d <= eps + 1e-9, "point {:?} at {} > {}", p, d, eps);
            }
        }
    }
}
