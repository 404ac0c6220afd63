use super::{Endpoints, Tour};
use crate::sketch::Drawing;
use crate::{Error, Result};

pub const EXACT_MAX_STROKES: usize = 10;

/// Global minimum pen-up tour by dynamic programming over subsets.
///
/// `best[mask][k][f]` is the cheapest way to draw every stroke outside
/// `mask` starting from the exit endpoint of stroke `k` (flipped if `f`),
/// where `mask` already contains `k`. Ties are resolved toward the
/// lexicographically smallest `order`, then the smallest `flipped` vector.
pub fn solve_exact(d: &Drawing) -> Result<Tour> {
    let n = d.strokes().len();
    if n > EXACT_MAX_STROKES {
        return Err(Error::InstanceTooLarge {
            strokes: n,
            max: EXACT_MAX_STROKES,
        });
    }
    if n <= 1 {
        return Ok(Tour::identity(d));
    }
    let ends = Endpoints::new(d);
    let full = (1usize << n) - 1;
    let idx = |mask: usize, k: usize, f: bool| (mask * n + k) * 2 + usize::from(f);
    let mut best = vec![f64::INFINITY; (full + 1) * n * 2];

    for mask in (1..=full).rev() {
        for k in (0..n).filter(|&k| mask >> k & 1 == 1) {
            for f in [false, true] {
                let value = if mask == full {
                    0.0
                } else {
                    let exit = Endpoints::exit(k, f);
                    let mut v = f64::INFINITY;
                    for j in (0..n).filter(|&j| mask >> j & 1 == 0) {
                        for g in [false, true] {
                            let c = ends.dist(exit, Endpoints::entry(j, g)) + best[idx(mask | 1 << j, j, g)];
                            v = v.min(c);
                        }
                    }
                    v
                };
                best[idx(mask, k, f)] = value;
            }
        }
    }

    let optimum = (0..n)
        .flat_map(|k| [false, true].map(|f| best[idx(1 << k, k, f)]))
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * optimum.max(1.0);

    // Fix the order position by position: take the smallest stroke that
    // some optimal completion of the current prefix can use next. `live`
    // holds (orientation of the last stroke, prefix cost) for every
    // orientation history still on an optimal path.
    let mut order = Vec::with_capacity(n);
    let mut mask = 0usize;
    let mut live: Vec<(usize, bool, f64)> = Vec::new();
    for _ in 0..n {
        let mut chosen = None;
        for j in (0..n).filter(|&j| mask >> j & 1 == 0) {
            let mut next: Vec<(usize, bool, f64)> = Vec::new();
            for g in [false, true] {
                let reach = if live.is_empty() {
                    Some(0.0)
                } else {
                    live.iter()
                        .map(|&(k, f, c)| c + ends.dist(Endpoints::exit(k, f), Endpoints::entry(j, g)))
                        .reduce(f64::min)
                };
                if let Some(c) = reach {
                    if c + best[idx(mask | 1 << j, j, g)] <= optimum + tol {
                        next.push((j, g, c));
                    }
                }
            }
            if !next.is_empty() {
                chosen = Some((j, next));
                break;
            }
        }
        let (j, next) = chosen.expect("an optimal continuation always exists");
        order.push(j);
        mask |= 1 << j;
        live = next;
    }

    // Smallest flip vector (stroke 0 most significant) reaching the optimum.
    let flips_of = |m: usize| -> Vec<bool> { (0..n).map(|k| m >> (n - 1 - k) & 1 == 1).collect() };
    let flipped = (0..1usize << n)
        .map(flips_of)
        .find(|fl| ends.path_cost(order.iter().map(|&k| (k, fl[k]))) <= optimum + tol)
        .expect("the optimal order admits an optimal orientation");
    let pen_up_cost = ends.path_cost(order.iter().map(|&k| (k, flipped[k])));
    Ok(Tour {
        order,
        flipped,
        pen_up_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::tour_cost;
    use super::*;

    #[test]
    fn two_parallel_segments() {
        let d = drawing(vec![seg((0.0, 0.0), (10.0, 0.0)), seg((0.0, 1.0), (10.0, 1.0))]);
        let t = solve_exact(&d).unwrap();
        assert_eq!(t.order, vec![0, 1]);
        assert_eq!(t.flipped, vec![false, true]);
        assert_eq!(t.pen_up_cost, 1.0);
        assert_eq!(brute_force_cost(&d), 1.0);
    }

    #[test]
    fn trivial_sizes() {
        let one = drawing(vec![seg((0.0, 0.0), (1.0, 1.0))]);
        let t = solve_exact(&one).unwrap();
        assert_eq!((t.order, t.pen_up_cost), (vec![0], 0.0));
        let none = solve_exact(&drawing(vec![])).unwrap();
        assert!(none.order.is_empty());
        assert_eq!(none.pen_up_cost, 0.0);
    }

    #[test]
    fn too_large() {
        let d = random_drawing(11, 1);
        assert!(matches!(solve_exact(&d), Err(Error::InstanceTooLarge { strokes: 11, .. })));
    }

    #[test]
    fn collinear_optimum_is_in_order() {
        let t = solve_exact(&three_collinear()).unwrap();
        assert_eq!(t.order, vec![0, 1, 2]);
        assert_eq!(t.pen_up_cost, 8.0);
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..40 {
            let n = 2 + seed as usize % 5;
            let d = random_drawing(n, seed);
            let t = solve_exact(&d).unwrap();
            let brute = brute_force_cost(&d);
            assert!((t.pen_up_cost - brute).abs() < 1e-9, "seed {seed}: {} vs {brute}", t.pen_up_cost);
            assert_eq!(tour_cost(&d, &t).unwrap(), t.pen_up_cost);
        }
    }

    #[test]
    fn relabeling_and_flipping_keep_the_optimum() {
        for seed in 0..20 {
            let d = random_drawing(6, 500 + seed);
            let base = solve_exact(&d).unwrap().pen_up_cost;
            let mut strokes = d.strokes().to_vec();
            strokes.rotate_left(seed as usize % 6);
            strokes.swap(0, 3);
            let relabeled = drawing(strokes.clone());
            assert!((solve_exact(&relabeled).unwrap().pen_up_cost - base).abs() < 1e-9);
            strokes[2] = strokes[2].reversed();
            let flipped = drawing(strokes);
            assert!((solve_exact(&flipped).unwrap().pen_up_cost - base).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_break_lexicographically() {
        // four identical unit segments stacked on the same spot: every
        // order costs the same, so the identity order must win
        let s = seg((5.0, 5.0), (5.0, 5.0));
        let d = drawing(vec![s.clone(), s.clone(), s.clone(), s]);
        let t = solve_exact(&d).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3]);
        assert_eq!(t.flipped, vec![false; 4]);
    }
}
