//! Stroke ordering for minimum pen-up travel.
//!
//! Ordering a drawing's strokes is an open traveling-salesman path over
//! strokes where each stroke can be drawn in either direction. Ink length
//! is the same for every order, so only pen-up travel is optimized.

mod exact;
mod heuristic;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use exact::{solve_exact, EXACT_MAX_STROKES};
pub use heuristic::{solve_heuristic, solve_heuristic_with, HeuristicOptions};

use crate::sketch::{Drawing, Point};
use crate::{Error, Result};

/// A stroke permutation plus per-stroke orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Stroke indices in drawing order.
    pub order: Vec<usize>,
    /// Indexed by stroke (not tour position): draw that stroke reversed.
    pub flipped: Vec<bool>,
    pub pen_up_cost: f64,
}

impl Tour {
    pub fn identity(d: &Drawing) -> Tour {
        let n = d.strokes().len();
        let order: Vec<usize> = (0..n).collect();
        let flipped = vec![false; n];
        let pen_up_cost = Endpoints::new(d).path_cost(order.iter().map(|&k| (k, false)));
        Tour {
            order,
            flipped,
            pen_up_cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum OrderMethod {
    MinLength,
    Random { seed: u64 },
    Identity,
}

/// Stroke endpoints as a flat node list: node `2k` is the first point of
/// stroke `k`, node `2k + 1` its last point.
#[derive(Debug, Clone)]
pub(crate) struct Endpoints {
    pub(crate) nodes: Vec<Point>,
}

impl Endpoints {
    pub(crate) fn new(d: &Drawing) -> Self {
        let nodes = d
            .strokes()
            .iter()
            .flat_map(|s| [s.first(), s.last()])
            .collect();
        Self { nodes }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len() / 2
    }

    pub(crate) fn entry(k: usize, flipped: bool) -> usize {
        2 * k + usize::from(flipped)
    }

    pub(crate) fn exit(k: usize, flipped: bool) -> usize {
        2 * k + usize::from(!flipped)
    }

    pub(crate) fn dist(&self, a: usize, b: usize) -> f64 {
        self.nodes[a].distance(self.nodes[b])
    }

    /// Cost of visiting `(stroke, flipped)` pairs in sequence.
    pub(crate) fn path_cost(&self, seq: impl IntoIterator<Item = (usize, bool)>) -> f64 {
        let mut cost = 0.0;
        let mut prev: Option<usize> = None;
        for (k, f) in seq {
            if let Some(p) = prev {
                cost += self.dist(p, Self::entry(k, f));
            }
            prev = Some(Self::exit(k, f));
        }
        cost
    }
}

fn validate(n: usize, t: &Tour) -> Result<()> {
    if t.order.len() != n || t.flipped.len() != n {
        return Err(Error::InvalidTour(format!(
            "tour covers {} strokes with {} flips, drawing has {n}",
            t.order.len(),
            t.flipped.len()
        )));
    }
    let mut seen = vec![false; n];
    for &k in &t.order {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidTour(format!("order is not a permutation: {:?}", t.order)));
        }
    }
    Ok(())
}

/// Pen-up travel of drawing `d`'s strokes visited per `t`: the sum of
/// distances from each stroke's exit endpoint to the next stroke's entry
/// endpoint, honoring flips.
pub fn tour_cost(d: &Drawing, t: &Tour) -> Result<f64> {
    validate(d.strokes().len(), t)?;
    Ok(Endpoints::new(d).path_cost(t.order.iter().map(|&k| (k, t.flipped[k]))))
}

/// Rebuild `d` with strokes visited in tour order, reversing flipped ones.
pub fn apply_tour(d: &Drawing, t: &Tour) -> Result<Drawing> {
    validate(d.strokes().len(), t)?;
    let strokes = t
        .order
        .iter()
        .map(|&k| {
            let s = &d.strokes()[k];
            if t.flipped[k] {
                s.reversed()
            } else {
                s.clone()
            }
        })
        .collect();
    Ok(d.with_strokes(strokes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReorderOptions {
    /// Drawings with at most this many strokes are solved exactly.
    pub exact_max: usize,
}

impl Default for ReorderOptions {
    fn default() -> Self {
        Self {
            exact_max: EXACT_MAX_STROKES,
        }
    }
}

/// Tour chosen for `d` under `method`. `seed` drives the heuristic's random
/// restarts; the random method carries its own seed.
pub fn plan_tour(d: &Drawing, method: OrderMethod, seed: u64, opts: ReorderOptions) -> Result<Tour> {
    let n = d.strokes().len();
    match method {
        OrderMethod::Identity => Ok(Tour::identity(d)),
        OrderMethod::Random { seed } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let flipped = vec![false; n];
            let pen_up_cost = Endpoints::new(d).path_cost(order.iter().map(|&k| (k, false)));
            Ok(Tour {
                order,
                flipped,
                pen_up_cost,
            })
        }
        OrderMethod::MinLength if n <= opts.exact_max.min(EXACT_MAX_STROKES) => solve_exact(d),
        OrderMethod::MinLength => Ok(solve_heuristic(d, seed)),
    }
}

pub fn reorder(d: &Drawing, method: OrderMethod, seed: u64) -> Result<Drawing> {
    reorder_with(d, method, seed, ReorderOptions::default())
}

pub fn reorder_with(
    d: &Drawing,
    method: OrderMethod,
    seed: u64,
    opts: ReorderOptions,
) -> Result<Drawing> {
    let tour = plan_tour(d, method, seed, opts)?;
    apply_tour(d, &tour)
}
