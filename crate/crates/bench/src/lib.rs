//! Fixtures shared by the benchmarks in `benches/`.

use facells_core::sketch::{Drawing, Point, Stroke};
use facells_core::train::toy::make_toy_dataset;
use facells_core::train::prepare_sequence;
use facells_core::{Format, OrderMethod, SequenceBatch};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` short random polylines on a 1000 x 1000 canvas.
pub fn random_drawing(n: usize, seed: u64) -> Drawing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strokes = (0..n)
        .map(|_| {
            let k = rng.random_range(2..6);
            let (x, y) = (rng.random_range(20.0..980.0), rng.random_range(20.0..980.0));
            let pts = (0..k)
                .map(|_| Point::new(x + rng.random_range(-20.0..20.0), y + rng.random_range(-20.0..20.0)))
                .collect();
            Stroke::new(pts).expect("at least two points")
        })
        .collect();
    Drawing::new(format!("bench{seed}"), 1000.0, 1000.0, strokes).expect("points inside the canvas")
}

/// Encoded toy drawings as one batch of `rows` sequences.
pub fn toy_batch(rows: usize, seed: u64) -> SequenceBatch {
    let drawings = make_toy_dataset(rows, seed);
    let seqs: Vec<Vec<f64>> = drawings
        .iter()
        .map(|d| {
            prepare_sequence(d, Format::Absolute, OrderMethod::MinLength, seed)
                .expect("toy drawings encode")
                .features()
        })
        .collect();
    let targets: Vec<Vec<f64>> = drawings.iter().map(|d| vec![d.target("glasses").unwrap_or(0.0)]).collect();
    let refs: Vec<&[f64]> = seqs.iter().map(Vec::as_slice).collect();
    SequenceBatch::new(&refs, &targets, 3).expect("nonempty sequences")
}
