use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub test: f64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f.is_finite() && (0.0..=1.0).contains(&f);
        if !ok(self.train) || !ok(self.test) || self.train + self.test > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "split fractions {}/{} must lie in [0, 1] and sum to at most 1",
                self.train, self.test
            )));
        }
        Ok(())
    }

    /// `(train, test)` sizes for `n` items, each `floor(n * fraction)`.
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        // The small offset absorbs representation error, e.g. 0.95 * 200000.
        let size = |f: f64| ((n as f64 * f) + 1e-6).floor() as usize;
        let train = size(self.train).min(n);
        (train, size(self.test).min(n - train))
    }
}

/// Seeded disjoint train/test subsets; whatever remains is discarded.
pub fn split<T: Clone>(items: &[T], spec: SplitSpec, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    spec.validate()?;
    let (n_train, n_test) = spec.sizes(items.len());
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |r: &[usize]| r.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok((pick(&idx[..n_train]), pick(&idx[n_train..n_train + n_test])))
}
