//! Seeded fixtures shared by the benchmarks in `benches/`.

use poisson_shrink::sampling::{poisson, substream};
use poisson_shrink::{CountVector, MeanVector};

/// `p` Poisson counts with means spread over `[0.5, 10.5)`.
pub fn counts(p: usize, seed: u64) -> CountVector {
    let theta = means(p);
    let mut rng = substream(seed, 0);
    CountVector::new(
        theta
            .as_slice()
            .iter()
            .map(|&t| poisson(&mut rng, t))
            .collect(),
    )
    .expect("nonempty")
}

pub fn means(p: usize) -> MeanVector {
    MeanVector::new((0..p).map(|i| 0.5 + 10.0 * i as f64 / p as f64).collect())
        .expect("positive means")
}
