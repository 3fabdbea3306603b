//! Deterministic inputs shared by the looplab benchmarks.

use looplab::lie::{random_algebra, random_group};
use looplab::loops::{random_field, random_loop};
use looplab::{AlgebraVector, DiscreteLoop, GroupPoint, TangentField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Group elements and algebra vectors of SU(n) drawn from a fixed seed.
pub fn group_samples(n: usize, count: usize, seed: u64) -> (Vec<GroupPoint>, Vec<AlgebraVector>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = (0..count).map(|_| random_group(&mut rng, n, 2.0)).collect();
    let x = (0..count).map(|_| random_algebra(&mut rng, n, 1.0)).collect();
    (g, x)
}

/// `k` smooth random loops in SU(2) on `n_samples` points.
pub fn loops(k: usize, n_samples: usize, seed: u64) -> Vec<DiscreteLoop> {
    (0..k).map(|i| random_loop(2, n_samples, seed + i as u64, 4, 0.5).expect("smooth loop")).collect()
}

/// `k` random tangent fields in su(2) on `n_samples` points.
pub fn fields(k: usize, n_samples: usize, seed: u64) -> Vec<TangentField> {
    (0..k).map(|i| random_field(2, n_samples, seed + 1000 + i as u64, 4, 1.0)).collect()
}
