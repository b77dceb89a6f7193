//! Inputs shared by the benchmarks.

use mpers2::random::{random_interval_decomposable, scramble};
use mpers2::{Field, GridPoset, PersistenceModule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `d` copies of the full interval on `{0..len}` under a random change of basis.
pub fn scrambled_line(len: usize, d: usize, seed: u64) -> PersistenceModule {
    let g = GridPoset::range(&[len]).expect("grid");
    let full = PersistenceModule::constant(g.clone(), Field::GF2, 1);
    let parts = vec![full; d];
    let sum = PersistenceModule::direct_sum_all(&g, Field::GF2, &parts).expect("same grid");
    scramble(&sum, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A scrambled sum of random intervals on a square grid.
pub fn scrambled_square(side: usize, field: Field, summands: usize, seed: u64) -> PersistenceModule {
    let g = GridPoset::range(&[side, side]).expect("grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, _) = random_interval_decomposable(&g, field, 2, summands, &mut rng);
    scramble(&m, &mut rng)
}
