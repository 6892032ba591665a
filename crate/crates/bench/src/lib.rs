//! Shared fixtures for the criterion benchmarks.

use mvcorr::correlations::WitnessId;
use mvcorr::optimizer::ModelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random model with a fixed seed.
pub fn random_params(witness: WitnessId, da: usize, db: usize) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    ModelParams::random(witness, da, db, &mut rng)
}
