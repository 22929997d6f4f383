//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasn_deploy::density::build_grid;
use wasn_deploy::optimize::random_deployment;
use wasn_deploy::{DensityGrid, DensitySpec, NodeDeployment, Region};

pub fn uniform_grid(n: usize) -> DensityGrid {
    build_grid(Region::square(10.0).unwrap(), n, n, &DensitySpec::Uniform).unwrap()
}

pub fn scattered(n_sensors: usize, n_fcs: usize, seed: u64) -> NodeDeployment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_deployment(&Region::square(10.0).unwrap(), n_sensors, n_fcs, &mut rng).unwrap()
}
