//! Seeded fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tscd::harness::{random_chordal_dag, random_cpts, Instance};
use tscd::MixedGraph;

/// Random chordal instance with binary variables and singleton targets.
pub fn instance(nodes: usize, rho: f64, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dag = random_chordal_dag(nodes, rho, &mut rng).expect("valid parameters");
    let net = random_cpts(&dag, &vec![2; nodes], &mut rng).expect("valid network");
    Instance::from_net(net, None, Some(1)).expect("valid instance")
}

/// CPDAG of a random chordal DAG.
pub fn cpdag(nodes: usize, rho: f64, seed: u64) -> MixedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dag = random_chordal_dag(nodes, rho, &mut rng).expect("valid parameters");
    tscd::graph::cpdag_of(&dag).expect("acyclic")
}
