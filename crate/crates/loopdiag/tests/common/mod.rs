//! Shared instance generators for the integration suites.
#![allow(dead_code)] // each test binary uses a subset

use loopdiag::{Mrf, Psi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PSI_RANGE: (f64, f64) = (0.5, 2.0);

/// The random connected instance used by the acceptance suites:
/// N <= 8, |E| <= 12, potentials uniform in [0.5, 2).
pub fn seeded_instance(seed: u64) -> Mrf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=8usize);
    let tree_edges = n - 1;
    let spare = (n * (n - 1) / 2 - tree_edges).min(12 - tree_edges);
    let extra = rng.gen_range(1..=spare.max(1));
    loopdiag::random::random_connected(&mut rng, n, extra, PSI_RANGE).expect("valid instance")
}

pub fn seeded_tree(seed: u64) -> Mrf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=10usize);
    loopdiag::random::random_tree(&mut rng, n, PSI_RANGE).expect("valid tree")
}

pub fn seeded_cycle(seed: u64) -> Mrf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8usize);
    loopdiag::random::random_cycle(&mut rng, n, PSI_RANGE).expect("valid cycle")
}

pub fn random_psi(rng: &mut impl Rng) -> Psi {
    let mut entry = || rng.gen_range(PSI_RANGE.0..PSI_RANGE.1);
    [[entry(), entry()], [entry(), entry()]]
}

/// The worked-example graph: nodes 0, 1 of degree two and nodes 2, 3 of
/// degree three, five edges, cycle rank 2.
pub fn fig2_graph(seed: u64) -> Mrf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        .into_iter()
        .map(|(i, j)| (i, j, random_psi(&mut rng)))
        .collect();
    Mrf::new(4, edges).expect("valid graph")
}
