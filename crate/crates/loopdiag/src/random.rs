//! Seeded random instances for tests, benchmarks, and the CLI.

use crate::error::{Error, Result};
use crate::graph::{Mrf, Psi};
use rand::Rng;

fn random_psi(rng: &mut impl Rng, lo: f64, hi: f64) -> Psi {
    let mut entry = || rng.gen_range(lo..hi);
    [[entry(), entry()], [entry(), entry()]]
}

/// Random tree on `node_count` nodes: node `v` attaches to a uniformly
/// chosen earlier node.
pub fn random_tree(rng: &mut impl Rng, node_count: usize, psi_range: (f64, f64)) -> Result<Mrf> {
    if node_count == 0 {
        return Err(Error::InvalidInput("need at least one node".into()));
    }
    let mut edges = Vec::with_capacity(node_count.saturating_sub(1));
    for v in 1..node_count {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v, random_psi(rng, psi_range.0, psi_range.1)));
    }
    Mrf::new(node_count, edges)
}

/// Random connected graph: a random tree plus distinct extra edges chosen
/// uniformly from the non-edges, as many as requested and available.
pub fn random_connected(
    rng: &mut impl Rng,
    node_count: usize,
    extra_edges: usize,
    psi_range: (f64, f64),
) -> Result<Mrf> {
    let tree = random_tree(rng, node_count, psi_range)?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..node_count {
        for j in i + 1..node_count {
            if tree.edge_index(i, j).is_none() {
                pairs.push((i, j));
            }
        }
    }
    let mut edges: Vec<(usize, usize, Psi)> = tree
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.psi))
        .collect();
    let take = extra_edges.min(pairs.len());
    for _ in 0..take {
        let pick = rng.gen_range(0..pairs.len());
        let (i, j) = pairs.swap_remove(pick);
        edges.push((i, j, random_psi(rng, psi_range.0, psi_range.1)));
    }
    Mrf::new(node_count, edges)
}

/// Cycle of length `n` with random potentials.
pub fn random_cycle(rng: &mut impl Rng, n: usize, psi_range: (f64, f64)) -> Result<Mrf> {
    if n < 3 {
        return Err(Error::InvalidInput("cycle needs at least 3 nodes".into()));
    }
    let mut edges: Vec<(usize, usize, Psi)> = (0..n - 1)
        .map(|v| (v, v + 1, random_psi(rng, psi_range.0, psi_range.1)))
        .collect();
    edges.push((0, n - 1, random_psi(rng, psi_range.0, psi_range.1)));
    Mrf::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = random_connected(&mut ChaCha8Rng::seed_from_u64(7), 6, 3, (0.5, 2.0)).unwrap();
        let b = random_connected(&mut ChaCha8Rng::seed_from_u64(7), 6, 3, (0.5, 2.0)).unwrap();
        assert_eq!(a, b);
        let c = random_connected(&mut ChaCha8Rng::seed_from_u64(8), 6, 3, (0.5, 2.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trees_are_trees_and_graphs_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 2..10 {
            let t = random_tree(&mut rng, n, (0.5, 2.0)).unwrap();
            assert!(t.is_tree());
            let g = random_connected(&mut rng, n, 4, (0.5, 2.0)).unwrap();
            assert!(g.is_connected());
            assert!(g.edge_count() <= n - 1 + 4);
        }
    }

    #[test]
    fn potentials_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_connected(&mut rng, 8, 5, (0.5, 2.0)).unwrap();
        for e in g.edges() {
            for row in &e.psi {
                for &v in row {
                    assert!((0.5..2.0).contains(&v));
                }
            }
        }
    }
}
