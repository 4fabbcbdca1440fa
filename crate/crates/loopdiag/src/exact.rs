//! Brute-force exact inference at desk scale: partition functions, marginals,
//! Ising sums, and transfer tensors on cut-open graphs.
//!
//! Everything here is ground truth for the identity suites; sums are
//! compensated so oracle-vs-formula checks hold at 1e-8..1e-12.

use crate::error::{Error, Result};
use crate::graph::{CutTree, HatGraph, Mrf, NodeId};
use crate::numeric::CompensatedSum;

/// Size caps for the brute-force routines; CLI-configurable.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// Maximum node count for 2^N configuration sweeps.
    pub max_nodes: usize,
    /// Maximum number of cut pairs L for transfer tensors (4^L entries).
    pub max_cut: usize,
    /// Maximum edge count for generalized-loop enumeration.
    pub max_enum_edges: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_nodes: 24,
            max_cut: 8,
            max_enum_edges: 30,
        }
    }
}

fn check_nodes(m: &Mrf, caps: &Caps) -> Result<()> {
    if m.node_count() > caps.max_nodes {
        return Err(Error::CapExceeded {
            what: "node count",
            value: m.node_count(),
            cap: caps.max_nodes,
        });
    }
    Ok(())
}

fn config_weight(m: &Mrf, config: usize) -> f64 {
    let state = |v: NodeId| (config >> v) & 1;
    let mut w = 1.0;
    for e in m.edges() {
        w *= e.psi[state(e.i)][state(e.j)];
    }
    if let Some(phi) = m.phi() {
        for (v, p) in phi.iter().enumerate() {
            w *= p[state(v)];
        }
    }
    w
}

/// Exact partition function by summation over all 2^N configurations.
pub fn exact_partition(m: &Mrf, caps: &Caps) -> Result<f64> {
    check_nodes(m, caps)?;
    let mut acc = CompensatedSum::new();
    for config in 0..1usize << m.node_count() {
        acc.add(config_weight(m, config));
    }
    Ok(acc.total())
}

/// Exact single-node marginal `p_v(+), p_v(-)`, normalized after summation.
pub fn exact_marginal(m: &Mrf, v: NodeId, caps: &Caps) -> Result<[f64; 2]> {
    check_nodes(m, caps)?;
    if v >= m.node_count() {
        return Err(Error::NodeOutOfRange(v));
    }
    let mut acc = [CompensatedSum::new(), CompensatedSum::new()];
    for config in 0..1usize << m.node_count() {
        acc[(config >> v) & 1].add(config_weight(m, config));
    }
    let (p, q) = (acc[0].total(), acc[1].total());
    Ok([p / (p + q), q / (p + q)])
}

/// Exact Ising partition function `Z(K, h)` on the shape of `m` (its
/// potentials are ignored): `sum_x exp(K sum_{ij in E} x_i x_j + h sum_i x_i)`.
pub fn ising_partition(m: &Mrf, coupling: f64, field: f64, caps: &Caps) -> Result<f64> {
    check_nodes(m, caps)?;
    let spin = |config: usize, v: NodeId| 1.0 - 2.0 * ((config >> v) & 1) as f64;
    let mut acc = CompensatedSum::new();
    for config in 0..1usize << m.node_count() {
        let mut energy = 0.0;
        for e in m.edges() {
            energy += spin(config, e.i) * spin(config, e.j);
        }
        let mut magnetization = 0.0;
        for v in 0..m.node_count() {
            magnetization += spin(config, v);
        }
        acc.add((coupling * energy + field * magnetization).exp());
    }
    Ok(acc.total())
}

/// Contracts a cut tree (or forest) with some nodes clamped to fixed states;
/// unclamped variables are summed out by leaf-to-root elimination.
pub fn contract_clamped(tree: &CutTree, clamp: &[Option<usize>]) -> f64 {
    fn up(tree: &CutTree, clamp: &[Option<usize>], v: NodeId, parent: Option<NodeId>) -> [f64; 2] {
        let mut vec = match clamp[v] {
            Some(0) => [1.0, 0.0],
            Some(_) => [0.0, 1.0],
            None => [1.0, 1.0],
        };
        for inc in tree.incidences(v) {
            if Some(inc.neighbor) == parent {
                continue;
            }
            let child = up(tree, clamp, inc.neighbor, Some(v));
            for x_v in 0..2 {
                let mut s = 0.0;
                for x_c in 0..2 {
                    s += tree.value_from(inc.edge, v, x_v, x_c) * child[x_c];
                }
                vec[x_v] *= s;
            }
        }
        vec
    }

    let mut seen = vec![false; tree.node_count];
    let mut total = 1.0;
    for root in 0..tree.node_count {
        if seen[root] {
            continue;
        }
        // Mark the whole component before contracting it.
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            for inc in tree.incidences(v) {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    stack.push(inc.neighbor);
                }
            }
        }
        let vec = up(tree, clamp, root, None);
        total *= vec[0] + vec[1];
    }
    total
}

/// The generalized transfer tensor on a cut-open graph: interior nodes are
/// summed out while the 2L leaf-copy variables stay free.
#[derive(Debug, Clone)]
pub struct TransferTensor {
    pub l: usize,
    /// `values[row * 2^L + col]` where bit `k` of `row` is the state of cut
    /// node `k` and bit `k` of `col` the state of its duplicate.
    pub values: Vec<f64>,
}

impl TransferTensor {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[(row << self.l) + col]
    }

    /// Contraction with a Kronecker delta on every leaf pair; equals the
    /// partition function of the uncut graph.
    pub fn contract_delta(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for row in 0..1usize << self.l {
            acc.add(self.value(row, row));
        }
        acc.total()
    }

    /// Contraction with rank-1 vectors `a_k(x_k) b_k(x_{k-bar})` per pair.
    pub fn contract_rank1(&self, pairs: &[([f64; 2], [f64; 2])]) -> f64 {
        assert_eq!(pairs.len(), self.l);
        let mut acc = CompensatedSum::new();
        for row in 0..1usize << self.l {
            for col in 0..1usize << self.l {
                let mut w = self.value(row, col);
                for (k, (a, b)) in pairs.iter().enumerate() {
                    w *= a[(row >> k) & 1] * b[(col >> k) & 1];
                }
                acc.add(w);
            }
        }
        acc.total()
    }
}

/// Computes the transfer tensor of `hat` by clamped tree contraction.
pub fn transfer_tensor(hat: &HatGraph, caps: &Caps) -> Result<TransferTensor> {
    let l = hat.l();
    if l > caps.max_cut {
        return Err(Error::CapExceeded {
            what: "cut pairs",
            value: l,
            cap: caps.max_cut,
        });
    }
    let mut values = vec![0.0; 1 << (2 * l)];
    let mut clamp = vec![None; hat.tree.node_count];
    for row in 0..1usize << l {
        for (k, &s) in hat.cut_nodes.iter().enumerate() {
            clamp[s] = Some((row >> k) & 1);
        }
        for col in 0..1usize << l {
            for k in 0..l {
                clamp[hat.bar(k)] = Some((col >> k) & 1);
            }
            values[(row << l) + col] = contract_clamped(&hat.tree, &clamp);
        }
    }
    Ok(TransferTensor { l, values })
}

/// How to eliminate the non-selected leaf pairs of a transfer tensor.
#[derive(Debug, Clone)]
pub enum ReductionMode {
    /// Contract pair `m` with `mu_m(x_m) mu_{m-bar}(x_{m-bar})`; the vectors
    /// come from an LBP fixed point, pair-normalized.
    FixedPointMessages(Vec<([f64; 2], [f64; 2])>),
    /// Contract every other pair with a Kronecker delta.
    Delta,
}

/// Reduces the transfer tensor to a 2x2 matrix `T_s[x_s][x_s_bar]` by
/// contracting every pair except `s`.
pub fn reduced_transfer(
    tensor: &TransferTensor,
    s: usize,
    mode: &ReductionMode,
) -> Result<[[f64; 2]; 2]> {
    if s >= tensor.l {
        return Err(Error::InvalidInput(format!(
            "cut pair {s} out of range (L = {})",
            tensor.l
        )));
    }
    if let ReductionMode::FixedPointMessages(pairs) = mode {
        if pairs.len() != tensor.l {
            return Err(Error::InvalidInput(
                "one message pair per cut pair is required".into(),
            ));
        }
    }
    let l = tensor.l;
    let mut out = [[0.0; 2]; 2];
    for (x_s, row_out) in out.iter_mut().enumerate() {
        for (x_sbar, cell) in row_out.iter_mut().enumerate() {
            let mut acc = CompensatedSum::new();
            for row in 0..1usize << l {
                if (row >> s) & 1 != x_s {
                    continue;
                }
                for col in 0..1usize << l {
                    if (col >> s) & 1 != x_sbar {
                        continue;
                    }
                    let mut w = tensor.value(row, col);
                    match mode {
                        ReductionMode::FixedPointMessages(pairs) => {
                            for (k, (a, b)) in pairs.iter().enumerate() {
                                if k != s {
                                    w *= a[(row >> k) & 1] * b[(col >> k) & 1];
                                }
                            }
                        }
                        ReductionMode::Delta => {
                            let mask = !(1usize << s);
                            if row & mask != col & mask {
                                continue;
                            }
                        }
                    }
                    acc.add(w);
                }
            }
            *cell = acc.total();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_to_tree, Psi, PSI_ONES};

    fn psi(a: f64, b: f64, c: f64, d: f64) -> Psi {
        [[a, b], [c, d]]
    }

    #[test]
    fn two_node_chain_partition() {
        let m = Mrf::new(2, vec![(0, 1, psi(2.0, 1.0, 1.0, 2.0))]).unwrap();
        // Hand oracle: 2 + 1 + 1 + 2 = 6.
        let z = exact_partition(&m, &Caps::default()).unwrap();
        assert_eq!(z, 6.0);
    }

    #[test]
    fn all_ones_partition_is_two_to_n() {
        for m in [Mrf::path(6).unwrap(), Mrf::cycle(5).unwrap(), Mrf::complete(4).unwrap()] {
            let z = exact_partition(&m, &Caps::default()).unwrap();
            assert!((z - (1u64 << m.node_count()) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let m = Mrf::path(5).unwrap();
        let caps = Caps {
            max_nodes: 4,
            ..Caps::default()
        };
        assert!(matches!(
            exact_partition(&m, &caps),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn symmetric_marginals_are_uniform() {
        let m = Mrf::new(
            3,
            vec![
                (0, 1, psi(1.7, 0.4, 0.4, 1.7)),
                (1, 2, psi(0.9, 1.2, 1.2, 0.9)),
                (0, 2, psi(1.1, 0.6, 0.6, 1.1)),
            ],
        )
        .unwrap();
        for v in 0..3 {
            let p = exact_marginal(&m, v, &Caps::default()).unwrap();
            assert!((p[0] - 0.5).abs() < 1e-14);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ising_free_cases() {
        let caps = Caps::default();
        let m = Mrf::cycle(4).unwrap();
        assert!((ising_partition(&m, 0.0, 0.0, &caps).unwrap() - 16.0).abs() < 1e-12);
        let single = Mrf::new(1, vec![]).unwrap();
        let h = 0.83;
        let z = ising_partition(&single, 0.0, h, &caps).unwrap();
        assert!((z - 2.0 * h.cosh()).abs() < 1e-14);
    }

    #[test]
    fn ising_cycle_matches_transfer_matrix_closed_form() {
        // C4 at K = 0.3, h = 0: Z = (2 cosh K)^4 + (2 sinh K)^4.
        let caps = Caps::default();
        let m = Mrf::cycle(4).unwrap();
        let k = 0.3;
        let z = ising_partition(&m, k, 0.0, &caps).unwrap();
        let expect = (2.0 * k.cosh()).powi(4) + (2.0 * k.sinh()).powi(4);
        assert!(((z - expect) / expect).abs() < 1e-14);
    }

    #[test]
    fn transfer_tensor_of_cycle_traces_to_z() {
        let m = Mrf::new(
            4,
            vec![
                (0, 1, psi(1.3, 0.7, 0.8, 1.4)),
                (1, 2, psi(0.6, 1.5, 1.1, 0.9)),
                (2, 3, psi(1.2, 0.5, 0.7, 1.6)),
                (0, 3, psi(0.9, 1.8, 1.3, 0.6)),
            ],
        )
        .unwrap();
        let caps = Caps::default();
        let hat = cut_to_tree(&m).unwrap();
        assert_eq!(hat.l(), 1);
        let t = transfer_tensor(&hat, &caps).unwrap();
        let z = exact_partition(&m, &caps).unwrap();
        assert!(((t.contract_delta() - z) / z).abs() < 1e-13);
    }

    #[test]
    fn transfer_tensor_delta_contraction_matches_partition() {
        let m = Mrf::new(
            4,
            vec![
                (0, 2, psi(1.4, 0.9, 0.6, 1.1)),
                (0, 3, psi(0.8, 1.3, 1.7, 0.5)),
                (1, 2, psi(1.0, 0.7, 1.2, 1.5)),
                (1, 3, psi(0.9, 1.6, 0.4, 1.2)),
                (2, 3, psi(1.3, 1.1, 0.8, 0.7)),
            ],
        )
        .unwrap();
        let caps = Caps::default();
        let hat = cut_to_tree(&m).unwrap();
        assert_eq!(hat.l(), 2);
        let t = transfer_tensor(&hat, &caps).unwrap();
        let z = exact_partition(&m, &caps).unwrap();
        assert!(((t.contract_delta() - z) / z).abs() < 1e-13);
    }

    #[test]
    fn rank1_contraction_agrees_with_weighted_brute_force() {
        // Oracle-vs-oracle: arbitrary leaf vectors against a direct sum over
        // all tree configurations.
        let m = Mrf::new(
            4,
            vec![
                (0, 1, psi(1.2, 0.8, 0.9, 1.1)),
                (1, 2, psi(0.7, 1.4, 1.0, 0.6)),
                (2, 3, psi(1.5, 0.9, 1.1, 0.8)),
                (0, 3, psi(0.6, 1.2, 1.3, 0.9)),
            ],
        )
        .unwrap();
        let hat = cut_to_tree(&m).unwrap();
        let t = transfer_tensor(&hat, &Caps::default()).unwrap();
        let a = [0.3, 1.7];
        let b = [1.9, 0.2];
        let direct = {
            let tree = &hat.tree;
            let mut total = 0.0;
            let n = tree.node_count;
            for config in 0..1usize << n {
                let mut w = 1.0;
                for e in &tree.edges {
                    w *= e.psi[(config >> e.u) & 1][(config >> e.v) & 1];
                }
                let s = hat.cut_nodes[0];
                w *= a[(config >> s) & 1] * b[(config >> hat.bar(0)) & 1];
                total += w;
            }
            total
        };
        let contracted = t.contract_rank1(&[(a, b)]);
        assert!(((contracted - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn reduced_transfer_modes_coincide_for_single_pair() {
        let m = Mrf::cycle(5).unwrap();
        let hat = cut_to_tree(&m).unwrap();
        let t = transfer_tensor(&hat, &Caps::default()).unwrap();
        let via_mu = reduced_transfer(
            &t,
            0,
            &ReductionMode::FixedPointMessages(vec![([1.0, 1.0], [1.0, 1.0])]),
        )
        .unwrap();
        let via_delta = reduced_transfer(&t, 0, &ReductionMode::Delta).unwrap();
        assert_eq!(via_mu, via_delta);
        assert_eq!(via_mu[0][0], t.value(0, 0));
    }

    #[test]
    fn tree_partition_via_contraction() {
        let m = Mrf::new(
            5,
            vec![
                (0, 1, psi(1.1, 0.9, 0.8, 1.3)),
                (1, 2, psi(0.7, 1.2, 1.4, 0.6)),
                (1, 3, psi(1.6, 0.5, 0.9, 1.1)),
                (3, 4, psi(0.8, 1.0, 1.2, 0.9)),
            ],
        )
        .unwrap();
        let hat = cut_to_tree(&m).unwrap();
        assert_eq!(hat.l(), 0);
        let clamp = vec![None; hat.tree.node_count];
        let z_tree = contract_clamped(&hat.tree, &clamp);
        let z = exact_partition(&m, &Caps::default()).unwrap();
        assert!(((z_tree - z) / z).abs() < 1e-13);
    }

    #[test]
    fn all_ones_psi_gives_two_to_n_square_tensor() {
        let m = Mrf::new(3, vec![(0, 1, PSI_ONES), (1, 2, PSI_ONES), (0, 2, PSI_ONES)]).unwrap();
        let hat = cut_to_tree(&m).unwrap();
        let t = transfer_tensor(&hat, &Caps::default()).unwrap();
        // Every entry of the L = 1 tensor sums 2^(interior nodes) terms of 1.
        assert_eq!(t.values.len(), 4);
        assert!(t.values.iter().all(|&v| v == 4.0));
    }
}
