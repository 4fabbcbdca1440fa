//! Loop-series expansion of binary pairwise Markov random fields.
//!
//! The Bethe approximation `Z_B` computed by loopy belief propagation is the
//! leading term of an exact finite expansion of the partition function,
//!
//! ```text
//! Z = Z_B * (1 + sum over generalized loops C of r(C)),
//! r(C) = prod_{ij in C} beta_ij * prod_{i in C} f_{d_i(C)}(gamma_i),
//! ```
//!
//! where a generalized loop is an edge subset whose induced subgraph has no
//! degree-1 node, `beta_ij` measures the belief correlation of an edge,
//! `gamma_i` the belief asymmetry of a node, and `f_n` is the polynomial
//! family `f_0 = 1, f_1 = 0, f_{n+1} = x f_n + f_{n-1}`. The same machinery
//! reconstructs exact single-node marginals from the fixed point and, on
//! regular graphs, ties the expansion to the Ising partition function
//! `Z(K, h)` and its zero-field susceptibility.
//!
//! Everything is verified against brute-force oracles at desk scale; the
//! identity suites live in `tests/acceptance.rs`.
//!
//! # Examples
//!
//! One runnable walk-through per capability:
//!
//! - **`bethe_vs_exact`** — LBP beliefs and `Z_B` against the oracle
//! - **`loop_series`** — all generalized loops of K4 and their corrections
//! - **`propagation_rules`** — first/secondary messages and their rules
//! - **`marginal_expansion`** — exact marginals from the fixed point
//! - **`ising_regular`** — `theta(beta, gamma)` vs `Z(K, h)`, susceptibility
//! - **`transfer_matrix`** — cutting a cycle open; eigenvalues `Z_B`, `Z_B
//!   * prod beta`
//!
//! ```bash
//! cargo run --example loop_series
//! cargo run --example marginal_expansion
//! ```
//!
//! A thin `loopdiag` binary exposes the same pipelines over graph files
//! (`lbp`, `exact`, `expand`, `coeffs`, `marginal`, `bound`, `ising`,
//! `verify`, `random`), emitting JSON reports.
//!
//! # Quick start
//!
//! ```
//! use loopdiag::{Caps, LbpConfig, Mrf};
//!
//! // A frustrated 4-cycle with a chord.
//! let m = Mrf::new(4, vec![
//!     (0, 1, [[1.4, 0.6], [0.7, 1.3]]),
//!     (1, 2, [[0.8, 1.5], [1.2, 0.9]]),
//!     (2, 3, [[1.1, 0.7], [0.6, 1.6]]),
//!     (0, 3, [[0.9, 1.2], [1.4, 0.8]]),
//!     (0, 2, [[1.3, 0.9], [0.8, 1.1]]),
//! ]).unwrap();
//!
//! let series = loopdiag::loop_series_partition(&m, &LbpConfig::default(), &Caps::default()).unwrap();
//! let z = loopdiag::exact_partition(&m, &Caps::default()).unwrap();
//! assert!(((series.z_estimate - z) / z).abs() < 1e-9);
//! ```

// Spin-state indices into 2x2 tables read naturally as loops over 0..2.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod ising;
pub mod lbp;
pub mod loops;
pub mod marginal;
pub mod messages;
pub mod numeric;
pub mod random;

pub use error::{Error, Result};
pub use exact::{
    contract_clamped, exact_marginal, exact_partition, ising_partition, reduced_transfer,
    transfer_tensor, Caps, ReductionMode, TransferTensor,
};
pub use graph::{
    absorb_node_potentials, cut_open_at, cut_to_tree, cycle_rank, split_node, subdivide_edge,
    subdivide_edge_toward, CutTree, Edge, HatGraph, Mrf, NodeId, Psi,
};
pub use io::{graph_to_string, parse_graph, read_graph, write_graph, GraphFile};
pub use ising::{
    bethe_susceptibility_per_spin, bij_from_beta_gamma, chi_per_spin_from_theta_derivatives,
    corollary_change_of_variables, susceptibility_check, theta_via_identity, CorollaryReport,
    IsingParams, SusceptibilityReport,
};
pub use lbp::{
    beliefs_from_messages, bethe_log_partition, cut_pair_messages, first_messages, reparametrize,
    run_lbp, Beliefs, DirectedMessages, FixedPointReport, LbpConfig, Schedule,
};
pub use loops::{
    cc_term, enumerate_generalized_loops, loop_count_bound, loop_series_partition, loop_term,
    naive_generalized_loops, rank2_transfer_check, theta_uniform, theta_uniform_on_graph,
    GeneralizedLoop, LoopCountBound, LoopSeries, LoopTerm, ThetaUniform,
};
pub use marginal::{
    degree_two_proxy, map_discriminant, marginal_diagram_expansion, marginal_via_transfer,
    one_loop_sign_check, DiagramTerm, FourTerms, MarginalExpansion, OneLoopSignReport,
};
pub use messages::{
    betas, coefficients, f_eval, f_eval_closed, f_poly, gammas, pull_back_betas,
    secondary_messages, transform_degree_three, verify_propagation_rules, Coefficients,
    PropagationReport, SecondaryMessages,
};
