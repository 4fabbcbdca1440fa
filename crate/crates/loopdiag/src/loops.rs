//! Generalized-loop enumeration and the loop-series expansion of the
//! partition function: `Z = Z_B (1 + sum_C r(C))` with
//! `r(C) = prod_{ij in C} beta_ij * prod_{i in C} f_{d_i(C)}(gamma_i)`.
//!
//! Also provides the covariance-based form of each term (an independent
//! route to the same value), the uniform-coefficient polynomial
//! `theta(1, gamma)` determined by the cycle rank alone, the bound on the
//! number of generalized loops, and the rank-2 representation of reduced
//! transfer matrices.

use crate::error::{Error, Result};
use crate::exact::{reduced_transfer, transfer_tensor, Caps, ReductionMode};
use crate::graph::{cut_to_tree, Mrf};
use crate::lbp::{
    cut_pair_messages, first_messages, reparametrize, run_lbp, FixedPointReport, LbpConfig,
};
use crate::messages::{coefficients, f_eval, f_poly, secondary_messages, Coefficients};
use crate::numeric::CompensatedSum;

/// An edge subset whose induced subgraph has minimum degree two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedLoop {
    /// Edge indices into the graph's canonical edge list, ascending.
    pub edges: Vec<usize>,
    /// Induced degree of every node (zero for nodes outside the subgraph).
    pub induced_degrees: Vec<u8>,
}

impl GeneralizedLoop {
    fn from_edges(m: &Mrf, edges: Vec<usize>) -> Self {
        let mut induced_degrees = vec![0u8; m.node_count()];
        for &e in &edges {
            induced_degrees[m.edges()[e].i] += 1;
            induced_degrees[m.edges()[e].j] += 1;
        }
        GeneralizedLoop {
            edges,
            induced_degrees,
        }
    }

    pub fn node_count(&self) -> usize {
        self.induced_degrees.iter().filter(|&&d| d > 0).count()
    }

    pub fn max_degree(&self) -> u8 {
        self.induced_degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_pairs(&self, m: &Mrf) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&e| (m.edges()[e].i, m.edges()[e].j))
            .collect()
    }
}

/// A generalized loop together with its expansion weight `r(C)`.
#[derive(Debug, Clone)]
pub struct LoopTerm {
    pub subgraph: GeneralizedLoop,
    pub r: f64,
}

fn check_enum_cap(m: &Mrf, caps: &Caps) -> Result<()> {
    if m.edge_count() > caps.max_enum_edges {
        return Err(Error::CapExceeded {
            what: "edge count for loop enumeration",
            value: m.edge_count(),
            cap: caps.max_enum_edges,
        });
    }
    Ok(())
}

/// Reference enumeration: filters all 2^|E| nonempty edge subsets for
/// minimum induced degree two. Used as the independent route in tests and
/// for the counting checks.
pub fn naive_generalized_loops(m: &Mrf, caps: &Caps) -> Result<Vec<GeneralizedLoop>> {
    check_enum_cap(m, caps)?;
    let e = m.edge_count();
    let mut out = Vec::new();
    'subset: for mask in 1usize..1 << e {
        let mut deg = vec![0u8; m.node_count()];
        for (idx, edge) in m.edges().iter().enumerate() {
            if (mask >> idx) & 1 == 1 {
                deg[edge.i] += 1;
                deg[edge.j] += 1;
            }
        }
        for &d in &deg {
            if d == 1 {
                continue 'subset;
            }
        }
        let edges = (0..e).filter(|idx| (mask >> idx) & 1 == 1).collect();
        out.push(GeneralizedLoop {
            edges,
            induced_degrees: deg,
        });
    }
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

/// Enumerates all generalized loops: restricts to the 2-core, then searches
/// edge subsets depth-first with a degree-feasibility prune (a node whose
/// incident edges are all decided must not end at degree one). Results are
/// in canonical (lexicographic edge-subset) order.
pub fn enumerate_generalized_loops(m: &Mrf, caps: &Caps) -> Result<Vec<GeneralizedLoop>> {
    check_enum_cap(m, caps)?;

    // Peel to the 2-core: no generalized loop can use an edge outside it.
    let mut alive_edge = vec![true; m.edge_count()];
    let mut degree: Vec<usize> = (0..m.node_count()).map(|v| m.degree(v)).collect();
    let mut queue: Vec<usize> = (0..m.node_count()).filter(|&v| degree[v] < 2).collect();
    while let Some(v) = queue.pop() {
        for inc in m.incidences(v) {
            if alive_edge[inc.edge] {
                alive_edge[inc.edge] = false;
                degree[v] -= 1;
                degree[inc.neighbor] -= 1;
                if degree[inc.neighbor] == 1 {
                    queue.push(inc.neighbor);
                }
            }
        }
    }
    let core_edges: Vec<usize> = (0..m.edge_count()).filter(|&e| alive_edge[e]).collect();

    struct Search<'a> {
        m: &'a Mrf,
        core_edges: &'a [usize],
        chosen: Vec<usize>,
        cur_deg: Vec<u8>,
        remaining: Vec<u8>,
        out: Vec<GeneralizedLoop>,
    }

    impl Search<'_> {
        fn run(&mut self, pos: usize) {
            if pos == self.core_edges.len() {
                if !self.chosen.is_empty() {
                    self.out
                        .push(GeneralizedLoop::from_edges(self.m, self.chosen.clone()));
                }
                return;
            }
            let edge_idx = self.core_edges[pos];
            let e = &self.m.edges()[edge_idx];
            for include in [false, true] {
                if include {
                    self.cur_deg[e.i] += 1;
                    self.cur_deg[e.j] += 1;
                    self.chosen.push(edge_idx);
                }
                self.remaining[e.i] -= 1;
                self.remaining[e.j] -= 1;
                let feasible = [e.i, e.j]
                    .iter()
                    .all(|&v| self.remaining[v] > 0 || self.cur_deg[v] != 1);
                if feasible {
                    self.run(pos + 1);
                }
                self.remaining[e.i] += 1;
                self.remaining[e.j] += 1;
                if include {
                    self.cur_deg[e.i] -= 1;
                    self.cur_deg[e.j] -= 1;
                    self.chosen.pop();
                }
            }
        }
    }

    let mut remaining = vec![0u8; m.node_count()];
    for &e in &core_edges {
        remaining[m.edges()[e].i] += 1;
        remaining[m.edges()[e].j] += 1;
    }
    let mut search = Search {
        m,
        core_edges: &core_edges,
        chosen: Vec::new(),
        cur_deg: vec![0; m.node_count()],
        remaining,
        out: Vec::new(),
    };
    search.run(0);
    let mut out = search.out;
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

/// The expansion weight of one generalized loop.
pub fn loop_term(c: &GeneralizedLoop, coeffs: &Coefficients) -> LoopTerm {
    let mut r = 1.0;
    for &e in &c.edges {
        r *= coeffs.beta[e];
    }
    for (v, &d) in c.induced_degrees.iter().enumerate() {
        if d > 0 {
            r *= f_eval(d as usize, coeffs.gamma[v]);
        }
    }
    LoopTerm {
        subgraph: c.clone(),
        r,
    }
}

/// The loop-series expansion of the partition function.
#[derive(Debug, Clone)]
pub struct LoopSeries {
    pub fixed_point: FixedPointReport,
    pub coefficients: Coefficients,
    pub terms: Vec<LoopTerm>,
    /// `1 + sum_C r(C)`; the exact correction factor `Z / Z_B`.
    pub theta: f64,
    pub z_bethe: f64,
    pub z_estimate: f64,
}

/// Runs LBP, computes the coefficients, enumerates generalized loops, and
/// assembles `Z = Z_B (1 + sum r(C))`. The series is exact, not an
/// approximation, whenever LBP converged.
pub fn loop_series_partition(m: &Mrf, cfg: &LbpConfig, caps: &Caps) -> Result<LoopSeries> {
    let fixed_point = run_lbp(m, cfg)?;
    if !fixed_point.converged {
        return Err(Error::NotConverged {
            iterations: fixed_point.iterations,
            residual: fixed_point.residual,
        });
    }
    let coeffs = coefficients(m, &fixed_point.beliefs);
    let loops = enumerate_generalized_loops(m, caps)?;
    let terms: Vec<LoopTerm> = loops.iter().map(|c| loop_term(c, &coeffs)).collect();
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for t in &terms {
        acc.add(t.r);
    }
    let theta = acc.total();
    let z_bethe = fixed_point.z_bethe();
    Ok(LoopSeries {
        z_estimate: z_bethe * theta,
        z_bethe,
        theta,
        terms,
        coefficients: coeffs,
        fixed_point,
    })
}

/// The covariance-based term of the same expansion:
/// `r-check(C) = prod_{ij} tau_ij * prod_i rho_i(C)` with
/// `tau_ij = cov_{b_ij}(x_i, x_j)` and `rho_i` the scaled central moment of
/// `b_i`. Equals [`loop_term`]'s `r(C)` for every generalized loop.
pub fn cc_term(c: &GeneralizedLoop, m: &Mrf, b: &crate::lbp::Beliefs) -> Result<f64> {
    let means: Vec<f64> = b.node.iter().map(|bv| bv[0] - bv[1]).collect();
    for (v, &mean) in means.iter().enumerate() {
        if c.induced_degrees[v] > 0 && mean.abs() >= 1.0 {
            return Err(Error::DegenerateBelief(v));
        }
    }
    let spin = |x: usize| 1.0 - 2.0 * x as f64;
    let mut value = 1.0;
    for &e in &c.edges {
        let edge = &m.edges()[e];
        let table = &b.edge[e];
        let mut tau = 0.0;
        for x_i in 0..2 {
            for x_j in 0..2 {
                tau += table[x_i][x_j]
                    * (spin(x_i) - means[edge.i])
                    * (spin(x_j) - means[edge.j]);
            }
        }
        value *= tau;
    }
    for (v, &d) in c.induced_degrees.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let d = d as i32;
        let mean = means[v];
        let rho = ((1.0 - mean).powi(d - 1)
            + if d % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + mean).powi(d - 1))
            / (2.0 * (1.0 - mean * mean).powi(d - 1));
        value *= rho;
    }
    Ok(value)
}

/// The polynomial `theta(1, gamma) = sum_k binom(L, k) f_{2k}(gamma)`,
/// which depends on the graph only through its cycle rank `L`. All
/// coefficients are nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaUniform {
    pub l: usize,
    /// Coefficient of `gamma^k` at index `k`.
    pub coefficients: Vec<i64>,
}

impl ThetaUniform {
    pub fn eval(&self, gamma: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * gamma + c as f64)
    }

    /// `((2 sqrt(4+g^2)) / (g + sqrt(4+g^2)))^{L-1} + ((2 sqrt(4+g^2)) /
    /// (-g + sqrt(4+g^2)))^{L-1}`; agrees with the polynomial, including the
    /// exponent -1 edge case at `L = 0` where it evaluates to 1.
    pub fn closed_form(&self, gamma: f64) -> f64 {
        let root = (4.0 + gamma * gamma).sqrt();
        let exp = self.l as i32 - 1;
        (2.0 * root / (gamma + root)).powi(exp) + (2.0 * root / (root - gamma)).powi(exp)
    }

    /// Sum of the coefficients, `theta(1, 1)`; exact in integers.
    pub fn coefficient_sum(&self) -> i64 {
        self.coefficients.iter().sum()
    }
}

pub fn theta_uniform(l: usize) -> ThetaUniform {
    let mut binom = vec![0i64; l + 1];
    binom[0] = 1;
    for _ in 0..l {
        for k in (1..=l).rev() {
            binom[k] += binom[k - 1];
        }
    }
    let mut coefficients = vec![0i64];
    for (k, &b) in binom.iter().enumerate() {
        let f = f_poly(2 * k);
        if f.len() > coefficients.len() {
            coefficients.resize(f.len(), 0);
        }
        for (p, &c) in f.iter().enumerate() {
            coefficients[p] += b * c;
        }
    }
    ThetaUniform { l, coefficients }
}

/// `theta(beta, gamma)` with uniform coefficients, evaluated on a concrete
/// graph by loop enumeration. At `beta = 1` this equals
/// `theta_uniform(cycle_rank).eval(gamma)`.
pub fn theta_uniform_on_graph(m: &Mrf, beta: f64, gamma: f64, caps: &Caps) -> Result<f64> {
    let loops = enumerate_generalized_loops(m, caps)?;
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for c in &loops {
        let mut r = beta.powi(c.edges.len() as i32);
        for &d in c.induced_degrees.iter().filter(|&&d| d > 0) {
            r *= f_eval(d as usize, gamma);
        }
        acc.add(r);
    }
    Ok(acc.total())
}

#[derive(Debug, Clone, Copy)]
pub struct LoopCountBound {
    /// Number of generalized loops including the empty set.
    pub count: usize,
    /// `theta(1, 1)` evaluated by the closed form.
    pub bound: f64,
    /// The bound is attained iff every generalized loop has max degree <= 3.
    pub tight: bool,
}

/// Counts generalized loops (empty set included) against the closed-form
/// bound `theta(1,1)`.
pub fn loop_count_bound(m: &Mrf, caps: &Caps) -> Result<LoopCountBound> {
    let loops = enumerate_generalized_loops(m, caps)?;
    let count = loops.len() + 1;
    let theta = theta_uniform(crate::graph::cycle_rank(m));
    let bound = theta.closed_form(1.0);
    let tight = loops.iter().all(|c| c.max_degree() <= 3);
    if count as f64 > bound * (1.0 + 1e-9) {
        return Err(Error::IdentityCheck(format!(
            "generalized-loop count {count} exceeds the bound {bound}"
        )));
    }
    if tight && (count as f64 - bound).abs() > 1e-6 {
        return Err(Error::IdentityCheck(format!(
            "bound should be attained (all loop degrees <= 3) but {count} != {bound}"
        )));
    }
    Ok(LoopCountBound {
        count,
        bound,
        tight,
    })
}

/// Per-cut-node outcome of the rank-2 representation check.
#[derive(Debug, Clone)]
pub struct Rank2Check {
    pub cut_node: usize,
    /// Product of beta along the tree path from the leaf to its duplicate.
    pub path_beta: f64,
    pub max_entry_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Rank2Report {
    pub checks: Vec<Rank2Check>,
    pub tolerance: f64,
}

/// Checks the rank-2 form of every reduced transfer matrix on the
/// reparametrized graph: `T_k = mu mu^T + (prod_path beta) nu nu^T`
/// entrywise to 1e-8, with `mu`, `nu` the closed-form messages at the cut
/// node and the path running from the leaf to its duplicate.
pub fn rank2_transfer_check(m: &Mrf, cfg: &LbpConfig, caps: &Caps) -> Result<Rank2Report> {
    const TOL: f64 = 1e-8;
    // Cut first, then reparametrize the cut base: the closed-form messages
    // must hold on the graph that actually gets contracted.
    let structure = cut_to_tree(m)?;
    if structure.l() == 0 {
        return Ok(Rank2Report {
            checks: Vec::new(),
            tolerance: TOL,
        });
    }
    let base_fp = run_lbp(&structure.base, cfg)?;
    if !base_fp.converged {
        return Err(Error::NotConverged {
            iterations: base_fp.iterations,
            residual: base_fp.residual,
        });
    }
    let reparam = reparametrize(&structure.base, &base_fp)?;
    let hat = crate::graph::cut_at_nodes(&reparam, structure.cut_nodes.clone())?;
    let base_mu = first_messages(&reparam, &base_fp.beliefs)?;
    let base_nu = secondary_messages(&reparam, &base_fp.beliefs)?;
    let base_coeffs = coefficients(&reparam, &base_fp.beliefs);
    let tensor = transfer_tensor(&hat, caps)?;
    let pairs = cut_pair_messages(&hat, &base_mu);

    let mut checks = Vec::new();
    for (k, &s) in hat.cut_nodes.iter().enumerate() {
        let t_k = reduced_transfer(&tensor, k, &ReductionMode::FixedPointMessages(pairs.clone()))?;
        let path = hat
            .tree
            .path(s, hat.bar(k))
            .ok_or_else(|| Error::IdentityCheck("cut leaves are disconnected".into()))?;
        let mut path_beta = 1.0;
        for w in path.windows(2) {
            let edge = hat
                .tree
                .edge_between(w[0], w[1])
                .expect("path edges exist");
            path_beta *= base_coeffs.beta[hat.tree.edges[edge].base_edge];
        }
        let mu = base_mu
            .get(&hat.base, s, hat.base.incidences(s)[0].neighbor)
            .expect("cut node message");
        let nu = base_nu.at_node(s);
        let mut residual: f64 = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let formula = mu[x] * mu[y] + path_beta * nu[x] * nu[y];
                residual = residual.max((t_k[x][y] - formula).abs());
            }
        }
        checks.push(Rank2Check {
            cut_node: s,
            path_beta,
            max_entry_residual: residual,
        });
    }
    let report = Rank2Report {
        checks,
        tolerance: TOL,
    };
    if let Some(bad) = report
        .checks
        .iter()
        .find(|c| c.max_entry_residual > report.tolerance)
    {
        return Err(Error::IdentityCheck(format!(
            "rank-2 transfer representation fails at cut node {} (residual {:e})",
            bad.cut_node, bad.max_entry_residual
        )));
    }
    Ok(report)
}
