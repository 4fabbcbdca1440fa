//! Secondary messages, the edge/node coefficients `beta` and `gamma`, the
//! polynomial family `f_n`, and numeric verification of every propagation
//! rule they satisfy at a reparametrized fixed point.

use crate::error::{Error, Result};
use crate::graph::{split_node, Mrf, NodeId};
use crate::lbp::{Beliefs, DirectedMessages};

/// Tolerance for all propagation-rule identities.
pub const RULE_TOLERANCE: f64 = 1e-10;

/// One length-2 vector per directed edge, orthogonal to the first messages.
/// On a reparametrized graph the vector depends only on the source node, so
/// the per-edge map is stored node-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryMessages {
    per_node: Vec<[f64; 2]>,
}

impl SecondaryMessages {
    /// The secondary message `nu_(j,i)`; on a reparametrized graph it is the
    /// same for every neighbor `i` of `j`.
    pub fn get(&self, j: NodeId, _i: NodeId) -> &[f64; 2] {
        &self.per_node[j]
    }

    pub fn at_node(&self, j: NodeId) -> &[f64; 2] {
        &self.per_node[j]
    }
}

/// The loop-series variables: one `beta` per undirected edge (canonical
/// order) and one `gamma` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// `gamma_j = (b_j(+) - b_j(-)) / sqrt(b_j(+) b_j(-))` for every node.
pub fn gammas(b: &Beliefs) -> Vec<f64> {
    b.node
        .iter()
        .map(|bv| (bv[0] - bv[1]) / (bv[0] * bv[1]).sqrt())
        .collect()
}

/// `beta_ij` for every edge: the determinant of the edge belief normalized
/// by the geometric means of the node beliefs. Always in `[-1, 1]`.
pub fn betas(m: &Mrf, b: &Beliefs) -> Vec<f64> {
    m.edges()
        .iter()
        .zip(&b.edge)
        .map(|(e, t)| {
            let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
            det / ((b.node[e.i][0] * b.node[e.i][1]).sqrt()
                * (b.node[e.j][0] * b.node[e.j][1]).sqrt())
        })
        .collect()
}

pub fn coefficients(m: &Mrf, b: &Beliefs) -> Coefficients {
    Coefficients {
        beta: betas(m, b),
        gamma: gammas(b),
    }
}

/// Closed-form secondary messages on a reparametrized graph:
/// `nu_(j,i)(x) = -x b_j(-x)^{(d_j-1)/d_j} / (b_j(+) b_j(-))^{(d_j-2)/(2 d_j)}`.
/// The first component is negative by the sign convention.
pub fn secondary_messages(m: &Mrf, b: &Beliefs) -> Result<SecondaryMessages> {
    let mut per_node = Vec::with_capacity(m.node_count());
    for v in 0..m.node_count() {
        let bv = b.node[v];
        if bv[0] <= 0.0 || bv[1] <= 0.0 {
            return Err(Error::DegenerateBelief(v));
        }
        let d = m.degree(v) as f64;
        let denom = (bv[0] * bv[1]).powf((d - 2.0) / (2.0 * d));
        per_node.push([
            -bv[1].powf((d - 1.0) / d) / denom,
            bv[0].powf((d - 1.0) / d) / denom,
        ]);
    }
    Ok(SecondaryMessages { per_node })
}

/// `f_n(x)` by the defining recursion `f_0 = 1, f_1 = 0,
/// f_{n+1} = x f_n + f_{n-1}`.
pub fn f_eval(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 0.0,
        _ => {
            let (mut prev, mut cur) = (1.0, 0.0);
            for _ in 1..n {
                (prev, cur) = (cur, x * cur + prev);
            }
            cur
        }
    }
}

/// `f_n(x)` by the closed form `(l1^{n-1} - l2^{n-1}) / (l1 - l2)` where
/// `l1, l2` solve `l^2 - x l - 1 = 0`; used as an independent route.
pub fn f_eval_closed(n: usize, x: f64) -> f64 {
    let root = (x * x + 4.0).sqrt();
    let l1 = (x + root) / 2.0;
    let l2 = (x - root) / 2.0;
    (l1.powi(n as i32 - 1) - l2.powi(n as i32 - 1)) / root
}

/// Integer coefficients of `f_n`; index `k` holds the coefficient of `x^k`.
pub fn f_poly(n: usize) -> Vec<i64> {
    let mut prev = vec![1i64]; // f_0
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0i64]; // f_1
    for _ in 1..n {
        let mut next = vec![0i64; cur.len() + 1];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] += c;
        }
        for (k, &c) in prev.iter().enumerate() {
            next[k] += c;
        }
        while next.len() > 1 && *next.last().unwrap() == 0 {
            next.pop();
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `sum_x nu(x)^n mu(x)^{d-n}` — the collision of `n` secondary and `d - n`
/// first messages at one node.
pub fn collision_sum(mu: &[f64; 2], nu: &[f64; 2], d: usize, n: usize) -> f64 {
    debug_assert!(n <= d);
    (0..2)
        .map(|x| nu[x].powi(n as i32) * mu[x].powi((d - n) as i32))
        .sum()
}

#[derive(Debug, Clone)]
pub struct RuleCheck {
    pub rule: &'static str,
    pub location: String,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct PropagationReport {
    pub checks: Vec<RuleCheck>,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropagationReport {
    fn record(&mut self, rule: &'static str, location: String, residual: f64) {
        self.max_residual = self.max_residual.max(residual);
        self.checks.push(RuleCheck {
            rule,
            location,
            residual,
        });
    }

    pub fn violations(&self) -> Vec<&RuleCheck> {
        self.checks
            .iter()
            .filter(|c| c.residual > self.tolerance)
            .collect()
    }
}

/// Verifies every propagation rule at a reparametrized fixed point, each to
/// [`RULE_TOLERANCE`]:
///
/// * collision rules at each node: `n = 0` (the unit sum), `n = 1`
///   (orthogonality), `n = 2` (normalization), and the full sweep
///   `sum_x nu^n mu^{d-n} = f_n(gamma)` for `0 <= n <= d`;
/// * message transport along each edge: a secondary message crossing an edge
///   is attenuated by that edge's `beta`, in both directions (the shared-
///   coefficient property), including `beta = 1` on delta edges;
/// * the rank-2 identity `mu mu^T + nu nu^T = I` at every degree-2 node.
pub fn verify_propagation_rules(
    m: &Mrf,
    mu: &DirectedMessages,
    nu: &SecondaryMessages,
    coeffs: &Coefficients,
) -> Result<PropagationReport> {
    let mut report = PropagationReport {
        checks: Vec::new(),
        max_residual: 0.0,
        tolerance: RULE_TOLERANCE,
    };

    // Node collision rules (the full sweep subsumes the unit-sum,
    // orthogonality and normalization identities but they are reported
    // under their own names for diagnosability).
    for v in 0..m.node_count() {
        let d = m.degree(v);
        let some_neighbor = m.incidences(v)[0].neighbor;
        let mu_v = mu.get(m, v, some_neighbor).expect("message exists");
        let nu_v = nu.at_node(v);
        for n in 0..=d {
            let got = collision_sum(mu_v, nu_v, d, n);
            let expect = f_eval(n, coeffs.gamma[v]);
            let rule = match n {
                0 => "unit-collision",
                1 => "orthogonality",
                2 => "normalization",
                _ if n == d && d == 3 => "gamma-collision",
                _ => "mixed-collision",
            };
            report.record(rule, format!("node {v}, n = {n}"), (got - expect).abs());
        }
    }

    // Edge transport: sum_{x_s} psi(x_t, x_s) nu_s(x_s) mu_s(x_s)^{d_s - 2}
    // must equal beta_ts * nu_t(x_t) componentwise, in both directions.
    for (idx, e) in m.edges().iter().enumerate() {
        for (t, s) in [(e.i, e.j), (e.j, e.i)] {
            let d_s = m.degree(s);
            if d_s < 2 {
                continue;
            }
            let mu_s = mu.get(m, s, t).expect("message exists");
            let nu_s = nu.at_node(s);
            let nu_t = nu.at_node(t);
            let mut residual: f64 = 0.0;
            for x_t in 0..2 {
                let mut out = 0.0;
                for x_s in 0..2 {
                    out += e.value_from(t, x_t, x_s)
                        * nu_s[x_s]
                        * mu_s[x_s].powi(d_s as i32 - 2);
                }
                residual = residual.max((out - coeffs.beta[idx] * nu_t[x_t]).abs());
            }
            let rule = if e.delta {
                "delta-edge-transport"
            } else {
                "beta-transport"
            };
            report.record(rule, format!("edge ({}, {}) toward {t}", e.i, e.j), residual);
        }
        if e.delta {
            report.record(
                "delta-edge-beta-is-one",
                format!("edge ({}, {})", e.i, e.j),
                (coeffs.beta[idx] - 1.0).abs(),
            );
        }
    }

    // Identity decomposition at degree-2 nodes: mu mu^T + nu nu^T = I.
    for v in 0..m.node_count() {
        if m.degree(v) != 2 {
            continue;
        }
        let some_neighbor = m.incidences(v)[0].neighbor;
        let mu_v = mu.get(m, v, some_neighbor).expect("message exists");
        let nu_v = nu.at_node(v);
        let mut residual: f64 = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let got = mu_v[x] * mu_v[y] + nu_v[x] * nu_v[y];
                let expect = if x == y { 1.0 } else { 0.0 };
                residual = residual.max((got - expect).abs());
            }
        }
        report.record("identity-decomposition", format!("node {v}"), residual);
    }

    let violations: Vec<String> = report
        .violations()
        .iter()
        .map(|c| format!("{} at {} (residual {:e})", c.rule, c.location, c.residual))
        .collect();
    if violations.is_empty() {
        Ok(report)
    } else {
        Err(Error::PropagationRules { violations })
    }
}

/// Splits every node of degree four or more into a chain of degree-3 nodes.
/// Returns the transformed graph and, per transformed node, the original
/// node it stands for (chain nodes map back to the split node).
pub fn transform_degree_three(m: &Mrf) -> Result<(Mrf, Vec<NodeId>)> {
    let mut graph = m.clone();
    let mut origin: Vec<NodeId> = (0..m.node_count()).collect();
    loop {
        let Some(v) = (0..graph.node_count()).find(|&v| graph.degree(v) > 3) else {
            return Ok((graph, origin));
        };
        let before = graph.node_count();
        graph = split_node(&graph, v)?;
        let owner = origin[v];
        origin.extend(std::iter::repeat_n(owner, graph.node_count() - before));
    }
}

/// Pulls edge coefficients computed on a degree-<=3 transform back to the
/// original graph through the node-origin map; delta edges (whose beta is
/// identically 1) are dropped.
pub fn pull_back_betas(
    original: &Mrf,
    transformed: &Mrf,
    origin: &[NodeId],
    transformed_beta: &[f64],
) -> Result<Vec<f64>> {
    let mut beta = vec![f64::NAN; original.edge_count()];
    for (idx, e) in transformed.edges().iter().enumerate() {
        if e.delta {
            continue;
        }
        let (a, b) = (origin[e.i], origin[e.j]);
        let orig_idx = original
            .edge_index(a, b)
            .ok_or(Error::EdgeNotFound { i: a, j: b })?;
        beta[orig_idx] = transformed_beta[idx];
    }
    if beta.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput(
            "transform did not cover every original edge".into(),
        ));
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Psi;
    use crate::lbp::{first_messages, reparametrize, run_lbp, LbpConfig};

    fn psi(a: f64, b: f64, c: f64, d: f64) -> Psi {
        [[a, b], [c, d]]
    }

    #[test]
    fn f_small_cases() {
        // Forced by the recursion: f_2 = 1, f_3 = x, f_4 = x^2 + 1.
        assert_eq!(f_poly(2), vec![1]);
        assert_eq!(f_poly(3), vec![0, 1]);
        assert_eq!(f_poly(4), vec![1, 0, 1]);
        for x in [-2.5, 0.0, 0.3, 4.0] {
            assert_eq!(f_eval(2, x), 1.0);
            assert_eq!(f_eval(3, x), x);
            assert!((f_eval(4, x) - (x * x + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn f_at_zero_alternates() {
        for n in 0..15 {
            let expect = if n % 2 == 0 { 1.0 } else { 0.0 };
            assert_eq!(f_eval(n, 0.0), expect);
            assert!((f_eval_closed(n, 0.0) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn f_at_one_grows_after_four() {
        assert_eq!(f_eval(2, 1.0), 1.0);
        assert_eq!(f_eval(3, 1.0), 1.0);
        for n in 5..12 {
            assert!(f_eval(n, 1.0) > 1.0);
        }
    }

    #[test]
    fn f_recursion_matches_closed_form() {
        for n in 0..=20 {
            let mut x = -4.0;
            while x <= 4.0 {
                let a = f_eval(n, x);
                let b = f_eval_closed(n, x);
                let scale = a.abs().max(1.0);
                assert!(
                    (a - b).abs() / scale < 1e-12,
                    "n = {n}, x = {x}: {a} vs {b}"
                );
                x += 0.25;
            }
        }
    }

    #[test]
    fn f_coefficients_nonnegative() {
        for n in 0..=20 {
            assert!(f_poly(n).iter().all(|&c| c >= 0), "f_{n}");
        }
    }

    #[test]
    fn gamma_closed_form_values() {
        let b = Beliefs {
            node: vec![[0.5, 0.5], [0.8, 0.2]],
            edge: vec![],
        };
        let g = gammas(&b);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1.5).abs() < 1e-14); // 0.6 / sqrt(0.16)
        assert!(g[1] > 0.0); // sign matches b(+) - b(-)
    }

    #[test]
    fn beta_zero_for_factorized_edge_belief() {
        let m = Mrf::new(2, vec![(0, 1, psi(1.0, 1.0, 1.0, 1.0))]).unwrap();
        let bi = [0.7, 0.3];
        let bj = [0.4, 0.6];
        let mut table = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                table[x][y] = bi[x] * bj[y];
            }
        }
        let b = Beliefs {
            node: vec![bi, bj],
            edge: vec![table],
        };
        assert!(betas(&m, &b)[0].abs() < 1e-15);
    }

    #[test]
    fn uniform_degree_two_secondary_message() {
        let m = Mrf::cycle(4).unwrap();
        let report = run_lbp(&m, &LbpConfig::default()).unwrap();
        let reparam = reparametrize(&m, &report).unwrap();
        let nu = secondary_messages(&reparam, &report.beliefs).unwrap();
        let inv_sqrt2 = 0.5f64.sqrt();
        for v in 0..4 {
            let got = nu.at_node(v);
            assert!((got[0] + inv_sqrt2).abs() < 1e-14);
            assert!((got[1] - inv_sqrt2).abs() < 1e-14);
            assert!(got[0] < 0.0);
        }
    }

    fn random_psi(seed: &mut u64) -> Psi {
        let mut next = || {
            *seed ^= *seed << 13;
            *seed ^= *seed >> 7;
            *seed ^= *seed << 17;
            0.5 + 1.5 * ((*seed >> 11) as f64 / (1u64 << 53) as f64)
        };
        [[next(), next()], [next(), next()]]
    }

    #[test]
    fn rules_hold_on_reparametrized_two_loop_graph() {
        let mut seed = 0x5eed5eed5eed5eed;
        let m = Mrf::new(
            4,
            vec![
                (0, 2, random_psi(&mut seed)),
                (0, 3, random_psi(&mut seed)),
                (1, 2, random_psi(&mut seed)),
                (1, 3, random_psi(&mut seed)),
                (2, 3, random_psi(&mut seed)),
            ],
        )
        .unwrap();
        let report = run_lbp(&m, &LbpConfig::default()).unwrap();
        assert!(report.converged);
        let reparam = reparametrize(&m, &report).unwrap();
        let mu = first_messages(&reparam, &report.beliefs).unwrap();
        let nu = secondary_messages(&reparam, &report.beliefs).unwrap();
        let coeffs = coefficients(&reparam, &report.beliefs);
        let rules = verify_propagation_rules(&reparam, &mu, &nu, &coeffs).unwrap();
        assert!(rules.max_residual <= RULE_TOLERANCE);
        for beta in &coeffs.beta {
            assert!(beta.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rules_fail_with_wrong_gamma() {
        // Needs a degree-3 node: the gamma value first enters at f_3.
        let mut seed = 0x9999aaaa9999aaaa;
        let m = Mrf::new(
            4,
            vec![
                (0, 1, random_psi(&mut seed)),
                (0, 2, random_psi(&mut seed)),
                (0, 3, random_psi(&mut seed)),
                (1, 2, random_psi(&mut seed)),
                (1, 3, random_psi(&mut seed)),
                (2, 3, random_psi(&mut seed)),
            ],
        )
        .unwrap();
        let report = run_lbp(&m, &LbpConfig::default()).unwrap();
        let reparam = reparametrize(&m, &report).unwrap();
        let mu = first_messages(&reparam, &report.beliefs).unwrap();
        let nu = secondary_messages(&reparam, &report.beliefs).unwrap();
        let mut coeffs = coefficients(&reparam, &report.beliefs);
        coeffs.gamma[0] += 0.1;
        assert!(matches!(
            verify_propagation_rules(&reparam, &mu, &nu, &coeffs),
            Err(Error::PropagationRules { .. })
        ));
    }

    #[test]
    fn transform_caps_degrees_at_three() {
        let m = Mrf::complete(5).unwrap(); // every node degree 4
        let (t, origin) = transform_degree_three(&m).unwrap();
        assert!((0..t.node_count()).all(|v| t.degree(v) <= 3));
        assert_eq!(origin.len(), t.node_count());
        assert_eq!(&origin[..5], &[0, 1, 2, 3, 4]);
        // K5: five degree-4 nodes each split into two, adding one node and
        // one delta edge apiece.
        assert_eq!(t.node_count(), 10);
        assert_eq!(t.edge_count(), 15);
        assert_eq!(t.edges().iter().filter(|e| e.delta).count(), 5);
    }

    #[test]
    fn beta_pullback_matches_direct_computation() {
        let mut seed = 0x0123456789abcdef;
        let m = Mrf::new(
            5,
            vec![
                (0, 1, random_psi(&mut seed)),
                (0, 2, random_psi(&mut seed)),
                (0, 3, random_psi(&mut seed)),
                (0, 4, random_psi(&mut seed)),
                (1, 2, random_psi(&mut seed)),
                (3, 4, random_psi(&mut seed)),
                (1, 3, random_psi(&mut seed)),
            ],
        )
        .unwrap();
        assert_eq!(m.degree(0), 4);
        let cfg = LbpConfig::default();
        let report = run_lbp(&m, &cfg).unwrap();
        let direct = betas(&m, &report.beliefs);
        let gamma_direct = gammas(&report.beliefs);

        let (t, origin) = transform_degree_three(&m).unwrap();
        let report_t = run_lbp(&t, &cfg).unwrap();
        assert!(report_t.converged);
        let beta_t = betas(&t, &report_t.beliefs);
        let pulled = pull_back_betas(&m, &t, &origin, &beta_t).unwrap();
        for (a, b) in direct.iter().zip(&pulled) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        // Gamma of the surviving node is invariant under splitting.
        let gamma_t = gammas(&report_t.beliefs);
        assert!((gamma_direct[0] - gamma_t[0]).abs() < 1e-10);
    }
}
