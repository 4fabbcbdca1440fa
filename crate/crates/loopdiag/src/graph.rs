//! Binary pairwise Markov random fields and the structural graph transforms
//! (edge subdivision, node splitting, cycle cutting).
//!
//! States are spins `±1`; everywhere in this crate the table index `0` means
//! `x = +1` and index `1` means `x = -1`. Edge potentials are strictly
//! positive 2x2 tables, except for "delta" edges produced by node splitting,
//! which force the two endpoint variables to be equal and are flagged so that
//! downstream code can treat their exact zeros deliberately.

use crate::error::{Error, Result};

pub type NodeId = usize;

/// 2x2 edge potential, indexed `[x_i][x_j]` with `0 -> +1`, `1 -> -1`.
pub type Psi = [[f64; 2]; 2];

pub const PSI_ONES: Psi = [[1.0, 1.0], [1.0, 1.0]];
pub const PSI_DELTA: Psi = [[1.0, 0.0], [0.0, 1.0]];

/// An undirected edge `(i, j)` with `i < j` and its potential table.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: NodeId,
    pub j: NodeId,
    /// Potential table, `psi[x_i][x_j]`.
    pub psi: Psi,
    /// True when both off-diagonal entries are exactly zero, i.e. the edge
    /// enforces `x_i = x_j`. Such edges arise from `split_node` and are
    /// exempt from the strict-positivity invariant.
    pub delta: bool,
}

impl Edge {
    /// Potential evaluated with `u` listed first; `u` must be an endpoint.
    pub fn value_from(&self, u: NodeId, x_u: usize, x_other: usize) -> f64 {
        if u == self.i {
            self.psi[x_u][x_other]
        } else {
            self.psi[x_other][x_u]
        }
    }

    pub fn other(&self, u: NodeId) -> NodeId {
        if u == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// One entry of a node's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: NodeId,
    pub edge: usize,
}

/// A connected binary pairwise MRF with positive edge potentials and
/// optional positive node potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct Mrf {
    node_count: usize,
    edges: Vec<Edge>,
    phi: Option<Vec<[f64; 2]>>,
    adjacency: Vec<Vec<Incidence>>,
}

fn is_delta_table(psi: &Psi) -> bool {
    psi[0][1] == 0.0 && psi[1][0] == 0.0
}

impl Mrf {
    /// Builds an MRF from an edge list. Edges are canonicalized to `i < j`
    /// (transposing tables as needed) and sorted lexicographically.
    ///
    /// A table with both off-diagonal entries exactly zero is accepted as a
    /// delta edge; otherwise every entry must be strictly positive.
    pub fn new(node_count: usize, edge_list: Vec<(NodeId, NodeId, Psi)>) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for (u, v, psi) in edge_list {
            edges.push(canonical_edge(node_count, u, v, psi)?);
        }
        edges.sort_by_key(|e| (e.i, e.j));
        for w in edges.windows(2) {
            if w[0].i == w[1].i && w[0].j == w[1].j {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    w[0].i, w[0].j
                )));
            }
        }
        let adjacency = build_adjacency(node_count, &edges);
        let mrf = Mrf {
            node_count,
            edges,
            phi: None,
            adjacency,
        };
        if !mrf.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(mrf)
    }

    /// Attaches node potentials; one strictly positive pair per node.
    pub fn with_phi(mut self, phi: Vec<[f64; 2]>) -> Result<Self> {
        if phi.len() != self.node_count {
            return Err(Error::InvalidGraph(format!(
                "phi has {} entries for {} nodes",
                phi.len(),
                self.node_count
            )));
        }
        for (v, p) in phi.iter().enumerate() {
            if !(p[0] > 0.0 && p[1] > 0.0) || !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "phi[{v}] = {p:?} is not strictly positive"
                )));
            }
        }
        self.phi = Some(phi);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn phi(&self) -> Option<&[[f64; 2]]> {
        self.phi.as_deref()
    }

    pub fn phi_value(&self, v: NodeId, x: usize) -> f64 {
        self.phi.as_ref().map_or(1.0, |p| p[v][x])
    }

    pub fn incidences(&self, v: NodeId) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[v].iter().map(|inc| inc.neighbor)
    }

    pub fn edge_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by_key(&(a, b), |e| (e.i, e.j))
            .ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return false;
        }
        let order = self.bfs_order(0);
        order.len() == self.node_count
    }

    fn bfs_order(&self, start: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.node_count];
        let mut queue = std::collections::VecDeque::new();
        let mut order = Vec::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for inc in &self.adjacency[v] {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    queue.push_back(inc.neighbor);
                }
            }
        }
        order
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }

    /// All node degrees equal; returns that degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (1..self.node_count).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Cycle of length `n` with all-ones potentials.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph("cycle needs at least 3 nodes".into()));
        }
        let mut edges: Vec<_> = (0..n - 1).map(|v| (v, v + 1, PSI_ONES)).collect();
        edges.push((0, n - 1, PSI_ONES));
        Mrf::new(n, edges)
    }

    /// Path of `n` nodes with all-ones potentials.
    pub fn path(n: usize) -> Result<Self> {
        Mrf::new(n, (0..n - 1).map(|v| (v, v + 1, PSI_ONES)).collect())
    }

    /// Complete graph on `n` nodes with all-ones potentials.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, PSI_ONES));
            }
        }
        Mrf::new(n, edges)
    }

    /// Replaces every potential table using `f(edge_index, old_table)`.
    pub fn map_psi(&self, mut f: impl FnMut(usize, &Edge) -> Psi) -> Result<Self> {
        let edge_list = self
            .edges
            .iter()
            .enumerate()
            .map(|(idx, e)| (e.i, e.j, f(idx, e)))
            .collect();
        let mut out = Mrf::new(self.node_count, edge_list)?;
        out.phi = self.phi.clone();
        Ok(out)
    }
}

fn canonical_edge(node_count: usize, u: NodeId, v: NodeId, psi: Psi) -> Result<Edge> {
    if u >= node_count || v >= node_count {
        return Err(Error::NodeOutOfRange(u.max(v)));
    }
    if u == v {
        return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
    }
    let (i, j, table) = if u < v {
        (u, v, psi)
    } else {
        (v, u, transpose(&psi))
    };
    let delta = is_delta_table(&table);
    for row in &table {
        for &x in row {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "psi entry {x} on edge ({i}, {j}) is not a finite nonnegative number"
                )));
            }
        }
    }
    if delta {
        if !(table[0][0] > 0.0 && table[1][1] > 0.0) {
            return Err(Error::InvalidGraph(format!(
                "delta edge ({i}, {j}) has a nonpositive diagonal"
            )));
        }
    } else if !(table[0][0] > 0.0 && table[0][1] > 0.0 && table[1][0] > 0.0 && table[1][1] > 0.0) {
        return Err(Error::InvalidGraph(format!(
            "psi on edge ({i}, {j}) must be strictly positive (or a delta table)"
        )));
    }
    Ok(Edge {
        i,
        j,
        psi: table,
        delta,
    })
}

fn build_adjacency(node_count: usize, edges: &[Edge]) -> Vec<Vec<Incidence>> {
    let mut adjacency = vec![Vec::new(); node_count];
    for (idx, e) in edges.iter().enumerate() {
        adjacency[e.i].push(Incidence {
            neighbor: e.j,
            edge: idx,
        });
        adjacency[e.j].push(Incidence {
            neighbor: e.i,
            edge: idx,
        });
    }
    for list in &mut adjacency {
        list.sort_by_key(|inc| inc.neighbor);
    }
    adjacency
}

pub fn transpose(psi: &Psi) -> Psi {
    [[psi[0][0], psi[1][0]], [psi[0][1], psi[1][1]]]
}

/// Number of linearly independent cycles, `|E| - |V| + 1`.
pub fn cycle_rank(m: &Mrf) -> usize {
    m.edge_count() + 1 - m.node_count()
}

/// Folds each node potential into the lexicographically smallest incident
/// edge; the joint distribution is unchanged and the output has no `phi`.
pub fn absorb_node_potentials(m: &Mrf) -> Result<Mrf> {
    let Some(phi) = m.phi() else {
        let mut out = m.clone();
        out.phi = None;
        return Ok(out);
    };
    let mut tables: Vec<Psi> = m.edges().iter().map(|e| e.psi).collect();
    for v in 0..m.node_count() {
        let Some(inc) = m.incidences(v).first() else {
            return Err(Error::IsolatedNode(v));
        };
        // Smallest neighbor id gives the lexicographically smallest incident
        // edge: (v, n) sorts by min endpoint first, and all candidates share v.
        let target = m
            .incidences(v)
            .iter()
            .map(|inc| (m.edges()[inc.edge].i, m.edges()[inc.edge].j, inc.edge))
            .min()
            .map(|(_, _, e)| e)
            .unwrap_or(inc.edge);
        let e = &m.edges()[target];
        for x_v in 0..2 {
            for x_o in 0..2 {
                if e.i == v {
                    tables[target][x_v][x_o] *= phi[v][x_v];
                } else {
                    tables[target][x_o][x_v] *= phi[v][x_v];
                }
            }
        }
    }
    let edge_list = m
        .edges()
        .iter()
        .zip(tables)
        .map(|(e, t)| (e.i, e.j, t))
        .collect();
    Mrf::new(m.node_count(), edge_list)
}

/// Inserts a new node `k` on edge `e`, with the identity-preserving
/// factorization `psi_ik := psi_ij` and `psi_kj := delta`. The new node's
/// variable mirrors endpoint `j` (the canonically larger one); the joint
/// distribution over the original variables is unchanged.
pub fn subdivide_edge(m: &Mrf, e: (NodeId, NodeId)) -> Result<Mrf> {
    let (i, j) = if e.0 < e.1 { e } else { (e.1, e.0) };
    subdivide_edge_toward(m, (i, j), j).map(|(out, _)| out)
}

/// Like [`subdivide_edge`] but places the delta half on the `toward` side,
/// so the inserted node's variable is an exact copy of `toward`'s and the
/// inserted node has degree 2. Returns the new node's id.
pub fn subdivide_edge_toward(
    m: &Mrf,
    e: (NodeId, NodeId),
    toward: NodeId,
) -> Result<(Mrf, NodeId)> {
    let idx = m
        .edge_index(e.0, e.1)
        .ok_or(Error::EdgeNotFound { i: e.0, j: e.1 })?;
    if toward != e.0 && toward != e.1 {
        return Err(Error::InvalidInput(format!(
            "node {toward} is not an endpoint of ({}, {})",
            e.0, e.1
        )));
    }
    let edge = &m.edges()[idx];
    let far = edge.other(toward);
    let k = m.node_count();
    let mut edge_list: Vec<(NodeId, NodeId, Psi)> = m
        .edges()
        .iter()
        .enumerate()
        .filter(|(x, _)| *x != idx)
        .map(|(_, e)| (e.i, e.j, e.psi))
        .collect();
    // psi_{far,k}(x_far, x_k) := psi(x_far, x_toward); psi_{k,toward} := delta.
    let copy = if far == edge.i {
        edge.psi
    } else {
        transpose(&edge.psi)
    };
    edge_list.push((far, k, copy));
    edge_list.push((k, toward, PSI_DELTA));
    let mut out = Mrf::new(k + 1, edge_list)?;
    if let Some(phi) = m.phi() {
        let mut phi = phi.to_vec();
        phi.push([1.0, 1.0]);
        out = out.with_phi(phi)?;
    }
    Ok((out, k))
}

/// Splits a node of degree `n >= 4` into a chain of `n - 2` degree-3 nodes
/// joined by delta edges. Nodes of degree <= 3 are returned unchanged.
/// The split node keeps its id as the first chain node; fresh ids are
/// appended for the rest, so all other nodes keep their ids.
pub fn split_node(m: &Mrf, v: NodeId) -> Result<Mrf> {
    if v >= m.node_count() {
        return Err(Error::NodeOutOfRange(v));
    }
    let n = m.degree(v);
    if n <= 3 {
        return Ok(m.clone());
    }
    let neighbors: Vec<Incidence> = m.incidences(v).to_vec();
    let chain_len = n - 2;
    let mut chain = vec![v];
    chain.extend(m.node_count()..m.node_count() + chain_len - 1);
    let node_count = m.node_count() + chain_len - 1;

    // Chain node holding the edge to the t-th neighbor (0-based).
    let holder = |t: usize| -> NodeId {
        if t <= 1 {
            chain[0]
        } else if t >= n - 2 {
            chain[chain_len - 1]
        } else {
            chain[t - 1]
        }
    };

    let mut edge_list: Vec<(NodeId, NodeId, Psi)> = Vec::new();
    for e in m.edges() {
        if e.i != v && e.j != v {
            edge_list.push((e.i, e.j, e.psi));
        }
    }
    for (t, inc) in neighbors.iter().enumerate() {
        let e = &m.edges()[inc.edge];
        // Oriented [x_chain][x_neighbor]; the chain variable copies x_v.
        let oriented = if e.i == v { e.psi } else { transpose(&e.psi) };
        edge_list.push((holder(t), inc.neighbor, oriented));
    }
    for w in chain.windows(2) {
        edge_list.push((w[0], w[1], PSI_DELTA));
    }
    let mut out = Mrf::new(node_count, edge_list)?;
    if let Some(phi) = m.phi() {
        let mut phi = phi.to_vec();
        phi.resize(node_count, [1.0, 1.0]);
        out = out.with_phi(phi)?;
    }
    Ok(out)
}

/// The cut-open tree `G-hat`: the base graph with `L` degree-2 nodes each
/// duplicated into a leaf pair `(s, s-bar)`.
#[derive(Debug, Clone)]
pub struct HatGraph {
    /// The (possibly subdivided) graph that was cut. Contains the cut nodes.
    pub base: Mrf,
    /// Degree-2 nodes of `base` that were duplicated, in pair order.
    pub cut_nodes: Vec<NodeId>,
    /// The acyclic cut-open graph.
    pub tree: CutTree,
}

impl HatGraph {
    pub fn l(&self) -> usize {
        self.cut_nodes.len()
    }

    /// Tree node id of the duplicate of `cut_nodes[k]`.
    pub fn bar(&self, k: usize) -> NodeId {
        self.base.node_count() + k
    }

    /// Pairs `(s, s-bar)` as tree node ids.
    pub fn leaf_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.cut_nodes
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, self.bar(k)))
            .collect()
    }

    /// For pair `k`, the base-graph neighbors `(u, v)` of the cut node with
    /// `u < v`; the leaf `s` keeps the edge to `v` and `s-bar` the edge to `u`.
    pub fn pair_neighbors(&self, k: usize) -> (NodeId, NodeId) {
        let s = self.cut_nodes[k];
        let inc = self.base.incidences(s);
        (inc[0].neighbor, inc[1].neighbor)
    }
}

/// Acyclic graph produced by cutting; not necessarily connected when a cut
/// node was a bridge. Edges keep an oriented table and remember which base
/// edge they came from.
#[derive(Debug, Clone)]
pub struct CutTree {
    pub node_count: usize,
    pub edges: Vec<CutEdge>,
    adjacency: Vec<Vec<Incidence>>,
}

#[derive(Debug, Clone)]
pub struct CutEdge {
    pub u: NodeId,
    pub v: NodeId,
    /// Oriented `[x_u][x_v]`.
    pub psi: Psi,
    pub base_edge: usize,
}

impl CutTree {
    pub fn incidences(&self, v: NodeId) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn value_from(&self, edge: usize, from: NodeId, x_from: usize, x_other: usize) -> f64 {
        let e = &self.edges[edge];
        if from == e.u {
            e.psi[x_from][x_other]
        } else {
            e.psi[x_other][x_from]
        }
    }

    pub fn is_acyclic_forest(&self) -> bool {
        // A forest has |E| = |V| - components.
        self.components() + self.edges.len() == self.node_count
    }

    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut count = 0;
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for inc in &self.adjacency[v] {
                    if !seen[inc.neighbor] {
                        seen[inc.neighbor] = true;
                        stack.push(inc.neighbor);
                    }
                }
            }
        }
        count
    }

    /// Unique path from `a` to `b` (node ids), or `None` when disconnected.
    pub fn path(&self, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
        let mut prev = vec![usize::MAX; self.node_count];
        let mut seen = vec![false; self.node_count];
        let mut queue = std::collections::VecDeque::new();
        seen[a] = true;
        queue.push_back(a);
        while let Some(v) = queue.pop_front() {
            if v == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for inc in &self.adjacency[v] {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    prev[inc.neighbor] = v;
                    queue.push_back(inc.neighbor);
                }
            }
        }
        None
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|inc| inc.neighbor == b)
            .map(|inc| inc.edge)
    }
}

/// Spanning-tree edge mask by BFS from node 0 (deterministic: neighbors are
/// visited in ascending order).
fn bfs_tree_mask(m: &Mrf) -> Vec<bool> {
    let mut in_tree = vec![false; m.edge_count()];
    let mut seen = vec![false; m.node_count()];
    let mut queue = std::collections::VecDeque::new();
    seen[0] = true;
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        for inc in m.incidences(v) {
            if !seen[inc.neighbor] {
                seen[inc.neighbor] = true;
                in_tree[inc.edge] = true;
                queue.push_back(inc.neighbor);
            }
        }
    }
    in_tree
}

/// Cuts the graph open into a tree: picks a BFS spanning tree, subdivides
/// each of the `L` non-tree edges (creating a degree-2 node), and duplicates
/// each new node into a leaf pair.
pub fn cut_to_tree(m: &Mrf) -> Result<HatGraph> {
    let in_tree = bfs_tree_mask(m);
    let extra: Vec<(NodeId, NodeId)> = m
        .edges()
        .iter()
        .enumerate()
        .filter(|(idx, _)| !in_tree[*idx])
        .map(|(_, e)| (e.i, e.j))
        .collect();
    let mut base = m.clone();
    let mut cut_nodes = Vec::with_capacity(extra.len());
    for (i, j) in extra {
        let (next, k) = subdivide_edge_toward(&base, (i, j), j)?;
        base = next;
        cut_nodes.push(k);
    }
    let hat = cut_nodes_into_tree(base, cut_nodes)?;
    debug_assert!(hat.tree.components() == 1);
    Ok(hat)
}

/// Cuts the graph open so that `target` (which must have degree 2) is cut
/// pair 0; remaining independent cycles are subdivided and cut as in
/// [`cut_to_tree`]. The result may be a two-component forest when `target`
/// lies on no cycle.
pub fn cut_open_at(m: &Mrf, target: NodeId) -> Result<HatGraph> {
    if target >= m.node_count() {
        return Err(Error::NodeOutOfRange(target));
    }
    if m.degree(target) != 2 {
        return Err(Error::InvalidInput(format!(
            "cut target {target} must have degree 2, has {}",
            m.degree(target)
        )));
    }
    // Spanning forest of the graph with `target` already cut: BFS that never
    // crosses target keeps both target edges as forest edges (they end in
    // leaves), so only genuinely independent remaining cycles are left over.
    let mut in_forest = vec![false; m.edge_count()];
    for inc in m.incidences(target) {
        in_forest[inc.edge] = true;
    }
    let mut seen = vec![false; m.node_count()];
    seen[target] = true;
    for start in 0..m.node_count() {
        if seen[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for inc in m.incidences(v) {
                if !seen[inc.neighbor] && inc.neighbor != target {
                    seen[inc.neighbor] = true;
                    in_forest[inc.edge] = true;
                    queue.push_back(inc.neighbor);
                }
            }
        }
    }
    let extra: Vec<(NodeId, NodeId)> = m
        .edges()
        .iter()
        .enumerate()
        .filter(|(idx, _)| !in_forest[*idx])
        .map(|(_, e)| (e.i, e.j))
        .collect();
    let mut base = m.clone();
    let mut cut_nodes = vec![target];
    for (i, j) in extra {
        let (next, k) = subdivide_edge_toward(&base, (i, j), j)?;
        base = next;
        cut_nodes.push(k);
    }
    cut_nodes_into_tree(base, cut_nodes)
}

/// Cuts the given degree-2 nodes of `base` into leaf pairs. Callers must
/// pick nodes lying on independent cycles for the result to be a tree;
/// bridges yield extra forest components.
pub fn cut_at_nodes(base: &Mrf, cut_nodes: Vec<NodeId>) -> Result<HatGraph> {
    cut_nodes_into_tree(base.clone(), cut_nodes)
}

fn cut_nodes_into_tree(base: Mrf, cut_nodes: Vec<NodeId>) -> Result<HatGraph> {
    let mut bar_of = std::collections::HashMap::new();
    for (k, &s) in cut_nodes.iter().enumerate() {
        if base.degree(s) != 2 {
            return Err(Error::InvalidInput(format!(
                "cut node {s} must have degree 2"
            )));
        }
        bar_of.insert(s, base.node_count() + k);
    }
    let node_count = base.node_count() + cut_nodes.len();
    let mut edges = Vec::with_capacity(base.edge_count());
    for (idx, e) in base.edges().iter().enumerate() {
        let mut u = e.i;
        let mut v = e.j;
        // The cut node keeps its edge to the larger neighbor; the smaller
        // neighbor reattaches to the bar duplicate.
        for s in [e.i, e.j] {
            if let Some(&bar) = bar_of.get(&s) {
                let other = if s == e.i { e.j } else { e.i };
                let smaller_neighbor = base.incidences(s)[0].neighbor;
                if other == smaller_neighbor {
                    if s == e.i {
                        u = bar;
                    } else {
                        v = bar;
                    }
                }
            }
        }
        edges.push(CutEdge {
            u,
            v,
            psi: e.psi,
            base_edge: idx,
        });
    }
    let mut adjacency = vec![Vec::new(); node_count];
    for (idx, e) in edges.iter().enumerate() {
        adjacency[e.u].push(Incidence {
            neighbor: e.v,
            edge: idx,
        });
        adjacency[e.v].push(Incidence {
            neighbor: e.u,
            edge: idx,
        });
    }
    for list in &mut adjacency {
        list.sort_by_key(|inc| inc.neighbor);
    }
    let tree = CutTree {
        node_count,
        edges,
        adjacency,
    };
    if !tree.is_acyclic_forest() {
        return Err(Error::InvalidGraph(
            "cutting did not produce an acyclic graph".into(),
        ));
    }
    Ok(HatGraph {
        base,
        cut_nodes,
        tree,
    })
}
