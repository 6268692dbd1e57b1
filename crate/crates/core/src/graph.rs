//! Communication graphs between clients.
//!
//! Nodes are indexed `0..M` in the API. The text edge-list format is
//! 1-indexed. Every node is its own neighbor: the adjacency diagonal is
//! always set.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least {min} node(s), got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("edge probability c = {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("clique size Q = {q} must satisfy 1 <= Q < M = {m}")]
    BadClique { m: usize, q: usize },
    #[error("two-expander graph needs M divisible by 4, got M = {0}")]
    NotMultipleOfFour(usize),
    #[error("eta = {0} is outside (0, 4]")]
    BadEta(f64),
    #[error("node {node} out of range for a graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("node set is empty")]
    EmptyNodeSet,
    #[error("graphs in a temporal model must share node count {expected}, got {got}")]
    NodeCountMismatch { expected: usize, got: usize },
    #[error("union of the {period} graphs starting at position {start} is not connected")]
    WindowNotConnected { period: usize, start: usize },
    #[error("periodic model needs a period >= 1 and at least one graph")]
    EmptyPeriodic,
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected simple graph with self-loops on every node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    nodes: usize,
    adj: Vec<bool>,
}

impl Graph {
    /// Graph with `nodes` nodes and no off-diagonal edges.
    pub fn empty(nodes: usize) -> Result<Self, GraphError> {
        if nodes == 0 {
            return Err(GraphError::TooFewNodes { min: 1, got: 0 });
        }
        let mut adj = vec![false; nodes * nodes];
        for i in 0..nodes {
            adj[i * nodes + i] = true;
        }
        Ok(Graph { nodes, adj })
    }

    pub fn from_edges(
        nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = Graph::empty(nodes)?;
        for (i, j) in edges {
            g.check_node(i)?;
            g.check_node(j)?;
            g.set_edge(i, j);
        }
        Ok(g)
    }

    fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node >= self.nodes {
            Err(GraphError::NodeOutOfRange {
                node,
                nodes: self.nodes,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn set_edge(&mut self, i: usize, j: usize) {
        self.adj[i * self.nodes + j] = true;
        self.adj[j * self.nodes + i] = true;
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Adjacency entry X_ij; true on the diagonal.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.nodes + j]
    }

    /// Neighbors of `node`, excluding the node itself, in increasing order.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[node * self.nodes..(node + 1) * self.nodes];
        row.iter()
            .enumerate()
            .filter(move |&(j, &e)| e && j != node)
            .map(|(j, _)| j)
    }

    /// Closed neighborhood N_m: the neighbors plus `node` itself.
    pub fn closed_neighborhood(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[node * self.nodes..(node + 1) * self.nodes];
        row.iter().enumerate().filter(|&(_, &e)| e).map(|(j, _)| j)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors(node).count()
    }

    /// Number of off-diagonal edges.
    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Off-diagonal edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.nodes {
            for j in i + 1..self.nodes {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Edge-wise union of two graphs on the same node set.
    pub fn union(&self, other: &Graph) -> Result<Graph, GraphError> {
        if other.nodes != self.nodes {
            return Err(GraphError::NodeCountMismatch {
                expected: self.nodes,
                got: other.nodes,
            });
        }
        let adj = self
            .adj
            .iter()
            .zip(&other.adj)
            .map(|(a, b)| *a || *b)
            .collect();
        Ok(Graph {
            nodes: self.nodes,
            adj,
        })
    }

    /// Symmetric adjacency with a fully set diagonal.
    pub fn is_well_formed(&self) -> bool {
        (0..self.nodes).all(|i| {
            self.has_edge(i, i) && (0..self.nodes).all(|j| self.has_edge(i, j) == self.has_edge(j, i))
        })
    }

    /// BFS hop distances from a set of sources; `None` for unreachable nodes.
    pub fn bfs_from(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest shortest-path distance; `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.nodes {
            for d in self.bfs_from(&[s]) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Edge-list text: first line `M`, then `i j` per edge, 1-indexed, `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.nodes);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }

    /// Parses the edge-list format. Blank lines and `#` comments are skipped.
    pub fn from_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing node count".into(),
        })?;
        let nodes: usize = header.parse().map_err(|_| GraphError::Parse {
            line: line_no,
            msg: format!("bad node count {header:?}"),
        })?;
        let mut g = Graph::empty(nodes)?;
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let parse = |s: &str| -> Result<usize, GraphError> {
                let v: usize = s.parse().map_err(|_| GraphError::Parse {
                    line,
                    msg: format!("bad node {s:?}"),
                })?;
                if v == 0 || v > nodes {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("node {v} outside 1..={nodes}"),
                    });
                }
                Ok(v - 1)
            };
            if parts.len() != 2 {
                return Err(GraphError::Parse {
                    line,
                    msg: "expected two node ids".into(),
                });
            }
            let (i, j) = (parse(parts[0])?, parse(parts[1])?);
            g.set_edge(i, j);
        }
        Ok(g)
    }
}

pub fn make_complete_graph(nodes: usize) -> Result<Graph, GraphError> {
    let mut g = Graph::empty(nodes)?;
    g.adj.iter_mut().for_each(|e| *e = true);
    Ok(g)
}

pub fn make_path_graph(nodes: usize) -> Result<Graph, GraphError> {
    Graph::from_edges(nodes, (1..nodes).map(|i| (i - 1, i)))
}

/// Nodes `0..q` form one clique, nodes `q..m` another; no edge crosses.
pub fn make_disconnected_clique_graph(m: usize, q: usize) -> Result<Graph, GraphError> {
    if q == 0 || q >= m {
        return Err(GraphError::BadClique { m, q });
    }
    let mut g = Graph::empty(m)?;
    for i in 0..m {
        for j in i + 1..m {
            if (i < q) == (j < q) {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Dumbbell graph with node sets `i0` and `i1` at its two ends.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoExpander {
    pub graph: Graph,
    pub i0: Vec<usize>,
    pub i1: Vec<usize>,
    pub eta: f64,
}

impl TwoExpander {
    /// The distance floor `ceil(eta * M / 8)` the construction must meet.
    pub fn required_distance(&self) -> usize {
        (self.eta * self.graph.node_count() as f64 / 8.0).ceil() as usize
    }
}

/// Two cliques of size M/4 (the first and last quarters of the nodes) joined
/// through a path over the middle M/2 nodes.
///
/// The hop distance between the end sets is M/2 + 1, which exceeds
/// `ceil(eta * M / 8)` for every eta in (0, 4].
pub fn make_two_expander_graph(m: usize, eta: f64) -> Result<TwoExpander, GraphError> {
    if m == 0 || !m.is_multiple_of(4) {
        return Err(GraphError::NotMultipleOfFour(m));
    }
    if !(eta > 0.0 && eta <= 4.0) {
        return Err(GraphError::BadEta(eta));
    }
    let quarter = m / 4;
    let i0: Vec<usize> = (0..quarter).collect();
    let i1: Vec<usize> = (m - quarter..m).collect();
    let mut g = Graph::empty(m)?;
    for set in [&i0, &i1] {
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                g.set_edge(i, j);
            }
        }
    }
    // chain quarter-1 -> quarter -> ... -> m-quarter
    for i in quarter - 1..m - quarter {
        g.set_edge(i, i + 1);
    }
    Ok(TwoExpander {
        graph: g,
        i0,
        i1,
        eta,
    })
}

fn check_probability(c: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(GraphError::BadProbability(c))
    }
}

/// Erdős–Rényi graph: each pair present independently with probability `c`.
pub fn sample_er_graph<R: Rng + ?Sized>(
    m: usize,
    c: f64,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    check_probability(c)?;
    let mut g = Graph::empty(m)?;
    for i in 0..m {
        for j in i + 1..m {
            if rng.random::<f64>() < c {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Uniform spanning tree of K_m (Aldous–Broder random walk) plus each
/// remaining pair independently with probability `c`.
pub fn sample_random_connected_graph<R: Rng + ?Sized>(
    m: usize,
    c: f64,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    check_probability(c)?;
    if m < 2 {
        return Err(GraphError::TooFewNodes { min: 2, got: m });
    }
    let mut g = Graph::empty(m)?;
    let mut tree = vec![false; m * m];
    let mut visited = vec![false; m];
    let mut current = rng.random_range(0..m);
    visited[current] = true;
    let mut remaining = m - 1;
    while remaining > 0 {
        // uniform step to one of the other m-1 nodes
        let mut next = rng.random_range(0..m - 1);
        if next >= current {
            next += 1;
        }
        if !visited[next] {
            visited[next] = true;
            remaining -= 1;
            g.set_edge(current, next);
            tree[current * m + next] = true;
            tree[next * m + current] = true;
        }
        current = next;
    }
    for i in 0..m {
        for j in i + 1..m {
            if !tree[i * m + j] && rng.random::<f64>() < c {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

pub fn is_connected(g: &Graph) -> bool {
    g.bfs_from(&[0]).iter().all(Option::is_some)
}

/// Minimum hop count between two node sets; `Ok(None)` when unreachable.
pub fn set_distance(g: &Graph, a: &[usize], b: &[usize]) -> Result<Option<usize>, GraphError> {
    if a.is_empty() || b.is_empty() {
        return Err(GraphError::EmptyNodeSet);
    }
    for &n in a.iter().chain(b) {
        g.check_node(n)?;
    }
    let dist = g.bfs_from(a);
    Ok(b.iter().filter_map(|&n| dist[n]).min())
}

/// Symmetric doubly stochastic matrix supported on a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    nodes: usize,
    entries: Vec<f64>,
}

impl WeightMatrix {
    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.nodes + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn max_row_deviation(&self) -> f64 {
        (0..self.nodes)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_column_deviation(&self) -> f64 {
        (0..self.nodes)
            .map(|j| ((0..self.nodes).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Row `i` of `W · X` where `X` stacks one payload vector per node.
    pub fn mix_row(&self, i: usize, payloads: &[Vec<f64>], out: &mut Vec<f64>) {
        out.clear();
        out.resize(payloads[i].len(), 0.0);
        for (j, &w) in self.row(i).iter().enumerate() {
            if w != 0.0 {
                for (o, p) in out.iter_mut().zip(&payloads[j]) {
                    *o += w * p;
                }
            }
        }
    }

    /// One consensus step `x <- W x` for a scalar per node.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nodes)
            .map(|i| self.row(i).iter().zip(x).map(|(w, v)| w * v).sum())
            .collect()
    }

    /// Second-largest eigenvalue modulus, the geometric rate of `x <- W x`
    /// toward the average.
    pub fn second_largest_eigenvalue_modulus(&self) -> f64 {
        if self.nodes == 1 {
            return 0.0;
        }
        let m = DMatrix::from_row_slice(self.nodes, self.nodes, &self.entries);
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        // the largest eigenvalue of a doubly stochastic W is 1
        eig[1..].iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Metropolis–Hastings weights: `W_ij = 1 / (1 + max(deg_i, deg_j))` on edges,
/// remainder on the diagonal.
pub fn metropolis_weights(g: &Graph) -> WeightMatrix {
    let n = g.node_count();
    let deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for j in g.neighbors(i) {
            let w = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
            entries[i * n + j] = w;
            off += w;
        }
        entries[i * n + i] = 1.0 - off;
    }
    WeightMatrix { nodes: n, entries }
}

/// Rule producing the graph G_t at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum TemporalGraphModel {
    Static(Graph),
    ErdosRenyi { nodes: usize, c: f64 },
    RandomConnected { nodes: usize, c: f64 },
    /// Cycles through `graphs`; every window of `period` consecutive graphs
    /// has a connected union.
    PeriodicUnion { period: usize, graphs: Vec<Graph> },
}

impl TemporalGraphModel {
    pub fn erdos_renyi(nodes: usize, c: f64) -> Result<Self, GraphError> {
        check_probability(c)?;
        if nodes == 0 {
            return Err(GraphError::TooFewNodes { min: 1, got: 0 });
        }
        Ok(TemporalGraphModel::ErdosRenyi { nodes, c })
    }

    pub fn random_connected(nodes: usize, c: f64) -> Result<Self, GraphError> {
        check_probability(c)?;
        if nodes < 2 {
            return Err(GraphError::TooFewNodes { min: 2, got: nodes });
        }
        Ok(TemporalGraphModel::RandomConnected { nodes, c })
    }

    pub fn periodic_union(period: usize, graphs: Vec<Graph>) -> Result<Self, GraphError> {
        if period == 0 || graphs.is_empty() {
            return Err(GraphError::EmptyPeriodic);
        }
        let n = graphs[0].node_count();
        if let Some(bad) = graphs.iter().find(|g| g.node_count() != n) {
            return Err(GraphError::NodeCountMismatch {
                expected: n,
                got: bad.node_count(),
            });
        }
        for start in 0..graphs.len() {
            let mut u = graphs[start].clone();
            for k in 1..period {
                u = u.union(&graphs[(start + k) % graphs.len()])?;
            }
            if !is_connected(&u) {
                return Err(GraphError::WindowNotConnected { period, start });
            }
        }
        Ok(TemporalGraphModel::PeriodicUnion { period, graphs })
    }

    pub fn node_count(&self) -> usize {
        match self {
            TemporalGraphModel::Static(g) => g.node_count(),
            TemporalGraphModel::ErdosRenyi { nodes, .. }
            | TemporalGraphModel::RandomConnected { nodes, .. } => *nodes,
            TemporalGraphModel::PeriodicUnion { graphs, .. } => graphs[0].node_count(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        match self {
            TemporalGraphModel::Static(_) => true,
            TemporalGraphModel::PeriodicUnion { graphs, .. } => graphs.len() == 1,
            _ => false,
        }
    }

    /// G_t for the 1-based step `t`. Random models draw from `rng`; the
    /// deterministic ones never touch it.
    pub fn graph_at<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> Cow<'_, Graph> {
        match self {
            TemporalGraphModel::Static(g) => Cow::Borrowed(g),
            TemporalGraphModel::ErdosRenyi { nodes, c } => {
                Cow::Owned(sample_er_graph(*nodes, *c, rng).expect("validated at construction"))
            }
            TemporalGraphModel::RandomConnected { nodes, c } => Cow::Owned(
                sample_random_connected_graph(*nodes, *c, rng).expect("validated at construction"),
            ),
            TemporalGraphModel::PeriodicUnion { graphs, .. } => {
                Cow::Borrowed(&graphs[((t.max(1) - 1) % graphs.len() as u64) as usize])
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TemporalGraphModel::Static(g) => format!("static(M={}, edges={})", g.node_count(), g.edge_count()),
            TemporalGraphModel::ErdosRenyi { nodes, c } => format!("erdos_renyi(M={nodes}, c={c})"),
            TemporalGraphModel::RandomConnected { nodes, c } => {
                format!("random_connected(M={nodes}, c={c})")
            }
            TemporalGraphModel::PeriodicUnion { period, graphs } => {
                format!("periodic_union(B={period}, graphs={})", graphs.len())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edges1(g: &Graph) -> Vec<(usize, usize)> {
        g.edges().into_iter().map(|(i, j)| (i + 1, j + 1)).collect()
    }

    #[test]
    fn complete_graph_edges() {
        assert_eq!(edges1(&make_complete_graph(3).unwrap()), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(make_complete_graph(1).unwrap().edge_count(), 0);
        assert_eq!(make_complete_graph(8).unwrap().edge_count(), 28);
        assert!(make_complete_graph(0).is_err());
    }

    #[test]
    fn path_graph_edges() {
        assert_eq!(edges1(&make_path_graph(3).unwrap()), vec![(1, 2), (2, 3)]);
        assert_eq!(make_path_graph(2).unwrap().edge_count(), 1);
        assert_eq!(make_path_graph(8).unwrap().diameter(), Some(7));
    }

    #[test]
    fn disconnected_clique() {
        let g = make_disconnected_clique_graph(4, 1).unwrap();
        assert_eq!(edges1(&g), vec![(2, 3), (2, 4), (3, 4)]);
        assert!(!is_connected(&g));
        let g = make_disconnected_clique_graph(6, 3).unwrap();
        assert_eq!(edges1(&g), vec![(1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6)]);
        assert_eq!(
            make_disconnected_clique_graph(3, 3),
            Err(GraphError::BadClique { m: 3, q: 3 })
        );
        assert!(make_disconnected_clique_graph(3, 0).is_err());
    }

    #[test]
    fn two_expander_examples() {
        let te = make_two_expander_graph(8, 4.0).unwrap();
        assert_eq!(te.i0, vec![0, 1]);
        assert_eq!(te.i1, vec![6, 7]);
        // middle path 3-4-5-6 (1-indexed), hooked to nodes 2 and 7
        for (i, j) in [(2, 3), (3, 4), (4, 5), (5, 6), (6, 7)] {
            assert!(te.graph.has_edge(i - 1, j - 1));
        }
        assert_eq!(set_distance(&te.graph, &te.i0, &te.i1).unwrap(), Some(5));
        assert_eq!(te.required_distance(), 4);

        let te = make_two_expander_graph(4, 4.0).unwrap();
        assert_eq!((te.i0.clone(), te.i1.clone()), (vec![0], vec![3]));
        assert_eq!(edges1(&te.graph), vec![(1, 2), (2, 3), (3, 4)]);
        assert_eq!(set_distance(&te.graph, &te.i0, &te.i1).unwrap(), Some(3));
        assert_eq!(te.required_distance(), 2);

        assert_eq!(make_two_expander_graph(6, 1.0), Err(GraphError::NotMultipleOfFour(6)));
        assert!(make_two_expander_graph(8, 0.0).is_err());
        assert!(make_two_expander_graph(8, 4.5).is_err());
    }

    #[test]
    fn er_degenerate_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_er_graph(6, 1.0, &mut rng).unwrap(), make_complete_graph(6).unwrap());
        assert_eq!(sample_er_graph(6, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_er_graph(6, 1.5, &mut rng), Err(GraphError::BadProbability(1.5)));
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sample_er_graph(100, 0.5, &mut rng).unwrap();
        let sigma = (4950.0_f64 * 0.25).sqrt();
        assert!((g.edge_count() as f64 - 2475.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn random_connected_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for c in [0.0, 0.3, 1.0] {
            assert_eq!(edges1(&sample_random_connected_graph(2, c, &mut rng).unwrap()), vec![(1, 2)]);
        }
        assert_eq!(
            sample_random_connected_graph(7, 1.0, &mut rng).unwrap(),
            make_complete_graph(7).unwrap()
        );
        for _ in 0..100 {
            let g = sample_random_connected_graph(50, 0.0, &mut rng).unwrap();
            assert!(is_connected(&g));
            assert_eq!(g.edge_count(), 49);
        }
        assert!(sample_random_connected_graph(1, 0.5, &mut rng).is_err());
        assert!(sample_random_connected_graph(5, -0.1, &mut rng).is_err());
    }

    #[test]
    fn connectivity_and_distance() {
        assert!(is_connected(&make_complete_graph(5).unwrap()));
        assert!(is_connected(&make_path_graph(8).unwrap()));
        let p = make_path_graph(8).unwrap();
        assert_eq!(set_distance(&p, &[0, 1], &[5, 6, 7]).unwrap(), Some(4));
        assert_eq!(set_distance(&p, &[2, 3], &[2, 3]).unwrap(), Some(0));
        let d = make_disconnected_clique_graph(4, 1).unwrap();
        assert_eq!(set_distance(&d, &[0], &[1]).unwrap(), None);
        assert_eq!(set_distance(&d, &[], &[1]), Err(GraphError::EmptyNodeSet));
    }

    #[test]
    fn metropolis_examples() {
        let w = metropolis_weights(&make_complete_graph(3).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert!((w.get(i, j) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let w = metropolis_weights(&Graph::empty(1).unwrap());
        assert_eq!(w.get(0, 0), 1.0);
        let w = metropolis_weights(&make_path_graph(3).unwrap());
        let third = 1.0 / 3.0;
        assert!((w.get(0, 1) - third).abs() < 1e-15);
        assert!((w.get(1, 2) - third).abs() < 1e-15);
        assert!((w.get(0, 0) - 2.0 * third).abs() < 1e-15);
        assert!((w.get(2, 2) - 2.0 * third).abs() < 1e-15);
        assert!((w.get(1, 1) - third).abs() < 1e-15);
        assert_eq!(w.get(0, 2), 0.0);
    }

    #[test]
    fn slem_of_complete_graph_is_zero() {
        let w = metropolis_weights(&make_complete_graph(5).unwrap());
        assert!(w.second_largest_eigenvalue_modulus() < 1e-12);
        let w = metropolis_weights(&make_path_graph(5).unwrap());
        let s = w.second_largest_eigenvalue_modulus();
        assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn edge_list_format() {
        let g = make_path_graph(3).unwrap();
        assert_eq!(g.to_edge_list(), "3\n1 2\n2 3\n");
        assert_eq!(Graph::from_edge_list("# c\n3\n2 3\n1 2\n").unwrap(), g);
        assert!(Graph::from_edge_list("3\n1 4\n").is_err());
        assert!(Graph::from_edge_list("").is_err());
    }

    #[test]
    fn periodic_union_validation() {
        let a = Graph::from_edges(3, [(0, 1)]).unwrap();
        let b = Graph::from_edges(3, [(1, 2)]).unwrap();
        let m = TemporalGraphModel::periodic_union(2, vec![a.clone(), b.clone()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(*m.graph_at(1, &mut rng), a);
        assert_eq!(*m.graph_at(2, &mut rng), b);
        assert_eq!(*m.graph_at(3, &mut rng), a);
        assert!(matches!(
            TemporalGraphModel::periodic_union(1, vec![a, b]),
            Err(GraphError::WindowNotConnected { .. })
        ));
    }
}
