//! Spin network graphs, Hamiltonian assembly and the line-oriented network
//! file format.
//!
//! ```text
//! # comment
//! nodes 3
//! ends 1 3
//! edge 1 2 0.7071067811865476
//! edge 2 3 0.7071067811865476
//! class S 1
//! class B 2
//! class T 3
//! order S B T
//! ```

mod format;
pub mod library;

pub use format::{parse_network, serialize_network};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::pauli::{build_coupling, OperatorExpr, Sign, MAX_SITES};

pub use crate::pauli::HamiltonianKind;

/// Source and target nodes (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ends {
    pub source: usize,
    pub target: usize,
}

impl Ends {
    pub fn new(source: usize, target: usize) -> Self {
        Ends { source, target }
    }

    /// The outermost pair `(1, n)`.
    pub fn outer(n: usize) -> Self {
        Ends { source: 1, target: n }
    }
}

/// A weighted coupling between nodes `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeClass {
    pub name: String,
    pub nodes: Vec<usize>,
}

/// Ordered equivalence classes `C_0 .. C_m` with `C_0 = {source}` and
/// `C_m = {target}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<NodeClass>,
}

impl Partition {
    pub fn new(classes: Vec<NodeClass>) -> Self {
        Partition { classes }
    }

    /// Builds a partition from bare node lists, naming classes `C0, C1, ...`.
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        Partition {
            classes: lists
                .iter()
                .enumerate()
                .map(|(k, nodes)| NodeClass {
                    name: format!("C{k}"),
                    nodes: nodes.clone(),
                })
                .collect(),
        }
    }

    /// Parses `"1;2,4;3,5;6"`.
    pub fn parse_compact(text: &str) -> Result<Self> {
        let mut lists = Vec::new();
        for (k, group) in text.split(';').enumerate() {
            let nodes: std::result::Result<Vec<usize>, _> = group
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect();
            let nodes = nodes.map_err(|_| {
                Error::Parameter(format!("bad node list `{group}` in partition class {k}"))
            })?;
            lists.push(nodes);
        }
        Ok(Partition::from_lists(&lists))
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Checks the partition against a node count and end pair.
    pub fn validate(&self, n: usize, ends: Ends) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::Network("partition needs at least two classes".into()));
        }
        let mut seen = BTreeSet::new();
        for class in &self.classes {
            if class.nodes.is_empty() {
                return Err(Error::Network(format!("class {} is empty", class.name)));
            }
            for &v in &class.nodes {
                if v == 0 || v > n {
                    return Err(Error::Network(format!(
                        "class {} names node {v} outside 1..={n}",
                        class.name
                    )));
                }
                if !seen.insert(v) {
                    return Err(Error::Network(format!("node {v} appears in two classes")));
                }
            }
        }
        if seen.len() != n {
            let missing: Vec<usize> = (1..=n).filter(|v| !seen.contains(v)).collect();
            return Err(Error::Network(format!("partition misses nodes {missing:?}")));
        }
        if self.classes[0].nodes != [ends.source] {
            return Err(Error::Network("first class must be exactly the source".into()));
        }
        if self.classes[self.classes.len() - 1].nodes != [ends.target] {
            return Err(Error::Network("last class must be exactly the target".into()));
        }
        Ok(())
    }
}

/// A weighted spin network with designated end spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    n: usize,
    ends: Ends,
    edges: Vec<Edge>,
    partition: Option<Partition>,
}

impl SpinNetwork {
    /// Validating constructor. Edges are canonicalized to `i < j` and sorted.
    pub fn new(
        n: usize,
        ends: Ends,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        partition: Option<Partition>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Network(format!("need at least two nodes, got {n}")));
        }
        let in_range = |v: usize| v >= 1 && v <= n;
        if !in_range(ends.source) || !in_range(ends.target) {
            return Err(Error::Network(format!(
                "ends ({}, {}) outside 1..={n}",
                ends.source, ends.target
            )));
        }
        if ends.source == ends.target {
            return Err(Error::Network("ends must be distinct".into()));
        }
        let mut list = Vec::new();
        let mut pairs = BTreeSet::new();
        for (a, b, alpha) in edges {
            if a == b {
                return Err(Error::Network(format!("self-loop on node {a}")));
            }
            if !in_range(a) || !in_range(b) {
                return Err(Error::Network(format!("edge ({a},{b}) outside 1..={n}")));
            }
            if !alpha.is_finite() || alpha == 0.0 {
                return Err(Error::Network(format!(
                    "edge ({a},{b}) has invalid coupling {alpha}"
                )));
            }
            let (i, j) = (a.min(b), a.max(b));
            if !pairs.insert((i, j)) {
                return Err(Error::Network(format!("duplicate edge ({i},{j})")));
            }
            list.push(Edge { i, j, alpha });
        }
        list.sort_by_key(|e| (e.i, e.j));
        if let Some(p) = &partition {
            p.validate(n, ends)?;
        }
        Ok(SpinNetwork {
            n,
            ends,
            edges: list,
            partition,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ends(&self) -> Ends {
        self.ends
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn with_partition(mut self, partition: Option<Partition>) -> Result<Self> {
        if let Some(p) = &partition {
            p.validate(self.n, self.ends)?;
        }
        self.partition = partition;
        Ok(self)
    }

    /// Coupling between two nodes, 0 when not connected.
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        let (i, j) = (a.min(b), a.max(b));
        self.edges
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map_or(0.0, |e| e.alpha)
    }

    /// Largest coupling magnitude; used as the reference rate of time axes.
    pub fn reference_coupling(&self) -> f64 {
        self.edges.iter().map(|e| e.alpha.abs()).fold(0.0, f64::max)
    }

    /// Neighbour lists (1-based, index 0 unused).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    /// Breadth-first hop distance from `start`; `None` when unreachable.
    pub fn distances_from(&self, start: usize) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut dist = vec![None; self.n + 1];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = Some(0);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(1).iter().skip(1).all(Option::is_some)
    }

    /// Renames nodes by `perm` (`perm[old] = new`, 1-based, index 0 unused).
    pub fn relabel(&self, perm: &[usize]) -> Result<SpinNetwork> {
        if perm.len() != self.n + 1 {
            return Err(Error::Parameter("permutation has wrong length".into()));
        }
        let edges = self.edges.iter().map(|e| (perm[e.i], perm[e.j], e.alpha));
        let partition = self.partition.as_ref().map(|p| {
            Partition::new(
                p.classes()
                    .iter()
                    .map(|c| NodeClass {
                        name: c.name.clone(),
                        nodes: c.nodes.iter().map(|&v| perm[v]).collect(),
                    })
                    .collect(),
            )
        });
        SpinNetwork::new(
            self.n,
            Ends::new(perm[self.ends.source], perm[self.ends.target]),
            edges,
            partition,
        )
    }
}

/// `H = Σ_edges α_ij · coupling(kind, i, j, +)`.
pub fn hamiltonian(net: &SpinNetwork, kind: HamiltonianKind) -> Result<OperatorExpr> {
    if net.n() > MAX_SITES {
        return Err(Error::Capacity {
            what: format!("symbolic Hamiltonian on {} sites", net.n()),
            limit: MAX_SITES,
            hint: "; use the fermion backend for modified-XY networks",
        });
    }
    let mut h = OperatorExpr::zero(net.n());
    for e in net.edges() {
        let term = build_coupling(kind, e.i, e.j, Sign::Plus, net.n())?;
        h = &h + &(&term * e.alpha);
    }
    Ok(h)
}

/// Nearest-neighbour chain couplings `α_1 .. α_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    couplings: Vec<f64>,
}

impl CouplingSpec {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::Parameter("chain needs at least one coupling".into()));
        }
        if let Some(a) = couplings.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Parameter(format!("chain coupling {a} must be positive")));
        }
        Ok(CouplingSpec { couplings })
    }

    /// Parses `"a1,a2,..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let values: std::result::Result<Vec<f64>, _> =
            text.split(',').map(|t| t.trim().parse::<f64>()).collect();
        CouplingSpec::new(values.map_err(|_| Error::Parameter(format!("bad chain `{text}`")))?)
    }

    /// Mirror-perfect couplings `scale · sqrt(i (m - i))` for an `m`-node chain.
    pub fn pst(m: usize, scale: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("PST chain needs m >= 2, got {m}")));
        }
        CouplingSpec::new(
            (1..m)
                .map(|i| scale * ((i * (m - i)) as f64).sqrt())
                .collect(),
        )
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn nodes(&self) -> usize {
        self.couplings.len() + 1
    }

    /// Whether the couplings follow `sqrt(i (m - i))` up to one global scale.
    pub fn is_pst(&self, tol: f64) -> bool {
        let m = self.nodes();
        let scale = self.couplings[0] / ((m - 1) as f64).sqrt();
        self.couplings
            .iter()
            .enumerate()
            .all(|(k, a)| (a - scale * (((k + 1) * (m - k - 1)) as f64).sqrt()).abs() <= tol * scale)
    }

    /// The chain as a network with ends `(1, m)`.
    pub fn to_network(&self) -> Result<SpinNetwork> {
        let m = self.nodes();
        SpinNetwork::new(
            m,
            Ends::new(1, m),
            self.couplings
                .iter()
                .enumerate()
                .map(|(k, &a)| (k + 1, k + 2, a)),
            None,
        )
    }
}

/// Nearest-neighbour chain with `α_i = scale · sqrt(i (m - i))`.
pub fn pst_chain(m: usize, scale: f64) -> Result<SpinNetwork> {
    CouplingSpec::pst(m, scale)?.to_network()
}
