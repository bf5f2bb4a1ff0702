//! Weighted multigraphs with stable edge identities, and wired quotients.
//!
//! Vertices are dense integers `0..n`; any external naming is kept in label
//! maps outside the [`Network`] itself. Edges are stored as an indexed list so
//! parallel edges and self-loops stay distinct, which keeps first-entry edges
//! on multigraphs well defined.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("edge {0} has non-positive or non-finite conductance {1}")]
    BadConductance(usize, f64),
    #[error("network is disconnected")]
    Disconnected,
    #[error("vertex {0} is out of range (vertex count {1})")]
    UnknownVertex(VertexId, usize),
    #[error("edge {0} is out of range (edge count {1})")]
    UnknownEdge(EdgeId, usize),
    #[error("retained set must be a nonempty proper subset of the vertices")]
    NoBoundary,
    #[error("retained set does not induce a connected subgraph")]
    RetainedDisconnected,
    #[error("invalid serialized network: {0}")]
    BadFormat(String),
}

/// An edge together with a direction flag. The underlying edge `(a, b)` is
/// traversed from tail to head; `forward` means tail `a`, head `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub id: EdgeId,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn forward(id: EdgeId) -> Self {
        OrientedEdge { id, forward: true }
    }

    pub fn backward(id: EdgeId) -> Self {
        OrientedEdge { id, forward: false }
    }

    /// Reversal is an involution: `e.reversed().reversed() == e`.
    pub fn reversed(self) -> Self {
        OrientedEdge {
            id: self.id,
            forward: !self.forward,
        }
    }

    pub fn tail(&self, network: &Network) -> VertexId {
        let (a, b) = network.endpoints(self.id);
        if self.forward {
            a
        } else {
            b
        }
    }

    pub fn head(&self, network: &Network) -> VertexId {
        let (a, b) = network.endpoints(self.id);
        if self.forward {
            b
        } else {
            a
        }
    }

    /// The oriented edge with the given head, seen from an unoriented edge.
    pub fn into_vertex(network: &Network, id: EdgeId, head: VertexId) -> Self {
        let (a, b) = network.endpoints(id);
        debug_assert!(head == a || head == b);
        OrientedEdge {
            id,
            forward: head == b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    a: VertexId,
    b: VertexId,
    conductance: f64,
}

/// One adjacency entry: an incident edge and the endpoint it leads to.
/// Self-loops contribute two entries (one per orientation).
#[derive(Debug, Clone, Copy)]
pub struct HalfEdge {
    pub edge: EdgeId,
    pub to: VertexId,
}

/// A finite connected weighted multigraph with strictly positive conductances.
///
/// Immutable after construction; share across threads by reference.
#[derive(Debug, Clone)]
pub struct Network {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<HalfEdge>>,
    /// Per-vertex cumulative conductance over `adjacency`, for O(log deg)
    /// walk steps.
    cumulative: Vec<Vec<f64>>,
    vertex_conductance: Vec<f64>,
}

impl Network {
    /// Builds a network from `(u, v, conductance)` triples. Vertex ids are
    /// compacted to `0..n` preserving order; parallel edges and self-loops
    /// are kept as distinct edge ids (in input order).
    pub fn from_edge_list(list: &[(usize, usize, f64)]) -> Result<Self, NetworkError> {
        if list.is_empty() {
            return Err(NetworkError::EmptyEdgeList);
        }
        for (i, &(_, _, c)) in list.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(NetworkError::BadConductance(i, c));
            }
        }
        let ids: BTreeSet<usize> = list.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        let compact: Vec<usize> = ids.into_iter().collect();
        let dense_id = |raw: usize| compact.binary_search(&raw).unwrap();
        let edges: Vec<Edge> = list
            .iter()
            .map(|&(u, v, c)| Edge {
                a: dense_id(u),
                b: dense_id(v),
                conductance: c,
            })
            .collect();
        Self::from_dense_edges(compact.len(), edges)
    }

    fn from_dense_edges(vertex_count: usize, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        let mut adjacency: Vec<Vec<HalfEdge>> = vec![Vec::new(); vertex_count];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.a].push(HalfEdge { edge: id, to: e.b });
            adjacency[e.b].push(HalfEdge { edge: id, to: e.a });
        }
        let mut cumulative = Vec::with_capacity(vertex_count);
        let mut vertex_conductance = Vec::with_capacity(vertex_count);
        for half_edges in &adjacency {
            let mut total = 0.0;
            let cum: Vec<f64> = half_edges
                .iter()
                .map(|h| {
                    total += edges[h.edge].conductance;
                    total
                })
                .collect();
            cumulative.push(cum);
            vertex_conductance.push(total);
        }
        let network = Network {
            edges,
            adjacency,
            cumulative,
            vertex_conductance,
        };
        if !network.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        Ok(network)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for h in &self.adjacency[v] {
                if !seen[h.to] {
                    seen[h.to] = true;
                    count += 1;
                    stack.push(h.to);
                }
            }
        }
        count == n
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let edge = &self.edges[e];
        (edge.a, edge.b)
    }

    pub fn conductance(&self, e: EdgeId) -> f64 {
        self.edges[e].conductance
    }

    pub fn is_self_loop(&self, e: EdgeId) -> bool {
        self.edges[e].a == self.edges[e].b
    }

    /// Sum of conductances of incident edges, self-loops counted twice.
    pub fn vertex_conductance(&self, v: VertexId) -> Result<f64, NetworkError> {
        self.vertex_conductance
            .get(v)
            .copied()
            .ok_or(NetworkError::UnknownVertex(v, self.vertex_count()))
    }

    pub(crate) fn vertex_conductance_unchecked(&self, v: VertexId) -> f64 {
        self.vertex_conductance[v]
    }

    pub fn incident(&self, v: VertexId) -> &[HalfEdge] {
        &self.adjacency[v]
    }

    pub(crate) fn cumulative(&self, v: VertexId) -> &[f64] {
        &self.cumulative[v]
    }

    pub fn edge_triples(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.edges.iter().map(|e| (e.a, e.b, e.conductance))
    }

    /// Contracts edge `e`, identifying its endpoints (keeping the smaller id).
    /// Parallel copies of `e` become self-loops; conductances are unchanged.
    /// Edge ids are reassigned densely; the returned map sends new ids to old.
    pub fn contract_edge(&self, e: EdgeId) -> Result<(Network, Vec<EdgeId>), NetworkError> {
        if e >= self.edges.len() {
            return Err(NetworkError::UnknownEdge(e, self.edges.len()));
        }
        if self.is_self_loop(e) {
            return Err(NetworkError::BadFormat(
                "cannot contract a self-loop".into(),
            ));
        }
        let (a, b) = self.endpoints(e);
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        // Relabel: `drop` becomes `keep`; vertices above `drop` shift down.
        let relabel = |v: VertexId| {
            if v == drop {
                keep
            } else if v > drop {
                v - 1
            } else {
                v
            }
        };
        let mut edges = Vec::with_capacity(self.edges.len() - 1);
        let mut edge_map = Vec::with_capacity(self.edges.len() - 1);
        for (id, edge) in self.edges.iter().enumerate() {
            if id == e {
                continue;
            }
            edges.push(Edge {
                a: relabel(edge.a),
                b: relabel(edge.b),
                conductance: edge.conductance,
            });
            edge_map.push(id);
        }
        let network = Self::from_dense_edges(self.vertex_count() - 1, edges)?;
        Ok((network, edge_map))
    }

    /// One `u v c` triple per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.a, e.b, e.conductance);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NetworkError> {
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(NetworkError::BadFormat(format!(
                    "line {}: expected `u v c`, got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let parse = |s: &str| -> Result<f64, NetworkError> {
                s.parse()
                    .map_err(|_| NetworkError::BadFormat(format!("line {}: {:?}", lineno + 1, s)))
            };
            let u = parse(fields[0])? as usize;
            let v = parse(fields[1])? as usize;
            let c = parse(fields[2])?;
            triples.push((u, v, c));
        }
        Self::from_edge_list(&triples)
    }

    pub fn to_json(&self) -> String {
        let schema = NetworkJson {
            vertices: self.vertex_count(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeJson {
                    a: e.a,
                    b: e.b,
                    c: e.conductance,
                    id,
                })
                .collect(),
        };
        serde_json::to_string(&schema).expect("network serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self, NetworkError> {
        let schema: NetworkJson =
            serde_json::from_str(json).map_err(|e| NetworkError::BadFormat(e.to_string()))?;
        let mut edges = vec![None; schema.edges.len()];
        for e in &schema.edges {
            if e.id >= edges.len() || edges[e.id].is_some() {
                return Err(NetworkError::BadFormat(format!(
                    "edge ids must be dense and unique, got {}",
                    e.id
                )));
            }
            if e.a >= schema.vertices || e.b >= schema.vertices {
                return Err(NetworkError::UnknownVertex(
                    e.a.max(e.b),
                    schema.vertices,
                ));
            }
            if !(e.c.is_finite() && e.c > 0.0) {
                return Err(NetworkError::BadConductance(e.id, e.c));
            }
            edges[e.id] = Some(Edge {
                a: e.a,
                b: e.b,
                conductance: e.c,
            });
        }
        let edges: Vec<Edge> = edges.into_iter().map(|e| e.unwrap()).collect();
        if edges.is_empty() && schema.vertices != 1 {
            return Err(NetworkError::EmptyEdgeList);
        }
        Self::from_dense_edges(schema.vertices, edges)
    }

    /// Graphviz export for inspection; parallel edges and self-loops appear
    /// as separate lines.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {} {{\n", name);
        for v in 0..self.vertex_count() {
            let _ = writeln!(out, "  {};", v);
        }
        for (id, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {} -- {} [label=\"e{} c={}\"];",
                e.a, e.b, id, e.conductance
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    vertices: usize,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    a: usize,
    b: usize,
    c: f64,
    id: usize,
}

/// A network together with a designated boundary vertex obtained by wiring
/// the complement of a retained vertex set into a single vertex.
///
/// Edges with both endpoints outside the retained set are dropped (in
/// particular all self-loops at the boundary), edges with exactly one
/// endpoint outside are re-attached to the boundary, and conductances of
/// surviving edges are unchanged.
#[derive(Debug, Clone)]
pub struct WiredQuotient {
    base: Arc<Network>,
    retained: Vec<VertexId>,
    network: Network,
    boundary: VertexId,
    edge_to_base: Vec<EdgeId>,
    vertex_to_quotient: Vec<Option<VertexId>>,
}

impl WiredQuotient {
    pub fn new(base: Arc<Network>, retained: &BTreeSet<VertexId>) -> Result<Self, NetworkError> {
        let n = base.vertex_count();
        if retained.is_empty() || retained.len() >= n {
            return Err(NetworkError::NoBoundary);
        }
        if let Some(&v) = retained.iter().next_back() {
            if v >= n {
                return Err(NetworkError::UnknownVertex(v, n));
            }
        }
        let retained: Vec<VertexId> = retained.iter().copied().collect();
        let mut vertex_to_quotient: Vec<Option<VertexId>> = vec![None; n];
        for (q, &v) in retained.iter().enumerate() {
            vertex_to_quotient[v] = Some(q);
        }
        if !induced_connected(&base, &retained, &vertex_to_quotient) {
            return Err(NetworkError::RetainedDisconnected);
        }
        let boundary = retained.len();
        let mut edges = Vec::new();
        let mut edge_to_base = Vec::new();
        for (id, (a, b, c)) in base.edge_triples().enumerate() {
            let qa = vertex_to_quotient[a];
            let qb = vertex_to_quotient[b];
            let (qa, qb) = match (qa, qb) {
                (None, None) => continue,
                (Some(qa), Some(qb)) => (qa, qb),
                (Some(qa), None) => (qa, boundary),
                (None, Some(qb)) => (boundary, qb),
            };
            edges.push(Edge {
                a: qa,
                b: qb,
                conductance: c,
            });
            edge_to_base.push(id);
        }
        let network = Network::from_dense_edges(boundary + 1, edges)?;
        Ok(WiredQuotient {
            base,
            retained,
            network,
            boundary,
            edge_to_base,
            vertex_to_quotient,
        })
    }

    /// Views an explicitly constructed network as its own wired quotient with
    /// the given boundary vertex. Self-loops at the boundary are not allowed.
    pub fn from_network(network: Network, boundary: VertexId) -> Result<Self, NetworkError> {
        if boundary >= network.vertex_count() {
            return Err(NetworkError::UnknownVertex(
                boundary,
                network.vertex_count(),
            ));
        }
        let relabel = move |v: VertexId, n: usize| {
            // Boundary is stored last by convention.
            if v == boundary {
                n - 1
            } else if v > boundary {
                v - 1
            } else {
                v
            }
        };
        let n = network.vertex_count();
        let mut triples = Vec::with_capacity(network.edge_count());
        for (a, b, c) in network.edge_triples() {
            if a == boundary && b == boundary {
                return Err(NetworkError::BadFormat(
                    "self-loop at the boundary vertex".into(),
                ));
            }
            triples.push((relabel(a, n), relabel(b, n), c));
        }
        let base = Network::from_edge_list(&triples)?;
        if base.vertex_count() != n {
            return Err(NetworkError::Disconnected);
        }
        let retained: BTreeSet<VertexId> = (0..n - 1).collect();
        Self::new(Arc::new(base), &retained)
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn boundary(&self) -> VertexId {
        self.boundary
    }

    /// Retained base vertices in quotient-id order.
    pub fn retained(&self) -> &[VertexId] {
        &self.retained
    }

    pub fn quotient_vertex(&self, base_vertex: VertexId) -> Option<VertexId> {
        self.vertex_to_quotient.get(base_vertex).copied().flatten()
    }

    pub fn base_edge(&self, quotient_edge: EdgeId) -> EdgeId {
        self.edge_to_base[quotient_edge]
    }

    /// Boundary vertex conductance, i.e. the total conductance crossing the
    /// retained set.
    pub fn boundary_conductance(&self) -> f64 {
        self.network.vertex_conductance_unchecked(self.boundary)
    }
}

fn induced_connected(
    base: &Network,
    retained: &[VertexId],
    to_quotient: &[Option<VertexId>],
) -> bool {
    let mut seen = vec![false; retained.len()];
    let mut stack = vec![retained[0]];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for h in base.incident(v) {
            if let Some(q) = to_quotient[h.to] {
                if !seen[q] {
                    seen[q] = true;
                    count += 1;
                    stack.push(h.to);
                }
            }
        }
    }
    count == retained.len()
}
