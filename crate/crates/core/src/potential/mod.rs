//! Exact electrical-network oracles: harmonic solves, effective conductance,
//! capacity, weighted spanning-tree counts and Kirchhoff edge marginals.
//!
//! Everything here is a pure function of immutable inputs. Solves target a
//! relative residual of 1e-12 and fail loudly if 1e-10 cannot be met.

mod paths;
mod solve;
mod sp;

pub use paths::{random_path_capacity_bound, PathDistribution, RandomPathBound};
pub use sp::series_parallel_reduce;

use thiserror::Error;

use crate::network::{EdgeId, Network, VertexId, WiredQuotient};

#[derive(Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("source and sink sets must be nonempty and disjoint")]
    InvalidBoundary,
    #[error("vertex {0} out of range")]
    UnknownVertex(VertexId),
    #[error("edge {0} out of range")]
    UnknownEdge(EdgeId),
    #[error("linear solve failed: {0}")]
    SolverFailed(String),
    #[error("network too large for a dense determinant ({0} vertices)")]
    DeskScaleExceeded(usize),
    #[error("weighted tree count overflowed f64")]
    Overflow,
    #[error("network is not series-parallel reducible between the terminals")]
    NotReducible,
    #[error("terminals are not connected")]
    TerminalsDisconnected,
    #[error("terminals must be distinct")]
    InvalidTerminals,
    #[error("invalid sampled path: {0}")]
    InvalidPath(String),
    #[error("need at least one sample")]
    NoSamples,
}

/// Unit-voltage Dirichlet problem: sources held at 1, sinks at 0.
#[derive(Debug, Clone)]
pub struct DirichletProblem<'a> {
    network: &'a Network,
    sources: Vec<VertexId>,
    sinks: Vec<VertexId>,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(
        network: &'a Network,
        sources: &[VertexId],
        sinks: &[VertexId],
    ) -> Result<Self, PotentialError> {
        if sources.is_empty() || sinks.is_empty() {
            return Err(PotentialError::InvalidBoundary);
        }
        let n = network.vertex_count();
        for &v in sources.iter().chain(sinks) {
            if v >= n {
                return Err(PotentialError::UnknownVertex(v));
            }
        }
        let mut sources = sources.to_vec();
        let mut sinks = sinks.to_vec();
        sources.sort_unstable();
        sources.dedup();
        sinks.sort_unstable();
        sinks.dedup();
        if sources.iter().any(|v| sinks.binary_search(v).is_ok()) {
            return Err(PotentialError::InvalidBoundary);
        }
        Ok(DirichletProblem {
            network,
            sources,
            sinks,
        })
    }

    pub fn network(&self) -> &Network {
        self.network
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn sinks(&self) -> &[VertexId] {
        &self.sinks
    }
}

/// Voltages for every vertex: exactly 1 on sources, 0 on sinks, harmonic
/// elsewhere.
pub fn harmonic_solve(problem: &DirichletProblem<'_>) -> Result<Vec<f64>, PotentialError> {
    solve::solve_dirichlet(problem.network, &problem.sources, &problem.sinks)
}

/// Total current leaving the source set at unit voltage.
pub fn effective_conductance(
    network: &Network,
    sources: &[VertexId],
    sinks: &[VertexId],
) -> Result<f64, PotentialError> {
    let problem = DirichletProblem::new(network, sources, sinks)?;
    let voltage = harmonic_solve(&problem)?;
    let mut in_source = vec![false; network.vertex_count()];
    for &v in problem.sources() {
        in_source[v] = true;
    }
    let mut current = 0.0;
    for &a in problem.sources() {
        for h in network.incident(a) {
            if h.to == a || in_source[h.to] {
                continue;
            }
            current += network.conductance(h.edge) * (1.0 - voltage[h.to]);
        }
    }
    Ok(current)
}

pub fn effective_resistance(
    network: &Network,
    u: VertexId,
    v: VertexId,
) -> Result<f64, PotentialError> {
    if u == v {
        return Err(PotentialError::InvalidTerminals);
    }
    Ok(1.0 / effective_conductance(network, &[u], &[v])?)
}

/// Capacity of `K` inside a wired quotient, with the boundary vertex playing
/// the role of infinity: the effective conductance from `K` (wired together)
/// to the boundary. An empty `K` has capacity 0 by convention.
pub fn capacity(wq: &WiredQuotient, k: &[VertexId]) -> Result<f64, PotentialError> {
    if k.is_empty() {
        return Ok(0.0);
    }
    let boundary = wq.boundary();
    for &v in k {
        if v >= wq.network().vertex_count() || v == boundary {
            return Err(PotentialError::UnknownVertex(v));
        }
    }
    effective_conductance(wq.network(), k, &[boundary])
}

/// The same capacity through the escape-probability identity
/// `sum_{v in K} c(v) P_v(walk reaches the boundary before returning to K)`,
/// evaluated with one harmonic solve (boundary at 1, `K` at 0).
pub fn capacity_via_escape(wq: &WiredQuotient, k: &[VertexId]) -> Result<f64, PotentialError> {
    if k.is_empty() {
        return Ok(0.0);
    }
    let network = wq.network();
    let boundary = wq.boundary();
    for &v in k {
        if v >= network.vertex_count() || v == boundary {
            return Err(PotentialError::UnknownVertex(v));
        }
    }
    let problem = DirichletProblem::new(network, &[boundary], k)?;
    let reach = harmonic_solve(&problem)?;
    // c(v) P_v(escape) = sum over incident half-edges of c(e) P_{other end}(
    // hit boundary before K); self-loops land back in K and contribute 0.
    let mut total = 0.0;
    for &v in k {
        for h in network.incident(v) {
            total += network.conductance(h.edge) * reach[h.to];
        }
    }
    Ok(total)
}

/// Weighted spanning tree count (sum over trees of the product of edge
/// conductances) via the reduced Laplacian determinant.
pub fn spanning_tree_count(network: &Network) -> Result<f64, PotentialError> {
    const DESK_LIMIT: usize = 4096;
    let n = network.vertex_count();
    if n > DESK_LIMIT {
        return Err(PotentialError::DeskScaleExceeded(n));
    }
    if n == 1 {
        return Ok(1.0);
    }
    // Reduced Laplacian with vertex 0 deleted; self-loops drop out.
    let dim = n - 1;
    let mut matrix = vec![0.0f64; dim * dim];
    for (a, b, c) in network.edge_triples() {
        if a == b {
            continue;
        }
        if a > 0 {
            matrix[(a - 1) * dim + (a - 1)] += c;
        }
        if b > 0 {
            matrix[(b - 1) * dim + (b - 1)] += c;
        }
        if a > 0 && b > 0 {
            matrix[(a - 1) * dim + (b - 1)] -= c;
            matrix[(b - 1) * dim + (a - 1)] -= c;
        }
    }
    let det = solve::determinant(&mut matrix, dim);
    if !det.is_finite() {
        return Err(PotentialError::Overflow);
    }
    Ok(det)
}

/// Kirchhoff marginal: probability that edge `e` belongs to a spanning tree
/// drawn with probability proportional to the product of conductances,
/// computed as `c(e)` times the effective resistance between its endpoints.
/// Self-loops have probability 0.
pub fn ust_edge_probability(network: &Network, e: EdgeId) -> Result<f64, PotentialError> {
    if e >= network.edge_count() {
        return Err(PotentialError::UnknownEdge(e));
    }
    if network.is_self_loop(e) {
        return Ok(0.0);
    }
    let (a, b) = network.endpoints(e);
    let r = effective_resistance(network, a, b)?;
    Ok((network.conductance(e) * r).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;
    use approx::assert_relative_eq;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn unit(list: &[(usize, usize)]) -> Network {
        let triples: Vec<(usize, usize, f64)> =
            list.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Network::from_edge_list(&triples).unwrap()
    }

    #[test]
    fn path_midpoint_voltage() {
        let net = unit(&[(0, 1), (1, 2)]);
        let problem = DirichletProblem::new(&net, &[0], &[2]).unwrap();
        let v = harmonic_solve(&problem).unwrap();
        assert_relative_eq!(v[1], 0.5, epsilon = 1e-12);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn parallel_edges_double_current() {
        let net = unit(&[(0, 1), (0, 1)]);
        let c = effective_conductance(&net, &[0], &[1]).unwrap();
        assert_relative_eq!(c, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn four_cycle_symmetry() {
        let net = unit(&[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let problem = DirichletProblem::new(&net, &[0], &[2]).unwrap();
        let v = harmonic_solve(&problem).unwrap();
        assert_relative_eq!(v[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(v[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn boundary_validation() {
        let net = unit(&[(0, 1)]);
        assert_eq!(
            DirichletProblem::new(&net, &[0], &[0]).unwrap_err(),
            PotentialError::InvalidBoundary
        );
        assert_eq!(
            DirichletProblem::new(&net, &[], &[0]).unwrap_err(),
            PotentialError::InvalidBoundary
        );
        assert_eq!(
            DirichletProblem::new(&net, &[7], &[0]).unwrap_err(),
            PotentialError::UnknownVertex(7)
        );
    }

    #[test]
    fn series_of_two_unit_edges() {
        let net = unit(&[(0, 1), (1, 2)]);
        let c = effective_conductance(&net, &[0], &[2]).unwrap();
        assert_relative_eq!(c, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn many_parallel_unit_edges() {
        for m in 1..=6 {
            let list: Vec<(usize, usize)> = (0..m).map(|_| (0, 1)).collect();
            let net = unit(&list);
            let c = effective_conductance(&net, &[0], &[1]).unwrap();
            assert_relative_eq!(c, m as f64, epsilon = 1e-10);
        }
    }

    fn binary_tree(depth: usize) -> (Network, Vec<usize>) {
        // Vertices 0.. in heap order; returns the leaf layer.
        let mut triples = Vec::new();
        let levels = depth;
        let mut first = 0usize;
        for level in 0..levels {
            let count = 1usize << level;
            for i in 0..count {
                let v = first + i;
                let left = first + count + 2 * i;
                let right = left + 1;
                triples.push((v, left, 1.0));
                triples.push((v, right, 1.0));
            }
            first += count;
        }
        let leaves: Vec<usize> = (first..first + (1 << levels)).collect();
        (Network::from_edge_list(&triples).unwrap(), leaves)
    }

    #[test]
    fn binary_tree_conductance_decreases_to_one() {
        // Root to wired leaves at depth D: exactly 1/(1 - 2^{-D}),
        // decreasing to 1.
        let mut previous = f64::INFINITY;
        for depth in 1..=8 {
            let (net, leaves) = binary_tree(depth);
            let c = effective_conductance(&net, &[0], &leaves).unwrap();
            let exact = 1.0 / (1.0 - 0.5f64.powi(depth as i32));
            assert_relative_eq!(c, exact, epsilon = 1e-9);
            assert!(c < previous);
            previous = c;
        }
        assert!((previous - 1.0).abs() < 0.01);
    }

    #[test]
    fn capacity_single_pendant_vertex() {
        // Vertex with a single unit edge to the boundary: capacity 1.
        let base = unit(&[(0, 1), (1, 2)]);
        let retained: BTreeSet<usize> = [1].into_iter().collect();
        // Retaining {1} wires 0 and 2 together: two parallel edges.
        let wq = WiredQuotient::new(Arc::new(base), &retained).unwrap();
        assert_relative_eq!(capacity(&wq, &[0]).unwrap(), 2.0);

        let base2 = unit(&[(0, 1)]);
        let retained2: BTreeSet<usize> = [0].into_iter().collect();
        let wq2 = WiredQuotient::new(Arc::new(base2), &retained2).unwrap();
        assert_relative_eq!(capacity(&wq2, &[0]).unwrap(), 1.0);
    }

    #[test]
    fn capacity_empty_set_is_zero() {
        let base = unit(&[(0, 1)]);
        let retained: BTreeSet<usize> = [0].into_iter().collect();
        let wq = WiredQuotient::new(Arc::new(base), &retained).unwrap();
        assert_eq!(capacity(&wq, &[]).unwrap(), 0.0);
    }

    #[test]
    fn capacity_two_routes_agree() {
        // Two vertices joined to each other and each to the boundary.
        let net = unit(&[(0, 1), (0, 2), (1, 2)]);
        let wq = WiredQuotient::from_network(net, 2).unwrap();
        let direct = capacity(&wq, &[0, 1]).unwrap();
        let escape = capacity_via_escape(&wq, &[0, 1]).unwrap();
        assert_relative_eq!(direct, 2.0, epsilon = 1e-12);
        assert!((direct - escape).abs() < 1e-9);

        // And on a less symmetric instance.
        let net = Network::from_edge_list(&[
            (0, 1, 1.5),
            (1, 2, 0.5),
            (2, 3, 2.0),
            (0, 3, 1.0),
            (1, 3, 0.25),
        ])
        .unwrap();
        let wq = WiredQuotient::from_network(net, 3).unwrap();
        let direct = capacity(&wq, &[0, 1]).unwrap();
        let escape = capacity_via_escape(&wq, &[0, 1]).unwrap();
        assert!((direct - escape).abs() < 1e-9, "{direct} vs {escape}");
    }

    #[test]
    fn tree_counts() {
        let k4 = unit(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_relative_eq!(spanning_tree_count(&k4).unwrap(), 16.0, epsilon = 1e-9);
        let triangle = unit(&[(0, 1), (1, 2), (2, 0)]);
        assert_relative_eq!(spanning_tree_count(&triangle).unwrap(), 3.0, epsilon = 1e-12);
        let p3 = unit(&[(0, 1), (1, 2)]);
        assert_relative_eq!(spanning_tree_count(&p3).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tree_count_ignores_self_loops_and_weights_parallels() {
        let net = Network::from_edge_list(&[(0, 1, 2.0), (0, 1, 3.0), (1, 1, 5.0)]).unwrap();
        // Trees: either parallel edge alone; weighted count 2 + 3.
        assert_relative_eq!(spanning_tree_count(&net).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn edge_probability_triangle_and_bridge() {
        let triangle = unit(&[(0, 1), (1, 2), (2, 0)]);
        for e in 0..3 {
            assert_relative_eq!(
                ust_edge_probability(&triangle, e).unwrap(),
                2.0 / 3.0,
                epsilon = 1e-10
            );
        }
        let bridge = unit(&[(0, 1), (1, 2), (2, 0), (2, 3)]);
        assert_relative_eq!(ust_edge_probability(&bridge, 3).unwrap(), 1.0, epsilon = 1e-10);
        let with_loop = Network::from_edge_list(&[(0, 1, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(ust_edge_probability(&with_loop, 1).unwrap(), 0.0);
    }

    #[test]
    fn edge_probability_k4() {
        let k4 = unit(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for e in 0..6 {
            assert_relative_eq!(
                ust_edge_probability(&k4, e).unwrap(),
                0.5,
                epsilon = 1e-10
            );
        }
    }

    /// Kirchhoff marginal agrees with the contraction count
    /// `c(e) tau(G/e) / tau(G)` on a weighted multigraph.
    #[test]
    fn edge_probability_matches_contraction_oracle() {
        let net = Network::from_edge_list(&[
            (0, 1, 2.0),
            (0, 1, 1.0),
            (1, 2, 1.5),
            (2, 0, 0.5),
            (2, 3, 1.0),
            (3, 0, 2.5),
        ])
        .unwrap();
        let total = spanning_tree_count(&net).unwrap();
        for e in 0..net.edge_count() {
            let (contracted, _) = net.contract_edge(e).unwrap();
            let with_edge = net.conductance(e) * spanning_tree_count(&contracted).unwrap();
            let oracle = with_edge / total;
            let kirchhoff = ust_edge_probability(&net, e).unwrap();
            assert!(
                (kirchhoff - oracle).abs() < 1e-9,
                "edge {e}: {kirchhoff} vs {oracle}"
            );
        }
    }

    /// Edge marginals sum to |V| - 1.
    #[test]
    fn foster_identity() {
        let nets = vec![
            unit(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
            Network::from_edge_list(&[
                (0, 1, 2.0),
                (1, 2, 0.5),
                (2, 3, 1.0),
                (3, 4, 3.0),
                (4, 0, 1.0),
                (1, 3, 0.75),
                (0, 0, 1.0),
            ])
            .unwrap(),
        ];
        for net in nets {
            let sum: f64 = (0..net.edge_count())
                .map(|e| ust_edge_probability(&net, e).unwrap())
                .sum();
            assert!(
                (sum - (net.vertex_count() as f64 - 1.0)).abs() < 1e-8,
                "sum = {sum}"
            );
        }
    }

    /// Capacity of a fixed set is nonincreasing as the retained set grows.
    #[test]
    fn capacity_monotone_in_exhaustion() {
        // Nested boxes in a 2d grid around the centre vertex.
        let side = 9usize;
        let id = |x: usize, y: usize| x * side + y;
        let mut triples = Vec::new();
        for x in 0..side {
            for y in 0..side {
                if x + 1 < side {
                    triples.push((id(x, y), id(x + 1, y), 1.0));
                }
                if y + 1 < side {
                    triples.push((id(x, y), id(x, y + 1), 1.0));
                }
            }
        }
        let base = Arc::new(Network::from_edge_list(&triples).unwrap());
        let centre = id(4, 4);
        let mut previous = f64::INFINITY;
        for radius in 1..=3 {
            let retained: BTreeSet<usize> = (0..side)
                .flat_map(|x| (0..side).map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    (x as i64 - 4).abs() <= radius && (y as i64 - 4).abs() <= radius
                })
                .map(|(x, y)| id(x, y))
                .collect();
            let wq = WiredQuotient::new(base.clone(), &retained).unwrap();
            let k = wq.quotient_vertex(centre).unwrap();
            let cap = capacity(&wq, &[k]).unwrap();
            assert!(cap < previous, "radius {radius}: {cap} >= {previous}");
            previous = cap;
        }
    }

    #[test]
    fn desk_scale_guard() {
        let big: Vec<(usize, usize, f64)> = (0..5000).map(|i| (i, i + 1, 1.0)).collect();
        let net = Network::from_edge_list(&big).unwrap();
        assert!(matches!(
            spanning_tree_count(&net),
            Err(PotentialError::DeskScaleExceeded(_))
        ));
    }
}
