//! Exact two-terminal series-parallel reduction over arbitrary-precision
//! rationals. Conductances enter as exact dyadic rationals (every finite
//! f64 is one), so integer-weight networks reduce with no rounding at all.

use std::collections::HashMap;
use std::collections::VecDeque;

use num::rational::BigRational;
use num::Zero;

use crate::network::{Network, VertexId};

use super::PotentialError;

/// Reduces the network between terminals `a` and `z` using only the series
/// law, the parallel law, and pruning of dangling non-terminal branches.
/// Returns the exact effective conductance, or `NotReducible` if the network
/// has a wider structure between the terminals.
pub fn series_parallel_reduce(
    network: &Network,
    a: VertexId,
    z: VertexId,
) -> Result<BigRational, PotentialError> {
    let n = network.vertex_count();
    if a >= n {
        return Err(PotentialError::UnknownVertex(a));
    }
    if z >= n {
        return Err(PotentialError::UnknownVertex(z));
    }
    if a == z {
        return Err(PotentialError::InvalidTerminals);
    }
    // Parallel edges merge on insertion; self-loops never matter.
    let mut adjacency: Vec<HashMap<VertexId, BigRational>> = vec![HashMap::new(); n];
    for (u, v, c) in network.edge_triples() {
        if u == v {
            continue;
        }
        let c = BigRational::from_float(c)
            .expect("conductances are finite by construction");
        let entry = adjacency[u].entry(v).or_insert_with(BigRational::zero);
        *entry += &c;
        let entry = adjacency[v].entry(u).or_insert_with(BigRational::zero);
        *entry += c;
    }
    let mut alive = vec![true; n];
    let mut queued = vec![false; n];
    let mut queue: VecDeque<VertexId> = VecDeque::new();
    for v in 0..n {
        if v != a && v != z {
            queue.push_back(v);
            queued[v] = true;
        }
    }
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        if !alive[v] || v == a || v == z {
            continue;
        }
        match adjacency[v].len() {
            0 => {
                alive[v] = false;
            }
            1 => {
                // Dangling branch: carries no current between the terminals.
                let (&u, _) = adjacency[v].iter().next().unwrap();
                adjacency[u].remove(&v);
                adjacency[v].clear();
                alive[v] = false;
                if u != a && u != z && !queued[u] {
                    queue.push_back(u);
                    queued[u] = true;
                }
            }
            2 => {
                let mut it = adjacency[v].iter();
                let (&u, cu) = it.next().unwrap();
                let (&w, cw) = it.next().unwrap();
                let series = cu * cw / (cu + cw);
                adjacency[u].remove(&v);
                adjacency[w].remove(&v);
                adjacency[v].clear();
                alive[v] = false;
                let entry = adjacency[u].entry(w).or_insert_with(BigRational::zero);
                *entry += &series;
                let entry = adjacency[w].entry(u).or_insert_with(BigRational::zero);
                *entry += series;
                for t in [u, w] {
                    if t != a && t != z && !queued[t] {
                        queue.push_back(t);
                        queued[t] = true;
                    }
                }
            }
            _ => {}
        }
    }
    if (0..n).any(|v| alive[v] && v != a && v != z) {
        return Err(PotentialError::NotReducible);
    }
    adjacency[a]
        .get(&z)
        .cloned()
        .ok_or(PotentialError::TerminalsDisconnected)
}
