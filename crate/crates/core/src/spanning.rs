//! Oriented spanning forests and the walk-based tree samplers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::network::{EdgeId, Network, OrientedEdge, VertexId};
use crate::walks::{step, WalkRng};

#[derive(Debug, Error, PartialEq)]
pub enum SpanningError {
    #[error("vertex {0} out of range")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is not in the forest")]
    NotInForest(VertexId),
    #[error("step cap {0} exceeded before the walk covered the network")]
    StepCapExceeded(usize),
    #[error("forest invariant violated: {0}")]
    Invalid(String),
}

/// A forest of parent edges: every non-root member has exactly one oriented
/// edge emanating from it (tail at the vertex, head at its parent), and
/// following parent edges always reaches a root.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedForest {
    member: Vec<bool>,
    parent: Vec<Option<OrientedEdge>>,
    roots: Vec<VertexId>,
}

impl OrientedForest {
    /// Assembles a forest from explicit parts. `parents` maps vertices to the
    /// oriented edge pointing from the vertex toward its parent.
    pub fn from_parts(
        vertex_count: usize,
        parents: impl IntoIterator<Item = (VertexId, OrientedEdge)>,
        roots: impl IntoIterator<Item = VertexId>,
    ) -> Self {
        let mut member = vec![false; vertex_count];
        let mut parent = vec![None; vertex_count];
        for (v, e) in parents {
            member[v] = true;
            parent[v] = Some(e);
        }
        let mut roots: Vec<VertexId> = roots.into_iter().collect();
        roots.sort_unstable();
        roots.dedup();
        for &r in &roots {
            member[r] = true;
        }
        OrientedForest {
            member,
            parent,
            roots,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.member.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.member.len()).filter(|&v| self.member[v])
    }

    pub fn member_count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<OrientedEdge> {
        self.parent.get(v).copied().flatten()
    }

    pub fn parent_vertex(&self, v: VertexId, network: &Network) -> Option<VertexId> {
        self.parent_edge(v).map(|e| e.head(network))
    }

    /// Unoriented edge ids used by the forest.
    pub fn edge_ids(&self) -> BTreeSet<EdgeId> {
        self.parent.iter().flatten().map(|e| e.id).collect()
    }

    /// Canonical encoding for distribution tests: sorted (vertex, parent
    /// edge id) pairs.
    pub fn canonical_key(&self) -> Vec<(VertexId, EdgeId)> {
        let mut key: Vec<(VertexId, EdgeId)> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, e)| e.map(|e| (v, e.id)))
            .collect();
        key.sort_unstable();
        key
    }

    /// Checks the forest invariants against the carrying network: parent
    /// edges emanate from their vertex, non-roots have exactly one parent,
    /// and parent chains reach a root without revisiting a vertex.
    pub fn validate(&self, network: &Network) -> Result<(), SpanningError> {
        if self.member.len() != network.vertex_count() {
            return Err(SpanningError::Invalid(
                "vertex count mismatch with the network".into(),
            ));
        }
        let root_set: BTreeSet<VertexId> = self.roots.iter().copied().collect();
        for v in 0..self.member.len() {
            match (self.member[v], self.parent[v], root_set.contains(&v)) {
                (false, None, false) => {}
                (false, _, true) | (false, Some(_), _) => {
                    return Err(SpanningError::Invalid(format!(
                        "non-member {v} has forest data"
                    )));
                }
                (true, None, false) => {
                    return Err(SpanningError::Invalid(format!(
                        "member {v} has no parent edge and is not a root"
                    )));
                }
                (true, Some(e), false) => {
                    if e.tail(network) != v {
                        return Err(SpanningError::Invalid(format!(
                            "parent edge of {v} does not emanate from it"
                        )));
                    }
                    if !self.contains(e.head(network)) {
                        return Err(SpanningError::Invalid(format!(
                            "parent of {v} is outside the forest"
                        )));
                    }
                }
                (true, Some(_), true) => {
                    return Err(SpanningError::Invalid(format!(
                        "root {v} has a parent edge"
                    )));
                }
                (true, None, true) => {}
            }
        }
        // Acyclicity: walk up from every vertex with a visited-state cache.
        let mut state = vec![0u8; self.member.len()]; // 0 unseen, 1 on path, 2 done
        for start in 0..self.member.len() {
            if !self.member[start] || state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut v = start;
            loop {
                if state[v] == 1 {
                    return Err(SpanningError::Invalid(format!(
                        "cycle through vertex {v}"
                    )));
                }
                if state[v] == 2 {
                    break;
                }
                state[v] = 1;
                path.push(v);
                match self.parent_vertex(v, network) {
                    Some(next) => v = next,
                    None => break, // reached a root
                }
            }
            for p in path {
                state[p] = 2;
            }
        }
        Ok(())
    }

    /// The past of `v`: all vertices whose parent chain passes through `v`,
    /// including `v` itself.
    pub fn past(&self, v: VertexId, network: &Network) -> Result<Vec<VertexId>, SpanningError> {
        if v >= self.member.len() {
            return Err(SpanningError::UnknownVertex(v));
        }
        if !self.member[v] {
            return Err(SpanningError::NotInForest(v));
        }
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); self.member.len()];
        for u in self.members() {
            if let Some(p) = self.parent_vertex(u, network) {
                children[p].push(u);
            }
        }
        let mut past = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            past.push(u);
            stack.extend(children[u].iter().copied());
        }
        past.sort_unstable();
        Ok(past)
    }

    /// Deterministic per-component statistics: size, vertex counts by depth
    /// from the root, and the number of tree edges attached to the root.
    pub fn component_stats(&self, network: &Network) -> Vec<ComponentStats> {
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); self.member.len()];
        for u in self.members() {
            if let Some(p) = self.parent_vertex(u, network) {
                children[p].push(u);
            }
        }
        self.roots
            .iter()
            .map(|&root| {
                let mut depth_profile = vec![1usize];
                let mut size = 1usize;
                let mut frontier = vec![root];
                loop {
                    let next: Vec<VertexId> = frontier
                        .iter()
                        .flat_map(|&v| children[v].iter().copied())
                        .collect();
                    if next.is_empty() {
                        break;
                    }
                    size += next.len();
                    depth_profile.push(next.len());
                    frontier = next;
                }
                ComponentStats {
                    root,
                    size,
                    boundary_attachments: children[root].len(),
                    depth_profile,
                }
            })
            .collect()
    }

    /// JSON schema: `{roots: [...], parents: [{v, edge_id, head}]}`.
    pub fn to_json(&self, network: &Network) -> String {
        #[derive(Serialize)]
        struct ParentJson {
            v: VertexId,
            edge_id: EdgeId,
            head: VertexId,
        }
        #[derive(Serialize)]
        struct ForestJson<'a> {
            roots: &'a [VertexId],
            parents: Vec<ParentJson>,
        }
        let parents = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, e)| {
                e.map(|e| ParentJson {
                    v,
                    edge_id: e.id,
                    head: e.head(network),
                })
            })
            .collect();
        serde_json::to_string(&ForestJson {
            roots: &self.roots,
            parents,
        })
        .expect("forest serialization cannot fail")
    }

    /// DOT export with orientation arrows along parent edges.
    pub fn to_dot(&self, network: &Network, name: &str) -> String {
        let mut out = format!("digraph {} {{\n", name);
        for v in self.members() {
            let _ = writeln!(out, "  {};", v);
        }
        for v in self.members() {
            if let Some(e) = self.parent_edge(v) {
                let _ = writeln!(out, "  {} -> {} [label=\"e{}\"];", v, e.head(network), e.id);
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentStats {
    pub root: VertexId,
    pub size: usize,
    /// Number of vertices at each depth below the root (depth 0 first).
    pub depth_profile: Vec<usize>,
    /// Tree edges whose head is the component root.
    pub boundary_attachments: usize,
}

/// Classic first-entry-edge sampler: walks from `root` until every vertex is
/// visited and keeps the reversed first-entry edges, producing a spanning
/// tree oriented toward `root` with probability proportional to the product
/// of its edge conductances.
pub fn aldous_broder(
    network: &Network,
    root: VertexId,
    rng: &mut WalkRng,
    step_cap: usize,
) -> Result<OrientedForest, SpanningError> {
    let n = network.vertex_count();
    if root >= n {
        return Err(SpanningError::UnknownVertex(root));
    }
    let mut parent: Vec<Option<OrientedEdge>> = vec![None; n];
    let mut visited = vec![false; n];
    visited[root] = true;
    let mut remaining = n - 1;
    let mut at = root;
    let mut steps = 0usize;
    while remaining > 0 {
        if steps >= step_cap {
            return Err(SpanningError::StepCapExceeded(step_cap));
        }
        let s = step(network, at, rng);
        steps += 1;
        if !visited[s.to] {
            visited[s.to] = true;
            remaining -= 1;
            // First-entry edge reversed: emanating from the new vertex.
            parent[s.to] =
                Some(OrientedEdge::into_vertex(network, s.edge_id, s.to).reversed());
        }
        at = s.to;
    }
    Ok(OrientedForest::from_parts(
        n,
        (0..n).filter_map(|v| parent[v].map(|e| (v, e))),
        [root],
    ))
}

/// Wilson's algorithm rooted at `root`, scanning unvisited vertices in
/// ascending id order. The scan order does not change the distribution but
/// fixing it keeps replays deterministic.
pub fn wilson(network: &Network, root: VertexId, rng: &mut WalkRng) -> Result<OrientedForest, SpanningError> {
    let n = network.vertex_count();
    if root >= n {
        return Err(SpanningError::UnknownVertex(root));
    }
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    // Last exit step per vertex; retracing it after the walk hits the tree
    // performs the loop erasure implicitly.
    let mut next: Vec<Option<OrientedEdge>> = vec![None; n];
    for start in 0..n {
        if in_tree[start] {
            continue;
        }
        let mut at = start;
        while !in_tree[at] {
            let s = step(network, at, rng);
            next[at] = Some(OrientedEdge::into_vertex(network, s.edge_id, s.to).reversed());
            at = s.to;
        }
        let mut at = start;
        while !in_tree[at] {
            in_tree[at] = true;
            at = next[at].expect("walked vertices have an exit step").head(network);
        }
    }
    let parents = (0..n).filter_map(|v| {
        if v == root {
            None
        } else {
            Some((v, next[v].expect("non-root vertices joined via a walk")))
        }
    });
    Ok(OrientedForest::from_parts(n, parents, [root]))
}
