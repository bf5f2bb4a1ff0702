//! A Poisson point process of boundary excursions on a wired quotient, the
//! first-entry forest it induces, the backward-in-time Markov update, hitting
//! statistics, and the traversal-order minimal spanning forest.
//!
//! Arrivals are materialized lazily: the window extends forward in fixed
//! increments of `1/c(boundary)` time units, drawing from the process's own
//! generator stream, so extending further never perturbs earlier arrivals.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::network::{EdgeId, OrientedEdge, VertexId, WiredQuotient};
use crate::potential::{capacity, PotentialError};
use crate::spanning::OrientedForest;
use crate::stats::binomial_z;
use crate::walks::{boundary_excursion, random_walk, step, Walk, WalkRng, DEFAULT_STEP_CAP};

#[derive(Debug, Error, PartialEq)]
pub enum InterlacementError {
    #[error("window is empty or reversed: [{0}, {1}]")]
    BadWindow(f64, f64),
    #[error("vertex {0} is the boundary or out of range")]
    BadVertex(VertexId),
    #[error("extension cap of {0} increments exceeded")]
    ExtensionCapExceeded(usize),
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("time grid must be strictly decreasing and nonempty")]
    BadGrid,
    #[error("walk is empty")]
    EmptyWalk,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

const EXTENSION_CAP: usize = 400_000;

/// One point of the process: an excursion labelled with its arrival time.
#[derive(Debug, Clone)]
pub struct Arrival {
    pub time: f64,
    pub id: u64,
    pub excursion: Walk,
}

impl Arrival {
    /// Interior vertices in first-visit order (the first one is the
    /// canonical time-shift anchor of the trajectory).
    pub fn interior_visits(&self) -> impl Iterator<Item = VertexId> + '_ {
        let boundary = self.excursion.start;
        self.excursion
            .steps
            .iter()
            .map(|s| s.to)
            .filter(move |&v| v != boundary)
    }

    pub fn hits(&self, v: VertexId) -> bool {
        self.excursion.steps.iter().any(|s| s.to == v)
    }
}

/// Time-sorted excursion arrivals over `[start, end)`, extensible forward.
#[derive(Debug, Clone)]
pub struct PointProcess {
    rate: f64,
    start: f64,
    end: f64,
    arrivals: Vec<Arrival>,
    rng: WalkRng,
    next_id: u64,
}

impl PointProcess {
    /// Samples the process on `[a, b]`: a Poisson(c(boundary) (b-a)) number
    /// of arrivals, times i.i.d. uniform given the count, each carrying an
    /// independent boundary excursion.
    pub fn sample(
        wq: &WiredQuotient,
        a: f64,
        b: f64,
        rng: WalkRng,
    ) -> Result<Self, InterlacementError> {
        if !(a <= b) {
            return Err(InterlacementError::BadWindow(a, b));
        }
        let mut process = PointProcess {
            rate: wq.boundary_conductance(),
            start: a,
            end: a,
            arrivals: Vec::new(),
            rng,
            next_id: 0,
        };
        process.extend_to(wq, b)?;
        Ok(process)
    }

    /// Test constructor with explicit arrivals.
    pub fn from_arrivals(
        rate: f64,
        window: (f64, f64),
        excursions: Vec<(f64, Walk)>,
    ) -> Self {
        let mut arrivals: Vec<Arrival> = excursions
            .into_iter()
            .enumerate()
            .map(|(i, (time, excursion))| Arrival {
                time,
                id: i as u64,
                excursion,
            })
            .collect();
        arrivals.sort_by(|x, y| x.time.total_cmp(&y.time).then(x.id.cmp(&y.id)));
        PointProcess {
            rate,
            start: window.0,
            end: window.1,
            arrivals,
            rng: WalkRng::from_seed(0),
            next_id: u64::MAX,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn arrival(&self, id: u64) -> Option<&Arrival> {
        self.arrivals.iter().find(|a| a.id == id)
    }

    /// Index of the first arrival at or after `t`.
    fn first_at_or_after(&self, t: f64) -> usize {
        self.arrivals.partition_point(|a| a.time < t)
    }

    fn extend_increment(&mut self, wq: &WiredQuotient) {
        // Fixed increments of 1/c(boundary): one expected arrival each.
        let dt = 1.0 / self.rate;
        let lo = self.end;
        let hi = self.end + dt;
        let count = sample_poisson(&mut self.rng, self.rate * dt);
        let mut times: Vec<f64> = (0..count)
            .map(|_| self.rng.random_range(lo..hi))
            .collect();
        times.sort_by(f64::total_cmp);
        for time in times {
            let excursion = boundary_excursion(wq, &mut self.rng, DEFAULT_STEP_CAP);
            self.arrivals.push(Arrival {
                time,
                id: self.next_id,
                excursion,
            });
            self.next_id += 1;
        }
        self.end = hi;
    }

    /// Materializes the window up to at least `t`.
    pub fn extend_to(&mut self, wq: &WiredQuotient, t: f64) -> Result<(), InterlacementError> {
        let mut increments = 0usize;
        while self.end < t {
            if increments >= EXTENSION_CAP {
                return Err(InterlacementError::ExtensionCapExceeded(EXTENSION_CAP));
            }
            self.extend_increment(wq);
            increments += 1;
        }
        Ok(())
    }
}

fn sample_poisson(rng: &mut WalkRng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive mean");
    dist.sample(rng) as u64
}

/// The first post-`t` arrival through `v`: its time, trajectory id and the
/// oriented edge by which that trajectory first enters `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauResult {
    pub time: f64,
    pub trajectory: u64,
    pub entry: OrientedEdge,
}

/// Scans arrivals at or after `t` in time order for the first trajectory
/// hitting `v`, extending the window lazily as required.
pub fn tau(
    process: &mut PointProcess,
    wq: &WiredQuotient,
    v: VertexId,
    t: f64,
) -> Result<TauResult, InterlacementError> {
    let network = wq.network();
    if v >= network.vertex_count() || v == wq.boundary() {
        return Err(InterlacementError::BadVertex(v));
    }
    let mut idx = process.first_at_or_after(t);
    let mut increments = 0usize;
    loop {
        while idx < process.arrivals.len() {
            let arrival = &process.arrivals[idx];
            if let Some(step) = arrival.excursion.steps.iter().find(|s| s.to == v) {
                return Ok(TauResult {
                    time: arrival.time,
                    trajectory: arrival.id,
                    entry: OrientedEdge::into_vertex(network, step.edge_id, v),
                });
            }
            idx += 1;
        }
        if increments >= EXTENSION_CAP {
            return Err(InterlacementError::ExtensionCapExceeded(EXTENSION_CAP));
        }
        process.extend_increment(wq);
        increments += 1;
    }
}

/// First-entry data for every retained vertex at a fixed time: the next
/// arrival through the vertex and the oriented edge it enters by.
#[derive(Debug, Clone, PartialEq)]
pub struct AbState {
    pub time: f64,
    /// First post-`time` arrival time per vertex (boundary slot unused).
    pub tau: Vec<f64>,
    /// Entry edge per vertex, oriented into the vertex.
    pub entry: Vec<Option<OrientedEdge>>,
}

impl AbState {
    /// The forest of reversed entry edges, rooted at the boundary.
    pub fn forest(&self, wq: &WiredQuotient) -> OrientedForest {
        let n = wq.network().vertex_count();
        let parents = (0..n).filter_map(|v| self.entry[v].map(|e| (v, e.reversed())));
        let any = self.entry.iter().any(Option::is_some);
        let roots = if any { vec![wq.boundary()] } else { Vec::new() };
        OrientedForest::from_parts(n, parents, roots)
    }
}

/// Full first-entry assignment at time `t` (horizon at infinity): every
/// retained vertex receives its next trajectory, lazily extending the
/// window. The induced forest is a spanning tree of the quotient oriented
/// toward the boundary.
pub fn ab_state(
    process: &mut PointProcess,
    wq: &WiredQuotient,
    t: f64,
) -> Result<AbState, InterlacementError> {
    let network = wq.network();
    let n = network.vertex_count();
    let boundary = wq.boundary();
    let mut entry: Vec<Option<OrientedEdge>> = vec![None; n];
    let mut tau = vec![f64::INFINITY; n];
    let mut remaining = n - 1;
    let mut idx = process.first_at_or_after(t);
    let mut increments = 0usize;
    while remaining > 0 {
        if idx >= process.arrivals.len() {
            if increments >= EXTENSION_CAP {
                return Err(InterlacementError::ExtensionCapExceeded(EXTENSION_CAP));
            }
            process.extend_increment(wq);
            increments += 1;
            continue;
        }
        let arrival = &process.arrivals[idx];
        for s in &arrival.excursion.steps {
            if s.to != boundary && entry[s.to].is_none() {
                entry[s.to] = Some(OrientedEdge::into_vertex(network, s.edge_id, s.to));
                tau[s.to] = arrival.time;
                remaining -= 1;
            }
        }
        idx += 1;
    }
    Ok(AbState { time: t, tau, entry })
}

/// Horizon for the finite-window forest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    At(f64),
    Infinite,
}

/// The forest of reversed first-entry edges over vertices whose first
/// post-`t` arrival comes no later than the horizon.
pub fn ab_forest(
    process: &mut PointProcess,
    wq: &WiredQuotient,
    t: f64,
    horizon: Horizon,
) -> Result<OrientedForest, InterlacementError> {
    match horizon {
        Horizon::Infinite => Ok(ab_state(process, wq, t)?.forest(wq)),
        Horizon::At(cutoff) => {
            if cutoff < t {
                return Err(InterlacementError::BadWindow(t, cutoff));
            }
            process.extend_to(wq, cutoff)?;
            let network = wq.network();
            let n = network.vertex_count();
            let boundary = wq.boundary();
            let mut entry: Vec<Option<OrientedEdge>> = vec![None; n];
            let mut idx = process.first_at_or_after(t);
            while idx < process.arrivals.len() && process.arrivals[idx].time <= cutoff {
                let arrival = &process.arrivals[idx];
                for s in &arrival.excursion.steps {
                    if s.to != boundary && entry[s.to].is_none() {
                        entry[s.to] =
                            Some(OrientedEdge::into_vertex(network, s.edge_id, s.to));
                    }
                }
                idx += 1;
            }
            let any = entry.iter().any(Option::is_some);
            let parents = (0..n).filter_map(|v| entry[v].map(|e| (v, e.reversed())));
            let roots = if any { vec![boundary] } else { Vec::new() };
            Ok(OrientedForest::from_parts(n, parents, roots))
        }
    }
}

/// Rolls a full state backward: vertices hit by arrivals in
/// `[new_time, state.time)` take their entry edge from the window, all other
/// vertices keep their assignment. Pathwise identical to recomputing the
/// state at `new_time` from scratch on the same realization.
pub fn markov_update(
    state: &AbState,
    process: &PointProcess,
    wq: &WiredQuotient,
    new_time: f64,
) -> Result<AbState, InterlacementError> {
    if new_time > state.time {
        return Err(InterlacementError::WindowMismatch(format!(
            "update runs backward: {} -> {}",
            state.time, new_time
        )));
    }
    let (start, end) = process.window();
    if new_time < start || state.time > end {
        return Err(InterlacementError::WindowMismatch(format!(
            "window [{start}, {end}] does not cover [{new_time}, {}]",
            state.time
        )));
    }
    let network = wq.network();
    let boundary = wq.boundary();
    let n = network.vertex_count();
    let mut entry = state.entry.clone();
    let mut tau = state.tau.clone();
    let mut fresh = vec![false; n];
    let mut idx = process.first_at_or_after(new_time);
    while idx < process.arrivals.len() && process.arrivals[idx].time < state.time {
        let arrival = &process.arrivals[idx];
        for s in &arrival.excursion.steps {
            if s.to != boundary && !fresh[s.to] {
                fresh[s.to] = true;
                entry[s.to] = Some(OrientedEdge::into_vertex(network, s.edge_id, s.to));
                tau[s.to] = arrival.time;
            }
        }
        idx += 1;
    }
    Ok(AbState {
        time: new_time,
        tau,
        entry,
    })
}

/// Successive backward states over a strictly decreasing time grid, all on
/// one realization of the process.
pub fn dynamics_run(
    wq: &WiredQuotient,
    grid: &[f64],
    rng: WalkRng,
) -> Result<Vec<AbState>, InterlacementError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(InterlacementError::BadGrid);
    }
    let first = grid[0];
    let last = *grid.last().unwrap();
    let mut process = PointProcess::sample(wq, last, first, rng)?;
    let mut states = Vec::with_capacity(grid.len());
    states.push(ab_state(&mut process, wq, first)?);
    for &t in &grid[1..] {
        let previous = states.last().unwrap();
        states.push(markov_update(previous, &process, wq, t)?);
    }
    Ok(states)
}

#[derive(Debug, Clone)]
pub struct HitTestReport {
    pub empirical: f64,
    pub exact: f64,
    pub z_score: f64,
    pub samples: usize,
}

/// Compares the empirical probability that some trajectory of a length-`t`
/// window hits `K` against `1 - exp(-t Cap(K))` with the capacity from the
/// exact solver.
///
/// Each excursion is run only until it reaches `K` or returns to the
/// boundary, which leaves the hit indicator's distribution unchanged.
pub fn hit_probability_test(
    wq: &WiredQuotient,
    k: &[VertexId],
    t: f64,
    samples: usize,
    rng: &mut WalkRng,
) -> Result<HitTestReport, InterlacementError> {
    let network = wq.network();
    let boundary = wq.boundary();
    for &v in k {
        if v >= network.vertex_count() || v == boundary {
            return Err(InterlacementError::BadVertex(v));
        }
    }
    let cap = capacity(wq, k)?;
    let exact = 1.0 - (-t * cap).exp();
    let mut stop = vec![false; network.vertex_count()];
    for &v in k {
        stop[v] = true;
    }
    stop[boundary] = true;
    let rate = wq.boundary_conductance();
    let mut hits = 0u64;
    for _ in 0..samples {
        let count = sample_poisson(rng, rate * t);
        for _ in 0..count {
            let first = step(network, boundary, rng);
            let hit = if stop[first.to] {
                first.to != boundary
            } else {
                let walk = random_walk(network, first.to, &stop, rng, DEFAULT_STEP_CAP)
                    .expect("start vertex is valid");
                walk.end() != boundary
            };
            if hit {
                hits += 1;
                break;
            }
        }
    }
    let empirical = hits as f64 / samples as f64;
    let z_score = if exact == 0.0 || exact == 1.0 {
        if empirical == exact {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        binomial_z(hits, samples as u64, exact)
    };
    Ok(HitTestReport {
        empirical,
        exact,
        z_score,
        samples,
    })
}

#[derive(Debug, Clone)]
pub struct MsfResult {
    /// Edges of the minimal spanning tree of the quotient under the
    /// traversal order.
    pub edges: BTreeSet<EdgeId>,
    /// All edges sorted by first traversal: arrival time first, then
    /// within-trajectory traversal position.
    pub order: Vec<EdgeId>,
}

/// Orders every edge of the quotient by its first traversal across the
/// arrivals from the window start onward (extending until all edges are
/// covered), and returns the minimal spanning tree under that order.
///
/// Pathwise, its edge set coincides with the unoriented first-entry forest
/// of the same realization.
pub fn interlacement_msf(
    process: &mut PointProcess,
    wq: &WiredQuotient,
) -> Result<MsfResult, InterlacementError> {
    let network = wq.network();
    let m = network.edge_count();
    let t0 = process.window().0;
    // (arrival time, arrival id, step index) at first traversal, per edge.
    let mut key: Vec<Option<(f64, u64, usize)>> = vec![None; m];
    let mut remaining = m;
    let mut idx = process.first_at_or_after(t0);
    let mut increments = 0usize;
    while remaining > 0 {
        if idx >= process.arrivals.len() {
            if increments >= EXTENSION_CAP {
                return Err(InterlacementError::ExtensionCapExceeded(EXTENSION_CAP));
            }
            process.extend_increment(wq);
            increments += 1;
            continue;
        }
        let arrival = &process.arrivals[idx];
        for (pos, s) in arrival.excursion.steps.iter().enumerate() {
            if key[s.edge_id].is_none() {
                key[s.edge_id] = Some((arrival.time, arrival.id, pos));
                remaining -= 1;
            }
        }
        idx += 1;
    }
    let mut order: Vec<EdgeId> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let (ta, ia, pa) = key[a].unwrap();
        let (tb, ib, pb) = key[b].unwrap();
        ta.total_cmp(&tb).then(ia.cmp(&ib)).then(pa.cmp(&pb))
    });
    // Kruskal under the traversal order.
    let n = network.vertex_count();
    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(dsu: &mut [usize], mut v: usize) -> usize {
        while dsu[v] != v {
            dsu[v] = dsu[dsu[v]];
            v = dsu[v];
        }
        v
    }
    let mut edges = BTreeSet::new();
    for &e in &order {
        let (a, b) = network.endpoints(e);
        let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
        if ra != rb {
            dsu[ra] = rb;
            edges.insert(e);
        }
    }
    Ok(MsfResult { edges, order })
}

/// The tree of reversed first-entry edges of a single walk, rooted at the
/// walk's start and spanning its visited set.
pub fn trajectory_first_entry_tree(
    walk: &Walk,
    network: &crate::network::Network,
) -> Result<OrientedForest, InterlacementError> {
    if walk.steps.is_empty() {
        return Err(InterlacementError::EmptyWalk);
    }
    let n = network.vertex_count();
    let mut entry: Vec<Option<OrientedEdge>> = vec![None; n];
    let mut occupied = vec![false; n];
    occupied[walk.start] = true;
    for s in &walk.steps {
        if !occupied[s.to] {
            occupied[s.to] = true;
            entry[s.to] = Some(OrientedEdge::into_vertex(network, s.edge_id, s.to));
        }
    }
    let parents = (0..n).filter_map(|v| entry[v].map(|e| (v, e.reversed())));
    Ok(OrientedForest::from_parts(n, parents, [walk.start]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;
    use crate::stats::mc_mean_ci;
    use crate::walks::{Termination, WalkStep};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn five_cycle_quotient() -> WiredQuotient {
        let base = Network::from_edge_list(&[
            (0, 1, 1.0),
            (1, 2, 1.0),
            (2, 3, 1.0),
            (3, 4, 1.0),
            (4, 0, 1.0),
        ])
        .unwrap();
        let retained: std::collections::BTreeSet<usize> = (0..4).collect();
        WiredQuotient::new(Arc::new(base), &retained).unwrap()
    }

    fn path_quotient() -> WiredQuotient {
        let base =
            Network::from_edge_list(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let retained: std::collections::BTreeSet<usize> = [1, 2].into_iter().collect();
        WiredQuotient::new(Arc::new(base), &retained).unwrap()
    }

    #[test]
    fn empty_window_is_empty() {
        let wq = path_quotient();
        let process = PointProcess::sample(&wq, 0.0, 0.0, WalkRng::from_seed(1)).unwrap();
        assert!(process.arrivals().is_empty());
    }

    #[test]
    fn arrival_count_has_poisson_mean() {
        let wq = five_cycle_quotient();
        let rate = wq.boundary_conductance();
        assert_eq!(rate, 2.0);
        let span = 3.0;
        let reps = 10_000usize;
        let root = WalkRng::from_seed(42);
        let counts: Vec<f64> = (0..reps)
            .map(|i| {
                let process =
                    PointProcess::sample(&wq, 0.0, span, root.substream(i as u64)).unwrap();
                process.arrivals().len() as f64
            })
            .collect();
        let (mean, _) = mc_mean_ci(&counts, 0.95).unwrap();
        let expected = rate * span;
        let sd = (expected / reps as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sd, "mean = {mean}");
    }

    #[test]
    fn disjoint_subwindow_counts_are_uncorrelated() {
        let wq = path_quotient();
        let rate = wq.boundary_conductance();
        let span = 2.0;
        let reps = 10_000usize;
        let root = WalkRng::from_seed(7);
        let mut first_half = Vec::with_capacity(reps);
        let mut second_half = Vec::with_capacity(reps);
        for i in 0..reps {
            let process =
                PointProcess::sample(&wq, 0.0, span, root.substream(i as u64)).unwrap();
            let mid = span / 2.0;
            let split = process.arrivals().partition_point(|a| a.time < mid);
            first_half.push(split as f64);
            second_half.push((process.arrivals().len() - split) as f64);
        }
        let n = reps as f64;
        let mean_a = first_half.iter().sum::<f64>() / n;
        let mean_b = second_half.iter().sum::<f64>() / n;
        let cov = first_half
            .iter()
            .zip(&second_half)
            .map(|(a, b)| (a - mean_a) * (b - mean_b))
            .sum::<f64>()
            / n;
        // Independent Poisson halves with mean rate*span/2 each.
        let lambda = rate * span / 2.0;
        let z = cov * (n / (lambda * lambda)).sqrt();
        assert!(z.abs() < 3.5, "z = {z}");
    }

    fn manual_walk(net: &Network, vertices: &[VertexId]) -> Walk {
        let mut steps = Vec::new();
        for pair in vertices.windows(2) {
            let edge = net
                .incident(pair[0])
                .iter()
                .find(|h| h.to == pair[1])
                .unwrap()
                .edge;
            steps.push(WalkStep {
                edge_id: edge,
                to: pair[1],
            });
        }
        Walk {
            start: vertices[0],
            steps,
            cause: Termination::ReturnedToBoundary,
        }
    }

    #[test]
    fn tau_scans_forward_from_t() {
        let wq = path_quotient();
        let net = wq.network();
        let boundary = wq.boundary();
        // Excursions: at time 1 through vertex 0 only; at time 2 through both.
        let w1 = manual_walk(net, &[boundary, 0, boundary]);
        let w2 = manual_walk(net, &[boundary, 0, 1, 0, boundary]);
        let mut process =
            PointProcess::from_arrivals(2.0, (0.0, 10.0), vec![(1.0, w1), (2.0, w2)]);

        let result = tau(&mut process, &wq, 0, 0.0).unwrap();
        assert_eq!(result.time, 1.0);
        assert_eq!(result.trajectory, 0);

        // Lower cutoff skips the earlier arrival.
        let result = tau(&mut process, &wq, 0, 1.5).unwrap();
        assert_eq!(result.time, 2.0);
        assert_eq!(result.trajectory, 1);

        // Entry edge of the first interior vertex is the excursion's first
        // edge, oriented into it.
        let result = tau(&mut process, &wq, 1, 0.0).unwrap();
        assert_eq!(result.time, 2.0);
        assert_eq!(result.entry.head(net), 1);
        assert_eq!(result.entry.tail(net), 0);

        assert_eq!(
            tau(&mut process, &wq, boundary, 0.0).unwrap_err(),
            InterlacementError::BadVertex(boundary)
        );
    }

    #[test]
    fn tau_lazily_extends_the_window() {
        let wq = path_quotient();
        let mut process = PointProcess::sample(&wq, 0.0, 0.0, WalkRng::from_seed(3)).unwrap();
        let result = tau(&mut process, &wq, 0, 0.0).unwrap();
        assert!(result.time >= 0.0);
        assert!(process.window().1 >= result.time);
    }

    #[test]
    fn ab_state_tau_at_least_t() {
        let wq = five_cycle_quotient();
        let mut process = PointProcess::sample(&wq, 0.0, 1.0, WalkRng::from_seed(5)).unwrap();
        let t = 0.25;
        let state = ab_state(&mut process, &wq, t).unwrap();
        for v in 0..4 {
            assert!(state.tau[v] >= t);
            assert!(state.entry[v].is_some());
            assert_eq!(state.entry[v].unwrap().head(wq.network()), v);
        }
        let forest = state.forest(&wq);
        forest.validate(wq.network()).unwrap();
        assert_eq!(forest.roots(), &[wq.boundary()]);
        assert_eq!(forest.member_count(), 5);
    }

    #[test]
    fn ab_forest_with_degenerate_horizon_is_empty() {
        let wq = path_quotient();
        let mut process = PointProcess::sample(&wq, 0.0, 5.0, WalkRng::from_seed(8)).unwrap();
        let forest = ab_forest(&mut process, &wq, 3.0, Horizon::At(3.0)).unwrap();
        assert_eq!(forest.member_count(), 0);
        assert!(forest.roots().is_empty());
        assert!(matches!(
            ab_forest(&mut process, &wq, 3.0, Horizon::At(2.0)),
            Err(InterlacementError::BadWindow(_, _))
        ));
    }

    #[test]
    fn single_trajectory_forest_is_its_first_entry_tree() {
        let wq = path_quotient();
        let net = wq.network();
        let boundary = wq.boundary();
        let walk = manual_walk(net, &[boundary, 1, 0, 1, 2...
    }
}
