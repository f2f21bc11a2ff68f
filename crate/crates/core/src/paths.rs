//! Shortest paths and distance fields on a [`MetricGraph`].
//!
//! Every search is Dijkstra with a `(distance, node id)` heap order. When two
//! relaxations reach a node with the same tentative distance, the predecessor
//! with the smaller id wins, which makes reconstructed geodesics reproducible.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, WeightKind};

pub const NO_PRED: u32 = u32::MAX;

/// Edge weight evaluator. Every weight is the Euclidean edge length times a
/// product of endpoint-averaged node densities.
#[derive(Debug, Clone, Copy)]
pub enum Weighting<'a> {
    Inner,
    Qh {
        inv_d: &'a [f64],
    },
    Deformed {
        sigma: &'a [f64],
    },
    BackDeformed {
        sigma: &'a [f64],
    },
    /// Quasihyperbolic metric of the deformed space: deformed length times
    /// the averaged density `1/d_ε`.
    DeformedQh {
        sigma: &'a [f64],
        inv_d_eps: &'a [f64],
    },
}

impl<'a> Weighting<'a> {
    /// Weighting for the kinds a bare graph carries (`Inner`, `Qh`).
    pub fn for_graph(g: &'a MetricGraph, kind: WeightKind) -> Result<Self> {
        match kind {
            WeightKind::Inner => Ok(Weighting::Inner),
            WeightKind::Qh => Ok(Weighting::Qh { inv_d: g.inv_d() }),
            other => Err(Error::Config(format!(
                "weight kind `{}` needs a deformation context",
                other.as_str()
            ))),
        }
    }

    #[inline]
    pub fn weight(&self, a: usize, b: usize, len: f64) -> f64 {
        match *self {
            Weighting::Inner => len,
            Weighting::Qh { inv_d } => len * 0.5 * (inv_d[a] + inv_d[b]),
            Weighting::Deformed { sigma } => len * 0.5 * (sigma[a] + sigma[b]),
            Weighting::BackDeformed { sigma } => {
                len * 0.5 * (sigma[a] + sigma[b]) * 0.5 * (1.0 / sigma[a] + 1.0 / sigma[b])
            }
            Weighting::DeformedQh { sigma, inv_d_eps } => {
                len * 0.5 * (sigma[a] + sigma[b]) * 0.5 * (inv_d_eps[a] + inv_d_eps[b])
            }
        }
    }

    /// Total weight of a node path.
    pub fn path_length(&self, g: &MetricGraph, nodes: &[usize]) -> f64 {
        nodes
            .windows(2)
            .map(|w| {
                let len = g.edge_len(w[0], w[1]).expect("path nodes are adjacent");
                self.weight(w[0], w[1], len)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// When a search may stop early.
#[derive(Debug, Clone, Copy)]
pub enum Stop<'a> {
    Exhaust,
    /// Stop once this node is settled.
    Target(usize),
    /// Stop once every listed node is settled.
    Targets(&'a [usize]),
    /// Settle only nodes with distance `< radius`.
    Radius(f64),
}

/// Result of a (possibly truncated) search. Unsettled nodes carry `∞`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, v: usize) -> f64 {
        self.dist[v]
    }

    /// Node path from the source that reached `target`, source first.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while self.pred[v] != NO_PRED {
            v = self.pred[v] as usize;
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

/// Multi-source Dijkstra. Each source starts at its given offset.
pub fn dijkstra(g: &MetricGraph, w: &Weighting<'_>, sources: &[(usize, f64)], stop: Stop<'_>) -> DistanceField {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(s, off) in sources {
        if off < dist[s] {
            dist[s] = off;
            heap.push(Entry {
                dist: off,
                node: s as u32,
            });
        }
    }
    let mut pending = match stop {
        Stop::Targets(t) => {
            let mut want = vec![false; n];
            let mut count = 0;
            for &v in t {
                if !want[v] {
                    want[v] = true;
                    count += 1;
                }
            }
            Some((want, count))
        }
        _ => None,
    };
    if let Some((_, 0)) = pending {
        return DistanceField { dist, pred };
    }
    while let Some(Entry { dist: du, node }) = heap.pop() {
        let u = node as usize;
        if done[u] || du > dist[u] {
            continue;
        }
        if let Stop::Radius(r) = stop {
            if du >= r {
                break;
            }
        }
        done[u] = true;
        match stop {
            Stop::Target(t) if t == u => break,
            Stop::Targets(_) => {
                let (want, count) = pending.as_mut().expect("targets set");
                if want[u] {
                    *count -= 1;
                    if *count == 0 {
                        break;
                    }
                }
            }
            _ => {}
        }
        for (v, len) in g.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = du + w.weight(u, v, len);
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u as u32;
                heap.push(Entry {
                    dist: nd,
                    node: v as u32,
                });
            } else if nd == dist[v] && (u as u32) < pred[v] {
                pred[v] = u as u32;
            }
        }
    }
    if let Stop::Radius(r) = stop {
        for (d, settled) in dist.iter_mut().zip(&done) {
            if !*settled || *d >= r {
                *d = f64::INFINITY;
            }
        }
    } else if !matches!(stop, Stop::Exhaust) {
        for (d, settled) in dist.iter_mut().zip(&done) {
            if !*settled {
                *d = f64::INFINITY;
            }
        }
    }
    DistanceField { dist, pred }
}

/// Nodes at weighted distance `< radius` from `center`, with distances,
/// sorted by node id. Uses sparse scratch state, so it is cheap for small
/// balls on large graphs.
pub fn local_ball(g: &MetricGraph, w: &Weighting<'_>, center: usize, radius: f64) -> Vec<(usize, f64)> {
    let mut dist: HashMap<u32, f64> = HashMap::new();
    let mut settled: Vec<(usize, f64)> = Vec::new();
    let mut heap = BinaryHeap::new();
    if radius <= 0.0 {
        return settled;
    }
    dist.insert(center as u32, 0.0);
    heap.push(Entry {
        dist: 0.0,
        node: center as u32,
    });
    let mut done: HashSet<u32> = HashSet::new();
    while let Some(Entry { dist: du, node }) = heap.pop() {
        if du >= radius {
            break;
        }
        if done.contains(&node) || du > dist[&node] {
            continue;
        }
        done.insert(node);
        settled.push((node as usize, du));
        for (v, len) in g.neighbors(node as usize) {
            let key = v as u32;
            if done.contains(&key) {
                continue;
            }
            let nd = du + w.weight(node as usize, v, len);
            if nd < radius && dist.get(&key).is_none_or(|&old| nd < old) {
                dist.insert(key, nd);
                heap.push(Entry { dist: nd, node: key });
            }
        }
    }
    settled.sort_unstable_by_key(|&(v, _)| v);
    settled
}

/// A node path realizing a shortest path under one weight kind, with its
/// length under every weight kind available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub kind: WeightKind,
    pub nodes: Vec<usize>,
    pub inner: f64,
    pub qh: f64,
    pub deformed: Option<f64>,
}

impl GeodesicPath {
    pub fn from_nodes(g: &MetricGraph, kind: WeightKind, nodes: Vec<usize>, sigma: Option<&[f64]>) -> Self {
        let inner = Weighting::Inner.path_length(g, &nodes);
        let qh = Weighting::Qh { inv_d: g.inv_d() }.path_length(g, &nodes);
        let deformed = sigma.map(|s| Weighting::Deformed { sigma: s }.path_length(g, &nodes));
        Self {
            kind,
            nodes,
            inner,
            qh,
            deformed,
        }
    }

    pub fn length(&self, kind: WeightKind) -> Option<f64> {
        match kind {
            WeightKind::Inner => Some(self.inner),
            WeightKind::Qh => Some(self.qh),
            WeightKind::Deformed => self.deformed,
            WeightKind::BackDeformed => None,
        }
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().expect("nonempty path")
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.contains(&v)
    }
}

/// Shortest path between `x` and `y` under an explicit weighting.
pub fn shortest_path_with(
    g: &MetricGraph,
    kind: WeightKind,
    w: &Weighting<'_>,
    sigma: Option<&[f64]>,
    x: usize,
    y: usize,
) -> Result<GeodesicPath> {
    let field = dijkstra(g, w, &[(x, 0.0)], Stop::Target(y));
    let nodes = field.path_to(y).ok_or(Error::Unreachable { from: x, to: y })?;
    Ok(GeodesicPath::from_nodes(g, kind, nodes, sigma))
}

/// Shortest path under `Inner` or `Qh`.
pub fn shortest_path(g: &MetricGraph, kind: WeightKind, x: usize, y: usize) -> Result<GeodesicPath> {
    let w = Weighting::for_graph(g, kind)?;
    shortest_path_with(g, kind, &w, None, x, y)
}

pub fn qh_distance(g: &MetricGraph, x: usize, y: usize) -> Result<f64> {
    Ok(shortest_path(g, WeightKind::Qh, x, y)?.qh)
}

pub fn inner_distance(g: &MetricGraph, x: usize, y: usize) -> Result<f64> {
    Ok(shortest_path(g, WeightKind::Inner, x, y)?.inner)
}

/// Pointwise minimum over the sources of the weighted distance.
pub fn distance_field(g: &MetricGraph, w: &Weighting<'_>, sources: &[usize]) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::EmptyInput("distance_field sources"));
    }
    let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
    Ok(dijkstra(g, w, &seeds, Stop::Exhaust).dist)
}

/// Distances from the source set evaluated at `targets` only; the search
/// stops once all targets are settled.
pub fn distances_at(g: &MetricGraph, w: &Weighting<'_>, sources: &[usize], targets: &[usize]) -> Vec<f64> {
    let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
    let field = dijkstra(g, w, &seeds, Stop::Targets(targets));
    targets.iter().map(|&t| field.dist[t]).collect()
}
