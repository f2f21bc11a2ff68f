//! Grid discretization of a domain into a density-weighted metric graph.
//!
//! Nodes sit on the lattice `corner + (i h, j h)` anchored at the lower-left
//! corner of the domain's bounding box, so the lattice at `h` is a subset of
//! the lattice at `h / 2`. A lattice point becomes a node when it lies in the
//! region with boundary distance `d > h / 2`; edges join 8-neighbours whose
//! open segment stays inside the region.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Slack added to the longest admissible edge (`h·√2`).
pub const EDGE_LEN_SLACK: f64 = 1e-12;

/// Worst-case ratio of 8-neighbour grid path length to Euclidean length,
/// `sec(π/8)`.
pub const GRID_STRETCH: f64 = 1.082_392_200_292_393_9;

const NO_NODE: u32 = u32::MAX;

/// The four families of edge weights carried by a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// Euclidean edge length; shortest paths give the inner metric.
    Inner,
    /// Length times the averaged density `1/d`.
    Qh,
    /// Length times the averaged deformed density `σ_ε`.
    Deformed,
    /// Deformed length times the averaged back-deformation density `1/σ_ε`.
    BackDeformed,
}

impl WeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::Inner => "inner",
            WeightKind::Qh => "qh",
            WeightKind::Deformed => "deformed",
            WeightKind::BackDeformed => "back-deformed",
        }
    }
}

/// Immutable discretization of a domain.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    positions: Vec<Point>,
    d: Vec<f64>,
    inv_d: Vec<f64>,
    lattice: Vec<u32>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    lens: Vec<f64>,
    dropped_components: usize,
    dropped_nodes: usize,
}

const STEPS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Discretizes `dom` at spacing `h`, keeping the largest connected component.
pub fn discretize(dom: &DomainSpec, h: f64) -> Result<MetricGraph> {
    if !(h > 0.0 && h.is_finite()) || h >= dom.diameter() / 4.0 {
        return Err(Error::EmptyGraph { h });
    }
    let (lo, hi) = dom.bbox();
    let nx = ((hi.x - lo.x) / h).floor() as usize + 1;
    let ny = ((hi.y - lo.y) / h).floor() as usize + 1;
    let at = |i: usize, j: usize| Point::new(lo.x + i as f64 * h, lo.y + j as f64 * h);

    // Candidate lattice points with their boundary distance, row-major.
    let rows: Vec<Vec<(usize, f64)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .filter_map(|i| {
                    let p = at(i, j);
                    let dist = dom.boundary_distance(p);
                    (dist > h / 2.0 && dom.contains_point(p)).then_some((i, dist))
                })
                .collect()
        })
        .collect();

    let mut cand_lattice = vec![NO_NODE; nx * ny];
    let mut cand_pos = Vec::new();
    let mut cand_d = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for &(i, dist) in row {
            cand_lattice[j * nx + i] = cand_pos.len() as u32;
            cand_pos.push((i, j));
            cand_d.push(dist);
        }
    }
    if cand_pos.is_empty() {
        return Err(Error::EmptyGraph { h });
    }

    let adjacency: Vec<Vec<u32>> = cand_pos
        .par_iter()
        .map(|&(i, j)| {
            let p = at(i, j);
            STEPS
                .iter()
                .filter_map(|&(di, dj)| {
                    let (ii, jj) = (i as isize + di, j as isize + dj);
                    if ii < 0 || jj < 0 || ii >= nx as isize || jj >= ny as isize {
                        return None;
                    }
                    let other = cand_lattice[jj as usize * nx + ii as usize];
                    if other == NO_NODE {
                        return None;
                    }
                    dom.contains_segment(p, at(ii as usize, jj as usize)).then_some(other)
                })
                .collect()
        })
        .collect();

    // Components by BFS in id order; the largest wins, earliest on ties.
    let n = cand_pos.len();
    let mut comp = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if comp[s] != u32::MAX {
            continue;
        }
        let c = sizes.len() as u32;
        let mut stack = vec![s];
        comp[s] = c;
        let mut size = 0usize;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in &adjacency[u] {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = c;
                    stack.push(v as usize);
                }
            }
        }
        sizes.push(size);
    }
    let keep = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c as u32)
        .expect("at least one component");

    let mut remap = vec![NO_NODE; n];
    let mut positions = Vec::new();
    let mut d = Vec::new();
    let mut lattice = vec![NO_NODE; nx * ny];
    for u in 0..n {
        if comp[u] == keep {
            remap[u] = positions.len() as u32;
            let (i, j) = cand_pos[u];
            lattice[j * nx + i] = positions.len() as u32;
            positions.push(at(i, j));
            d.push(cand_d[u]);
        }
    }
    let mut offsets = Vec::with_capacity(positions.len() + 1);
    let mut neighbors = Vec::new();
    let mut lens = Vec::new();
    offsets.push(0);
    for u in 0..n {
        if comp[u] != keep {
            continue;
        }
        let mut adj: Vec<u32> = adjacency[u].iter().map(|&v| remap[v as usize]).collect();
        adj.sort_unstable();
        let pu = positions[remap[u] as usize];
        for v in adj {
            neighbors.push(v);
            lens.push(pu.dist(positions[v as usize]));
        }
        offsets.push(neighbors.len());
    }
    let inv_d = d.iter().map(|&x| 1.0 / x).collect();
    let kept = positions.len();
    Ok(MetricGraph {
        h,
        origin: lo,
        nx,
        ny,
        positions,
        d,
        inv_d,
        lattice,
        offsets,
        neighbors,
        lens,
        dropped_components: sizes.len() - 1,
        dropped_nodes: n - kept,
    })
}

impl MetricGraph {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Boundary distance `d(v)`.
    pub fn d(&self, v: usize) -> f64 {
        self.d[v]
    }

    pub fn d_values(&self) -> &[f64] {
        &self.d
    }

    pub fn inv_d(&self) -> &[f64] {
        &self.inv_d
    }

    pub fn dropped_components(&self) -> usize {
        self.dropped_components
    }

    pub fn dropped_nodes(&self) -> usize {
        self.dropped_nodes
    }

    /// Neighbours of `v` with Euclidean edge lengths, in increasing id order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[v], self.offsets[v + 1]);
        self.neighbors[a..b]
            .iter()
            .zip(&self.lens[a..b])
            .map(|(&u, &l)| (u as usize, l))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Each undirected edge once, as `(a, b, len)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |a| {
            self.neighbors(a)
                .filter(move |&(b, _)| a < b)
                .map(move |(b, l)| (a, b, l))
        })
    }

    pub fn edge_len(&self, a: usize, b: usize) -> Option<f64> {
        self.neighbors(a).find(|&(u, _)| u == b).map(|(_, l)| l)
    }

    /// Node with the largest boundary distance; lowest id on ties.
    pub fn deepest_node(&self) -> usize {
        let mut best = 0;
        for v in 1..self.node_count() {
            if self.d[v] > self.d[best] {
                best = v;
            }
        }
        best
    }

    /// Nodes with `d < 2h`, the computable stand-in for the boundary.
    pub fn boundary_proximal(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.d[v] < 2.0 * self.h).collect()
    }

    /// Node nearest to `p` in the Euclidean sense; lowest id on ties.
    pub fn nearest_node(&self, p: Point) -> usize {
        let fi = ((p.x - self.origin.x) / self.h).round();
        let fj = ((p.y - self.origin.y) / self.h).round();
        let ci = fi.clamp(0.0, (self.nx - 1) as f64) as isize;
        let cj = fj.clamp(0.0, (self.ny - 1) as f64) as isize;
        let center = Point::new(self.origin.x + ci as f64 * self.h, self.origin.y + cj as f64 * self.h);
        let offset = (p.x - center.x).abs().max((p.y - center.y).abs());
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.nx.max(self.ny) as isize;
        for ring in 0..=max_ring {
            if let Some((bd, _)) = best {
                // Chebyshev bound: ring points are at least ring*h - offset away.
                if ring as f64 * self.h - offset > bd {
                    break;
                }
            }
            for j in (cj - ring)..=(cj + ring) {
                for i in (ci - ring)..=(ci + ring) {
                    let on_ring = (j - cj).abs() == ring || (i - ci).abs() == ring;
                    if !on_ring || i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                        continue;
                    }
                    let v = self.lattice[j as usize * self.nx + i as usize];
                    if v == NO_NODE {
                        continue;
                    }
                    let v = v as usize;
                    let dist = p.dist(self.positions[v]);
                    best = match best {
                        Some((bd, bv)) if bd < dist || (bd == dist && bv < v) => Some((bd, bv)),
                        _ => Some((dist, v)),
                    };
                }
            }
        }
        best.map(|(_, v)| v).expect("graph is nonempty")
    }

    /// Nodes within Euclidean distance `r` of `p` (closed ball).
    pub fn nodes_in_disk(&self, p: Point, r: f64) -> Vec<usize> {
        let i0 = (((p.x - r - self.origin.x) / self.h).floor().max(0.0)) as usize;
        let j0 = (((p.y - r - self.origin.y) / self.h).floor().max(0.0)) as usize;
        let i1 = (((p.x + r - self.origin.x) / self.h).ceil().max(0.0) as usize).min(self.nx - 1);
        let j1 = (((p.y + r - self.origin.y) / self.h).ceil().max(0.0) as usize).min(self.ny - 1);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let v = self.lattice[j * self.nx + i];
                if v != NO_NODE && p.dist(self.positions[v as usize]) <= r {
                    out.push(v as usize);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn qh_edge_weight(&self, a: usize, b: usize, len: f64) -> f64 {
        len * 0.5 * (self.inv_d[a] + self.inv_d[b])
    }

    /// Serializes the graph in the text dump format. Floats use Rust's
    /// shortest round-trip representation, so `from_dump(to_dump(g))`
    /// reproduces every bit.
    pub fn to_dump(&self) -> String {
        self.dump_with_columns(&[])
    }

    /// Dump with extra per-node columns appended after `d`.
    pub fn dump_with_columns(&self, extra: &[(&str, &[f64])]) -> String {
        let mut s = String::new();
        writeln!(s, "qhlab-graph 1").unwrap();
        writeln!(s, "h {:?}", self.h).unwrap();
        writeln!(s, "origin {:?} {:?}", self.origin.x, self.origin.y).unwrap();
        writeln!(s, "lattice {} {}", self.nx, self.ny).unwrap();
        writeln!(s, "dropped {} {}", self.dropped_components, self.dropped_nodes).unwrap();
        let mut cols = String::from("id x y d");
        for (name, _) in extra {
            cols.push(' ');
            cols.push_str(name);
        }
        writeln!(s, "nodes {} {}", self.node_count(), cols).unwrap();
        for v in 0..self.node_count() {
            let p = self.positions[v];
            write!(s, "{} {:?} {:?} {:?}", v, p.x, p.y, self.d[v]).unwrap();
            for (_, col) in extra {
                write!(s, " {:?}", col[v]).unwrap();
            }
            s.push('\n');
        }
        writeln!(s, "edges {} i j len", self.edge_count()).unwrap();
        for (a, b, l) in self.edges() {
            writeln!(s, "{a} {b} {l:?}").unwrap();
        }
        s
    }

    /// Parses the text dump. Extra node columns are ignored.
    pub fn from_dump(text: &str) -> Result<MetricGraph> {
        let bad = |what: &str| Error::Parse(format!("graph dump: {what}"));
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(what));
        if next("header")?.trim() != "qhlab-graph 1" {
            return Err(bad("unsupported header"));
        }
        let field = |line: &str, key: &str| -> Result<Vec<String>> {
            let mut it = line.split_whitespace();
            if it.next() != Some(key) {
                return Err(bad(&format!("expected `{key}`")));
            }
            Ok(it.map(str::to_string).collect())
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad integer `{s}`")));

        let hv = field(next("h")?, "h")?;
        let h = num(hv.first().ok_or_else(|| bad("h"))?)?;
        let ov = field(next("origin")?, "origin")?;
        if ov.len() != 2 {
            return Err(bad("origin"));
        }
        let origin = Point::new(num(&ov[0])?, num(&ov[1])?);
        let lv = field(next("lattice")?, "lattice")?;
        if lv.len() != 2 {
            return Err(bad("lattice"));
        }
        let (nx, ny) = (int(&lv[0])?, int(&lv[1])?);
        let dv = field(next("dropped")?, "dropped")?;
        if dv.len() != 2 {
            return Err(bad("dropped"));
        }
        let (dropped_components, dropped_nodes) = (int(&dv[0])?, int(&dv[1])?);
        let nv = field(next("nodes")?, "nodes")?;
        let n = int(nv.first().ok_or_else(|| bad("node count"))?)?;

        let mut positions = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut lattice = vec![NO_NODE; nx * ny];
        for v in 0..n {
            let parts: Vec<&str> = next("node row")?.split_whitespace().collect();
            if parts.len() < 4 || int(parts[0])? != v {
                return Err(bad("node row"));
            }
            let p = Point::new(num(parts[1])?, num(parts[2])?);
            let i = ((p.x - origin.x) / h).round() as usize;
            let j = ((p.y - origin.y) / h).round() as usize;
            if i >= nx || j >= ny {
                return Err(bad("node outside lattice"));
            }
            lattice[j * nx + i] = v as u32;
            positions.push(p);
            d.push(num(parts[3])?);
        }
        let ev = field(next("edges")?, "edges")?;
        let m = int(ev.first().ok_or_else(|| bad("edge count"))?)?;
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for _ in 0..m {
            let parts: Vec<&str> = next("edge row")?.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("edge row"));
            }
            let (a, b, l) = (int(parts[0])?, int(parts[1])?, num(parts[2])?);
            if a >= n || b >= n {
                return Err(bad("edge endpoint"));
            }
            adj[a].push((b as u32, l));
            adj[b].push((a as u32, l));
        }
        let mut offsets = vec![0];
        let mut neighbors = Vec::new();
        let mut lens = Vec::new();
        for list in &mut adj {
            list.sort_by_key(|&(u, _)| u);
            for &(u, l) in list.iter() {
                neighbors.push(u);
                lens.push(l);
            }
            offsets.push(neighbors.len());
        }
        let inv_d = d.iter().map(|&x| 1.0 / x).collect();
        Ok(MetricGraph {
            h,
            origin,
            nx,
            ny,
            positions,
            d,
            inv_d,
            lattice,
            offsets,
            neighbors,
            lens,
            dropped_components,
            dropped_nodes,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::corpus;

    fn square() -> DomainSpec {
        corpus("square", &BTreeMap::new()).unwrap()
    }

    #[test]
    fn unit_square_quarter_grid() {
        // Lattice points at multiples of 0.25; only the 3x3 interior block has
        // d > 0.125, and it is fully 8-connected.
        let g = discretize(&square(), 0.25).unwrap();
        assert_eq!(g.node_count(), 9);
        assert!(g.d_values().iter().all(|&d| d > 0.125));
        // 12 axis edges + 8 diagonals.
        assert_eq!(g.edge_count(), 20);
        assert_eq!(g.degree(g.nearest_node(Point::new(0.5, 0.5))), 8);
        assert_eq!(g.dropped_components(), 0);
    }

    #[test]
    fn too_coarse_is_empty() {
        assert_eq!(discretize(&square(), 1.0).unwrap_err().code(), "empty-graph");
    }

    #[test]
    fn edges_respect_containment_and_length() {
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), 4.0);
        let dom = corpus("comb", &p).unwrap();
        let g = discretize(&dom, 0.04).unwrap();
        for (a, b, l) in g.edges() {
            assert!(dom.contains_segment(g.position(a), g.position(b)));
            assert!(l <= g.h() * 2f64.sqrt() + EDGE_LEN_SLACK);
        }
        assert!(g.d_values().iter().all(|&d| d > g.h() / 2.0));
    }

    #[test]
    fn nearest_node_prefers_exact_lattice_points() {
        let g = discretize(&square(), 0.05).unwrap();
        let v = g.nearest_node(Point::new(0.5, 0.5));
        assert!(g.position(v).dist(Point::new(0.5, 0.5)) < 1e-12);
        // Outside the clearance band the nearest node is the first interior one.
        let w = g.nearest_node(Point::new(-1.0, -1.0));
        assert!(g.position(w).dist(Point::new(0.05, 0.05)) < 1e-12);
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let g = discretize(&corpus("disk", &BTreeMap::new()).unwrap(), 0.1).unwrap();
        let text = g.to_dump();
        let back = MetricGraph::from_dump(&text).unwrap();
        assert_eq!(back.to_dump(), text);
        assert_eq!(back.node_count(), g.node_count());
        for v in 0..g.node_count() {
            assert_eq!(back.d(v).to_bits(), g.d(v).to_bits());
            assert_eq!(back.position(v), g.position(v));
        }
    }
}
