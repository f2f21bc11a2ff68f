//! Deterministic, resolution-independent sampling of nodes, pairs and
//! triples.
//!
//! Points are drawn in the continuum, snapped to a fixed lattice and then
//! mapped to the nearest graph node. With `snap` set to the coarsest spacing
//! of a refinement study, every sampled point is an exact node at every finer
//! spacing, so refinement comparisons see the same configurations.
//! Selection is stratified by boundary-distance deciles so that
//! boundary-near points are always represented.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::DomainSpec;
use crate::geometry::Point;
use crate::graph::MetricGraph;

pub const DEFAULT_SEED: u64 = 42;

const DECILES: usize = 10;
const POOL: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Lattice spacing the continuum draws are snapped to.
    pub snap: f64,
    /// Minimum boundary distance of a sampled point.
    pub min_clearance: f64,
}

impl SamplerConfig {
    /// Sampler for a single resolution `h`.
    pub fn for_h(seed: u64, h: f64) -> Self {
        Self {
            seed,
            snap: h,
            min_clearance: 2.0 * h,
        }
    }

    /// Sampler shared across a refinement study; `coarsest` is the largest
    /// spacing in the study.
    pub fn for_refinement(seed: u64, coarsest: f64) -> Self {
        Self::for_h(seed, coarsest)
    }
}

/// Stratified sequence of points in the domain.
#[derive(Debug, Clone)]
pub struct PointSampler {
    points: Vec<Point>,
}

impl PointSampler {
    /// Precomputes `count` stratified points. The first `k` points do not
    /// depend on `count`, so larger samples extend smaller ones.
    pub fn new(dom: &DomainSpec, cfg: SamplerConfig, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (lo, hi) = dom.bbox();
        let pool_target = POOL;
        let mut pool: Vec<(f64, Point)> = Vec::with_capacity(pool_target);
        let mut seen = std::collections::HashSet::new();
        let mut attempts = 0usize;
        while pool.len() < pool_target && attempts < pool_target * 20 {
            attempts += 1;
            let raw = Point::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
            let p = Point::new(
                lo.x + ((raw.x - lo.x) / cfg.snap).round() * cfg.snap,
                lo.y + ((raw.y - lo.y) / cfg.snap).round() * cfg.snap,
            );
            if !seen.insert((p.x.to_bits(), p.y.to_bits())) || !dom.contains_point(p) {
                continue;
            }
            let d = dom.boundary_distance(p);
            if d >= cfg.min_clearance {
                pool.push((d, p));
            }
        }
        pool.sort_by(|a, b| a.0.total_cmp(&b.0));
        let per = pool.len().div_ceil(DECILES).max(1);
        let mut strata: Vec<Vec<Point>> = pool.chunks(per).map(|c| c.iter().map(|x| x.1).collect()).collect();
        for s in &mut strata {
            s.shuffle(&mut rng);
        }
        let mut points = Vec::with_capacity(count);
        let mut cursor = vec![0usize; strata.len()];
        let mut k = 0usize;
        while points.len() < count && !strata.is_empty() {
            let s = k % strata.len();
            if cursor[s] < strata[s].len() {
                points.push(strata[s][cursor[s]]);
                cursor[s] += 1;
            } else if cursor.iter().zip(&strata).all(|(c, st)| *c >= st.len()) {
                // Pool exhausted: recycle in the same order.
                cursor.iter_mut().for_each(|c| *c = 0);
            }
            k += 1;
        }
        Self { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn nodes(&self, g: &MetricGraph) -> Vec<usize> {
        self.points.iter().map(|&p| g.nearest_node(p)).collect()
    }
}

/// `count` stratified nodes.
pub fn sample_nodes(dom: &DomainSpec, g: &MetricGraph, cfg: SamplerConfig, count: usize) -> Vec<usize> {
    PointSampler::new(dom, cfg, count).nodes(g)
}

/// `count` pairs of distinct nodes built from consecutive stratified draws.
pub fn sample_pairs(dom: &DomainSpec, g: &MetricGraph, cfg: SamplerConfig, count: usize) -> Vec<(usize, usize)> {
    let nodes = sample_nodes(dom, g, cfg, 2 * count + 16);
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count && i + 1 < nodes.len() {
        if nodes[i] != nodes[i + 1] {
            out.push((nodes[i], nodes[i + 1]));
        }
        i += 2;
    }
    out
}

/// `count` triples of pairwise distinct nodes.
pub fn sample_triples(dom: &DomainSpec, g: &MetricGraph, cfg: SamplerConfig, count: usize) -> Vec<[usize; 3]> {
    let nodes = sample_nodes(dom, g, cfg, 3 * count + 24);
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count && i + 2 < nodes.len() {
        let t = [nodes[i], nodes[i + 1], nodes[i + 2]];
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            out.push(t);
        }
        i += 3;
    }
    out
}

/// `count` nodes of `g` drawn without a domain: node ids are split into
/// boundary-distance deciles, each decile is shuffled, and the deciles are
/// visited round-robin. Prefix-stable in `count`; repeats once exhausted.
pub fn stratified_nodes(g: &MetricGraph, seed: u64, count: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (0..g.node_count()).collect();
    ids.sort_by(|&a, &b| g.d(a).total_cmp(&g.d(b)).then(a.cmp(&b)));
    let per = ids.len().div_ceil(DECILES).max(1);
    let mut strata: Vec<Vec<usize>> = ids.chunks(per).map(<[usize]>::to_vec).collect();
    for s in &mut strata {
        s.shuffle(&mut rng);
    }
    let total = ids.len();
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count && total > 0 {
        let s = &strata[k % strata.len()];
        let round = k / strata.len();
        if let Some(&v) = s.get(round % s.len().max(1)) {
            out.push(v);
        }
        k += 1;
    }
    out
}

/// `count` pairs of distinct nodes from [`stratified_nodes`].
pub fn stratified_pairs(g: &MetricGraph, seed: u64, count: usize) -> Vec<(usize, usize)> {
    if g.node_count() < 2 {
        return Vec::new();
    }
    let nodes = stratified_nodes(g, seed, 2 * count + 16);
    let mut out: Vec<(usize, usize)> = nodes
        .chunks_exact(2)
        .filter(|c| c[0] != c[1])
        .map(|c| (c[0], c[1]))
        .collect();
    out.truncate(count);
    out
}

/// Seeded generator for the probes that draw their own randomness.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
