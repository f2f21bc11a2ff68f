//! Gehring–Hayman and ball-separation constants, and the probe of the main
//! lemma's distance bound.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::DeformationContext;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{MetricGraph, WeightKind};
use crate::paths::{distances_at, shortest_path, GeodesicPath, Weighting};

/// Bisection steps of the separating-radius search.
pub const BS_ITERATIONS: usize = 40;
/// Number of geodesic points examined per pair.
pub const BS_POINTS_PER_PAIR: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhRecord {
    pub x: usize,
    pub y: usize,
    pub qh_length: f64,
    /// Inner length of the quasihyperbolic geodesic.
    pub geodesic_inner: f64,
    pub inner_distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhReport {
    #[serde(rename = "C_gh_hat")]
    pub c_gh_hat: f64,
    pub pairs_sampled: usize,
    pub worst: Option<(usize, usize)>,
    pub records: Vec<GhRecord>,
}

pub fn gh_record(g: &MetricGraph, x: usize, y: usize) -> Result<GhRecord> {
    let path = shortest_path(g, WeightKind::Qh, x, y)?;
    let inner_distance = shortest_path(g, WeightKind::Inner, x, y)?.inner;
    let ratio = if x == y { 1.0 } else { path.inner / inner_distance };
    Ok(GhRecord {
        x,
        y,
        qh_length: path.qh,
        geodesic_inner: path.inner,
        inner_distance,
        ratio,
    })
}

/// `C_gh` estimate: the largest ratio of the inner length of a
/// quasihyperbolic geodesic to the inner distance of its endpoints.
pub fn gh_constant(g: &MetricGraph, pairs: &[(usize, usize)]) -> Result<GhReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("gh pairs"));
    }
    let records = pairs
        .par_iter()
        .map(|&(x, y)| gh_record(g, x, y))
        .collect::<Result<Vec<_>>>()?;
    let mut c_gh_hat = 0.0;
    let mut worst = None;
    for r in &records {
        if r.ratio > c_gh_hat {
            c_gh_hat = r.ratio;
            worst = Some((r.x, r.y));
        }
    }
    Ok(GhReport {
        c_gh_hat,
        pairs_sampled: pairs.len(),
        worst,
        records,
    })
}

/// Result of one separating-radius search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparatingRadius {
    pub radius: f64,
    /// Radii evaluated during the search.
    pub brackets_checked: usize,
    /// Evaluated radii that separated while a larger one did not.
    pub monotonicity_violations: usize,
}

/// Breadth-first connectivity on the graph with the closed disk `B(z, r)`
/// removed. Reused across calls through a stamp buffer.
struct Separator<'a> {
    g: &'a MetricGraph,
    stamp: Vec<u32>,
    round: u32,
    queue: Vec<usize>,
}

impl<'a> Separator<'a> {
    fn new(g: &'a MetricGraph) -> Self {
        Self {
            g,
            stamp: vec![0; g.node_count()],
            round: 0,
            queue: Vec::new(),
        }
    }

    /// Whether removing `B(z, r)` separates `x` from `y` or swallows one of
    /// them.
    fn separates(&mut self, x: usize, y: usize, z: Point, r: f64) -> bool {
        let g = self.g;
        let removed = |v: usize| g.position(v).dist(z) <= r;
        if removed(x) || removed(y) {
            return true;
        }
        self.round += 1;
        let round = self.round;
        self.queue.clear();
        self.queue.push(x);
        self.stamp[x] = round;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for (v, _) in g.neighbors(u) {
                if self.stamp[v] == round || removed(v) {
                    continue;
                }
                if v == y {
                    return false;
                }
                self.stamp[v] = round;
                self.queue.push(v);
            }
        }
        true
    }

    fn minimal_radius(&mut self, x: usize, y: usize, z: usize, upper: f64) -> SeparatingRadius {
        let g = self.g;
        if z == x || z == y {
            return SeparatingRadius {
                radius: 0.0,
                brackets_checked: 0,
                monotonicity_violations: 0,
            };
        }
        let zp = g.position(z);
        let mut radii: Vec<f64> = g.positions().iter().map(|p| p.dist(zp)).collect();
        radii.sort_by(f64::total_cmp);
        // Separation depends on r only through the set of removed nodes,
        // that is, through how many node distances are <= r.
        let mut memo: HashMap<usize, bool> = HashMap::new();
        let mut evaluated: Vec<(f64, bool)> = Vec::new();
        let mut test = |s: &mut Self, r: f64| {
            let count = radii.partition_point(|&d| d <= r);
            let sep = *memo.entry(count).or_insert_with(|| s.separates(x, y, zp, r));
            evaluated.push((r, sep));
            sep
        };
        let (mut lo, mut hi) = (0.0, upper.max(radii[radii.len() - 1]));
        let radius = if test(self, lo) {
            0.0
        } else {
            test(self, hi);
            for _ in 0..BS_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                if test(self, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // Snap to the smallest node distance in (lo, hi] that separates;
            // the bracket may hold several distances closer than its width.
            let first = radii.partition_point(|&d| d <= lo);
            let last = radii.partition_point(|&d| d <= hi) - 1;
            (first..=last)
                .map(|i| radii[i])
                .find(|&r| test(self, r))
                .unwrap_or(radii[last])
        };
        evaluated.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut seen_sep = false;
        let mut violations = 0;
        for &(_, s) in &evaluated {
            if s {
                seen_sep = true;
            } else if seen_sep {
                violations += 1;
            }
        }
        SeparatingRadius {
            radius,
            brackets_checked: evaluated.len(),
            monotonicity_violations: violations,
        }
    }
}

fn graph_extent(g: &MetricGraph) -> f64 {
    let (mut lo, mut hi) = (
        Point::new(f64::INFINITY, f64::INFINITY),
        Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in g.positions() {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    lo.dist(hi)
}

/// Smallest `r` such that removing the closed disk `B(z, r)` separates the
/// endpoints of `path` or contains one of them. `z` must lie on `path`.
pub fn bs_minimal_radius(g: &MetricGraph, path: &GeodesicPath, z: usize) -> Result<SeparatingRadius> {
    if !path.contains(z) {
        return Err(Error::NotOnGeodesic(z));
    }
    let mut sep = Separator::new(g);
    Ok(sep.minimal_radius(path.source(), path.target(), z, graph_extent(g)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsRecord {
    pub x: usize,
    pub y: usize,
    pub worst_z: usize,
    pub radius: f64,
    pub ratio: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saturation {
    pub pair: (usize, usize),
    pub step: usize,
    pub value: f64,
    pub refined_step: usize,
    pub refined_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsReport {
    #[serde(rename = "C_bs_hat")]
    pub c_bs_hat: f64,
    pub pairs_sampled: usize,
    pub brackets_checked: usize,
    pub monotonicity_violations: usize,
    pub saturation: Option<Saturation>,
    pub records: Vec<BsRecord>,
}

fn z_step(len: usize) -> usize {
    len.div_ceil(BS_POINTS_PER_PAIR).max(1)
}

struct PairScan {
    record: BsRecord,
    brackets: usize,
    violations: usize,
}

fn scan_pair(g: &MetricGraph, path: &GeodesicPath, step: usize, extent: f64) -> PairScan {
    let mut sep = Separator::new(g);
    let (x, y) = (path.source(), path.target());
    let mut record = BsRecord {
        x,
        y,
        worst_z: x,
        radius: 0.0,
        ratio: 0.0,
        points: 0,
    };
    let (mut brackets, mut violations) = (0, 0);
    for &z in path.nodes.iter().step_by(step) {
        let s = sep.minimal_radius(x, y, z, extent);
        brackets += s.brackets_checked;
        violations += s.monotonicity_violations;
        record.points += 1;
        let ratio = s.radius / g.d(z);
        if ratio > record.ratio {
            record.ratio = ratio;
            record.radius = s.radius;
            record.worst_z = z;
        }
    }
    PairScan {
        record,
        brackets,
        violations,
    }
}

/// `C_bs` estimate over `pairs`. The pair attaining the maximum is
/// rescanned at twice the point density to monitor saturation, and the
/// rescan contributes to the estimate.
pub fn bs_constant(g: &MetricGraph, pairs: &[(usize, usize)]) -> Result<BsReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("bs pairs"));
    }
    let extent = graph_extent(g);
    let scans = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<(GeodesicPath, PairScan)> {
            let path = shortest_path(g, WeightKind::Qh, x, y)?;
            let scan = scan_pair(g, &path, z_step(path.nodes.len()), extent);
            Ok((path, scan))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BsReport {
        c_bs_hat: 0.0,
        pairs_sampled: pairs.len(),
        brackets_checked: 0,
        monotonicity_violations: 0,
        saturation: None,
        records: Vec::with_capacity(scans.len()),
    };
    let mut worst: Option<usize> = None;
    for (i, (_, s)) in scans.iter().enumerate() {
        report.brackets_checked += s.brackets;
        report.monotonicity_violations += s.violations;
        if s.record.ratio > report.c_bs_hat {
            report.c_bs_hat = s.record.ratio;
            worst = Some(i);
        }
        report.records.push(s.record.clone());
    }
    if let Some(i) = worst {
        let path = &scans[i].0;
        let step = z_step(path.nodes.len());
        let refined_step = (step / 2).max(1);
        let refined = scan_pair(g, path, refined_step, extent);
        report.brackets_checked += refined.brackets;
        report.monotonicity_violations += refined.violations;
        report.saturation = Some(Saturation {
            pair: (path.source(), path.target()),
            step,
            value: scans[i].1.record.ratio,
            refined_step,
            refined_value: refined.record.ratio,
        });
        if refined.record.ratio > report.c_bs_hat {
            report.c_bs_hat = refined.record.ratio;
            report.records[i] = refined.record;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma41Report {
    #[serde(rename = "M_hat")]
    pub m_hat: f64,
    pub samples: usize,
    /// Samples meeting the hypothesis.
    pub kept: usize,
    pub worst: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
struct Lemma41Sample {
    kept: bool,
    ratio: f64,
}

/// Hypothesis constants `C₁ = C₂ = 1`.
const C1: f64 = 1.0;
const C2: f64 = 1.0;

fn lemma41_sample(ctx: &DeformationContext<'_>, u: usize, x: usize, y: usize) -> Result<Lemma41Sample> {
    let g = ctx.graph();
    let gamma = ctx.qh_path(x, y)?.nodes;
    let deformed = ctx.weighting(WeightKind::Deformed);
    let dist_eps = distances_at(g, &deformed, &gamma, &[u])[0];
    // diam_ε(γ) is estimated by the farthest point of γ from its endpoints;
    // this lies within a factor 2 of the true diameter.
    let from_x = distances_at(g, &deformed, &[x], &gamma);
    let from_y = distances_at(g, &deformed, &[y], &gamma);
    let diam = from_x.iter().chain(&from_y).copied().fold(0.0, f64::max);
    let kept = dist_eps <= (C1 * ctx.d_eps()[u]).min(C2 * diam);
    let ratio = if kept {
        distances_at(g, &Weighting::Inner, &gamma, &[u])[0] / g.d(u)
    } else {
        0.0
    };
    Ok(Lemma41Sample { kept, ratio })
}

/// `M̂ = max dist_d(u, γ)/d(u)` over the samples `(u, [x, y])` that satisfy
/// `dist_ε(u, γ) ≤ min{C₁ d_ε(u), C₂ diam_ε(γ)}`, with `γ` the
/// quasihyperbolic geodesic. Processing a prefix of the samples yields a
/// value no larger than processing all of them.
pub fn lemma41_probe(
    ctx: &DeformationContext<'_>,
    points: &[usize],
    pairs: &[(usize, usize)],
) -> Result<Lemma41Report> {
    let n = points.len().min(pairs.len());
    if n == 0 {
        return Err(Error::EmptyInput("lemma41 samples"));
    }
    let samples = (0..n)
        .into_par_iter()
        .map(|i| lemma41_sample(ctx, points[i], pairs[i].0, pairs[i].1))
        .collect::<Result<Vec<_>>>()?;
    let mut report = Lemma41Report {
        m_hat: 0.0,
        samples: n,
        kept: 0,
        worst: None,
    };
    for (i, s) in samples.iter().enumerate() {
        if !s.kept {
            continue;
        }
        report.kept += 1;
        if s.ratio > report.m_hat || report.worst.is_none() {
            report.m_hat = report.m_hat.max(s.ratio);
            report.worst = Some((points[i], pairs[i].0, pairs[i].1));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::corpus;
    use crate::domain::DomainSpec;
    use crate::geometry::Polygon;
    use crate::graph::discretize;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    #[test]
    fn adjacent_pair_has_unit_gh_ratio_and_no_bs_contribution() {
        let g = discretize(&corpus("square", &BTreeMap::new()).unwrap(), 0.05).unwrap();
        let (a, b, _) = g.edges().next().unwrap();
        let gh = gh_constant(&g, &[(a, b)]).unwrap();
        assert_eq!(gh.c_gh_hat, 1.0);
        let bs = bs_constant(&g, &[(a, b)]).unwrap();
        assert_eq!(bs.c_bs_hat, 0.0);
    }

    #[test]
    fn endpoint_radius_is_zero_and_off_path_is_rejected() {
        let g = discretize(&corpus("square", &BTreeMap::new()).unwrap(), 0.05).unwrap();
        let x = g.nearest_node(Point::new(0.2, 0.5));
        let y = g.nearest_node(Point::new(0.8, 0.5));
        let path = shortest_path(&g, WeightKind::Qh, x, y).unwrap();
        assert_eq!(bs_minimal_radius(&g, &path, x).unwrap().radius, 0.0);
        let off = g.nearest_node(Point::new(0.5, 0.9));
        assert_eq!(bs_minimal_radius(&g, &path, off).unwrap_err().code(), "not-on-geodesic");
    }

    #[test]
    fn corridor_cut_is_half_width() {
        let dom = DomainSpec::new("corridor", rect(0.0, 0.0, 6.0, 1.0), vec![], BTreeMap::new(), 0.05).unwrap();
        let g = discretize(&dom, 0.05).unwrap();
        let x = g.nearest_node(Point::new(0.1, 0.5));
        let y = g.nearest_node(Point::new(5.9, 0.5));
        let path = shortest_path(&g, WeightKind::Qh, x, y).unwrap();
        let z = *path
            .nodes
            .iter()
            .min_by(|&&a, &&b| {
                let da = (g.position(a).x - 3.0).abs() + (g.position(a).y - 0.5).abs();
                let db = (g.position(b).x - 3.0).abs() + (g.position(b).y - 0.5).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .unwrap();
        let s = bs_minimal_radius(&g, &path, z).unwrap();
        assert!((s.radius - 0.5).abs() <= g.h(), "radius {}", s.radius);
        assert_eq!(s.monotonicity_violations, 0);
    }

    #[test]
    fn bisection_matches_linear_scan_around_a_hole() {
        let hole = rect(0.35, 0.35, 0.65, 0.65).reversed();
        let dom = DomainSpec::new("ring", rect(0.0, 0.0, 1.0, 1.0), vec![hole], BTreeMap::new(), 0.05).unwrap();
        let g = discretize(&dom, 0.05).unwrap();
        let x = g.nearest_node(Point::new(0.1, 0.5));
        let y = g.nearest_node(Point::new(0.9, 0.5));
        let path = shortest_path(&g, WeightKind::Qh, x, y).unwrap();
        let z = path.nodes[path.nodes.len() / 2];
        let fast = bs_minimal_radius(&g, &path, z).unwrap().radius;
        // Linear scan over the candidate radii in increasing order.
        let zp = g.position(z);
        let mut radii: Vec<f64> = g.positions().iter().map(|p| p.dist(zp)).collect();
        radii.sort_by(f64::total_cmp);
        let mut sep = Separator::new(&g);
        let slow = radii.iter().copied().find(|&r| sep.separates(x, y, zp, r)).unwrap();
        assert_eq!(fast, slow);
        let far = g.position(x).dist(zp).max(g.position(y).dist(zp));
        assert!(fast <= far + g.h());
    }
}
