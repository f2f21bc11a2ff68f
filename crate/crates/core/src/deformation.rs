//! The ε-deformation `(X, d_ε, μ_ε)` on a graph and checks of the bounds it
//! is known to satisfy, plus the back-deformation by `ρ̃ = σ_ε⁻¹`.
//!
//! Every asserted inequality carries a discretization slack factor
//! `1 ± KAPPA·h`.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, WeightKind, GRID_STRETCH};
use crate::hyperbolicity::starlikeness_k;
use crate::paths::{
    dijkstra, distances_at, local_ball, shortest_path, shortest_path_with, GeodesicPath, Stop, Weighting,
};
pub use crate::report::Check;

pub const KAPPA: f64 = 8.0;
pub const EPS_CEILING: f64 = 0.25;
pub const DEFAULT_EPS: f64 = 0.05;
/// Largest relative gap allowed between back-deformed and inner distances.
pub const BACKDEF_PATH_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct DeformationContext<'g> {
    g: &'g MetricGraph,
    w: usize,
    eps: f64,
    k_w: Vec<f64>,
    rho: Vec<f64>,
    sigma: Vec<f64>,
    d_eps: Vec<f64>,
    inv_d_eps: Vec<f64>,
    k_hat: f64,
    d_eps_hat: Option<f64>,
}

/// Builds the deformation with base point `w`.
///
/// `d_ε(z)` is the deformed distance to the boundary-proximal nodes, each
/// seeded with `ρ_ε(p)/ε`. That offset is the deformed length of the
/// straight run from `p` to the boundary when `ρ_ε` decays like
/// `(d/d(p))^ε`, which is its continuum behavior near a flat boundary.
pub fn build_deformation(g: &MetricGraph, w: usize, eps: f64) -> Result<DeformationContext<'_>> {
    if !(eps > 0.0 && eps <= EPS_CEILING) {
        return Err(Error::EpsOutOfRange(eps, EPS_CEILING));
    }
    if w >= g.node_count() {
        return Err(Error::InvalidParam {
            name: "w".into(),
            reason: format!("node {w} is not in the graph"),
        });
    }
    let qh = Weighting::Qh { inv_d: g.inv_d() };
    let k_w = dijkstra(g, &qh, &[(w, 0.0)], Stop::Exhaust).dist;
    let rho: Vec<f64> = k_w.iter().map(|&k| (-eps * k).exp()).collect();
    let sigma: Vec<f64> = rho.iter().zip(g.inv_d()).map(|(r, i)| r * i).collect();
    let proximal = g.boundary_proximal();
    if proximal.is_empty() {
        return Err(Error::NoBoundaryNodes);
    }
    let seeds: Vec<(usize, f64)> = proximal.iter().map(|&p| (p, rho[p] / eps)).collect();
    let d_eps = dijkstra(g, &Weighting::Deformed { sigma: &sigma }, &seeds, Stop::Exhaust).dist;
    let inv_d_eps = d_eps.iter().map(|d| 1.0 / d).collect();
    let k_hat = starlikeness_k(g, w, None)?.k_hat;
    Ok(DeformationContext {
        g,
        w,
        eps,
        k_w,
        rho,
        sigma,
        d_eps,
        inv_d_eps,
        k_hat,
        d_eps_hat: None,
    })
}

impl<'g> DeformationContext<'g> {
    pub fn graph(&self) -> &'g MetricGraph {
        self.g
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn k_w(&self) -> &[f64] {
        &self.k_w
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `d_ε(z)`, the deformed distance to the boundary.
    pub fn d_eps(&self) -> &[f64] {
        &self.d_eps
    }

    pub fn k_hat(&self) -> f64 {
        self.k_hat
    }

    /// Harnack constant `3e^{2ε}`.
    pub fn a(&self) -> f64 {
        3.0 * (2.0 * self.eps).exp()
    }

    /// `max{3e^{2ε}, εe, (2e^{εK̂} − 1)/ε}`.
    pub fn c(&self) -> f64 {
        let e = self.eps;
        self.a().max(e * E).max((2.0 * (e * self.k_hat).exp() - 1.0) / e)
    }

    /// Quasiconvexity constant of the grid inner metric.
    pub fn d_const(&self) -> f64 {
        GRID_STRETCH
    }

    pub fn d_eps_hat(&self) -> Option<f64> {
        self.d_eps_hat
    }

    pub fn set_d_eps_hat(&mut self, value: f64) {
        self.d_eps_hat = Some(value);
    }

    /// `1 + κh`.
    pub fn slack(&self) -> f64 {
        1.0 + KAPPA * self.g.h()
    }

    /// Whether `ε ≤ min{ε₀, 1/(8D), 1/(2C²)}` with `ε₀ = 0.25`. Since
    /// `C ≥ 1/ε`, the last term is below `ε²/2` and this is never true; it is
    /// reported so that downstream results are read accordingly.
    pub fn admissible(&self) -> bool {
        let c = self.c();
        self.eps <= EPS_CEILING.min(1.0 / (8.0 * self.d_const())).min(1.0 / (2.0 * c * c))
    }

    pub fn weighting(&self, kind: WeightKind) -> Weighting<'_> {
        match kind {
            WeightKind::Inner => Weighting::Inner,
            WeightKind::Qh => Weighting::Qh { inv_d: self.g.inv_d() },
            WeightKind::Deformed => Weighting::Deformed { sigma: &self.sigma },
            WeightKind::BackDeformed => Weighting::BackDeformed { sigma: &self.sigma },
        }
    }

    /// Weighting of `k_ε`, the quasihyperbolic metric of `(X, d_ε)`.
    pub fn k_eps_weighting(&self) -> Weighting<'_> {
        Weighting::DeformedQh {
            sigma: &self.sigma,
            inv_d_eps: &self.inv_d_eps,
        }
    }

    pub fn deformed_distance(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.deformed_path(x, y)?.deformed.unwrap_or(0.0))
    }

    pub fn deformed_path(&self, x: usize, y: usize) -> Result<GeodesicPath> {
        let w = self.weighting(WeightKind::Deformed);
        shortest_path_with(self.g, WeightKind::Deformed, &w, Some(&self.sigma), x, y)
    }

    /// Quasihyperbolic geodesic carrying its deformed length as well.
    pub fn qh_path(&self, x: usize, y: usize) -> Result<GeodesicPath> {
        let w = self.weighting(WeightKind::Qh);
        shortest_path_with(self.g, WeightKind::Qh, &w, Some(&self.sigma), x, y)
    }

    pub fn k_eps(&self, x: usize, y: usize) -> f64 {
        let w = self.k_eps_weighting();
        dijkstra(self.g, &w, &[(x, 0.0)], Stop::Target(y)).dist[y]
    }

    /// Graph dump with the node fields appended as extra columns.
    pub fn to_dump(&self) -> String {
        self.g.dump_with_columns(&[
            ("k_w", &self.k_w),
            ("rho_eps", &self.rho),
            ("sigma_eps", &self.sigma),
            ("d_eps", &self.d_eps),
        ])
    }
}

/// `d_ε(w, x) ≤ 1/ε` for every node.
pub fn check_eps_diameter(ctx: &DeformationContext<'_>) -> Check {
    let w = ctx.weighting(WeightKind::Deformed);
    let field = dijkstra(ctx.g, &w, &[(ctx.w, 0.0)], Stop::Exhaust).dist;
    let bound = ctx.slack() / ctx.eps;
    let mut c = Check::new("eps-diameter", bound);
    c.checked = field.len();
    for &d in &field {
        c.extremum = c.extremum.max(d);
        if d > bound {
            c.violations += 1;
        }
    }
    c.detail("one_over_eps", 1.0 / ctx.eps)
}

/// Harnack inequality for `σ_ε` on `B_d(z, d(z)/2)` around each center.
/// The extreme ratio over all pairs of a ball is `max σ / min σ`, so every
/// pair of nodes in each ball is covered.
pub fn check_harnack(ctx: &DeformationContext<'_>, centers: &[usize]) -> Check {
    let g = ctx.g;
    let a = ctx.a();
    let per: Vec<(usize, f64)> = centers
        .par_iter()
        .map(|&z| {
            let p = g.position(z);
            let r = g.d(z) / 2.0;
            let ball: Vec<usize> = g
                .nodes_in_disk(p, r)
                .into_iter()
                .filter(|&v| g.position(v).dist(p) < r)
                .collect();
            let (lo, hi) = ball.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
                (lo.min(ctx.sigma[v]), hi.max(ctx.sigma[v]))
            });
            (ball.len() * ball.len(), hi / lo)
        })
        .collect();
    let mut c = Check::new("harnack", a * ctx.slack());
    for (pairs, ratio) in per {
        c.checked += pairs;
        c.extremum = c.extremum.max(ratio);
        if ratio > c.bound {
            c.violations += 1;
        }
    }
    c.detail("A", a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Uniformity {
    pub d_eps_hat: f64,
    pub quasiconvexity: f64,
    pub cigar: f64,
    pub pairs: usize,
}

/// Quasiconvexity and cigar ratios of quasihyperbolic geodesics in `d_ε`.
pub fn uniformity_constants(ctx: &DeformationContext<'_>, pairs: &[(usize, usize)]) -> Result<Uniformity> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("uniformity pairs"));
    }
    let per = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<(f64, f64)> {
            let path = ctx.qh_path(x, y)?;
            let dist = ctx.deformed_distance(x, y)?;
            let total = path.deformed.unwrap_or(0.0);
            let quasi = if dist > 0.0 { total / dist } else { 1.0 };
            Ok((quasi, cigar_ratio(ctx, &path.nodes)))
        })
        .collect::<Result<Vec<_>>>()?;
    let quasiconvexity = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let cigar = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(Uniformity {
        d_eps_hat: quasiconvexity.max(cigar),
        quasiconvexity,
        cigar,
        pairs: pairs.len(),
    })
}

/// `max_t min(ℓ_ε before t, ℓ_ε after t) / d_ε(t)` along a node path.
pub fn cigar_ratio(ctx: &DeformationContext<'_>, nodes: &[usize]) -> f64 {
    let w = ctx.weighting(WeightKind::Deformed);
    let mut prefix = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let len = ctx.g.edge_len(nodes[i - 1], nodes[i]).expect("adjacent");
        prefix[i] = prefix[i - 1] + w.weight(nodes[i - 1], nodes[i], len);
    }
    let total = prefix.last().copied().unwrap_or(0.0);
    nodes
        .iter()
        .zip(&prefix)
        .map(|(&t, &p)| p.min(total - p) / ctx.d_eps[t])
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WbReport {
    pub wb1: Check,
    pub wb2: Check,
    pub admissible: bool,
}

/// WB1: `B_ε(z, εd_ε(z)) ⊂ B_d(z, εC²d(z))`.
/// WB2: `B_d(z, εd(z)) ⊂ B_ε(z, εDC²d_ε(z))`.
pub fn check_wb_inclusions(ctx: &DeformationContext<'_>, centers: &[usize]) -> WbReport {
    let g = ctx.g;
    let (eps, c2, s) = (ctx.eps, ctx.c() * ctx.c(), ctx.slack());
    let deformed = ctx.weighting(WeightKind::Deformed);
    let per: Vec<(usize, f64, usize, f64)> = centers
        .par_iter()
        .map(|&z| {
            let p = g.position(z);
            let ball = local_ball(g, &deformed, z, eps * ctx.d_eps[z]);
            let reach = ball.iter().map(|&(v, _)| g.position(v).dist(p)).fold(0.0, f64::max);
            let r1 = reach / (eps * c2 * g.d(z));
            let r = eps * g.d(z);
            let disk: Vec<usize> = g
                .nodes_in_disk(p, r)
                .into_iter()
                .filter(|&v| g.position(v).dist(p) < r)
                .collect();
            let far = distances_at(g, &deformed, &[z], &disk).into_iter().fold(0.0, f64::max);
            let r2 = far / (eps * ctx.d_const() * c2 * ctx.d_eps[z]);
            (ball.len(), r1, disk.len(), r2)
        })
        .collect();
    let mut wb1 = Check::new("wb1", s);
    let mut wb2 = Check::new("wb2", s);
    for (n1, r1, n2, r2) in per {
        wb1.checked += n1;
        wb2.checked += n2;
        wb1.extremum = wb1.extremum.max(r1);
        wb2.extremum = wb2.extremum.max(r2);
        wb1.violations += usize::from(r1 >= s);
        wb2.violations += usize::from(r2 >= s);
    }
    WbReport {
        wb1: wb1.detail("C", ctx.c()),
        wb2: wb2.detail("C", ctx.c()).detail("D", ctx.d_const()),
        admissible: ctx.admissible(),
    }
}

/// `k_ε ≤ eεk` on each pair; the smallest `k_ε/(εk)` is recorded as the
/// estimate of the lower comparison constant.
pub fn check_keps_comparison(ctx: &DeformationContext<'_>, pairs: &[(usize, usize)]) -> Check {
    let per: Vec<(f64, f64)> = pairs
        .par_iter()
        .filter(|(x, y)| x != y)
        .map(|&(x, y)| {
            let k = dijkstra(ctx.g, &ctx.weighting(WeightKind::Qh), &[(x, 0.0)], Stop::Target(y)).dist[y];
            (ctx.k_eps(x, y), ctx.eps * k)
        })
        .collect();
    let mut c = Check::new("keps-upper", E * ctx.slack());
    let mut c_hat = f64::INFINITY;
    for (ke, ek) in per {
        c.checked += 1;
        let ratio = ke / ek;
        c.extremum = c.extremum.max(ratio);
        c_hat = c_hat.min(ratio);
        if ratio > c.bound {
            c.violations += 1;
        }
    }
    c.detail("c_hat", if c_hat.is_finite() { c_hat } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSandwich {
    pub lower: Check,
    pub upper: Check,
    /// Smallest `K` for which the upper bound holds at every checked node.
    pub k_required: f64,
}

/// `ρ_ε(x)/(εe) ≤ d_ε(x) ≤ ((2e^{εK̂} − 1)/ε) ρ_ε(x)` at each node of `nodes`.
pub fn check_distance_vs_rho(ctx: &DeformationContext<'_>, nodes: &[usize]) -> RhoSandwich {
    let eps = ctx.eps;
    let s = ctx.slack();
    let factor = (2.0 * (eps * ctx.k_hat).exp() - 1.0) / eps;
    let mut lower = Check::new("rho-lower", 1.0);
    let mut upper = Check::new("rho-upper", 1.0);
    let mut k_required = 0.0f64;
    for &x in nodes {
        let (rho, de) = (ctx.rho[x], ctx.d_eps[x]);
        let lo = rho / (eps * E) / (de * s);
        let hi = de / (factor * rho * s);
        lower.checked += 1;
        upper.checked += 1;
        lower.extremum = lower.extremum.max(lo);
        upper.extremum = upper.extremum.max(hi);
        lower.violations += usize::from(lo > 1.0);
        upper.violations += usize::from(hi > 1.0);
        let need = ((eps * de / (rho * s) + 1.0) / 2.0).ln() / eps;
        k_required = k_required.max(need);
    }
    RhoSandwich {
        lower,
        upper: upper.detail("K_hat", ctx.k_hat),
        k_required,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackDeformation {
    pub edges: Check,
    pub paths: Check,
}

/// Edge ratios of the back-deformed weight to the inner weight lie in
/// `[A⁻¹, A]`, and back-deformed distances stay within 5% of inner ones.
pub fn back_deformation_check(ctx: &DeformationContext<'_>, pairs: &[(usize, usize)]) -> Result<BackDeformation> {
    let (a, s) = (ctx.a(), ctx.slack());
    let back = ctx.weighting(WeightKind::BackDeformed);
    let mut edges = Check::new("backdef-edges", a * s);
    let mut lo = f64::INFINITY;
    for (i, j, len) in ctx.g.edges() {
        let ratio = back.weight(i, j, len) / len;
        edges.checked += 1;
        edges.extremum = edges.extremum.max(ratio);
        lo = lo.min(ratio);
        if ratio > a * s || ratio < (1.0 - KAPPA * ctx.g.h()) / a {
            edges.violations += 1;
        }
    }
    let per = pairs
        .par_iter()
        .filter(|(x, y)| x != y)
        .map(|&(x, y)| -> Result<f64> {
            let b = dijkstra(ctx.g, &back, &[(x, 0.0)], Stop::Target(y)).dist[y];
            let inner = shortest_path(ctx.g, WeightKind::Inner, x, y)?.inner;
            Ok((b - inner).abs() / inner)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut paths = Check::new("backdef-paths", BACKDEF_PATH_TOL);
    for dev in per {
        paths.checked += 1;
        paths.extremum = paths.extremum.max(dev);
        paths.violations += usize::from(dev > BACKDEF_PATH_TOL);
    }
    Ok(BackDeformation {
        edges: edges.detail("min_ratio", if lo.is_finite() { lo } else { 1.0 }),
        paths,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::corpus;
    use crate::geometry::Point;
    use crate::graph::discretize;

    fn disk(h: f64) -> MetricGraph {
        discretize(&corpus("disk", &BTreeMap::new()).unwrap(), h).unwrap()
    }

    #[test]
    fn base_point_fields() {
        let g = disk(0.05);
        let w = g.deepest_node();
        let ctx = build_deformation(&g, w, 0.05).unwrap();
        assert_eq!(ctx.rho()[w], 1.0);
        assert_eq!(ctx.sigma()[w], 1.0 / g.d(w));
        assert!(ctx
            .rho()
            .iter()
            .enumerate()
            .all(|(v, &r)| r > 0.0 && (r < 1.0 || v == w)));
        assert_eq!(ctx.a(), 3.0 * (0.1f64).exp());
        assert!(!ctx.admissible());
    }

    #[test]
    fn deformed_edge_weight_matches_field() {
        let g = disk(0.1);
        let ctx = build_deformation(&g, g.deepest_node(), 0.1).unwrap();
        let w = ctx.weighting(WeightKind::Deformed);
        for (a, b, len) in g.edges() {
            let expect = len * (ctx.sigma()[a] + ctx.sigma()[b]) / 2.0;
            assert!((w.weight(a, b, len) - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn eps_range_is_enforced() {
        let g = disk(0.1);
        for eps in [0.0, -0.1, 0.3, f64::NAN] {
            let err = build_deformation(&g, 0, eps).unwrap_err();
            assert_eq!(err.code(), "eps-out-of-range");
        }
    }

    #[test]
    fn half_plane_rho_matches_vertical_ray() {
        let p = [("L".to_string(), 10.0)].into_iter().collect();
        let g = discretize(&corpus("half-plane-box", &p).unwrap(), 0.04).unwrap();
        let w = g.nearest_node(Point::new(0.0, 1.0));
        let z = g.nearest_node(Point::new(0.0, E));
        let ctx = build_deformation(&g, w, 0.1).unwrap();
        let expect = (-0.1f64).exp();
        assert!((ctx.rho()[z] - expect).abs() <= 0.03 * expect, "rho = {}", ctx.rho()[z]);
    }

    #[test]
    fn constant_sigma_edge_is_inner_length() {
        let g = disk(0.1);
        let sigma = vec![2.5; g.node_count()];
        let w = Weighting::BackDeformed { sigma: &sigma };
        for (a, b, len) in g.edges().take(50) {
            assert!((w.weight(a, b, len) - len).abs() <= 1e-9 * len);
        }
    }

    #[test]
    fn cigar_of_single_node_is_zero() {
        let g = disk(0.1);
        let ctx = build_deformation(&g, g.deepest_node(), 0.05).unwrap();
        assert_eq!(cigar_ratio(&ctx, &[3]), 0.0);
        let (x, y) = g.edges().next().map(|(a, b, _)| (a, b)).unwrap();
        let u = uniformity_constants(&ctx, &[(x, y)]).unwrap();
        assert!((u.quasiconvexity - 1.0).abs() < 1e-12);
    }
}
