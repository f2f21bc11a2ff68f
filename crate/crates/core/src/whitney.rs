//! Whitney covering of `(X, d_ε)`, its shadows and generations, and the
//! measure-regularity checks.
//!
//! Ball `i` is `B_ε(z_i, r_i)` with `r_i = ε d_ε(z_i)/50`, taken as the set
//! of nodes at deformed distance `< r_i` from `z_i`.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::deformation::{Check, DeformationContext, KAPPA};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, WeightKind};
use crate::paths::{dijkstra, local_ball, Stop};
use crate::sampling::rng;

pub const WHITNEY_DIVISOR: f64 = 50.0;

/// Order among nodes with equal Whitney radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    LowestId,
    HighestId,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhitneyCover {
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
    /// Index of the base ball `B₀` among the selected balls.
    pub base: usize,
    /// Node ids of each ball, sorted.
    pub members: Vec<Vec<usize>>,
    /// `P(B_i)`: balls meeting the geodesic `[z₀, z_i]` under `k_ε`.
    pub p_sets: Vec<Vec<usize>>,
    /// For each ball `B`, the balls `B_i` with `B ∈ P(B_i)`; `S(B)` is their
    /// union.
    pub shadow_of: Vec<Vec<usize>>,
    pub shadow_sizes: Vec<usize>,
    /// `k_ε(z₀, z_i)`.
    pub k_eps_base: Vec<f64>,
    pub generation: Vec<usize>,
    /// Number of selected balls containing each node.
    pub multiplicity: Vec<u32>,
    /// Number of `5r_i` balls containing each node.
    pub multiplicity5: Vec<u32>,
    /// Whether each `5r_i` is below `d_ε(z_i)`, so `B_ε(z_i, 5r_i) ⊂ X`.
    pub inside: Vec<bool>,
    /// Per generation, the most shadows of that generation sharing a node.
    pub overlap_per_generation: Vec<usize>,
    /// Nodes of some ball missing from its own shadow.
    pub shadow_self_misses: usize,
    pub admissible: bool,
    pub tie_break: TieBreak,
}

pub fn whitney_radius(ctx: &DeformationContext<'_>, z: usize) -> f64 {
    ctx.eps() * ctx.d_eps()[z] / WHITNEY_DIVISOR
}

pub fn build_cover(ctx: &DeformationContext<'_>) -> Result<WhitneyCover> {
    build_cover_with(ctx, TieBreak::LowestId)
}

/// Greedy maximal selection in decreasing Whitney radius, followed by the
/// membership, geodesic, shadow and generation bookkeeping.
pub fn build_cover_with(ctx: &DeformationContext<'_>, tie_break: TieBreak) -> Result<WhitneyCover> {
    let g = ctx.graph();
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyInput("whitney graph"));
    }
    let deformed = ctx.weighting(WeightKind::Deformed);
    let r: Vec<f64> = (0..n).map(|z| whitney_radius(ctx, z)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ids = match tie_break {
            TieBreak::LowestId => a.cmp(&b),
            TieBreak::HighestId => b.cmp(&a),
        };
        r[b].total_cmp(&r[a]).then(ids)
    });
    let mut claimed = vec![false; n];
    let mut centers = Vec::new();
    for &z in &order {
        if claimed[z] {
            continue;
        }
        let core = local_ball(g, &deformed, z, r[z] / 5.0);
        if core.iter().any(|&(v, _)| claimed[v]) {
            continue;
        }
        for &(v, _) in &core {
            claimed[v] = true;
        }
        // A zero-radius core is empty as a node set; the center still
        // claims itself so that it is not selected twice.
        claimed[z] = true;
        centers.push(z);
    }
    let radii: Vec<f64> = centers.iter().map(|&z| r[z]).collect();
    let balls: Vec<(Vec<usize>, Vec<usize>)> = centers
        .par_iter()
        .zip(&radii)
        .map(|(&z, &ri)| {
            let mut own: Vec<usize> = local_ball(g, &deformed, z, ri).into_iter().map(|(v, _)| v).collect();
            if own.is_empty() {
                own.push(z);
            }
            let five = local_ball(g, &deformed, z, 5.0 * ri)
                .into_iter()
                .map(|(v, _)| v)
                .collect();
            (own, five)
        })
        .collect();
    let mut multiplicity = vec![0u32; n];
    let mut multiplicity5 = vec![0u32; n];
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (own, five)) in balls.iter().enumerate() {
        for &v in own {
            multiplicity[v] += 1;
            containing[v].push(i);
        }
        for &v in five {
            multiplicity5[v] += 1;
        }
    }
    let members: Vec<Vec<usize>> = balls.into_iter().map(|b| b.0).collect();
    let inside = centers
        .iter()
        .zip(&radii)
        .map(|(&z, &ri)| 5.0 * ri < ctx.d_eps()[z])
        .collect();

    // B₀: the selected center nearest to w in d_ε, lowest index on ties.
    let from_w = dijkstra(g, &deformed, &[(ctx.w(), 0.0)], Stop::Targets(&centers));
    let base = (0..centers.len())
        .min_by(|&a, &b| {
            from_w.dist[centers[a]]
                .total_cmp(&from_w.dist[centers[b]])
                .then(a.cmp(&b))
        })
        .expect("at least one ball");
    let z0 = centers[base];
    let tree = dijkstra(g, &ctx.k_eps_weighting(), &[(z0, 0.0)], Stop::Exhaust);
    let k_eps_base: Vec<f64> = centers.iter().map(|&z| tree.dist[z]).collect();
    let generation: Vec<usize> = k_eps_base.iter().map(|&k| k.floor() as usize).collect();
    let p_sets: Vec<Vec<usize>> = centers
        .par_iter()
        .map(|&z| {
            let path = tree.path_to(z).expect("connected graph");
            let mut p: Vec<usize> = path.iter().flat_map(|&v| containing[v].iter().copied()).collect();
            p.sort_unstable();
            p.dedup();
            p
        })
        .collect();
    let mut shadow_of: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (i, p) in p_sets.iter().enumerate() {
        for &b in p {
            shadow_of[b].push(i);
        }
    }

    // x ∈ S(B) iff B ∈ P(B_i) for some ball B_i containing x.
    let generations = generation.iter().copied().max().unwrap_or(0) + 1;
    let nballs = centers.len();
    let (shadow_sizes, overlap_per_generation) = (0..n)
        .into_par_iter()
        .fold(
            || (vec![0usize; nballs], vec![0usize; generations], Vec::new()),
            |(mut sizes, mut overlap, mut scratch), x| {
                scratch.clear();
                for &i in &containing[x] {
                    scratch.extend_from_slice(&p_sets[i]);
                }
                scratch.sort_unstable();
                scratch.dedup();
                let mut per_gen = vec![0usize; generations];
                for &b in scratch.iter() {
                    sizes[b] += 1;
                    per_gen[generation[b]] += 1;
                }
                for (o, c) in overlap.iter_mut().zip(per_gen) {
                    *o = (*o).max(c);
                }
                (sizes, overlap, scratch)
            },
        )
        .map(|(s, o, _)| (s, o))
        .reduce(
            || (vec![0usize; nballs], vec![0usize; generations]),
            |(mut s1, mut o1), (s2, o2)| {
                s1.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
                o1.iter_mut().zip(o2).for_each(|(a, b)| *a = (*a).max(b));
                (s1, o1)
            },
        );
    let shadow_self_misses = members
        .iter()
        .enumerate()
        .map(|(b, own)| {
            own.iter()
                .filter(|&&x| !containing[x].iter().any(|&i| p_sets[i].binary_search(&b).is_ok()))
                .count()
        })
        .sum();
    Ok(WhitneyCover {
        centers,
        radii,
        base,
        members,
        p_sets,
        shadow_of,
        shadow_sizes,
        k_eps_base,
        generation,
        multiplicity,
        multiplicity5,
        inside,
        overlap_per_generation,
        shadow_self_misses,
        admissible: ctx.admissible(),
        tie_break,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub balls: usize,
    pub nodes: usize,
    /// Pairs of selected balls whose fifth-radius cores share a node.
    pub disjointness_violations: usize,
    pub uncovered: usize,
    pub leaking_balls: usize,
    #[serde(rename = "N_hat")]
    pub n_hat: u32,
    pub generations: usize,
    pub generation_violations: usize,
    pub shadow_self_misses: usize,
    #[serde(rename = "C_o_hat")]
    pub c_o_hat: usize,
    pub overlap_per_generation: Vec<usize>,
    /// Extremes of `ℓ_ε(γ)/N_ε(x, y)` over admissible pairs; the empirical
    /// constant of the length-versus-ball-count property is `max(hi, 1/lo)`.
    pub length_per_ball: (f64, f64),
    #[serde(rename = "C_v_hat")]
    pub c_v_hat: f64,
    pub pairs_for_v: usize,
    pub admissible: bool,
}

impl CoverReport {
    /// Disjoint cores, coverage, balls inside the domain and the generation partition, all exact.
    pub fn exact_properties_hold(&self) -> bool {
        self.disjointness_violations == 0
            && self.uncovered == 0
            && self.leaking_balls == 0
            && self.generation_violations == 0
            && self.shadow_self_misses == 0
    }
}

/// Recomputes the fifth-radius cores independently and checks the cover.
pub fn verify_cover(
    ctx: &DeformationContext<'_>,
    cover: &WhitneyCover,
    pairs: &[(usize, usize)],
) -> Result<CoverReport> {
    let g = ctx.graph();
    let deformed = ctx.weighting(WeightKind::Deformed);
    let cores: Vec<Vec<usize>> = cover
        .centers
        .par_iter()
        .zip(&cover.radii)
        .map(|(&z, &ri)| {
            local_ball(g, &deformed, z, ri / 5.0)
                .into_iter()
                .map(|(v, _)| v)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut disjointness_violations = 0;
    for (i, core) in cores.iter().enumerate() {
        for &v in core {
            match owner[v] {
                Some(_) => disjointness_violations += 1,
                None => owner[v] = Some(i),
            }
        }
    }
    let uncovered = cover.multiplicity.iter().filter(|&&m| m == 0).count();
    let leaking_balls = cover.inside.iter().filter(|&&ok| !ok).count();
    let generations = cover.generation.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; generations];
    let mut generation_violations = 0;
    for (&k, &ke) in cover.generation.iter().zip(&cover.k_eps_base) {
        counts[k] += 1;
        if !((k as f64) <= ke && ke < k as f64 + 1.0) {
            generation_violations += 1;
        }
    }
    if counts.iter().sum::<usize>() != cover.centers.len() {
        generation_violations += 1;
    }
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
    for (i, own) in cover.members.iter().enumerate() {
        for &v in own {
            containing[v].push(i);
        }
    }
    let per = pairs
        .par_iter()
        .filter(|(x, y)| x != y)
        .map(|&(x, y)| -> Result<Option<f64>> {
            let dxy = ctx.deformed_distance(x, y)?;
            if dxy < ctx.d_eps()[x] / 2.0 {
                return Ok(None);
            }
            let path = ctx.qh_path(x, y)?;
            let mut hit: Vec<usize> = path.nodes.iter().flat_map(|&v| containing[v].iter().copied()).collect();
            hit.sort_unstable();
            hit.dedup();
            Ok(Some(path.deformed.unwrap_or(0.0) / hit.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = per.into_iter().flatten().collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let c_v_hat = if ratios.is_empty() { 0.0 } else { hi.max(1.0 / lo) };
    Ok(CoverReport {
        balls: cover.centers.len(),
        nodes: g.node_count(),
        disjointness_violations,
        uncovered,
        leaking_balls,
        n_hat: cover.multiplicity5.iter().copied().max().unwrap_or(0),
        generations,
        generation_violations,
        shadow_self_misses: cover.shadow_self_misses,
        c_o_hat: shadow_overlap(cover),
        overlap_per_generation: cover.overlap_per_generation.clone(),
        length_per_ball: if ratios.is_empty() { (0.0, 0.0) } else { (lo, hi) },
        c_v_hat,
        pairs_for_v: ratios.len(),
        admissible: cover.admissible,
    })
}

/// Largest number of same-generation shadows containing one node.
pub fn shadow_overlap(cover: &WhitneyCover) -> usize {
    cover.overlap_per_generation.iter().copied().max().unwrap_or(0)
}

/// Plain-text cover dump: one line per ball.
pub fn cover_dump(g: &MetricGraph, cover: &WhitneyCover) -> String {
    let mut s = String::new();
    writeln!(s, "qhlab-cover 1").unwrap();
    writeln!(s, "balls {} x y r generation shadow_size", cover.centers.len()).unwrap();
    for i in 0..cover.centers.len() {
        let p = g.position(cover.centers[i]);
        writeln!(
            s,
            "{:?} {:?} {:?} {} {}",
            p.x, p.y, cover.radii[i], cover.generation[i], cover.shadow_sizes[i]
        )
        .unwrap();
    }
    s
}

/// `μ(B(z, r))`: area measure of the closed Euclidean disk, `h²` per node.
pub fn mu_ball(g: &MetricGraph, z: usize, r: f64) -> Result<f64> {
    let min = 2.0 * g.h();
    if r < min {
        return Err(Error::RadiusTooSmall { r, min });
    }
    Ok(g.h() * g.h() * g.nodes_in_disk(g.position(z), r).len() as f64)
}

/// `μ_ε(B_ε(z, r)) = h² Σ σ_ε²` over the deformed ball. Rejected when the
/// ball's Euclidean size `r/σ_ε(z)` is below `2h`.
pub fn mu_eps_ball(ctx: &DeformationContext<'_>, z: usize, r: f64) -> Result<f64> {
    let g = ctx.graph();
    let sigma = ctx.sigma();
    let min = 2.0 * g.h() * sigma[z];
    if r < min {
        return Err(Error::RadiusTooSmall { r, min });
    }
    let ball = local_ball(g, &ctx.weighting(WeightKind::Deformed), z, r);
    Ok(g.h() * g.h() * ball.iter().map(|&(v, _)| sigma[v] * sigma[v]).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    #[serde(rename = "C_u_hat")]
    pub c_u_hat: f64,
    #[serde(rename = "C_w_hat")]
    pub c_w_hat: f64,
    pub upper: Check,
    pub lower: Check,
    pub volume_growth: Check,
    pub rejected: usize,
}

/// Measure regularity of `μ` and `μ_ε` around each center, one random
/// radius per center and test.
pub fn regularity(ctx: &DeformationContext<'_>, centers: &[usize], seed: u64) -> Result<RegularityReport> {
    if centers.is_empty() {
        return Err(Error::EmptyInput("regularity centers"));
    }
    let g = ctx.graph();
    let h = g.h();
    let min_r = 2.0 * h;
    let extent = {
        let ps = g.positions();
        let (mut lo, mut hi) = (ps[0], ps[0]);
        for p in ps {
            lo = crate::geometry::Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = crate::geometry::Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        lo.dist(hi).max(min_r)
    };
    let mut rng = rng(seed);
    let draws: Vec<[f64; 4]> = centers.iter().map(|_| rng.gen::<[f64; 4]>()).collect();
    let lerp = |lo: f64, hi: f64, t: f64| lo + (hi - lo) * t;

    // (a) and (b): ambient measure.
    let ambient: Vec<(f64, Option<f64>)> = centers
        .par_iter()
        .zip(&draws)
        .map(|(&z, t)| -> Result<(f64, Option<f64>)> {
            let r = lerp(min_r, extent, t[0]);
            let up = mu_ball(g, z, r)? / (r * r);
            let half = g.d(z) / 2.0;
            let w = if half >= min_r {
                let r = lerp(min_r, half, t[1]);
                let m = mu_ball(g, z, r)?;
                Some((r * r / m).max(m / (r * r)))
            } else {
                None
            };
            Ok((up, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let c_u_hat = ambient.iter().map(|a| a.0).fold(0.0, f64::max);
    let c_w_hat = ambient.iter().filter_map(|a| a.1).fold(1.0, f64::max);

    // (c): deformed measure on deformed Whitney-type balls.
    let a4 = ctx.a().powi(4);
    let dq = ctx.d_const().powi(2);
    let slack = KAPPA * h;
    let upper_c = a4 * c_u_hat;
    let lower_c = 1.0 / (a4 * dq * c_w_hat);
    let deformed: Vec<Option<(f64, f64)>> = centers
        .par_iter()
        .zip(&draws)
        .map(|(&z, t)| {
            let hi = ctx.eps() * ctx.d_eps()[z];
            let lo = 2.0 * h * ctx.sigma()[z];
            if hi < lo {
                return None;
            }
            let r = lerp(lo, hi, t[2]);
            mu_eps_ball(ctx, z, r).ok().map(|m| (r, m))
        })
        .collect();
    let mut upper = Check::new("mu-eps-upper", 1.0 + slack);
    let mut lower = Check::new("mu-eps-lower", 1.0 - slack);
    let mut rejected = 0;
    for item in &deformed {
        let Some((r, m)) = *item else {
            rejected += 1;
            continue;
        };
        let hi_ratio = m / (upper_c * r * r);
        let lo_ratio = m / (lower_c * r * r);
        upper.checked += 1;
        lower.checked += 1;
        upper.extremum = upper.extremum.max(hi_ratio);
        lower.extremum = if lower.checked == 1 {
            lo_ratio
        } else {
            lower.extremum.min(lo_ratio)
        };
        upper.violations += usize::from(hi_ratio > 1.0 + slack);
        lower.violations += usize::from(lo_ratio < 1.0 - slack);
    }

    // Volume growth of the back-deformation ρ̃ = 1/σ_ε, whose measure
    // h² Σ ρ̃² σ_ε² is plain node counting.
    let back = ctx.weighting(WeightKind::BackDeformed);
    let vg_c = c_u_hat * dq;
    let vg: Vec<(f64, usize)> = centers
        .par_iter()
        .zip(&draws)
        .map(|(&z, t)| {
            let r = lerp(min_r, extent, t[3]);
            (r, local_ball(g, &back, z, r).len())
        })
        .collect();
    let mut volume_growth = Check::new("vg-backdef", 1.0 + slack);
    for (r, count) in vg {
        let ratio = h * h * count as f64 / (vg_c * r * r);
        volume_growth.checked += 1;
        volume_growth.extremum = volume_growth.extremum.max(ratio);
        volume_growth.violations += usize::from(ratio > 1.0 + slack);
    }
    Ok(RegularityReport {
        c_u_hat,
        c_w_hat,
        upper: upper.detail("A4_C_u", upper_c),
        lower: lower.detail("inv_A4_D2_C_w", lower_c),
        volume_growth: volume_growth.detail("C_u_D2", vg_c),
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    use super::*;
    use crate::corpus::corpus;
    use crate::deformation::build_deformation;
    use crate::graph::discretize;

    #[test]
    fn tiny_graph_is_covered_by_one_ball() {
        let g = discretize(&corpus("square", &BTreeMap::new()).unwrap(), 0.24).unwrap();
        let ctx = build_deformation(&g, g.deepest_node(), 0.25).unwrap();
        let cover = build_cover(&ctx).unwrap();
        let rep = verify_cover(&ctx, &cover, &[]).unwrap();
        assert!(rep.exact_properties_hold());
        assert_eq!(rep.uncovered, 0);
    }

    #[test]
    fn cover_properties_and_reversed_ties() {
        let g = discretize(&corpus("disk", &BTreeMap::new()).unwrap(), 0.08).unwrap();
        let ctx = build_deformation(&g, g.deepest_node(), 0.05).unwrap();
        for tb in [TieBreak::LowestId, TieBreak::HighestId] {
            let cover = build_cover_with(&ctx, tb).unwrap();
            let rep = verify_cover(&ctx, &cover, &[]).unwrap();
            assert!(rep.exact_properties_hold(), "{rep:?}");
            assert!(rep.n_hat >= 1);
            // The shadow of every ball contains its own nodes.
            for (b, own) in cover.members.iter().enumerate() {
                assert!(cover.shadow_sizes[b] >= own.len());
            }
        }
    }

    #[test]
    fn deep_disk_measure_is_pi_r_squared() {
        let g = discretize(&corpus("disk", &BTreeMap::new()).unwrap(), 0.01).unwrap();
        let z = g.deepest_node();
        let r = g.d(z) / 2.0;
        let ratio = mu_ball(&g, z, r).unwrap() / (r * r);
        assert!((ratio - PI).abs() < 4.0 * g.h() / r * PI, "ratio {ratio}");
        assert_eq!(mu_ball(&g, z, g.h()).unwrap_err().code(), "radius-too-small");
    }
}
