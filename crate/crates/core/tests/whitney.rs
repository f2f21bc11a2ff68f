use std::collections::BTreeMap;

use qhlab::deformation::{build_deformation, DeformationContext};
use qhlab::paths::local_ball;
use qhlab::sampling::stratified_nodes;
use qhlab::whitney::{build_cover, build_cover_with, regularity, shadow_overlap, verify_cover, TieBreak};
use qhlab::{corpus, discretize, MetricGraph, WeightKind};

fn disk(h: f64) -> MetricGraph {
    discretize(&corpus("disk", &BTreeMap::new()).unwrap(), h).unwrap()
}

fn ctx(g: &MetricGraph, eps: f64) -> DeformationContext<'_> {
    build_deformation(g, g.deepest_node(), eps).unwrap()
}

#[test]
fn disk_cover_is_exact_for_both_tie_breaks() {
    let g = disk(0.02);
    let c = ctx(&g, 0.02);
    for tb in [TieBreak::LowestId, TieBreak::HighestId] {
        let cover = build_cover_with(&c, tb).unwrap();
        let rep = verify_cover(&c, &cover, &[]).unwrap();
        assert_eq!(rep.disjointness_violations, 0);
        assert_eq!(rep.uncovered, 0);
        assert_eq!(rep.nodes, g.node_count());
        assert!(rep.exact_properties_hold(), "{tb:?}: {rep:?}");
    }
}

#[test]
fn cover_verified_by_brute_force() {
    let g = disk(0.05);
    let c = ctx(&g, 0.25);
    let cover = build_cover(&c).unwrap();
    let deformed = c.weighting(WeightKind::Deformed);
    // Oracle: recompute every ball's node set from scratch and check that
    // the union is everything and the fifth-radius cores are disjoint.
    let mut covered = vec![false; g.node_count()];
    let mut core_owner = vec![usize::MAX; g.node_count()];
    for (i, (&z, &r)) in cover.centers.iter().zip(&cover.radii).enumerate() {
        for (v, _) in local_ball(&g, &deformed, z, r) {
            covered[v] = true;
        }
        for (v, _) in local_ball(&g, &deformed, z, r / 5.0) {
            assert_eq!(
                core_owner[v],
                usize::MAX,
                "cores of balls {} and {i} meet",
                core_owner[v]
            );
            core_owner[v] = i;
        }
    }
    assert!(covered.iter().all(|&c| c));
}

#[test]
fn generations_partition_the_balls() {
    let g = disk(0.02);
    let c = ctx(&g, 0.25);
    let cover = build_cover(&c).unwrap();
    let rep = verify_cover(&c, &cover, &[]).unwrap();
    assert!(rep.generations > 1, "want several generations, got {}", rep.generations);
    assert_eq!(rep.generation_violations, 0);
    // Oracle: generation j holds exactly the balls with j <= k_eps(z0, z) < j + 1.
    for (i, &k) in cover.k_eps_base.iter().enumerate() {
        assert_eq!(cover.generation[i], k.floor() as usize);
    }
    let total: usize = (0..rep.generations)
        .map(|j| cover.generation.iter().filter(|&&gen| gen == j).count())
        .sum();
    assert_eq!(total, cover.centers.len());
}

#[test]
fn every_shadow_contains_its_own_ball() {
    let g = disk(0.04);
    let c = ctx(&g, 0.1);
    let cover = build_cover(&c).unwrap();
    assert_eq!(cover.shadow_self_misses, 0);
    // Oracle: x ∈ S(B) iff x lies in some ball B_i with B ∈ P(B_i).
    for (b, members) in cover.members.iter().enumerate() {
        assert!(
            cover.p_sets[b].contains(&b),
            "ball {b} missing from its own geodesic set"
        );
        for &x in members {
            let in_shadow = cover.shadow_of[b]
                .iter()
                .any(|&i| cover.members[i].binary_search(&x).is_ok());
            assert!(in_shadow, "node {x} of ball {b} outside its shadow");
        }
    }
    assert!(shadow_overlap(&cover) >= 1);
}

#[test]
fn deformed_measure_chains_hold_on_the_disk() {
    let g = disk(0.02);
    let c = ctx(&g, 0.05);
    let rep = regularity(&c, &stratified_nodes(&g, 42, 200), 42).unwrap();
    assert_eq!(rep.upper.violations, 0, "{:?}", rep.upper);
    assert_eq!(rep.lower.violations, 0, "{:?}", rep.lower);
    assert_eq!(rep.volume_growth.violations, 0, "{:?}", rep.volume_growth);
    assert!(rep.upper.checked > 100);
}

#[test]
#[ignore = "fifth-radius cores are below the grid spacing at desk resolution, so every node becomes a ball and N̂ grows like 1/h² (15, 63, 261 at h = 0.04, 0.02, 0.01)"]
fn overlap_constants_are_refinement_stable() {
    let counts: Vec<(u32, usize)> = [0.04, 0.02]
        .iter()
        .map(|&h| {
            let g = disk(h);
            let c = ctx(&g, 0.02);
            let rep = verify_cover(&c, &build_cover(&c).unwrap(), &[]).unwrap();
            (rep.n_hat, rep.c_o_hat)
        })
        .collect();
    assert!(counts[0].0.abs_diff(counts[1].0) <= 1, "{counts:?}");
    assert!(counts[0].1.abs_diff(counts[1].1) <= 1, "{counts:?}");
}
