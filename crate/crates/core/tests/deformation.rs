use std::collections::BTreeMap;
use std::f64::consts::E;

use qhlab::deformation::{
    back_deformation_check, build_deformation, check_distance_vs_rho, check_eps_diameter, check_harnack,
    check_keps_comparison, check_wb_inclusions, uniformity_constants, DeformationContext, KAPPA,
};
use qhlab::sampling::{stratified_nodes, stratified_pairs};
use qhlab::{corpus, discretize, MetricGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk(h: f64) -> MetricGraph {
    discretize(&corpus("disk", &BTreeMap::new()).unwrap(), h).unwrap()
}

fn ctx(g: &MetricGraph, eps: f64) -> DeformationContext<'_> {
    build_deformation(g, g.deepest_node(), eps).unwrap()
}

#[test]
fn deformed_distances_are_bounded_by_one_over_eps() {
    let g = disk(0.02);
    let c = ctx(&g, 0.05);
    let tol = 1.0 + KAPPA * g.h();
    let check = check_eps_diameter(&c);
    assert_eq!(check.violations, 0);
    assert!(check.extremum <= tol / 0.05);
    for (x, y) in stratified_pairs(&g, 42, 50) {
        let d = c.deformed_distance(x, y).unwrap();
        assert!(d <= 2.0 * tol / 0.05, "d_eps({x},{y}) = {d}");
    }
}

#[test]
fn harnack_on_ten_thousand_whitney_pairs() {
    let g = disk(0.02);
    let c = ctx(&g, 0.05);
    let a = 3.0 * (2.0 * 0.05f64).exp();
    assert_eq!(c.a(), a);
    // Independent oracle: draw x, then y uniformly among the nodes of the
    // open disk of radius d(x)/2 around x.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut drawn = 0;
    while drawn < 10_000 {
        let x = rng.gen_range(0..g.node_count());
        let p = g.position(x);
        let ball: Vec<usize> = (0..g.node_count())
            .filter(|&v| g.position(v).dist(p) < g.d(x) / 2.0)
            .collect();
        for _ in 0..20 {
            let y = ball[rng.gen_range(0..ball.len())];
            worst = worst.max(c.sigma()[x] / c.sigma()[y]);
            drawn += 1;
        }
    }
    assert!(worst < a, "max ratio {worst} vs A = {a}");
    let check = check_harnack(&c, &stratified_nodes(&g, 42, 200));
    assert_eq!(check.violations, 0);
    assert!(check.extremum >= worst.min(check.extremum) && check.extremum < a);
}

#[test]
fn deformed_uniformity_is_refinement_stable() {
    let d: Vec<f64> = [0.04, 0.02]
        .iter()
        .map(|&h| {
            let g = disk(h);
            let c = ctx(&g, 0.05);
            uniformity_constants(&c, &stratified_pairs(&g, 42, 200))
                .unwrap()
                .d_eps_hat
        })
        .collect();
    assert!((d[0] - d[1]).abs() / d[0] <= 0.10, "{d:?}");
}

#[test]
fn whitney_inclusions_hold_at_small_eps() {
    let g = disk(0.02);
    let c = ctx(&g, 0.02);
    let rep = check_wb_inclusions(&c, &stratified_nodes(&g, 42, 100));
    assert_eq!(rep.wb1.violations, 0, "{:?}", rep.wb1);
    assert_eq!(rep.wb2.violations, 0, "{:?}", rep.wb2);
    assert!(!rep.admissible);
}

#[test]
fn keps_upper_bound_and_positive_lower_constant() {
    let g = disk(0.02);
    let c = ctx(&g, 0.05);
    let check = check_keps_comparison(&c, &stratified_pairs(&g, 42, 100));
    assert_eq!(check.violations, 0);
    assert!(check.details["c_hat"] > 0.0);
}

#[test]
fn rho_lower_bound_everywhere_and_at_the_base_point() {
    let g = disk(0.02);
    let eps = 0.05;
    let c = ctx(&g, eps);
    let all: Vec<usize> = (0..g.node_count()).collect();
    assert_eq!(check_distance_vs_rho(&c, &all).lower.violations, 0);
    let w = c.w();
    assert_eq!(c.rho()[w], 1.0);
    assert!(1.0 / (eps * E) <= c.d_eps()[w] * (1.0 + KAPPA * g.h()));
}

#[test]
fn back_deformation_recovers_inner_metric() {
    let g = disk(0.02);
    let c = ctx(&g, 0.05);
    let rep = back_deformation_check(&c, &stratified_pairs(&g, 42, 100)).unwrap();
    assert_eq!(rep.edges.violations, 0, "{:?}", rep.edges);
    assert!(rep.paths.extremum <= 0.05, "{:?}", rep.paths);
}
