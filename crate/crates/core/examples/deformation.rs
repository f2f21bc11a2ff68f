//! The exponential conformal deformation of the disk: its boundary proxy,
//! uniformity constants and the explicit inequality checks.

use std::collections::BTreeMap;

use qhlab::deformation::{
    back_deformation_check, build_deformation, check_distance_vs_rho, check_eps_diameter, check_harnack,
    check_keps_comparison, check_wb_inclusions, uniformity_constants,
};
use qhlab::sampling::{stratified_nodes, stratified_pairs};
use qhlab::{corpus, discretize};

fn main() -> qhlab::Result<()> {
    let g = discretize(&corpus("disk", &BTreeMap::new())?, 0.02)?;
    let ctx = build_deformation(&g, g.deepest_node(), 0.05)?;
    let centers = stratified_nodes(&g, 42, 200);
    let pairs = stratified_pairs(&g, 42, 200);

    let u = uniformity_constants(&ctx, &pairs)?;
    println!(
        "eps = {}, A = {:.3}, C = {:.3}, D_eps_hat = {:.4}, cigar = {:.3}",
        ctx.eps(),
        ctx.a(),
        ctx.c(),
        u.d_eps_hat,
        u.cigar
    );

    let all: Vec<usize> = (0..g.node_count()).collect();
    let wb = check_wb_inclusions(&ctx, &centers);
    let back = back_deformation_check(&ctx, &pairs)?;
    let checks = [
        check_eps_diameter(&ctx),
        check_harnack(&ctx, &centers),
        check_keps_comparison(&ctx, &pairs),
        check_distance_vs_rho(&ctx, &all).lower,
        wb.wb1,
        wb.wb2,
        back.edges,
        back.paths,
    ];
    for c in &checks {
        println!(
            "{:<14} {:>9} checked {:>3} violations  extremum {:.4} vs bound {:.4}",
            c.name, c.checked, c.violations, c.extremum, c.bound
        );
    }
    Ok(())
}
