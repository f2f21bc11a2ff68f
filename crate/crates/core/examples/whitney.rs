//! Greedy Whitney covering of the deformed disk, its exact invariants, and
//! the regularity of the deformed measure.

use std::collections::BTreeMap;

use qhlab::deformation::build_deformation;
use qhlab::sampling::stratified_nodes;
use qhlab::whitney::{build_cover, regularity, verify_cover};
use qhlab::{corpus, discretize};

fn main() -> qhlab::Result<()> {
    let g = discretize(&corpus("disk", &BTreeMap::new())?, 0.04)?;
    for eps in [0.05, 0.25] {
        let ctx = build_deformation(&g, g.deepest_node(), eps)?;
        let cover = build_cover(&ctx)?;
        let rep = verify_cover(&ctx, &cover, &[])?;
        println!(
            "eps = {eps}: {} balls over {} nodes, {} generations, N_hat = {}, C_o_hat = {}, exact properties hold: {}",
            rep.balls,
            rep.nodes,
            rep.generations,
            rep.n_hat,
            rep.c_o_hat,
            rep.exact_properties_hold()
        );
    }

    let ctx = build_deformation(&g, g.deepest_node(), 0.05)?;
    let reg = regularity(&ctx, &stratified_nodes(&g, 42, 100), 42)?;
    println!(
        "measure regularity: C_u_hat = {:.3}, C_w_hat = {:.3}, chain violations {} / {} / {}",
        reg.c_u_hat, reg.c_w_hat, reg.upper.violations, reg.lower.violations, reg.volume_growth.violations
    );
    Ok(())
}
