//! Gehring-Hayman and ball-separation constants on three domains, plus the
//! geodesic-proximity ratio of the deformed disk.

use std::collections::BTreeMap;

use qhlab::conditions::{bs_constant, gh_constant, lemma41_probe};
use qhlab::deformation::build_deformation;
use qhlab::sampling::{sample_nodes, sample_pairs, SamplerConfig};
use qhlab::{corpus, discretize};

fn main() -> qhlab::Result<()> {
    let h = 0.04;
    let cfg = SamplerConfig::for_h(42, h);
    for name in ["disk", "square", "cusp"] {
        let dom = corpus(name, &BTreeMap::new())?;
        let g = discretize(&dom, h)?;
        let pairs = sample_pairs(&dom, &g, cfg, 60);
        let gh = gh_constant(&g, &pairs)?;
        let bs = bs_constant(&g, &pairs[..30])?;
        println!(
            "{name:<8} C_gh = {:.3}  C_bs = {:.3}  ({} brackets, {} monotonicity violations)",
            gh.c_gh_hat, bs.c_bs_hat, bs.brackets_checked, bs.monotonicity_violations
        );
    }

    let dom = corpus("disk", &BTreeMap::new())?;
    let g = discretize(&dom, h)?;
    let ctx = build_deformation(&g, g.deepest_node(), 0.05)?;
    let points = sample_nodes(&dom, &g, SamplerConfig { seed: 43, ..cfg }, 200);
    let report = lemma41_probe(&ctx, &points, &sample_pairs(&dom, &g, cfg, 200))?;
    println!(
        "disk M_hat = {:.3} over {} of {} samples",
        report.m_hat, report.kept, report.samples
    );
    Ok(())
}
