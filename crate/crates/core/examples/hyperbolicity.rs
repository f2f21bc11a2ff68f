//! Gromov hyperbolicity estimates on the disk and on combs with a growing
//! number of teeth: thin triangles, the four-point condition, and rough
//! starlikeness around the deepest node.

use std::collections::BTreeMap;

use qhlab::hyperbolicity::{delta_four_point, delta_thin, starlikeness_k};
use qhlab::sampling::{sample_nodes, sample_triples, SamplerConfig};
use qhlab::{corpus, discretize};

fn main() -> qhlab::Result<()> {
    let h = 0.04;
    let cfg = SamplerConfig::for_h(42, h);
    println!("{:<10} {:>10} {:>10} {:>8}", "domain", "delta", "delta_4", "K_hat");
    for n in [0.0, 2.0, 4.0, 8.0] {
        let (label, dom) = if n == 0.0 {
            ("disk".to_string(), corpus("disk", &BTreeMap::new())?)
        } else {
            let params = BTreeMap::from([("n".to_string(), n)]);
            (format!("comb n={n}"), corpus("comb", &params)?)
        };
        let g = discretize(&dom, h)?;
        let thin = delta_thin(&g, &sample_triples(&dom, &g, cfg, 30))?;
        let four = delta_four_point(&g, &sample_nodes(&dom, &g, cfg, 24))?;
        let star = starlikeness_k(&g, g.deepest_node(), None)?;
        println!("{label:<10} {:>10.4} {:>10.4} {:>8.3}", thin.delta, four, star.k_hat);
    }
    Ok(())
}
