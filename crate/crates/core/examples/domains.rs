//! Builds every corpus family, loads a hand-written polygon with a hole from
//! JSON, and discretizes each one at its suggested spacing.
//!
//! Run with `cargo run --example domains`.

use std::collections::BTreeMap;

use qhlab::corpus::FAMILIES;
use qhlab::{corpus, discretize, load_domain, Point};

const CUSTOM: &str = r#"{
  "name": "square-with-window",
  "outer": [[0, 0], [2, 0], [2, 2], [0, 2]],
  "holes": [[[0.8, 0.8], [0.8, 1.2], [1.2, 1.2], [1.2, 0.8]]],
  "suggested_h": 0.04
}"#;

fn main() -> qhlab::Result<()> {
    println!(
        "{:<16} {:>8} {:>8} {:>8} {:>10}",
        "family", "h", "nodes", "edges", "max d(x)"
    );
    for name in FAMILIES {
        let dom = corpus(name, &BTreeMap::new())?;
        let g = discretize(&dom, dom.suggested_h())?;
        let deepest = g.d(g.deepest_node());
        println!(
            "{name:<16} {:>8.3} {:>8} {:>8} {:>10.4}",
            g.h(),
            g.node_count(),
            g.edge_count(),
            deepest
        );
    }

    let dom = load_domain(CUSTOM)?;
    let p = Point::new(0.5, 0.5);
    println!(
        "\n{}: {} holes, contains {p:?}: {}, boundary distance {:.3}",
        dom.name(),
        dom.holes().len(),
        dom.contains_point(p),
        dom.boundary_distance(p)
    );
    let blocked = dom.contains_segment(Point::new(0.5, 1.0), Point::new(1.5, 1.0));
    println!("segment across the window stays inside: {blocked}");
    Ok(())
}
