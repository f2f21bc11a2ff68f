//! Quasihyperbolic and inner distances on the half-plane box, compared with
//! the exact value `ln(b/a)` along a vertical ray, and the geodesic between
//! two points of the slit square.

use std::collections::BTreeMap;
use std::f64::consts::E;

use qhlab::{corpus, discretize, inner_distance, qh_distance, shortest_path, Point, WeightKind};

fn main() -> qhlab::Result<()> {
    let half_plane = corpus("half-plane-box", &BTreeMap::new())?;
    println!("k((0,1),(0,e)) on the half-plane box, exact value 1");
    for h in [0.08, 0.04, 0.02] {
        let g = discretize(&half_plane, h)?;
        let a = g.nearest_node(Point::new(0.0, 1.0));
        let b = g.nearest_node(Point::new(0.0, E));
        println!("  h = {h:<5} k = {:.5}", qh_distance(&g, a, b)?);
    }

    let slit = corpus("slit-square", &BTreeMap::new())?;
    let g = discretize(&slit, 0.02)?;
    let x = g.nearest_node(Point::new(0.25, 0.25));
    let y = g.nearest_node(Point::new(0.75, 0.25));
    let path = shortest_path(&g, WeightKind::Qh, x, y)?;
    let apex = path.nodes.iter().map(|&v| g.position(v).y).fold(f64::MIN, f64::max);
    println!(
        "\nslit square: k = {:.4}, inner = {:.4}, geodesic has {} nodes and climbs to y = {apex:.2}",
        qh_distance(&g, x, y)?,
        inner_distance(&g, x, y)?,
        path.nodes.len()
    );
    Ok(())
}
