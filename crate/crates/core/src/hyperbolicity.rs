//! Estimators for the Gromov hyperbolicity constant of `(Ω, k)` and for its
//! rough-starlikeness constant.
//!
//! All values are in quasihyperbolic units. They are lower estimates: a
//! finite graph and a finite sample can only witness fatness, never certify
//! thinness.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, WeightKind};
use crate::paths::{dijkstra, distance_field, distances_at, shortest_path, Stop, Weighting};
use crate::report::Check;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub delta_thin: f64,
    pub delta_four_point: f64,
    pub triples_sampled: usize,
    pub landmarks: usize,
    #[serde(rename = "K_hat")]
    pub k_hat: f64,
    pub base_point: usize,
    pub h: f64,
    pub worst_triple: Option<[usize; 3]>,
}

/// Thin-triangle estimate over a set of triples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinTriangles {
    pub delta: f64,
    pub per_triple: Vec<f64>,
    pub worst: Option<[usize; 3]>,
}

impl ThinTriangles {
    /// Combines two disjoint batches; the max is associative, so batches
    /// can be evaluated in any grouping.
    pub fn merge(mut self, other: ThinTriangles) -> ThinTriangles {
        if other.delta > self.delta {
            self.delta = other.delta;
            self.worst = other.worst;
        }
        self.per_triple.extend(other.per_triple);
        self
    }
}

/// Largest distance from a node of one side of the geodesic triangle
/// `(x, y, z)` to the union of the other two sides.
pub fn triple_delta(g: &MetricGraph, t: [usize; 3]) -> Result<f64> {
    let sides = [
        shortest_path(g, WeightKind::Qh, t[0], t[1])?.nodes,
        shortest_path(g, WeightKind::Qh, t[1], t[2])?.nodes,
        shortest_path(g, WeightKind::Qh, t[2], t[0])?.nodes,
    ];
    let w = Weighting::Qh { inv_d: g.inv_d() };
    let mut worst = 0.0f64;
    for i in 0..3 {
        let sources: Vec<usize> = sides
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, s)| s.iter().copied())
            .collect();
        let dist = distances_at(g, &w, &sources, &sides[i]);
        worst = dist.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// `δ` of the thin-triangle condition, maximized over `triples`.
pub fn delta_thin(g: &MetricGraph, triples: &[[usize; 3]]) -> Result<ThinTriangles> {
    if triples.is_empty() {
        return Err(Error::EmptyInput("delta_thin triples"));
    }
    let per_triple = triples
        .par_iter()
        .map(|&t| triple_delta(g, t))
        .collect::<Result<Vec<f64>>>()?;
    let mut delta = 0.0;
    let mut worst = None;
    for (t, &d) in triples.iter().zip(&per_triple) {
        if d > delta {
            delta = d;
            worst = Some(*t);
        }
    }
    Ok(ThinTriangles {
        delta,
        per_triple,
        worst,
    })
}

/// Quasihyperbolic distance matrix between landmarks, one truncated
/// single-source search per landmark. Each entry is the smaller of the two
/// directed floating-point sums, so the matrix is exactly symmetric and
/// independent of landmark order.
pub fn landmark_matrix(g: &MetricGraph, landmarks: &[usize]) -> Vec<Vec<f64>> {
    let w = Weighting::Qh { inv_d: g.inv_d() };
    let rows: Vec<Vec<f64>> = landmarks
        .par_iter()
        .map(|&l| distances_at(g, &w, &[l], landmarks))
        .collect();
    let n = landmarks.len();
    (0..n)
        .map(|i| (0..n).map(|j| rows[i][j].min(rows[j][i])).collect())
        .collect()
}

/// Symmetry and triangle-inequality checks on the directed quasihyperbolic
/// distances between `nodes`, over at most `max_triples` unordered triples
/// (in lexicographic order). Tolerances are `1e-9` relative to the
/// distances involved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAxioms {
    pub symmetry: Check,
    pub triangle: Check,
    pub triples: usize,
}

pub fn metric_axioms(g: &MetricGraph, nodes: &[usize], max_triples: usize) -> MetricAxioms {
    let w = Weighting::Qh { inv_d: g.inv_d() };
    let rows: Vec<Vec<f64>> = nodes.par_iter().map(|&l| distances_at(g, &w, &[l], nodes)).collect();
    let tol = |scale: f64| 1e-9 * scale.max(1.0);
    let n = nodes.len();
    let mut symmetry = Check::new("metric-symmetry", 1e-9);
    for (i, row) in rows.iter().enumerate() {
        for (j, other) in rows.iter().enumerate().skip(i + 1) {
            let gap = (row[j] - other[i]).abs();
            symmetry.checked += 1;
            symmetry.extremum = symmetry.extremum.max(gap);
            symmetry.violations += usize::from(gap > tol(row[j]));
        }
    }
    let mut triangle = Check::new("metric-triangle", 1e-9);
    'outer: for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if triangle.checked / 3 >= max_triples {
                    break 'outer;
                }
                for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                    let excess = rows[x][z] - rows[x][y] - rows[y][z];
                    triangle.checked += 1;
                    triangle.extremum = triangle.extremum.max(excess);
                    triangle.violations += usize::from(excess > tol(rows[x][z]));
                }
            }
        }
    }
    MetricAxioms {
        triples: triangle.checked / 3,
        symmetry,
        triangle,
    }
}

fn gromov(m: &[Vec<f64>], a: usize, b: usize, w: usize) -> f64 {
    0.5 * (m[a][w] + m[b][w] - m[a][b])
}

/// Smallest Gromov product over all landmark triples; nonnegative for any
/// metric.
pub fn min_gromov_product(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut lo = f64::INFINITY;
    for w in 0..n {
        for a in 0..n {
            for b in 0..n {
                lo = lo.min(gromov(m, a, b, w));
            }
        }
    }
    lo
}

/// Four-point defect `max min((x·y)_w, (y·z)_w) − (x·z)_w` over all landmark
/// quadruples of a distance matrix.
pub fn four_point_defect(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    (0..n)
        .into_par_iter()
        .map(|w| {
            let mut worst = 0.0f64;
            for x in 0..n {
                for y in 0..n {
                    let xy = gromov(m, x, y, w);
                    for z in 0..n {
                        let d = xy.min(gromov(m, y, z, w)) - gromov(m, x, z, w);
                        worst = worst.max(d);
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Four-point `δ` over landmark quadruples.
pub fn delta_four_point(g: &MetricGraph, landmarks: &[usize]) -> Result<f64> {
    if landmarks.len() < 4 {
        return Err(Error::TooFewLandmarks(landmarks.len()));
    }
    Ok(four_point_defect(&landmark_matrix(g, landmarks)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Starlikeness {
    #[serde(rename = "K_hat")]
    pub k_hat: f64,
    /// Node attaining `K_hat`.
    pub farthest: usize,
    /// Nodes lying on some approximate ray.
    pub ray_nodes: usize,
    pub ray_targets: usize,
}

/// Rough-starlikeness estimate with respect to `w`.
///
/// Approximate rays are the quasihyperbolic geodesics from `w` to the
/// boundary-proximal nodes, all read off one shortest-path tree. `K̂` is the
/// largest distance from a node of `probe` (every node if `None`) to the
/// union of the rays.
pub fn starlikeness_k(g: &MetricGraph, w: usize, probe: Option<&[usize]>) -> Result<Starlikeness> {
    let targets = g.boundary_proximal();
    if targets.is_empty() {
        return Err(Error::NoBoundaryNodes);
    }
    let qh = Weighting::Qh { inv_d: g.inv_d() };
    let tree = dijkstra(g, &qh, &[(w, 0.0)], Stop::Exhaust);
    let mut on_ray = vec![false; g.node_count()];
    for &t in &targets {
        let mut v = t;
        while !on_ray[v] {
            on_ray[v] = true;
            match tree.pred[v] {
                crate::paths::NO_PRED => break,
                p => v = p as usize,
            }
        }
    }
    let rays: Vec<usize> = (0..g.node_count()).filter(|&v| on_ray[v]).collect();
    let field = distance_field(g, &qh, &rays)?;
    let all: Vec<usize>;
    let probe = match probe {
        Some(p) => p,
        None => {
            all = (0..g.node_count()).collect();
            &all
        }
    };
    let mut k_hat = 0.0;
    let mut farthest = w;
    for &x in probe {
        if field[x] > k_hat {
            k_hat = field[x];
            farthest = x;
        }
    }
    Ok(Starlikeness {
        k_hat,
        farthest,
        ray_nodes: rays.len(),
        ray_targets: targets.len(),
    })
}
