//! Bounded polygonal domains and their exact geometric queries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Segment, GEOM_EPS};

/// Segment count at which boundary queries switch from exhaustive scans to
/// the uniform-grid index.
pub const INDEX_THRESHOLD: usize = 10_000;

/// A bounded planar domain: the interior of `outer` minus the closed holes.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    name: String,
    outer: Polygon,
    holes: Vec<Polygon>,
    params: BTreeMap<String, f64>,
    suggested_h: f64,
    segments: Vec<Segment>,
    index: Option<SegmentGrid>,
    diameter: f64,
}

/// On-disk form of a domain. Coordinates are `[x, y]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDocument {
    pub name: String,
    pub outer: Vec<[f64; 2]>,
    #[serde(default)]
    pub holes: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub suggested_h: f64,
}

impl DomainSpec {
    /// Validates the polygon invariants (simplicity, orientation,
    /// containment, disjoint holes). Connectivity is checked separately by
    /// [`load_domain`] because it needs a discretization.
    pub fn new(
        name: impl Into<String>,
        outer: Polygon,
        holes: Vec<Polygon>,
        params: BTreeMap<String, f64>,
        suggested_h: f64,
    ) -> Result<Self> {
        let name = name.into();
        if outer.len() < 3 {
            return Err(Error::SelfIntersecting {
                polygon: "outer".into(),
            });
        }
        if !outer.vertices.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::Parse("non-finite outer coordinate".into()));
        }
        if !outer.is_simple() {
            return Err(Error::SelfIntersecting {
                polygon: "outer".into(),
            });
        }
        if !outer.is_ccw() {
            return Err(Error::Orientation {
                polygon: "outer".into(),
            });
        }
        for (i, hole) in holes.iter().enumerate() {
            let label = format!("hole[{i}]");
            if hole.len() < 3 || !hole.is_simple() {
                return Err(Error::SelfIntersecting { polygon: label });
            }
            if hole.is_ccw() {
                return Err(Error::Orientation { polygon: label });
            }
            let inside = hole.vertices.iter().all(|&v| outer.contains(v));
            if !inside || hole.intersects_polygon(&outer) {
                return Err(Error::HoleNotContained { polygon: label });
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                let overlap = holes[i].intersects_polygon(&holes[j])
                    || holes[j].vertices.iter().any(|&v| holes[i].contains(v))
                    || holes[i].vertices.iter().any(|&v| holes[j].contains(v));
                if overlap {
                    return Err(Error::HolesOverlap {
                        first: format!("hole[{i}]"),
                        second: format!("hole[{j}]"),
                    });
                }
            }
        }
        if !(suggested_h > 0.0 && suggested_h.is_finite()) {
            return Err(Error::InvalidParam {
                name: "suggested_h".into(),
                reason: "must be positive".into(),
            });
        }

        let mut segments: Vec<Segment> = outer.edges().collect();
        for hole in &holes {
            segments.extend(hole.edges());
        }
        let index = (segments.len() >= INDEX_THRESHOLD).then(|| SegmentGrid::build(&segments));
        let diameter = polygon_diameter(&outer);
        Ok(Self {
            name,
            outer,
            holes,
            params,
            suggested_h,
            segments,
            index,
            diameter,
        })
    }

    pub fn from_document(doc: &DomainDocument) -> Result<Self> {
        let poly = |pts: &[[f64; 2]]| Polygon::new(pts.iter().copied().map(Point::from).collect());
        Self::new(
            doc.name.clone(),
            poly(&doc.outer),
            doc.holes.iter().map(|h| poly(h)).collect(),
            doc.params.clone(),
            doc.suggested_h,
        )
    }

    pub fn to_document(&self) -> DomainDocument {
        let pts = |p: &Polygon| p.vertices.iter().map(|&v| v.into()).collect::<Vec<[f64; 2]>>();
        DomainDocument {
            name: self.name.clone(),
            outer: pts(&self.outer),
            holes: self.holes.iter().map(pts).collect(),
            params: self.params.clone(),
            suggested_h: self.suggested_h,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("domain document serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outer(&self) -> &Polygon {
        &self.outer
    }

    pub fn holes(&self) -> &[Polygon] {
        &self.holes
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn suggested_h(&self) -> f64 {
        self.suggested_h
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn vertex_count(&self) -> usize {
        self.outer.len() + self.holes.iter().map(Polygon::len).sum::<usize>()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bbox(&self) -> (Point, Point) {
        self.outer.bbox()
    }

    /// Exact Euclidean distance from `p` to the union of all boundary
    /// polygons. Defined everywhere; positive off the boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match &self.index {
            Some(grid) => grid.nearest(&self.segments, p),
            None => brute_force_distance(&self.segments, p),
        }
    }

    /// Point membership in the open region.
    pub fn contains_point(&self, p: Point) -> bool {
        self.outer.contains(p) && !self.holes.iter().any(|h| h.contains(p)) && self.boundary_distance(p) > GEOM_EPS
    }

    /// True iff the open segment `pq` lies in the region. Any contact with
    /// the boundary, including touching, reports `false`.
    pub fn contains_segment(&self, p: Point, q: Point) -> bool {
        let seg = Segment::new(p, q);
        let (lo, hi) = seg.bbox();
        let hit = |s: &Segment| {
            let (slo, shi) = s.bbox();
            if shi.x < lo.x - GEOM_EPS || slo.x > hi.x + GEOM_EPS || shi.y < lo.y - GEOM_EPS || slo.y > hi.y + GEOM_EPS
            {
                return false;
            }
            s.intersects(&seg)
        };
        let crosses = match &self.index {
            Some(grid) => grid.candidates(lo, hi).into_iter().any(|i| hit(&self.segments[i])),
            None => self.segments.iter().any(hit),
        };
        !crosses && self.contains_point((p + q) * 0.5)
    }
}

pub fn brute_force_distance(segments: &[Segment], p: Point) -> f64 {
    segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
}

fn polygon_diameter(poly: &Polygon) -> f64 {
    let v = &poly.vertices;
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            best = best.max(v[i].dist(v[j]));
        }
    }
    best
}

/// Parses a domain document and validates it, including connectivity of the
/// discretized region at the document's suggested resolution.
pub fn load_domain(text: &str) -> Result<DomainSpec> {
    let doc: DomainDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let dom = DomainSpec::from_document(&doc)?;
    check_connected(&dom)?;
    Ok(dom)
}

fn check_connected(dom: &DomainSpec) -> Result<()> {
    let h = dom.suggested_h();
    let graph = crate::graph::discretize(dom, h)?;
    if graph.dropped_components() > 0 {
        return Err(Error::Disconnected {
            components: graph.dropped_components() + 1,
            h,
        });
    }
    Ok(())
}

/// Uniform bucket grid over segment bounding boxes.
#[derive(Debug, Clone)]
struct SegmentGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentGrid {
    fn build(segments: &[Segment]) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in segments {
            let (a, b) = s.bbox();
            lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        let side = (segments.len() as f64).sqrt().ceil().max(1.0) as usize;
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(GEOM_EPS);
        let cell = span / side as f64;
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut grid = Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (i, s) in segments.iter().enumerate() {
            let (a, b) = s.bbox();
            let (i0, j0) = grid.cell_of(a);
            let (i1, j1) = grid.cell_of(b);
            for j in j0..=j1 {
                for ii in i0..=i1 {
                    grid.buckets[j * nx + ii].push(i as u32);
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor();
        let fy = ((p.y - self.origin.y) / self.cell).floor();
        (
            (fx.max(0.0) as usize).min(self.nx - 1),
            (fy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    fn candidates(&self, lo: Point, hi: Point) -> Vec<usize> {
        let (i0, j0) = self.cell_of(lo);
        let (i1, j1) = self.cell_of(hi);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend(self.buckets[j * self.nx + i].iter().map(|&s| s as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Ring search outward from the query cell; stops once the ring's
    /// minimum possible distance exceeds the best candidate.
    fn nearest(&self, segments: &[Segment], p: Point) -> f64 {
        let (ci, cj) = self.cell_of(p);
        // Distance from p to the grid rectangle; rings closer than this are empty.
        let gx = (self.origin.x - p.x)
            .max(p.x - (self.origin.x + self.nx as f64 * self.cell))
            .max(0.0);
        let gy = (self.origin.y - p.y)
            .max(p.y - (self.origin.y + self.ny as f64 * self.cell))
            .max(0.0);
        let outside = gx.hypot(gy);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let ring_min = outside.max((ring as f64 - 1.0) * self.cell);
            if ring_min > best {
                break;
            }
            let (i0, i1) = (ci as isize - ring as isize, ci as isize + ring as isize);
            let (j0, j1) = (cj as isize - ring as isize, cj as isize + ring as isize);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let on_ring = i == i0 || i == i1 || j == j0 || j == j1;
                    if !on_ring || i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                        continue;
                    }
                    for &s in &self.buckets[j as usize * self.nx + i as usize] {
                        best = best.min(segments[s as usize].distance_to(p));
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(lo: f64, hi: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(lo, lo),
            Point::new(hi, lo),
            Point::new(hi, hi),
            Point::new(lo, hi),
        ])
    }

    fn unit() -> DomainSpec {
        DomainSpec::new("unit", square(0.0, 1.0), vec![], BTreeMap::new(), 0.05).unwrap()
    }

    #[test]
    fn square_distances() {
        let d = unit();
        assert_eq!(d.boundary_distance(Point::new(0.5, 0.5)), 0.5);
        assert_eq!(d.boundary_distance(Point::new(0.5, 0.1)), 0.1);
        assert_eq!(d.boundary_distance(Point::new(1.0, 0.3)), 0.0);
        assert_eq!(d.boundary_distance(Point::new(1.5, 0.5)), 0.5);
    }

    #[test]
    fn tiny_hole_distance_matches_brute_force() {
        let s = 1e-3;
        let hole = square(-s, s).reversed();
        let d = DomainSpec::new("box", square(-10.0, 10.0), vec![hole], BTreeMap::new(), 0.1).unwrap();
        let p = Point::new(1.0, 0.0);
        // Nearest boundary point is on the hole's right edge x = s.
        let expected = d
            .segments()
            .iter()
            .map(|seg| seg.distance_to(p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(d.boundary_distance(p), expected);
        assert!((expected - (1.0 - s)).abs() < 1e-15);
    }

    #[test]
    fn segment_containment() {
        let d = unit();
        assert!(d.contains_segment(Point::new(0.2, 0.2), Point::new(0.8, 0.8)));
        assert!(!d.contains_segment(Point::new(0.5, 0.5), Point::new(1.5, 0.5)));
        assert!(
            !d.contains_segment(Point::new(0.5, 0.5), Point::new(1.0, 0.5)),
            "touching"
        );

        let hole = square(0.4, 0.6).reversed();
        let ring = DomainSpec::new("ring", square(0.0, 1.0), vec![hole], BTreeMap::new(), 0.05).unwrap();
        assert!(!ring.contains_segment(Point::new(0.2, 0.5), Point::new(0.8, 0.5)));
        assert!(ring.contains_segment(Point::new(0.2, 0.2), Point::new(0.8, 0.2)));
        // Segment lying entirely inside the hole.
        assert!(!ring.contains_segment(Point::new(0.45, 0.5), Point::new(0.55, 0.5)));
    }

    #[test]
    fn rejects_hole_crossing_outer() {
        let hole = square(0.8, 1.2).reversed();
        let err = DomainSpec::new("bad", square(0.0, 1.0), vec![hole], BTreeMap::new(), 0.05).unwrap_err();
        assert_eq!(err.code(), "hole-not-contained");
    }

    #[test]
    fn rejects_overlapping_holes() {
        let a = square(0.2, 0.5).reversed();
        let b = square(0.4, 0.7).reversed();
        let err = DomainSpec::new("bad", square(0.0, 1.0), vec![a, b], BTreeMap::new(), 0.05).unwrap_err();
        assert_eq!(err.code(), "holes-overlap");
    }

    #[test]
    fn rejects_wrong_orientation() {
        let err = DomainSpec::new("cw", square(0.0, 1.0).reversed(), vec![], BTreeMap::new(), 0.1).unwrap_err();
        assert_eq!(err.code(), "orientation");
    }

    #[test]
    fn grid_index_agrees_with_scan() {
        // 12k-gon forces the indexed path.
        let n = 12_000;
        let outer = Polygon::new(
            (0..n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    Point::new(t.cos(), t.sin())
                })
                .collect(),
        );
        let d = DomainSpec::new("fine-disk", outer, vec![], BTreeMap::new(), 0.1).unwrap();
        assert!(d.index.is_some());
        for k in 0..200 {
            let t = k as f64 * 0.731;
            let r = (k as f64 * 0.013) % 1.4;
            let p = Point::new(r * t.cos(), r * t.sin());
            assert_eq!(d.boundary_distance(p), brute_force_distance(d.segments(), p));
            let q = Point::new(0.9 * (t + 1.0).cos(), 0.9 * (t + 1.0).sin());
            if r < 0.95 {
                let scan =
                    !d.segments().iter().any(|s| s.intersects(&Segment::new(p, q))) && d.contains_point((p + q) * 0.5);
                assert_eq!(d.contains_segment(p, q), scan);
            }
        }
    }
}
